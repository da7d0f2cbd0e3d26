//! Dolan–Moré performance profiles over per-(problem, variant) oracle
//! counts.

use std::collections::BTreeMap;

use crate::CliError;

/// The fixed evaluation grid for profile curves.
pub fn profile_grid() -> Vec<f64> {
    (0..=200).map(|i| i as f64 * 0.05).collect()
}

/// Profile table: per-problem counts and ratios plus the cumulative curves
/// `curve_v(x) = |{p : log2(count_{p,v} / min_p) <= x}| / |problems|`.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    pub variants: Vec<String>,
    /// Problems that had at least one finisher, in input order.
    pub problems: Vec<String>,
    /// `counts[p][v]`, `None` = did not finish.
    pub counts: Vec<Vec<Option<u64>>>,
    /// `ratios[p][v] = count / min over finishers`, `None` = did not finish.
    pub ratios: Vec<Vec<Option<f64>>>,
    pub xs: Vec<f64>,
    /// `curves[v][i]` over `xs`.
    pub curves: Vec<Vec<f64>>,
    /// Problems dropped because no variant finished.
    pub dropped: Vec<String>,
}

/// Build the profile from `(problem, variant, count-or-DNF)` rows. Problems
/// where no variant finishes are dropped (the ratios are undefined there)
/// and reported in `dropped`.
pub fn performance_profile(
    rows: &[(String, String, Option<u64>)],
) -> Result<ProfileTable, CliError> {
    if rows.is_empty() {
        return Err(CliError::EmptyInput);
    }
    let mut variants: Vec<String> = Vec::new();
    let mut problems: Vec<String> = Vec::new();
    let mut table: BTreeMap<(String, String), Option<u64>> = BTreeMap::new();
    for (p, v, c) in rows {
        if !variants.contains(v) {
            variants.push(v.clone());
        }
        if !problems.contains(p) {
            problems.push(p.clone());
        }
        table.insert((p.clone(), v.clone()), *c);
    }

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut counts: Vec<Vec<Option<u64>>> = Vec::new();
    let mut ratios: Vec<Vec<Option<f64>>> = Vec::new();
    for p in &problems {
        let row: Vec<Option<u64>> = variants
            .iter()
            .map(|v| table.get(&(p.clone(), v.clone())).copied().flatten())
            .collect();
        let best = row.iter().flatten().min().copied();
        match best {
            Some(best) => {
                let ratio_row = row
                    .iter()
                    .map(|c| c.map(|c| c as f64 / best as f64))
                    .collect();
                kept.push(p.clone());
                counts.push(row);
                ratios.push(ratio_row);
            }
            None => dropped.push(p.clone()),
        }
    }
    if kept.is_empty() {
        return Err(CliError::EmptyInput);
    }

    let xs = profile_grid();
    let total = kept.len() as f64;
    let curves = variants
        .iter()
        .enumerate()
        .map(|(vi, _)| {
            xs.iter()
                .map(|&x| {
                    let hits = ratios
                        .iter()
                        .filter(|row| matches!(row[vi], Some(r) if r.log2() <= x))
                        .count();
                    hits as f64 / total
                })
                .collect()
        })
        .collect();

    Ok(ProfileTable {
        variants,
        problems: kept,
        counts,
        ratios,
        xs,
        curves,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: &str, v: &str, c: Option<u64>) -> (String, String, Option<u64>) {
        (p.to_string(), v.to_string(), c)
    }

    #[test]
    fn two_variant_example() {
        let t = performance_profile(&[row("P", "A", Some(100)), row("P", "B", Some(200))])
            .unwrap();
        assert_eq!(t.ratios[0], vec![Some(1.0), Some(2.0)]);
        let at = |x: f64| t.xs.iter().position(|&g| (g - x).abs() < 1e-12).unwrap();
        assert_eq!(t.curves[0][at(0.0)], 1.0);
        assert_eq!(t.curves[1][at(0.0)], 0.0);
        assert_eq!(t.curves[1][at(1.0)], 1.0);
    }

    #[test]
    fn equal_counts_give_constant_one() {
        let rows = vec![
            row("P1", "A", Some(7)),
            row("P1", "B", Some(7)),
            row("P2", "A", Some(9)),
            row("P2", "B", Some(9)),
        ];
        let t = performance_profile(&rows).unwrap();
        for curve in &t.curves {
            assert!(curve.iter().all(|&y| y == 1.0));
        }
    }

    #[test]
    fn dnf_never_reaches_one() {
        let rows = vec![
            row("P1", "A", Some(10)),
            row("P1", "B", None),
            row("P2", "A", Some(10)),
            row("P2", "B", Some(10)),
        ];
        let t = performance_profile(&rows).unwrap();
        let b = &t.curves[1];
        assert!(b.iter().all(|&y| y < 1.0));
        assert_eq!(*b.last().unwrap(), 0.5);
    }

    #[test]
    fn curves_monotone_within_unit_interval() {
        let rows = vec![
            row("P1", "A", Some(3)),
            row("P1", "B", Some(11)),
            row("P2", "A", Some(90)),
            row("P2", "B", Some(10)),
            row("P3", "A", None),
            row("P3", "B", Some(4)),
        ];
        let t = performance_profile(&rows).unwrap();
        for curve in &t.curves {
            let mut prev = 0.0;
            for &y in curve {
                assert!((0.0..=1.0).contains(&y));
                assert!(y >= prev);
                prev = y;
            }
        }
        for rowr in &t.ratios {
            for r in rowr.iter().flatten() {
                assert!(*r >= 1.0);
            }
        }
    }

    #[test]
    fn no_finisher_dropped_with_footer() {
        let rows = vec![
            row("P1", "A", None),
            row("P1", "B", None),
            row("P2", "A", Some(5)),
            row("P2", "B", Some(6)),
        ];
        let t = performance_profile(&rows).unwrap();
        assert_eq!(t.dropped, vec!["P1".to_string()]);
        assert_eq!(t.problems, vec!["P2".to_string()]);
    }

    #[test]
    fn empty_input_errors() {
        assert!(matches!(
            performance_profile(&[]),
            Err(CliError::EmptyInput)
        ));
    }
}
