//! End-to-end checks of the `cnm` binary: exit codes, file emission, and
//! consistency between the artifacts.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn cnm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cnm"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cnm-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    d
}

#[test]
fn solve_reports_solution_on_rosenbrock() {
    let out = cnm()
        .args([
            "solve", "--method", "fo", "--problem", "rosenbrock", "--m", "2", "--eps", "1e-4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("termination  : solution_found"), "{text}");
}

#[test]
fn solve_rejects_unknown_problem_with_exit_2() {
    let out = cnm().args(["solve", "--problem", "nosuch"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8(out.stderr).unwrap().is_empty());
}

#[test]
fn bad_flags_exit_2() {
    let out = cnm().args(["solve", "--problem", "rosenbrock", "--m", "zero"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = cnm().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "clap usage errors exit 2");
}

#[test]
fn bench_emits_contracted_files() {
    let dir = tmp_dir("emit");
    let out = cnm()
        .args(["bench", "--methods", "fo", "--m", "1,n,2n", "-p", "beale,wood", "--trace"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("summary.tsv").is_file());
    assert!(dir.join("profile_fo.tsv").is_file());
    assert!(dir.join("bench_config.txt").is_file());
    assert!(dir.join("trace_beale_fo_m1.csv").is_file());
    assert!(dir.join("trace_wood_fo_m2n.csv").is_file());

    let summary = fs::read_to_string(dir.join("summary.tsv")).unwrap();
    assert!(summary.starts_with("problem\tmethod\tm\tsuccess\tmetric\tbest_F\ttermination"));
    assert_eq!(summary.lines().count(), 1 + 6);

    let profile = fs::read_to_string(dir.join("profile_fo.tsv")).unwrap();
    let mut lines = profile.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x\tcurve_fo_m1\tcurve_fo_mn\tcurve_fo_m2n"
    );
    // Fixed grid 0:0.05:10.
    assert_eq!(profile.lines().filter(|l| !l.starts_with('#')).count(), 1 + 201);

    let trace = fs::read_to_string(dir.join("trace_beale_fo_m1.csv")).unwrap();
    assert!(trace.starts_with("k,ell,t,sigma,h,f_evals,grad_evals,F,grad_residual,stationarity"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn summary_counts_match_trace_snapshots() {
    let dir = tmp_dir("consistency");
    let out = cnm()
        .args(["bench", "--methods", "fo", "--m", "1,n", "-p", "rosenbrock,beale", "--trace"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary = fs::read_to_string(dir.join("summary.tsv")).unwrap();
    for line in summary.lines().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        let (problem, method, m, success, metric) =
            (cols[0], cols[1], cols[2], cols[3], cols[4]);
        if success != "true" {
            continue;
        }
        // The first-order success event is the last trace row; its counter
        // snapshot must equal the reported metric exactly.
        let trace =
            fs::read_to_string(dir.join(format!("trace_{problem}_{method}_m{m}.csv"))).unwrap();
        let last = trace.lines().last().unwrap();
        let c: Vec<&str> = last.split(',').collect();
        let f_evals: u64 = c[5].parse().unwrap();
        let grad_evals: u64 = c[6].parse().unwrap();
        assert_eq!(
            (f_evals + grad_evals).to_string(),
            metric,
            "{problem} m={m}: summary metric vs trace snapshot"
        );
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn profile_matches_brute_force_recount_from_summary() {
    let dir = tmp_dir("recount");
    let out = cnm()
        .args(["bench", "--methods", "fo", "--m", "1,n,2n", "-p", "all"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());

    // Recount curves from summary.tsv.
    let summary = fs::read_to_string(dir.join("summary.tsv")).unwrap();
    let mut per_problem: Vec<(String, Vec<Option<u64>>)> = Vec::new();
    for line in summary.lines().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        let (problem, m, metric) = (cols[0], cols[2], cols[4]);
        let idx = match m {
            "1" => 0,
            "n" => 1,
            _ => 2,
        };
        if per_problem.last().map(|(p, _)| p.as_str()) != Some(problem) {
            per_problem.push((problem.to_string(), vec![None; 3]));
        }
        per_problem.last_mut().unwrap().1[idx] = metric.parse::<u64>().ok();
    }
    per_problem.retain(|(_, row)| row.iter().any(|c| c.is_some()));
    let total = per_problem.len() as f64;
    let recount = |variant: usize, x: f64| -> f64 {
        per_problem
            .iter()
            .filter(|(_, row)| {
                let best = row.iter().flatten().min().copied().unwrap() as f64;
                matches!(row[variant], Some(c) if (c as f64 / best).log2() <= x)
            })
            .count() as f64
            / total
    };

    let profile = fs::read_to_string(dir.join("profile_fo.tsv")).unwrap();
    for line in profile.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let cols: Vec<&str> = line.split('\t').collect();
        let x: f64 = cols[0].parse().unwrap();
        for v in 0..3 {
            let got: f64 = cols[1 + v].parse().unwrap();
            let want = recount(v, x);
            assert!(
                (got - want).abs() < 1e-12,
                "curve mismatch at x={x}, variant {v}: {got} vs {want}"
            );
        }
    }
    let _ = fs::remove_dir_all(&dir);
}
