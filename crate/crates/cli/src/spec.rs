//! Benchmark specification: which methods, lazy schedules, and problems to
//! run, under which protocol parameters.

use std::path::PathBuf;
use std::str::FromStr;

use cubic_newton::{catalog, synthetic_known_constants, CatalogEntry};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Fo,
    Zo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Fo => "fo",
            Method::Zo => "zo",
        }
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "fo" => Ok(Method::Fo),
            "zo" => Ok(Method::Zo),
            _ => Err(CliError::InvalidSpec("method must be fo or zo")),
        }
    }
}

/// A lazy-schedule choice, resolved against the problem dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MChoice {
    Fixed(usize),
    N,
    TwoN,
}

impl MChoice {
    pub fn resolve(&self, n: usize) -> usize {
        match self {
            MChoice::Fixed(k) => *k,
            MChoice::N => n,
            MChoice::TwoN => 2 * n,
        }
    }

    pub fn label(&self) -> String {
        match self {
            MChoice::Fixed(k) => k.to_string(),
            MChoice::N => "n".to_string(),
            MChoice::TwoN => "2n".to_string(),
        }
    }
}

impl FromStr for MChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "n" => Ok(MChoice::N),
            "2n" => Ok(MChoice::TwoN),
            t => t
                .parse::<usize>()
                .ok()
                .filter(|k| *k >= 1)
                .map(MChoice::Fixed)
                .ok_or(CliError::InvalidSpec(
                    "m entries must be positive integers, n, or 2n",
                )),
        }
    }
}

/// One benchmark sweep: methods x m-choices x problems under a shared
/// protocol (tau0, eps, oracle budget).
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub methods: Vec<Method>,
    pub m_choices: Vec<MChoice>,
    /// Problem names; `all` in the CLI expands to the full catalog.
    pub problems: Vec<String>,
    pub tau0: f64,
    pub eps: f64,
    pub budget: u64,
    /// Seed for synthetic problem names (`synthetic-<n>d`).
    pub seed: u64,
    pub output_dir: PathBuf,
    pub second_order: bool,
    /// Also write per-run trace CSVs.
    pub write_traces: bool,
    pub jobs: usize,
}

impl BenchmarkSpec {
    pub fn protocol_defaults(problems: Vec<String>, output_dir: PathBuf) -> Self {
        BenchmarkSpec {
            methods: vec![Method::Fo, Method::Zo],
            m_choices: vec![MChoice::Fixed(1), MChoice::N, MChoice::TwoN],
            problems,
            tau0: 1.0,
            eps: 1e-4,
            budget: 3000,
            seed: 0,
            output_dir,
            second_order: false,
            write_traces: false,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.methods.is_empty() {
            return Err(CliError::InvalidSpec("no methods selected"));
        }
        if self.m_choices.is_empty() {
            return Err(CliError::InvalidSpec("no m choices selected"));
        }
        if self.problems.is_empty() {
            return Err(CliError::InvalidSpec("no problems selected"));
        }
        if self.budget < 1 {
            return Err(CliError::InvalidSpec("budget must be at least 1"));
        }
        if !(self.tau0 > 0.0) || !(self.eps > 0.0) {
            return Err(CliError::InvalidSpec("tau0 and eps must be positive"));
        }
        if self.jobs < 1 {
            return Err(CliError::InvalidSpec("jobs must be at least 1"));
        }
        Ok(())
    }
}

/// All catalog problem names, in catalog order.
pub fn all_problem_names() -> Vec<String> {
    catalog().into_iter().map(|e| e.name).collect()
}

/// Resolve a problem name: the catalog by exact name, or a synthetic
/// instance `synthetic-<n>d` built from the spec seed.
pub fn resolve_problem(name: &str, seed: u64) -> Result<CatalogEntry, CliError> {
    if let Some(e) = cubic_newton::find_problem(name) {
        return Ok(e);
    }
    if let Some(rest) = name.strip_prefix("synthetic-") {
        if let Some(dim) = rest.strip_suffix('d').and_then(|d| d.parse::<usize>().ok()) {
            if dim >= 1 {
                return Ok(synthetic_known_constants(seed, dim));
            }
        }
    }
    Err(CliError::UnknownProblem(name.to_string()))
}

/// Parse a comma-separated list with a dedicated item parser.
pub fn parse_list<T: FromStr<Err = CliError>>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_methods_and_m() {
        assert_eq!(parse_list::<Method>("fo,zo").unwrap(), vec![Method::Fo, Method::Zo]);
        assert_eq!(
            parse_list::<MChoice>("1,n,2n,5").unwrap(),
            vec![
                MChoice::Fixed(1),
                MChoice::N,
                MChoice::TwoN,
                MChoice::Fixed(5)
            ]
        );
        assert!(parse_list::<MChoice>("0").is_err());
        assert!(parse_list::<Method>("so").is_err());
        assert_eq!(MChoice::TwoN.resolve(7), 14);
        assert_eq!(MChoice::N.resolve(7), 7);
    }

    #[test]
    fn resolves_problems() {
        assert!(resolve_problem("rosenbrock", 0).is_ok());
        let synth = resolve_problem("synthetic-3d", 42).unwrap();
        assert_eq!(synth.dim, 3);
        assert!(matches!(
            resolve_problem("nosuch", 0),
            Err(CliError::UnknownProblem(_))
        ));
    }

    #[test]
    fn validates_spec() {
        let mut s = BenchmarkSpec::protocol_defaults(vec!["rosenbrock".into()], "/tmp/x".into());
        assert!(s.validate().is_ok());
        s.methods.clear();
        assert!(s.validate().is_err());
    }
}
