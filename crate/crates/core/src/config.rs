//! TOML run configuration shared by the command-line subcommands.
//!
//! ```toml
//! case = "example2"
//! order = 2
//! mesh_sizes = [4, 8, 16]
//! T = 1.0
//! dt = "tied_to_N"          # or a number, e.g. dt = 0.01
//! law = [[0.0, 1.0], [1.0, 1.0]]
//! nonlinear_tol = 1e-6
//! max_nonlinear_iters = 50
//! linear_tol = 1e-12
//! linearization = "picard"  # or "newton"
//! damping = 1.0
//! q_list = [4.0]
//! parallel = true
//!
//! [output]
//! path = "table.csv"
//! format = "csv"            # or "markdown"
//! ```
//!
//! Every key except `case` and `mesh_sizes` is optional; the values above are the
//! defaults apart from `q_list` (empty), `output` (stdout, csv) and `law` (which
//! defaults to `g(s) = 1 + s`).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cases::{case_by_name, ManufacturedCase};
use crate::error::{Error, Result};
use crate::law::GeneralizedPolynomial;
use crate::solver::{Linearization, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

/// Time step choice: `dt = T/N` for each mesh, or one fixed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    TiedToN,
    Fixed(f64),
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawDt {
    Fixed(f64),
    Policy(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    case: Option<String>,
    law: Option<Vec<(f64, f64)>>,
    order: Option<usize>,
    mesh_sizes: Option<Vec<usize>>,
    #[serde(rename = "T")]
    t_final: Option<f64>,
    dt: Option<RawDt>,
    nonlinear_tol: Option<f64>,
    max_nonlinear_iters: Option<usize>,
    linear_tol: Option<f64>,
    linearization: Option<Linearization>,
    damping: Option<f64>,
    q_list: Option<Vec<f64>>,
    parallel: Option<bool>,
    output: Option<OutputConfig>,
}

#[derive(Debug, Clone)]
pub struct RunConfiguration {
    pub law: GeneralizedPolynomial,
    pub case_name: String,
    pub order: usize,
    pub mesh_sizes: Vec<usize>,
    pub t_final: f64,
    pub dt_policy: DtPolicy,
    pub nonlinear_tol: f64,
    pub max_nonlinear_iters: usize,
    pub linear_tol: f64,
    pub linearization: Linearization,
    pub damping: f64,
    pub q_list: Vec<f64>,
    pub parallel: bool,
    pub output: OutputConfig,
}

fn field_error(field: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {why}"))
}

fn law_of(pairs: Option<Vec<(f64, f64)>>) -> Result<GeneralizedPolynomial> {
    match pairs {
        Some(pairs) => GeneralizedPolynomial::new(&pairs).map_err(|e| field_error("law", e)),
        None => Ok(GeneralizedPolynomial::forchheimer_two_term()),
    }
}

impl RunConfiguration {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    /// Reads only `law` and `[output]`; the `verify` command needs nothing else,
    /// so `case` and `mesh_sizes` may be omitted.
    pub fn law_settings_from_path(path: &Path) -> Result<(GeneralizedPolynomial, OutputConfig)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        Ok((law_of(raw.law)?, raw.output.unwrap_or_default()))
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let law = law_of(raw.law)?;
        let dt_policy = match raw.dt {
            None => DtPolicy::TiedToN,
            Some(RawDt::Policy(p)) if p.eq_ignore_ascii_case("tied_to_n") => DtPolicy::TiedToN,
            Some(RawDt::Policy(p)) => return Err(field_error("dt", format!("unknown policy '{p}' (use \"tied_to_N\" or a number)"))),
            Some(RawDt::Fixed(dt)) => DtPolicy::Fixed(dt),
        };
        let config = Self {
            law,
            case_name: raw.case.ok_or_else(|| field_error("case", "missing"))?,
            order: raw.order.unwrap_or(2),
            mesh_sizes: raw.mesh_sizes.ok_or_else(|| field_error("mesh_sizes", "missing"))?,
            t_final: raw.t_final.unwrap_or(1.0),
            dt_policy,
            nonlinear_tol: raw.nonlinear_tol.unwrap_or(1e-6),
            max_nonlinear_iters: raw.max_nonlinear_iters.unwrap_or(50),
            linear_tol: raw.linear_tol.unwrap_or(1e-12),
            linearization: raw.linearization.unwrap_or_default(),
            damping: raw.damping.unwrap_or(1.0),
            q_list: raw.q_list.unwrap_or_default(),
            parallel: raw.parallel.unwrap_or(true),
            output: raw.output.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks every field; the error message starts with the offending key.
    pub fn validate(&self) -> Result<()> {
        case_by_name(&self.case_name).map_err(|e| field_error("case", e))?;
        if !(1..=2).contains(&self.order) {
            return Err(field_error("order", format!("must be 1 or 2 (got {})", self.order)));
        }
        if self.mesh_sizes.is_empty() {
            return Err(field_error("mesh_sizes", "must list at least one N"));
        }
        if self.mesh_sizes.contains(&0) {
            return Err(field_error("mesh_sizes", "N must be at least 1"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(field_error("T", "must be positive and finite"));
        }
        if let DtPolicy::Fixed(dt) = self.dt_policy {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(field_error("dt", format!("must be positive (got {dt})")));
            }
        }
        for n in &self.mesh_sizes {
            self.solver_config(*n).validate()?;
        }
        Ok(())
    }

    /// Requires `mesh_sizes` ascending with each entry double the previous.
    pub fn require_doubling(&self) -> Result<()> {
        for pair in self.mesh_sizes.windows(2) {
            if pair[1] != 2 * pair[0] {
                return Err(field_error(
                    "mesh_sizes",
                    format!("must double from one entry to the next (got {} after {})", pair[1], pair[0]),
                ));
            }
        }
        Ok(())
    }

    pub fn case(&self) -> Result<ManufacturedCase> {
        case_by_name(&self.case_name)
    }

    pub fn dt_for(&self, n: usize) -> f64 {
        match self.dt_policy {
            DtPolicy::TiedToN => self.t_final / n as f64,
            DtPolicy::Fixed(dt) => dt,
        }
    }

    pub fn solver_config(&self, n: usize) -> SolverConfig {
        SolverConfig {
            dt: self.dt_for(n),
            t_final: self.t_final,
            nonlinear_tol: self.nonlinear_tol,
            max_nonlinear_iters: self.max_nonlinear_iters,
            linear_tol: self.linear_tol,
            linearization: self.linearization,
            damping: self.damping,
            monitor_q: self.q_list.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message(text: &str) -> String {
        match RunConfiguration::from_toml(text) {
            Err(Error::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults() {
        let c = RunConfiguration::from_toml("case = \"example2\"\nmesh_sizes = [4, 8]\n").unwrap();
        assert_eq!(c.order, 2);
        assert_eq!(c.dt_policy, DtPolicy::TiedToN);
        assert_eq!(c.dt_for(8), 0.125);
        assert_eq!(c.linearization, Linearization::Picard);
        assert_eq!(c.law, GeneralizedPolynomial::forchheimer_two_term());
        assert_eq!(c.output.format, None);
        c.require_doubling().unwrap();
    }

    #[test]
    fn full_file() {
        let c = RunConfiguration::from_toml(
            r#"
case = "example1"
order = 1
mesh_sizes = [2]
T = 0.5
dt = 0.05
law = [[0, 1], [0.5, 2], [1, 1]]
linearization = "newton"
q_list = [3.0, 4.0]
[output]
path = "x.md"
format = "markdown"
"#,
        )
        .unwrap();
        assert_eq!(c.dt_policy, DtPolicy::Fixed(0.05));
        assert_eq!(c.law.terms().len(), 3);
        assert_eq!(c.linearization, Linearization::Newton);
        assert_eq!(c.output.format, Some(OutputFormat::Markdown));
        assert_eq!(c.solver_config(2).monitor_q, vec![3.0, 4.0]);
    }

    #[test]
    fn errors_name_the_field() {
        let base = "case = \"example2\"\nmesh_sizes = [4]\n";
        assert!(message(&format!("{base}dt = -0.1\n")).starts_with("dt"));
        assert!(message(&format!("{base}dt = \"weekly\"\n")).starts_with("dt"));
        assert!(message(&format!("{base}order = 3\n")).starts_with("order"));
        assert!(message(&format!("{base}law = [[0, 0], [1, 1]]\n")).starts_with("law"));
        assert!(message(&format!("{base}damping = 2.0\n")).starts_with("damping"));
        assert!(message(&format!("{base}q_list = [0.5]\n")).starts_with("q_list"));
        assert!(message("case = \"nope\"\nmesh_sizes = [4]\n").starts_with("case"));
        assert!(message("case = \"example2\"\n").starts_with("mesh_sizes"));
        assert!(message(&format!("{base}bogus = 1\n")).contains("bogus"));
        let c = RunConfiguration::from_toml("case = \"example2\"\nmesh_sizes = [4, 6]\n").unwrap();
        assert!(matches!(c.require_doubling(), Err(Error::Config(m)) if m.starts_with("mesh_sizes")));
    }
}
