use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid harmonic index (l={l}, m={m})")]
    InvalidIndex { l: usize, m: i64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("expansion truncated at l_max={l_max}: tail energy {tail:.3e} exceeds {tolerance:.1e}")]
    Truncation { l_max: usize, tail: f64, tolerance: f64 },

    #[error("degenerate quadrature segment [{lo}, {hi}]")]
    DegenerateSegment { lo: f64, hi: f64 },

    #[error("invalid quadrature grid: {0}")]
    Grid(String),

    #[error("quadrature order {order} too low for l_max={l_max}: identity defect {defect:.3e}")]
    QuadratureOrder { order: usize, l_max: usize, defect: f64 },

    #[error("linear solve failed in m={m} block (condition estimate {condition:.3e})")]
    Solver { m: i64, condition: f64 },

    #[error("effective aperture collapsed: shrink {delta_theta:.4} rad >= half-aperture {theta_m:.4} rad")]
    ApertureCollapse { theta_m: f64, delta_theta: f64 },

    #[error("resonance factor singular: 1 - rho1*rho2 = {gap:.3e} at a resonant phase")]
    Singular { gap: f64 },

    #[error("principal value integral did not converge: error estimate {estimate:.3e} > {tolerance:.1e}")]
    NoConvergence { estimate: f64, tolerance: f64 },

    #[error("{}", format_violations(.0))]
    Config(Vec<ConfigViolation>),

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("table/plot mismatch: {0}")]
    Columns(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation { .. }
                | Error::QuadratureOrder { .. }
                | Error::Solver { .. }
                | Error::ApertureCollapse { .. }
                | Error::Singular { .. }
                | Error::NoConvergence { .. }
                | Error::Domain(_)
        )
    }
}

/// One failed validation rule of a scenario config.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigViolation {
    pub field: String,
    pub constraint: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

fn format_violations(v: &[ConfigViolation]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("invalid config ({} violation(s)): {}", v.len(), items.join("; "))
}

/// Non-fatal diagnostics attached to results. Strict mode turns them into failures.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    Truncation { l_max: usize, tail: f64 },
    RayValidity { kr: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Truncation { l_max, tail } => {
                write!(f, "harmonic tail energy {tail:.3e} at l_max={l_max}")
            }
            Warning::RayValidity { kr } => {
                write!(f, "kr={kr:.1} is outside the ray-model validity region (kr <= 100)")
            }
        }
    }
}
