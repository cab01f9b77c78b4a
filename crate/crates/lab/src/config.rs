use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use transport_lab::transport::SolverId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Harness {
    Solve,
    Commutator,
    #[value(name = "thmD")]
    #[serde(rename = "thmD")]
    ThmD,
    Osgood,
    Stability,
    Renormalize,
}

impl Harness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Harness::Solve => "solve",
            Harness::Commutator => "commutator",
            Harness::ThmD => "thmD",
            Harness::Osgood => "osgood",
            Harness::Stability => "stability",
            Harness::Renormalize => "renormalize",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Sl,
    Fv,
}

impl From<Solver> for SolverId {
    fn from(s: Solver) -> Self {
        match s {
            Solver::Sl => SolverId::Sl,
            Solver::Fv => SolverId::Fv,
        }
    }
}

/// Everything one `lab run` needs; echoed verbatim into the manifest.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ExperimentConfig {
    #[arg(long, value_enum)]
    pub harness: Harness,
    /// Catalog scenario (see `lab catalog`).
    #[arg(long)]
    pub scenario: Option<String>,
    /// Points per axis (power of two, >= 8). Defaults depend on the harness.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Time steps over the scenario horizon.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum, default_value = "sl")]
    pub solver: Solver,
    /// Mollification radii (commutator, renormalize), initial values eps0
    /// (osgood) or perturbation magnitudes (stability).
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Observation radii (commutator).
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    /// Exponent for L_p norms and energies.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Truncation level (renormalize) or the bound M (osgood).
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Pairs in the random suite (thmD, and the C0 fit used by osgood/stability).
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Driver for the comparison ODE: a scenario name or `constant`.
    #[arg(long)]
    pub driver: Option<String>,
    /// Pairing constant; fitted on the seeded suite when omitted.
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long, default_value = "lab-out")]
    pub out: PathBuf,
}
