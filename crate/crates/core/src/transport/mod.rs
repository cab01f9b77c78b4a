//! Solvers for `u_t + b . grad u = 0` on the periodic grid, plus the
//! verification harnesses built on their traces.

mod cutoff;
mod harness;
mod semilagrangian;
mod truncate;
mod upwind;

use std::borrow::Cow;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fields::{ensure_same_grid, Grid, ScalarField, VectorField};

pub use cutoff::{make_cutoffs, make_cutoffs_at, CutoffFamily, CUTOFF_GRADIENT_BOUND};
pub use harness::{
    localized_energy_residual, moser_identity_residual, observed_order, renormalization_residual,
    test_family, LocalizedEnergyReport, MoserMonitor, MoserReport, RenormalizationReport, TemporalProfile,
    TestFunction,
};
pub use semilagrangian::{advect_semilagrangian, stream_semilagrangian};
pub use truncate::{truncate, truncate_derivative, TruncationSpec};
pub use upwind::{advect_upwind_fv, max_stable_dt, stream_upwind_fv};

/// A velocity field sampled in time. Solvers query it at step midpoints.
pub trait Velocity: Sync {
    fn grid(&self) -> &Grid;

    fn sample(&self, t: f64) -> Cow<'_, VectorField>;

    /// Pointwise divergence at time `t`; defaults to centered differences.
    fn divergence(&self, t: f64) -> Cow<'_, ScalarField> {
        Cow::Owned(centered_divergence(&self.sample(t)))
    }

    /// Steady fields let solvers reuse per-step work.
    fn is_steady(&self) -> bool {
        false
    }
}

impl Velocity for VectorField {
    fn grid(&self) -> &Grid {
        VectorField::grid(self)
    }

    fn sample(&self, _t: f64) -> Cow<'_, VectorField> {
        Cow::Borrowed(self)
    }

    fn is_steady(&self) -> bool {
        true
    }
}

/// A time-independent field bundled with its (typically analytic) divergence.
#[derive(Debug, Clone)]
pub struct SteadyVelocity {
    field: VectorField,
    divergence: ScalarField,
}

impl SteadyVelocity {
    pub fn new(field: VectorField, divergence: ScalarField) -> Result<Self> {
        ensure_same_grid(field.grid(), divergence.grid())?;
        Ok(Self { field, divergence })
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }
}

impl Velocity for SteadyVelocity {
    fn grid(&self) -> &Grid {
        self.field.grid()
    }

    fn sample(&self, _t: f64) -> Cow<'_, VectorField> {
        Cow::Borrowed(&self.field)
    }

    fn divergence(&self, _t: f64) -> Cow<'_, ScalarField> {
        Cow::Borrowed(&self.divergence)
    }

    fn is_steady(&self) -> bool {
        true
    }
}

/// Time-dependent velocity given by a sampling closure.
pub struct SampledVelocity<F> {
    grid: Grid,
    f: F,
}

impl<F: Fn(f64) -> VectorField + Sync> SampledVelocity<F> {
    pub fn new(grid: Grid, f: F) -> Self {
        Self { grid, f }
    }
}

impl<F: Fn(f64) -> VectorField + Sync> Velocity for SampledVelocity<F> {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn sample(&self, t: f64) -> Cow<'_, VectorField> {
        Cow::Owned((self.f)(t))
    }
}

/// Second-order centered-difference divergence of nodal samples.
pub fn centered_divergence(b: &VectorField) -> ScalarField {
    let grid = *b.grid();
    let n = grid.points_per_axis();
    let inv = 0.5 / grid.spacing();
    let mut out = vec![0.0; grid.len()];
    for axis in 0..grid.dim() {
        let v = b.component(axis).values();
        for (k, o) in out.iter_mut().enumerate() {
            let (i, j) = grid.axes(k);
            let (p, m) = if axis == 0 {
                (grid.index((i + 1) % n, j), grid.index((i + n - 1) % n, j))
            } else {
                (grid.index(i, (j + 1) % n), grid.index(i, (j + n - 1) % n))
            };
            *o += (v[p] - v[m]) * inv;
        }
    }
    ScalarField::new(grid, out).expect("finite differences of finite samples")
}

/// Uniform time grid on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(LabError::arg("t_final", format!("{t_final} must be positive")));
        }
        if steps == 0 {
            return Err(LabError::arg("steps", "need at least one step"));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// Time of snapshot `n`.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.t_final
        } else {
            n as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.time(n)).collect()
    }

    pub fn refined(&self) -> Self {
        Self {
            t_final: self.t_final,
            steps: 2 * self.steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverId {
    /// Semi-Lagrangian (characteristics + piecewise-linear interpolation).
    Sl,
    /// Conservative upwind finite volumes.
    Fv,
}

impl SolverId {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverId::Sl => "sl",
            SolverId::Fv => "fv",
        }
    }
}

impl std::str::FromStr for SolverId {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sl" => Ok(SolverId::Sl),
            "fv" => Ok(SolverId::Fv),
            other => Err(LabError::arg("solver", format!("unknown solver `{other}` (sl|fv)"))),
        }
    }
}

/// Runs the selected solver.
pub fn solve(solver: SolverId, b: &dyn Velocity, u0: &ScalarField, tg: TimeGrid) -> Result<SolutionTrace> {
    match solver {
        SolverId::Sl => advect_semilagrangian(b, u0, tg),
        SolverId::Fv => advect_upwind_fv(b, u0, tg),
    }
}

/// Streaming counterpart of [`solve`]; returns the final snapshot.
pub fn solve_streaming(
    solver: SolverId,
    b: &dyn Velocity,
    u0: &ScalarField,
    tg: TimeGrid,
    observe: impl FnMut(usize, &ScalarField),
) -> Result<ScalarField> {
    match solver {
        SolverId::Sl => stream_semilagrangian(b, u0, tg, observe),
        SolverId::Fv => stream_upwind_fv(b, u0, tg, observe),
    }
}

/// All snapshots of one run, `t = 0` included.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    time_grid: TimeGrid,
    snapshots: Vec<ScalarField>,
    solver: SolverId,
}

impl SolutionTrace {
    pub(crate) fn new(time_grid: TimeGrid, snapshots: Vec<ScalarField>, solver: SolverId) -> Self {
        debug_assert_eq!(snapshots.len(), time_grid.steps() + 1);
        Self {
            time_grid,
            snapshots,
            solver,
        }
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.time_grid
    }

    pub fn snapshots(&self) -> &[ScalarField] {
        &self.snapshots
    }

    pub fn initial(&self) -> &ScalarField {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &ScalarField {
        self.snapshots.last().expect("trace holds at least two snapshots")
    }

    pub fn solver(&self) -> SolverId {
        self.solver
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    /// `sum u h^dim` per snapshot.
    pub fn masses(&self) -> Vec<f64> {
        self.snapshots.iter().map(ScalarField::integral).collect()
    }

    /// Whether `min u0 - tol <= u <= max u0 + tol` at every snapshot.
    pub fn max_principle_flags(&self, tol: f64) -> Vec<bool> {
        let (lo, hi) = (self.initial().min(), self.initial().max());
        self.snapshots
            .iter()
            .map(|s| s.min() >= lo - tol && s.max() <= hi + tol)
            .collect()
    }

    pub const CSV_HEADER: &'static str = "t,linf,l1,l2,mass";

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for (n, s) in self.snapshots.iter().enumerate() {
            let l1 = s.lp_norm(1.0).expect("p = 1 is valid");
            let l2 = s.lp_norm(2.0).expect("p = 2 is valid");
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                self.time_grid.time(n),
                s.max_abs(),
                l1,
                l2,
                s.integral()
            )?;
        }
        Ok(())
    }
}

pub(crate) fn check_inputs(b: &dyn Velocity, u0: &ScalarField) -> Result<()> {
    ensure_same_grid(b.grid(), u0.grid())
}
