//! Bump-function mollifiers, spectral derivatives and the transport
//! commutator `R_eps = b . grad S_eps(u) - S_eps(b . grad u)`.

use std::io::{self, Write};

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fields::{ensure_same_grid, Grid, Point, ScalarField, VectorField};
use crate::spectral;

/// Unnormalized bump `exp(-1 / (1 - s^2))` for `s < 1`, zero otherwise.
#[inline]
pub fn bump_profile(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// `N_n = 1 / integral_{|x|<1} exp(-1/(1-|x|^2)) dx` for `n = 1, 2`.
///
/// The integrand is flat to all orders at the boundary, so the composite
/// midpoint rule converges faster than any power of the step.
pub fn continuum_normalization(dim: usize) -> f64 {
    const STEPS: usize = 20_000;
    let ds = 1.0 / STEPS as f64;
    let integral = match dim {
        1 => 2.0 * (0..STEPS).map(|k| bump_profile((k as f64 + 0.5) * ds)).sum::<f64>() * ds,
        2 => {
            2.0 * std::f64::consts::PI
                * (0..STEPS)
                    .map(|k| {
                        let r = (k as f64 + 0.5) * ds;
                        bump_profile(r) * r
                    })
                    .sum::<f64>()
                * ds
        }
        _ => panic!("dimension {dim} not supported"),
    };
    1.0 / integral
}

/// The scaled bump `m_eps` sampled on the working grid, centered at the
/// origin and normalized so that its discrete integral is one.
#[derive(Debug, Clone)]
pub struct MollifierKernel {
    epsilon: f64,
    normalization: f64,
    samples: ScalarField,
}

impl MollifierKernel {
    pub fn new(grid: &Grid, epsilon: f64) -> Result<Self> {
        let h = grid.spacing();
        if !(epsilon >= 8.0 * h * (1.0 - 1e-12) && epsilon <= 0.25 * grid.period() * (1.0 + 1e-12)) {
            return Err(LabError::arg(
                "epsilon",
                format!("{epsilon} outside [8h, L/4] = [{}, {}]", 8.0 * h, 0.25 * grid.period()),
            ));
        }
        let origin = [0.0, 0.0];
        let raw = ScalarField::from_fn(grid, |p| bump_profile(grid.distance(p, origin) / epsilon));
        let mass = raw.integral();
        let samples = raw.scale(1.0 / mass);
        // samples = N eps^-n exp(...), so N = eps^n / mass
        let normalization = epsilon.powi(grid.dim() as i32) / mass;
        Ok(Self {
            epsilon,
            normalization,
            samples,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The discrete counterpart of `N_n`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn samples(&self) -> &ScalarField {
        &self.samples
    }

    pub fn grid(&self) -> &Grid {
        self.samples.grid()
    }
}

/// Builds `m_eps` on `grid`; `eps` must lie in `[8h, L/4]`.
pub fn build_kernel(grid: &Grid, epsilon: f64) -> Result<MollifierKernel> {
    MollifierKernel::new(grid, epsilon)
}

/// `S_eps(u) = m_eps * u` (periodic convolution).
pub fn smooth(field: &ScalarField, kernel: &MollifierKernel) -> Result<ScalarField> {
    ensure_same_grid(field.grid(), kernel.grid())?;
    Ok(spectral::convolve(kernel.samples(), field))
}

/// Componentwise [`smooth`].
pub fn smooth_vector(b: &VectorField, kernel: &MollifierKernel) -> Result<VectorField> {
    VectorField::new(
        b.components()
            .iter()
            .map(|c| smooth(c, kernel))
            .collect::<Result<_>>()?,
    )
}

/// Spectral partial derivative along `axis`; the Nyquist mode is dropped.
pub fn partial(field: &ScalarField, axis: usize) -> ScalarField {
    let w = 2.0 * std::f64::consts::PI / field.grid().period();
    spectral::apply_multiplier(field, |m| {
        if m.nyquist[axis] {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, w * m.k[axis] as f64)
        }
    })
}

/// Spectral gradient.
pub fn gradient(field: &ScalarField) -> VectorField {
    VectorField::new((0..field.grid().dim()).map(|a| partial(field, a)).collect())
        .expect("components share the field's grid")
}

/// Spectral divergence.
pub fn divergence(b: &VectorField) -> ScalarField {
    let mut acc = partial(b.component(0), 0);
    for axis in 1..b.grid().dim() {
        acc = acc.add(&partial(b.component(axis), axis)).expect("same grid");
    }
    acc
}

/// `b . grad u` in the conservative form `div(b u) - u div b`, which stays
/// meaningful when `u` is rough.
pub fn transport_term(b: &VectorField, u: &ScalarField) -> Result<ScalarField> {
    ensure_same_grid(b.grid(), u.grid())?;
    let mut flux_div = ScalarField::zeros(u.grid());
    for axis in 0..u.grid().dim() {
        let bu = b.component(axis).mul(u)?;
        flux_div = flux_div.add(&partial(&bu, axis))?;
    }
    let div_b = divergence(b);
    flux_div.sub(&u.mul(&div_b)?)
}

/// The commutator `R_eps = b . grad S_eps(u) - S_eps(b . grad u)`.
pub fn commutator(b: &VectorField, u: &ScalarField, kernel: &MollifierKernel) -> Result<ScalarField> {
    ensure_same_grid(b.grid(), u.grid())?;
    ensure_same_grid(u.grid(), kernel.grid())?;
    let su = smooth(u, kernel)?;
    let advected = b.dot(&gradient(&su))?;
    let mollified = smooth(&transport_term(b, u)?, kernel)?;
    advected.sub(&mollified)
}

/// `sum |v| h^dim` over the periodic box of half-width `radius` around
/// `center`.
pub fn local_l1_norm(field: &ScalarField, center: Point, radius: f64) -> f64 {
    let grid = field.grid();
    let dim = grid.dim();
    let s: f64 = field
        .values()
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let d = grid.displacement(grid.node(*k), center);
            d[..dim].iter().all(|x| x.abs() <= radius * (1.0 + 1e-12))
        })
        .map(|(_, v)| v.abs())
        .sum();
    s * grid.cell_volume()
}

/// Local `L1` norms of `R_eps` along a decreasing list of `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub epsilons: Vec<f64>,
    pub l1_local_norms: Vec<f64>,
    pub observation_radius: f64,
}

impl CommutatorReport {
    pub const CSV_HEADER: &'static str = "epsilon,l1_local_norm";

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for (e, n) in self.epsilons.iter().zip(&self.l1_local_norms) {
            writeln!(out, "{e:e},{n:e}")?;
        }
        Ok(())
    }

    /// `last / first` entry.
    pub fn decay_ratio(&self) -> f64 {
        match (self.l1_local_norms.first(), self.l1_local_norms.last()) {
            (Some(&a), Some(&b)) if a > 0.0 => b / a,
            _ => 0.0,
        }
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.l1_local_norms.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn commutator_convergence(
    b: &VectorField,
    u: &ScalarField,
    epsilons: &[f64],
    observation_radius: f64,
) -> Result<CommutatorReport> {
    if epsilons.is_empty() {
        return Err(LabError::arg("epsilons", "empty list"));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::arg("epsilons", "must be strictly decreasing"));
    }
    let grid = *u.grid();
    let center = grid.center();
    let mut norms = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let kernel = MollifierKernel::new(&grid, eps)?;
        let r = commutator(b, u, &kernel)?;
        norms.push(local_l1_norm(&r, center, observation_radius));
    }
    Ok(CommutatorReport {
        epsilons: epsilons.to_vec(),
        l1_local_norms: norms,
        observation_radius,
    })
}
