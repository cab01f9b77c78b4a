use std::sync::OnceLock;

use crate::error::{LabError, Result};
use crate::fields::{Grid, Point, ScalarField, VectorField};
use crate::mollify::{bump_profile, continuum_normalization};

/// Analytic `sup |grad pi_r| r` of the profile below.
pub const CUTOFF_GRADIENT_BOUND: f64 = 4.0;

/// Half-width of the mollifier that smooths the unit step at `s = 1.5`.
const STEP_EPS: f64 = 0.5;
const TABLE: usize = 1 << 14;

/// Cumulative integral of the 1D unit-mass bump on `[-1, 1]`, tabulated
/// with Simpson panels.
fn cdf_table() -> &'static [f64] {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let dx = 2.0 / TABLE as f64;
        let f = bump_density;
        let mut acc = vec![0.0; TABLE + 1];
        for k in 0..TABLE {
            let a = -1.0 + k as f64 * dx;
            acc[k + 1] = acc[k] + dx / 6.0 * (f(a) + 4.0 * f(a + 0.5 * dx) + f(a + dx));
        }
        let total = acc[TABLE];
        acc.iter_mut().for_each(|v| *v /= total);
        acc
    })
}

fn bump_density(x: f64) -> f64 {
    continuum_normalization_1() * bump_profile(x.abs())
}

/// Cubic Hermite interpolation of the tabulated CDF, using the exact density
/// as the derivative at the table nodes.
fn bump_cdf(x: f64) -> f64 {
    if x <= -1.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let t = cdf_table();
    let dx = 2.0 / TABLE as f64;
    let s = (x + 1.0) / dx;
    let k = (s.floor() as usize).min(TABLE - 1);
    let w = s - k as f64;
    let (x0, x1) = (-1.0 + k as f64 * dx, -1.0 + (k + 1) as f64 * dx);
    let (d0, d1) = (bump_density(x0) * dx, bump_density(x1) * dx);
    let w2 = w * w;
    let w3 = w2 * w;
    let v = (2.0 * w3 - 3.0 * w2 + 1.0) * t[k]
        + (w3 - 2.0 * w2 + w) * d0
        + (-2.0 * w3 + 3.0 * w2) * t[k + 1]
        + (w3 - w2) * d1;
    v.clamp(0.0, 1.0)
}

/// `pi_1(s)`: one below `s = 1`, zero above `s = 2`, the unit step at 1.5
/// mollified at width 1/2.
pub fn profile(s: f64) -> f64 {
    1.0 - bump_cdf((s - 1.5) / STEP_EPS)
}

/// `pi_1'(s)`.
pub fn profile_derivative(s: f64) -> f64 {
    -bump_density((s - 1.5) / STEP_EPS) / STEP_EPS
}

fn continuum_normalization_1() -> f64 {
    static N1: OnceLock<f64> = OnceLock::new();
    *N1.get_or_init(|| continuum_normalization(1))
}

/// Radial cutoffs `pi_r(x) = pi_1(|x - c| / r)` about a common center.
#[derive(Debug, Clone)]
pub struct CutoffFamily {
    center: Point,
    radii: Vec<f64>,
    fields: Vec<ScalarField>,
    gradients: Vec<VectorField>,
}

impl CutoffFamily {
    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    /// Analytic gradients sampled at the nodes.
    pub fn gradients(&self) -> &[VectorField] {
        &self.gradients
    }

    /// `max |grad pi_r| r` measured with centered differences of the samples.
    pub fn measured_gradient_bound(&self) -> Vec<f64> {
        self.fields
            .iter()
            .zip(&self.radii)
            .map(|(f, &r)| {
                let g = *f.grid();
                let n = g.points_per_axis();
                let inv = 0.5 / g.spacing();
                let v = f.values();
                (0..g.len())
                    .map(|k| {
                        let (i, j) = g.axes(k);
                        let dx = (v[g.index((i + 1) % n, j)] - v[g.index((i + n - 1) % n, j)]) * inv;
                        let dy = if g.dim() == 2 {
                            (v[g.index(i, (j + 1) % n)] - v[g.index(i, (j + n - 1) % n)]) * inv
                        } else {
                            0.0
                        };
                        dx.hypot(dy)
                    })
                    .fold(0.0, f64::max)
                    * r
            })
            .collect()
    }
}

/// Cutoffs centered at the torus center; requires `2 max(r) < L/2`.
pub fn make_cutoffs(grid: &Grid, radii: &[f64]) -> Result<CutoffFamily> {
    make_cutoffs_at(grid, radii, grid.center())
}

pub fn make_cutoffs_at(grid: &Grid, radii: &[f64], center: Point) -> Result<CutoffFamily> {
    if radii.is_empty() {
        return Err(LabError::arg("radii", "empty list"));
    }
    for &r in radii {
        if !(r > 0.0 && 2.0 * r < 0.5 * grid.period()) {
            return Err(LabError::arg(
                "radii",
                format!("radius {r} needs 0 < 2r < L/2 = {}", 0.5 * grid.period()),
            ));
        }
    }
    let mut fields = Vec::with_capacity(radii.len());
    let mut gradients = Vec::with_capacity(radii.len());
    for &r in radii {
        fields.push(ScalarField::from_fn(grid, |p| profile(grid.distance(p, center) / r)));
        gradients.push(VectorField::from_fn(grid, |p| {
            let d = grid.displacement(p, center);
            let dist = d[0].hypot(d[1]);
            if dist == 0.0 {
                return [0.0, 0.0];
            }
            let s = profile_derivative(dist / r) / (r * dist);
            [s * d[0], s * d[1]]
        }));
    }
    Ok(CutoffFamily {
        center,
        radii: radii.to_vec(),
        fields,
        gradients,
    })
}
