use rayon::prelude::*;

use super::{check_inputs, SolutionTrace, SolverId, TimeGrid, Velocity};
use crate::error::{LabError, Result};
use crate::fields::{Grid, ScalarField, VectorField};

/// Largest step allowed by `dt <= h / (2 max|b|)`.
pub fn max_stable_dt(b: &VectorField) -> f64 {
    let m = b.max_magnitude();
    if m == 0.0 {
        f64::INFINITY
    } else {
        b.grid().spacing() / (2.0 * m)
    }
}

/// Face velocities: `faces[axis][k]` is the normal velocity on the face
/// between node `k` and its `+axis` neighbour (average of the two nodes).
struct Faces {
    normal: Vec<Vec<f64>>,
    /// Discrete divergence of the face velocities.
    div: Vec<f64>,
}

#[inline]
fn plus(grid: &Grid, k: usize, axis: usize) -> usize {
    let n = grid.points_per_axis();
    let (i, j) = grid.axes(k);
    if axis == 0 {
        grid.index((i + 1) % n, j)
    } else {
        grid.index(i, (j + 1) % n)
    }
}

#[inline]
fn minus(grid: &Grid, k: usize, axis: usize) -> usize {
    let n = grid.points_per_axis();
    let (i, j) = grid.axes(k);
    if axis == 0 {
        grid.index((i + n - 1) % n, j)
    } else {
        grid.index(i, (j + n - 1) % n)
    }
}

fn faces(b: &VectorField) -> Faces {
    let grid = *b.grid();
    let h = grid.spacing();
    let normal: Vec<Vec<f64>> = (0..grid.dim())
        .map(|axis| {
            let v = b.component(axis).values();
            (0..grid.len()).map(|k| 0.5 * (v[k] + v[plus(&grid, k, axis)])).collect()
        })
        .collect();
    let div = (0..grid.len())
        .map(|k| {
            (0..grid.dim())
                .map(|a| normal[a][k] - normal[a][minus(&grid, k, a)])
                .sum::<f64>()
                / h
        })
        .collect();
    Faces { normal, div }
}

fn step(grid: &Grid, f: &Faces, u: &[f64], dt: f64) -> Vec<f64> {
    let lam = dt / grid.spacing();
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let mut flux_diff = 0.0;
            for (axis, a) in f.normal.iter().enumerate() {
                let kp = plus(grid, k, axis);
                let km = minus(grid, k, axis);
                let out = a[k].max(0.0) * u[k] + a[k].min(0.0) * u[kp];
                let inn = a[km].max(0.0) * u[km] + a[km].min(0.0) * u[k];
                flux_diff += out - inn;
            }
            u[k] - lam * flux_diff + dt * u[k] * f.div[k]
        })
        .collect()
}

/// Conservative first-order upwind scheme for `u_t + div(b u) - u div b = 0`.
/// Face velocities average neighbouring nodes; the source uses the
/// divergence of those same face velocities, so constants are preserved
/// exactly and mass is conserved whenever that divergence vanishes.
pub fn advect_upwind_fv(b: &dyn Velocity, u0: &ScalarField, tg: TimeGrid) -> Result<SolutionTrace> {
    let mut snapshots = Vec::with_capacity(tg.steps() + 1);
    stream_upwind_fv(b, u0, tg, |_, u| snapshots.push(u.clone()))?;
    Ok(SolutionTrace::new(tg, snapshots, SolverId::Fv))
}

/// Same scheme as [`advect_upwind_fv`], handing each snapshot to `observe`.
pub fn stream_upwind_fv(
    b: &dyn Velocity,
    u0: &ScalarField,
    tg: TimeGrid,
    mut observe: impl FnMut(usize, &ScalarField),
) -> Result<ScalarField> {
    check_inputs(b, u0)?;
    let grid = *u0.grid();
    let dt = tg.dt();
    let mut u = u0.clone();
    observe(0, &u);
    let mut cached: Option<Faces> = None;
    for n in 0..tg.steps() {
        if cached.is_none() || !b.is_steady() {
            let bm = b.sample(tg.time(n) + 0.5 * dt);
            let limit = max_stable_dt(&bm);
            if dt > limit * (1.0 + 1e-12) {
                return Err(LabError::Stability(format!(
                    "dt = {dt} exceeds h/(2 max|b|) = {limit}"
                )));
            }
            cached = Some(faces(&bm));
        }
        let f = cached.as_ref().expect("just stored");
        u = ScalarField::new(grid, step(&grid, f, u.values(), dt))?;
        observe(n + 1, &u);
    }
    Ok(u)
}
