use rayon::prelude::*;

use super::{check_inputs, SolutionTrace, SolverId, TimeGrid, Velocity};
use crate::error::{LabError, Result};
use crate::fields::{Grid, Point, ScalarField, VectorField};

/// Interpolation stencil: up to four `(node, weight)` pairs.
type Stencil = [(usize, f64); 4];

/// Piecewise-linear periodic interpolation stencil at `p` (grid units
/// handled internally). Weights are nonnegative and sum to one.
fn stencil(grid: &Grid, p: Point) -> Stencil {
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let split = |x: f64| -> (usize, usize, f64) {
        let s = (x / h).rem_euclid(n as f64);
        let base = s.floor();
        let theta = s - base;
        let i0 = (base as usize) % n;
        (i0, (i0 + 1) % n, theta)
    };
    let (i0, i1, tx) = split(p[0]);
    if grid.dim() == 1 {
        return [(i0, 1.0 - tx), (i1, tx), (0, 0.0), (0, 0.0)];
    }
    let (j0, j1, ty) = split(p[1]);
    [
        (grid.index(i0, j0), (1.0 - tx) * (1.0 - ty)),
        (grid.index(i1, j0), tx * (1.0 - ty)),
        (grid.index(i0, j1), (1.0 - tx) * ty),
        (grid.index(i1, j1), tx * ty),
    ]
}

#[inline]
fn apply(st: &Stencil, values: &[f64]) -> f64 {
    st.iter().map(|&(k, w)| w * values[k]).sum()
}

fn interpolate_velocity(b: &VectorField, p: Point) -> Point {
    let st = stencil(b.grid(), p);
    let mut v = [0.0; 2];
    for (axis, c) in b.components().iter().enumerate() {
        v[axis] = apply(&st, c.values());
    }
    v
}

/// Backward RK4 foot of the characteristic through every node, with the
/// velocity frozen over the step.
fn feet(b: &VectorField, dt: f64) -> Result<Vec<Stencil>> {
    let grid = *b.grid();
    let half_l = 0.5 * grid.period();
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = grid.node(k);
            let shift = |p: Point, v: Point, s: f64| [p[0] - s * v[0], p[1] - s * v[1]];
            let k1 = interpolate_velocity(b, x);
            let k2 = interpolate_velocity(b, shift(x, k1, 0.5 * dt));
            let k3 = interpolate_velocity(b, shift(x, k2, 0.5 * dt));
            let k4 = interpolate_velocity(b, shift(x, k3, dt));
            let mut disp = [0.0; 2];
            for a in 0..grid.dim() {
                disp[a] = dt * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]) / 6.0;
                if !(disp[a].abs() <= half_l) {
                    return Err(LabError::Stability(format!(
                        "characteristic foot moved {} along axis {a} in one step (limit L/2 = {half_l})",
                        disp[a]
                    )));
                }
            }
            Ok(stencil(&grid, shift(x, disp, 1.0)))
        })
        .collect()
}

/// Semi-Lagrangian advection: backward characteristics (RK4, velocity
/// sampled at the step midpoint) and piecewise-linear periodic
/// interpolation at the feet. Every update is a convex combination of
/// old values, so the discrete maximum principle holds by construction.
pub fn advect_semilagrangian(b: &dyn Velocity, u0: &ScalarField, tg: TimeGrid) -> Result<SolutionTrace> {
    let mut snapshots = Vec::with_capacity(tg.steps() + 1);
    stream_semilagrangian(b, u0, tg, |_, u| snapshots.push(u.clone()))?;
    Ok(SolutionTrace::new(tg, snapshots, SolverId::Sl))
}

/// Same scheme as [`advect_semilagrangian`], handing each snapshot
/// (`n = 0 ..= steps`) to `observe` instead of storing it.
pub fn stream_semilagrangian(
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
    let mut cached: Option<Vec<Stencil>> = None;
    for n in 0..tg.steps() {
        let st = match (&cached, b.is_steady()) {
            (Some(st), true) => st,
            _ => {
                let bm = b.sample(tg.time(n) + 0.5 * dt);
                cached = Some(feet(&bm, dt)?);
                cached.as_ref().expect("just stored")
            }
        };
        let prev = u.values();
        let next: Vec<f64> = st.par_iter().map(|s| apply(s, prev)).collect();
        u = ScalarField::new(grid, next)?;
        observe(n + 1, &u);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::SampledVelocity;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn bump(g: &Grid, c: Point, w: f64) -> ScalarField {
        ScalarField::from_fn(g, |p| {
            let r = g.distance(p, c) / w;
            if r < 1.0 {
                (-1.0 / (1.0 - r * r)).exp() * std::f64::consts::E
            } else {
                0.0
            }
        })
    }

    #[test]
    fn constant_translation_is_exact_at_integer_shifts() {
        let g = Grid::new(1, 1.0, 128).unwrap();
        let h = g.spacing();
        let c = 0.75;
        let b = VectorField::constant(&g, [c, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u0 = ScalarField::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
        // c dt = 3h: every foot lands on a node
        let dt = 3.0 * h / c;
        let steps = 10;
        let tg = TimeGrid::new(dt * steps as f64, steps).unwrap();
        let tr = advect_semilagrangian(&b, &u0, tg).unwrap();
        let n = g.points_per_axis();
        let shifted: Vec<f64> = (0..n).map(|i| u0.values()[(i + n * 10 - 30) % n]).collect();
        for (a, e) in tr.last().values().iter().zip(&shifted) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_translation_error_within_interpolation_bound() {
        let g = Grid::new(1, 1.0, 256).unwrap();
        let h = g.spacing();
        let c = 0.3;
        let b = VectorField::constant(&g, [c, 0.0]);
        let u0 = ScalarField::from_fn(&g, |p| (2.0 * PI * p[0]).sin());
        let tg = TimeGrid::new(0.1, 1).unwrap();
        let tr = advect_semilagrangian(&b, &u0, tg).unwrap();
        let exact = ScalarField::from_fn(&g, |p| (2.0 * PI * (p[0] - c * 0.1)).sin());
        // linear interpolation: |e| <= h^2/8 max|u''|
        let bound = h * h / 8.0 * (2.0 * PI).powi(2);
        let err = tr.last().sub(&exact).unwrap().max_abs();
        assert!(err <= bound, "{err} > {bound}");
    }

    #[test]
    fn rigid_rotation_returns_after_one_period() {
        let g = Grid::new(2, 1.0, 256).unwrap();
        let c = g.center();
        let b = VectorField::from_fn(&g, |p| {
            let d = g.displacement(p, c);
            [-2.0 * PI * d[1], 2.0 * PI * d[0]]
        });
        let u0 = bump(&g, [0.65, 0.5], 0.15);
        let tr = advect_semilagrangian(&b, &u0, TimeGrid::new(1.0, 64).unwrap()).unwrap();
        let rel = tr.last().sub(&u0).unwrap().lp_norm(2.0).unwrap() / u0.lp_norm(2.0).unwrap();
        assert!(rel <= 0.05, "relative L2 error {rel}");
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = Grid::new(1, 1.0, 64).unwrap();
        let b = VectorField::constant(&g, [10.0, 0.0]);
        let u0 = ScalarField::zeros(&g);
        let err = advect_semilagrangian(&b, &u0, TimeGrid::new(1.0, 2).unwrap()).unwrap_err();
        assert!(matches!(err, LabError::Stability(_)));
    }

    #[test]
    fn time_dependent_velocity_is_sampled_at_midpoints() {
        // b(t) = t: displacement over [0, T] is T^2/2, reproduced exactly by
        // midpoint sampling
        let g = Grid::new(1, 1.0, 64).unwrap();
        let h = g.spacing();
        let v = SampledVelocity::new(g, move |t| VectorField::constant(&g, [t, 0.0]));
        let u0 = ScalarField::from_fn(&g, |p| p[0]);
        let t_final = (8.0 * h).sqrt();
        let tr = advect_semilagrangian(&v, &u0, TimeGrid::new(t_final, 7).unwrap()).unwrap();
        let n = g.points_per_axis();
        for i in 20..n {
            let expected = u0.values()[i - 4];
            assert!((tr.last().values()[i] - expected).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn solver_is_linear_and_monotone(seed in 0u64..1000, speed in -1.0f64..1.0) {
            let g = Grid::new(2, 1.0, 16).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = g.center();
            let b = VectorField::from_fn(&g, |p| {
                let d = g.displacement(p, c);
                [speed * d[1].sin() + 0.1, -speed * d[0].cos()]
            });
            let u0 = ScalarField::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
            let v0 = ScalarField::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
            let tg = TimeGrid::new(0.5, 5).unwrap();
            let a = advect_semilagrangian(&b, &u0, tg).unwrap();
            let bb = advect_semilagrangian(&b, &v0, tg).unwrap();
            let ab = advect_semilagrangian(&b, &u0.add(&v0).unwrap(), tg).unwrap();
            for n in 0..=tg.steps() {
                let sum = a.snapshots()[n].add(&bb.snapshots()[n]).unwrap();
                let diff = ab.snapshots()[n].sub(&sum).unwrap().max_abs();
                prop_assert!(diff <= 1e-12 * sum.max_abs().max(1.0));
            }
            prop_assert!(a.max_principle_flags(1e-12).iter().all(|&f| f));
            let k = advect_semilagrangian(&b, &ScalarField::constant(&g, 0.3), tg).unwrap();
            prop_assert!(k.last().values().iter().all(|v| (v - 0.3).abs() <= 1e-12));
        }
    }
}
