//! One function per harness. Each writes its CSVs into the output directory
//! and returns a JSON summary plus any invariant violations.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use transport_lab::fields::{lp_norm, Grid};
use transport_lab::logineq::{fit_c0_on_grid, random_suite};
use transport_lab::mollify::{build_kernel, commutator_convergence};
use transport_lab::osgood::{comparison_ode, split_schedule, stability_experiment, ComparisonParams, Driver};
use transport_lab::scenarios::{find, ScenarioSpec};
use transport_lab::transport::{renormalization_residual, solve, solve_streaming, SolverId, TimeGrid, TruncationSpec};

use crate::config::{ExperimentConfig, Harness};

/// Tolerance of the discrete maximum principle and of mass conservation.
pub const INVARIANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub invariant: &'static str,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub violations: Vec<Violation>,
    pub files: Vec<String>,
}

impl Outcome {
    fn violate(&mut self, invariant: &'static str, detail: impl Into<String>) {
        self.violations.push(Violation {
            invariant,
            detail: detail.into(),
        });
    }

    fn write(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.harness {
        Harness::Solve => run_solve(cfg),
        Harness::Commutator => run_commutator(cfg),
        Harness::ThmD => run_thm_d(cfg),
        Harness::Osgood => run_osgood(cfg),
        Harness::Stability => run_stability(cfg),
        Harness::Renormalize => run_renormalize(cfg),
    }
}

fn scenario(cfg: &ExperimentConfig) -> Result<ScenarioSpec> {
    let name = cfg
        .scenario
        .as_deref()
        .with_context(|| format!("harness `{}` needs --scenario", cfg.harness.as_str()))?;
    Ok(find(name)?)
}

fn time_grid(spec: &ScenarioSpec, steps: usize) -> Result<TimeGrid> {
    Ok(TimeGrid::new(spec.t_final, steps)?)
}

/// Suite constant: `--c0` if given, else fitted on the seeded suite.
fn suite_c0(cfg: &ExperimentConfig, grid: &Grid) -> Result<f64> {
    if let Some(c) = cfg.c0 {
        ensure!(c.is_finite() && c >= 0.0, "--c0 must be finite and nonnegative");
        return Ok(c);
    }
    let g2 = Grid::new(2, grid.period(), grid.points_per_axis())?;
    Ok(fit_c0_on_grid(&random_suite(cfg.seed, cfg.pairs, grid.period()), &g2, 1.0)?.c0)
}

fn run_solve(cfg: &ExperimentConfig) -> Result<Outcome> {
    let spec = scenario(cfg)?;
    let grid = spec.grid(cfg.grid.unwrap_or(spec.default_points))?;
    let steps = cfg.steps.unwrap_or(2 * grid.points_per_axis());
    let tg = time_grid(&spec, steps)?;
    let b = spec.velocity(&grid)?;
    let u0 = spec.initial_data(&grid)?;
    let (lo, hi) = (u0.min() - INVARIANT_TOL, u0.max() + INVARIANT_TOL);
    let m0 = u0.integral();
    let mut csv = String::from("t,linf,l1,l2,mass,max_principle\n");
    let mut all_bounded = true;
    let mut drift: f64 = 0.0;
    solve_streaming(cfg.solver.into(), &b, &u0, tg, |n, u| {
        let ok = u.min() >= lo && u.max() <= hi;
        all_bounded &= ok;
        if m0 != 0.0 {
            drift = drift.max(((u.integral() - m0) / m0).abs());
        }
        let l1 = lp_norm(u, 1.0).expect("p = 1");
        let l2 = lp_norm(u, 2.0).expect("p = 2");
        writeln!(
            csv,
            "{:e},{:e},{:e},{:e},{:e},{ok}",
            tg.time(n),
            u.max_abs(),
            l1,
            l2,
            u.integral()
        )
        .expect("writing to a String");
    })?;
    let mut out = Outcome::default();
    out.write(&cfg.out, "trace.csv", csv.as_bytes())?;
    let solver: SolverId = cfg.solver.into();
    let div_free = spec.divergence_field(&grid)?.max_abs() == 0.0;
    // the semi-Lagrangian update is a convex combination, so its bounds are
    // asserted; the upwind scheme conserves mass exactly for div-free b
    if solver == SolverId::Sl && !all_bounded {
        out.violate("max_principle", "a snapshot left [min u0, max u0] by more than 1e-12");
    }
    if solver == SolverId::Fv && div_free && drift > INVARIANT_TOL {
        out.violate("mass_conservation", format!("relative mass drift {drift:e}"));
    }
    out.results = json!({
        "grid": grid.points_per_axis(),
        "steps": steps,
        "t_final": spec.t_final,
        "max_principle_all": all_bounded,
        "mass_relative_drift": drift,
        "divergence_free": div_free,
    });
    Ok(out)
}

fn run_commutator(cfg: &ExperimentConfig) -> Result<Outcome> {
    let spec = scenario(cfg)?;
    let grid = spec.grid(cfg.grid.unwrap_or(512))?;
    let l = grid.period();
    let eps = if cfg.eps.is_empty() {
        vec![l / 8.0, l / 16.0, l / 32.0, l / 64.0]
    } else {
        cfg.eps.clone()
    };
    let radii = if cfg.radii.is_empty() { vec![0.45 * l] } else { cfg.radii.clone() };
    let b = spec.velocity_field(&grid)?;
    let u = spec.initial_data(&grid)?;
    let mut csv = String::from("observation_radius,epsilon,l1_local_norm\n");
    let mut summary = Vec::new();
    let mut out = Outcome::default();
    for &r in &radii {
        let rep = commutator_convergence(&b, &u, &eps, r)?;
        for (e, v) in rep.epsilons.iter().zip(&rep.l1_local_norms) {
            writeln!(csv, "{r:e},{e:e},{v:e}")?;
        }
        if rep.l1_local_norms.iter().any(|v| !v.is_finite()) {
            out.violate("finite_commutator", format!("non-finite norm at radius {r}"));
        }
        summary.push(json!({
            "observation_radius": r,
            "norms": rep.l1_local_norms,
            "decay_ratio": rep.decay_ratio(),
            "strictly_decreasing": rep.is_strictly_decreasing(),
        }));
    }
    out.write(&cfg.out, "commutator.csv", csv.as_bytes())?;
    out.results = json!({ "grid": grid.points_per_axis(), "epsilons": eps, "radii": summary });
    Ok(out)
}

fn run_thm_d(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.grid.unwrap_or(128);
    let grid = Grid::new(2, 1.0, n)?;
    ensure!(cfg.pairs > 0, "--pairs must be positive");
    let suite = random_suite(cfg.seed, cfg.pairs, grid.period());
    let fit = fit_c0_on_grid(&suite, &grid, 1.0)?;
    let mut out = Outcome::default();
    for (i, r) in fit.records.iter().enumerate() {
        if r.lhs > 0.0 && r.rhs_without_c0 == 0.0 {
            out.violate("pairing_rhs_zero", format!("pair {i}: lhs {:e} with zero right-hand side", r.lhs));
        }
    }
    if !fit.c0.is_finite() {
        out.violate("finite_c0", format!("fitted C0 = {}", fit.c0));
    }
    let mut csv = Vec::new();
    fit.write_csv(&mut csv)?;
    out.write(&cfg.out, "records.csv", &csv)?;
    out.results = json!({
        "grid": n,
        "pairs": cfg.pairs,
        "suite_version": transport_lab::logineq::SUITE_VERSION,
        "c0": fit.c0,
        "argmax_pair": fit.argmax,
        "holds": fit.holds(),
    });
    Ok(out)
}

/// The driver plus the grid it was measured on (`None` for `constant`).
fn osgood_driver(cfg: &ExperimentConfig) -> Result<(Driver, Option<Grid>)> {
    let name = cfg
        .driver
        .as_deref()
        .or(cfg.scenario.as_deref())
        .context("harness `osgood` needs --driver <scenario|constant>")?;
    if name == "constant" {
        let steps = cfg.steps.unwrap_or(1000);
        return Ok((Driver::constant(1.0, 1.0, steps)?, None));
    }
    let spec = find(name)?;
    let grid = spec.grid(cfg.grid.unwrap_or(256))?;
    let steps = cfg.steps.unwrap_or(grid.points_per_axis());
    let driver = Driver::from_velocity(&spec.velocity(&grid)?, time_grid(&spec, steps)?)?;
    Ok((driver, Some(grid)))
}

fn run_osgood(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (driver, grid) = osgood_driver(cfg)?;
    let c0 = suite_c0(cfg, &grid.unwrap_or(Grid::new(2, 1.0, 128)?))?;
    let eps = if cfg.eps.is_empty() { vec![1e-4] } else { cfg.eps.clone() };
    let mut out = Outcome::default();
    let mut csv = String::from("eps0,t,B,bound\n");
    let mut runs = Vec::new();
    for &eps0 in &eps {
        let tr = comparison_ode(&driver, ComparisonParams { c0, m: cfg.m, eps0 })?;
        let bounds = tr.bounds();
        let mut worst: f64 = 0.0;
        for ((t, b), bound) in tr.times.iter().zip(&tr.values).zip(&bounds) {
            writeln!(csv, "{eps0:e},{t:e},{b:e},{bound:e}")?;
            worst = worst.max(b / bound);
        }
        if worst > 1.0 + 1e-9 {
            out.violate("explicit_bound", format!("eps0 {eps0:e}: B / bound reached {worst}"));
        }
        if !tr.invariants_hold() {
            out.violate("comparison_monotone", format!("eps0 {eps0:e}: B decreased or went negative"));
        }
        runs.push(json!({ "eps0": eps0, "sup_B": tr.sup(), "max_B_over_bound": worst }));
    }
    out.write(&cfg.out, "osgood.csv", csv.as_bytes())?;
    let schedule = split_schedule(&driver, c0)?;
    out.results = json!({
        "grid": grid.map(|g| g.points_per_axis()),
        "driver_samples": driver.times().len() - 1,
        "c0": c0,
        "m": cfg.m,
        "driver_integral": driver.total_integral(),
        "split_breakpoints": schedule.breakpoints,
        "split_exponent": schedule.exponent,
        "runs": runs,
    });
    Ok(out)
}

fn run_stability(cfg: &ExperimentConfig) -> Result<Outcome> {
    let spec = scenario(cfg)?;
    let grid = spec.grid(cfg.grid.unwrap_or(spec.default_points))?;
    let steps = cfg.steps.unwrap_or(grid.points_per_axis());
    let magnitudes = if cfg.eps.is_empty() {
        vec![1e-1, 1e-2, 1e-3, 1e-4]
    } else {
        cfg.eps.clone()
    };
    let b = spec.velocity(&grid)?;
    let u0 = spec.initial_data(&grid)?;
    // perturbations along the initial datum, normalized in L_p
    let norm = lp_norm(&u0, cfg.p)?;
    ensure!(norm > 0.0, "initial datum vanishes");
    let deltas: Vec<_> = magnitudes.iter().map(|m| u0.scale(m / norm)).collect();
    let c0 = suite_c0(cfg, &grid)?;
    let table = stability_experiment(&b, &u0, &deltas, cfg.p, time_grid(&spec, steps)?, cfg.solver.into(), c0)?;
    let mut out = Outcome::default();
    for r in &table.rows {
        if r.sup_error > r.envelope {
            out.violate(
                "osgood_envelope",
                format!("k={}: error {:e} above envelope {:e}", r.k, r.sup_error, r.envelope),
            );
        }
    }
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    out.write(&cfg.out, "stability.csv", &csv)?;
    out.results = json!({
        "grid": grid.points_per_axis(),
        "steps": steps,
        "suite_c0": c0,
        "c0": table.c0,
        "m": table.m,
        "fitted_exponent": table.fitted_exponent,
        "split_exponent": table.split_exponent,
        "monotone": table.monotone(),
        "below_envelope": table.below_envelope(),
        "below_gronwall": table.below_gronwall(),
    });
    Ok(out)
}

fn run_renormalize(cfg: &ExperimentConfig) -> Result<Outcome> {
    let spec = scenario(cfg)?;
    let grid = spec.grid(cfg.grid.unwrap_or(128))?;
    let steps = cfg.steps.unwrap_or(2 * grid.points_per_axis());
    let eps = match cfg.eps.as_slice() {
        [] => (8.0 * grid.spacing()).max(grid.period() / 16.0),
        [e] => *e,
        _ => bail!("harness `renormalize` takes a single --eps"),
    };
    let tg = time_grid(&spec, steps)?;
    let b = spec.velocity(&grid)?;
    let trace = solve(cfg.solver.into(), &b, &spec.initial_data(&grid)?, tg)?;
    let kernel = build_kernel(&grid, eps)?;
    let rep = renormalization_residual(&trace, &b, TruncationSpec::new(cfg.m, cfg.p)?, &kernel)?;
    let mut out = Outcome::default();
    if rep.residuals.iter().chain(&rep.commutator_bounds).any(|v| !v.is_finite()) {
        out.violate("finite_residual", "non-finite renormalization residual");
    }
    let mut csv = Vec::new();
    rep.write_csv(&mut csv, spec.t_final)?;
    out.write(&cfg.out, "renormalize.csv", &csv)?;
    out.results = json!({
        "grid": grid.points_per_axis(),
        "steps": steps,
        "epsilon": eps,
        "max_residual": rep.max_residual(),
        "max_commutator_bound": rep.commutator_bounds.iter().copied().fold(0.0, f64::max),
    });
    Ok(out)
}
