//! `lab check`: the catalog certificates and solver/ODE invariants at a
//! modest resolution. Prints one PASS/FAIL line per check.

use anyhow::Result;
use transport_lab::fields::Grid;
use transport_lab::logineq::{fit_c0_on_grid, log_split_check, log_split_draws, random_suite};
use transport_lab::osgood::{comparison_draws, comparison_ode, model_closed_form, osgood_model};
use transport_lab::scenarios::{catalog, find, refinement_certificate, LOGDIV_CERTIFICATE_POINTS};
use transport_lab::transport::{max_stable_dt, stream_semilagrangian, stream_upwind_fv, TimeGrid};

use crate::harness::INVARIANT_TOL;

const SEED: u64 = 7;

fn line(name: &str, pass: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

pub fn run(n: usize) -> Result<bool> {
    let mut all = true;

    for spec in catalog() {
        let chk = spec.check_assumptions(&spec.grid(n)?)?;
        all &= line(&format!("assumptions/{}", spec.name), chk.holds(), format!("{chk:?}"));
    }

    let cert = refinement_certificate(&find("logdiv")?, &LOGDIV_CERTIFICATE_POINTS)?;
    all &= line(
        "certificate/logdiv",
        cert.logdiv_contrast_holds(),
        format!("bmo spread {:.3}, linf growth {:?}", cert.bmo_spread(), cert.linf_growth()),
    );
    let cert = refinement_certificate(&find("compressive")?, &LOGDIV_CERTIFICATE_POINTS)?;
    all &= line(
        "certificate/compressive",
        cert.linf_variation() <= 0.05,
        format!("linf variation {:.2e}", cert.linf_variation()),
    );

    for spec in catalog() {
        let grid = spec.grid(n)?;
        let b = spec.velocity(&grid)?;
        let u0 = spec.initial_data(&grid)?;
        let (lo, hi) = (u0.min() - INVARIANT_TOL, u0.max() + INVARIANT_TOL);
        let mut ok = true;
        stream_semilagrangian(&b, &u0, TimeGrid::new(spec.t_final, 2 * n)?, |_, u| {
            ok &= u.min() >= lo && u.max() <= hi
        })?;
        all &= line(&format!("max_principle/{}", spec.name), ok, format!("N={n}, steps={}", 2 * n));

        if spec.divergence_field(&grid)?.max_abs() == 0.0 {
            let field = spec.velocity_field(&grid)?;
            let steps = (spec.t_final / max_stable_dt(&field)).ceil().max(1.0) as usize;
            let m0 = u0.integral();
            let mut drift: f64 = 0.0;
            stream_upwind_fv(&field, &u0, TimeGrid::new(spec.t_final, steps)?, |_, u| {
                drift = drift.max(((u.integral() - m0) / m0).abs())
            })?;
            all &= line(
                &format!("mass/{}", spec.name),
                drift <= INVARIANT_TOL,
                format!("relative drift {drift:.1e}"),
            );
        }
    }

    let zero = osgood_model(0.0, 10.0)?;
    let mut rel: f64 = 0.0;
    for x0 in [1e-4, 1e-8] {
        let tr = osgood_model(x0, 10.0)?;
        for (t, v) in tr.times.iter().zip(&tr.values) {
            let exact = model_closed_form(x0, *t);
            rel = rel.max(((v - exact) / exact).abs());
        }
    }
    let zero_ok = zero.values.iter().all(|&v| v == 0.0);
    all &= line(
        "osgood_model",
        zero_ok && rel <= 1e-8,
        format!("zero fixed {zero_ok}, max rel err {rel:.1e}"),
    );

    let mut worst: f64 = 0.0;
    for (d, p) in comparison_draws(SEED, 50, 1.0, 100) {
        let tr = comparison_ode(&d, p)?;
        for (b, bound) in tr.values.iter().zip(tr.bounds()) {
            worst = worst.max(b / bound);
        }
    }
    all &= line(
        "comparison_vs_bound",
        worst <= 1.0 + 1e-9,
        format!("max B/bound {worst:.9}"),
    );

    let grid = Grid::new(2, 1.0, n)?;
    let fit = fit_c0_on_grid(&random_suite(SEED, 100, 1.0), &grid, 1.0)?;
    all &= line(
        "pairing_suite",
        fit.holds() && fit.c0.is_finite(),
        format!("C0 {:.4} at N={n}", fit.c0),
    );
    let mut split = 0;
    let draws = log_split_draws(SEED, 50, &grid);
    for (g, lambda) in &draws {
        split += usize::from(log_split_check(g, *lambda)?);
    }
    all &= line("log_split", split == draws.len(), format!("{split}/{}", draws.len()));

    Ok(all)
}
