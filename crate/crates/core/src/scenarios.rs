//! The scenario catalog: velocity fields with known divergence, initial
//! data, and the measurement certificates that qualify each scenario.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fields::{Grid, Point, ScalarField, VectorField};
use crate::mollify::bump_profile;
use crate::seminorms::{bmo_dyadic, support_half_width};
use crate::transport::SteadyVelocity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    Smooth,
    SobolevW1p,
    BmoDiv,
    Logdiv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "constructor", rename_all = "snake_case")]
pub enum VelocityKind {
    /// `b = c`.
    Translation { c: Point },
    /// Rigid rotation with angular velocity `omega` for `r < r_in`, smoothly
    /// switched off by `r_out`; built from a stream function.
    Rotation { omega: f64, r_in: f64, r_out: f64 },
    /// `b = grad phi` with `phi = amp * bump(r / radius)`: a smooth sink.
    Compressive { amp: f64, radius: f64 },
    /// Radial field with `div b = A [ln+(rho / sqrt(r^2 + delta^2)) - kappa
    /// sin^2(pi (r - rho) / rho) 1{rho < r < 2 rho}]`. The tip width follows
    /// the grid: `ln(rho / delta_N) = tip_height * tip_growth^log2(N / base_points)`.
    Logdiv {
        amplitude: f64,
        rho: f64,
        tip_height: f64,
        tip_growth: f64,
        base_points: usize,
    },
    /// Divergence-free swirl with speed `r^alpha` near the center
    /// (`grad b ~ r^(alpha-1)`, so `b` is in `W^{1,p}` for `p < 2/(1-alpha)`).
    SobolevSpiral { alpha: f64, r_in: f64, r_out: f64 },
    /// Shear `b = (amplitude * tri(y / wavelength), 0)` with a zero-mean
    /// triangle wave: Lipschitz but not C^1, divergence-free.
    Sawtooth { amplitude: f64, wavelength: f64 },
}

/// A cataloged experiment setting on the unit-period torus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub name: &'static str,
    pub dim: usize,
    pub period: f64,
    pub default_points: usize,
    pub velocity: VelocityKind,
    /// Radius of the box containing `supp div b` (about the torus center).
    pub support_radius: f64,
    pub regularity: Regularity,
    pub t_final: f64,
    /// Stand-in constructions that are not certified by measurement.
    pub heuristic: bool,
    /// Center and radius of the compactly supported initial datum.
    pub initial_center: Point,
    pub initial_radius: f64,
    pub metadata: BTreeMap<&'static str, f64>,
}

pub fn catalog() -> Vec<ScenarioSpec> {
    let base = |name, velocity, support_radius, regularity, initial_center: Point, initial_radius| ScenarioSpec {
        name,
        dim: 2,
        period: 1.0,
        default_points: 256,
        velocity,
        support_radius,
        regularity,
        t_final: 1.0,
        heuristic: false,
        initial_center,
        initial_radius,
        metadata: BTreeMap::new(),
    };
    let mut spiral = base(
        "sobolev_spiral",
        VelocityKind::SobolevSpiral {
            alpha: 0.5,
            r_in: 0.2,
            r_out: 0.35,
        },
        0.0,
        Regularity::SobolevW1p,
        [0.6, 0.5],
        0.08,
    );
    spiral.heuristic = true;
    // b in W^{1,p} for every p < 2 / (1 - alpha)
    spiral.metadata.insert("sobolev_p_sup", 4.0);
    let mut sawtooth = base(
        "sawtooth",
        VelocityKind::Sawtooth {
            amplitude: 1.0,
            wavelength: 0.25,
        },
        0.0,
        Regularity::SobolevW1p,
        [0.65, 0.5],
        0.1,
    );
    sawtooth.metadata.insert("lipschitz", 4.0 / 0.25);
    vec![
        base(
            "translation",
            VelocityKind::Translation { c: [1.0, 0.5] },
            0.0,
            Regularity::Smooth,
            [0.5, 0.5],
            0.1,
        ),
        base(
            "rotation",
            VelocityKind::Rotation {
                omega: 2.0 * PI,
                r_in: 0.3,
                r_out: 0.45,
            },
            0.0,
            Regularity::Smooth,
            // straddles the edge of the rigid core so the shear acts on it
            [0.75, 0.5],
            0.15,
        ),
        base(
            "compressive",
            VelocityKind::Compressive {
                amp: 0.25 * E * 0.12 * 0.12,
                radius: 0.12,
            },
            0.12,
            Regularity::BmoDiv,
            [0.55, 0.5],
            0.1,
        ),
        base(
            "logdiv",
            VelocityKind::Logdiv {
                amplitude: 1.0,
                rho: 1.0 / 16.0,
                tip_height: 1.0,
                tip_growth: 1.55,
                base_points: 128,
            },
            0.125,
            Regularity::Logdiv,
            [0.53, 0.5],
            0.1,
        ),
        spiral,
        sawtooth,
    ]
}

pub fn find(name: &str) -> Result<ScenarioSpec> {
    catalog().into_iter().find(|s| s.name == name).ok_or_else(|| {
        let names: Vec<_> = catalog().iter().map(|s| s.name).collect();
        LabError::arg("scenario", format!("unknown scenario `{name}` (known: {})", names.join(", ")))
    })
}

/// Quintic smoothstep from 1 at `r_in` to 0 at `r_out`.
fn switch_off(r: f64, r_in: f64, r_out: f64) -> f64 {
    if r <= r_in {
        1.0
    } else if r >= r_out {
        0.0
    } else {
        let q = (r - r_in) / (r_out - r_in);
        1.0 - q * q * q * (10.0 - 15.0 * q + 6.0 * q * q)
    }
}

/// 16-point Gauss-Legendre rule on `[a, b]`.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 8] = [
        0.0950125098376374,
        0.2816035507792589,
        0.4580167776572274,
        0.6178762444026438,
        0.755404408355003,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const W: [f64; 8] = [
        0.1894506104550685,
        0.1826034150449236,
        0.1691565193950025,
        0.1495959888165767,
        0.1246289712555339,
        0.0951585116824928,
        0.0622535239386479,
        0.0271524594117541,
    ];
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    X.iter()
        .zip(W)
        .map(|(x, w)| w * (f(m - h * x) + f(m + h * x)))
        .sum::<f64>()
        * h
}

/// Stream function `psi(r) = int_0^r speed(s) ds` for a swirl whose speed
/// is `v0(s)` on `[0, r_in]` (with closed-form primitive `p0`) and
/// `v0(s) chi(s)` beyond.
fn swirl_stream(r: f64, r_in: f64, r_out: f64, p0: impl Fn(f64) -> f64, v0: impl Fn(f64) -> f64) -> f64 {
    if r <= r_in {
        return p0(r);
    }
    let top = r.min(r_out);
    p0(r_in) + gauss_legendre(|s| v0(s) * switch_off(s, r_in, r_out), r_in, top)
}

/// Divergence-free field `b = (-d psi/dy, d psi/dx)` from centered
/// differences of nodal stream-function values, so that the centered
/// discrete divergence vanishes identically.
fn from_stream(grid: &Grid, psi: impl Fn(f64) -> f64) -> VectorField {
    let c = grid.center();
    let values: Vec<f64> = (0..grid.len()).map(|k| psi(grid.distance(grid.node(k), c))).collect();
    let n = grid.points_per_axis();
    let inv = 0.5 / grid.spacing();
    VectorField::from_fn(grid, |p| {
        let k = grid.nearest_node(p);
        let (i, j) = grid.axes(k);
        let at = |i: usize, j: usize| values[grid.index(i % n, j % n)];
        [
            -(at(i, j + 1) - at(i, j + n - 1)) * inv,
            (at(i + 1, j) - at(i + n - 1, j)) * inv,
        ]
    })
}

/// Zero-mean triangle wave of unit amplitude and period `wavelength`.
fn triangle_wave(y: f64, wavelength: f64) -> f64 {
    let s = (y / wavelength).rem_euclid(1.0);
    1.0 - 4.0 * (s - 0.5).abs()
}

/// Radial profile machinery for the `logdiv` field.
#[derive(Debug, Clone, Copy)]
pub struct LogdivProfile {
    pub amplitude: f64,
    pub rho: f64,
    pub delta: f64,
    kappa: f64,
    log_edge: f64,
}

impl LogdivProfile {
    pub fn new(amplitude: f64, rho: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < rho) {
            return Err(LabError::arg("delta", format!("{delta} must lie in (0, rho = {rho})")));
        }
        let log_edge = (rho * rho - delta * delta).sqrt();
        let mut p = Self {
            amplitude,
            rho,
            delta,
            kappa: 0.0,
            log_edge,
        };
        p.kappa = p.log_primitive(log_edge) / p.annulus_primitive(2.0 * rho);
        Ok(p)
    }

    /// `ln+(rho / sqrt(r^2 + delta^2))` part.
    fn log_part(&self, r: f64) -> f64 {
        if r >= self.log_edge {
            0.0
        } else {
            (self.rho / (r * r + self.delta * self.delta).sqrt()).ln()
        }
    }

    fn annulus_part(&self, r: f64) -> f64 {
        if r <= self.rho || r >= 2.0 * self.rho {
            0.0
        } else {
            (PI * (r - self.rho) / self.rho).sin().powi(2)
        }
    }

    /// `int_0^r s log_part(s) ds`.
    fn log_primitive(&self, r: f64) -> f64 {
        let m = r.min(self.log_edge);
        let d2 = self.delta * self.delta;
        let q = m * m + d2;
        0.5 * m * m * self.rho.ln() - 0.25 * (q * q.ln() - d2 * d2.ln() - m * m)
    }

    /// `int_rho^r s annulus_part(s) ds`.
    fn annulus_primitive(&self, r: f64) -> f64 {
        let rho = self.rho;
        if r <= rho {
            return 0.0;
        }
        let r = r.min(2.0 * rho);
        let k = 2.0 * PI / rho;
        let th = k * (r - rho);
        0.25 * (r * r - rho * rho) - 0.5 * (r * th.sin() / k + th.cos() / (k * k) - 1.0 / (k * k))
    }

    /// `div b` as a function of the distance to the center.
    pub fn divergence(&self, r: f64) -> f64 {
        self.amplitude * (self.log_part(r) - self.kappa * self.annulus_part(r))
    }

    /// Radial speed `(1/r) int_0^r s div(s) ds`.
    pub fn radial_speed(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let flux = self.log_primitive(r) - self.kappa * self.annulus_primitive(r);
        self.amplitude * flux / r
    }
}

impl ScenarioSpec {
    pub fn grid(&self, points_per_axis: usize) -> Result<Grid> {
        Grid::new(self.dim, self.period, points_per_axis)
    }

    /// The `logdiv` profile at the resolution of `grid`.
    pub fn logdiv_profile(&self, grid: &Grid) -> Option<LogdivProfile> {
        match self.velocity {
            VelocityKind::Logdiv {
                amplitude,
                rho,
                tip_height,
                tip_growth,
                base_points,
            } => {
                let level = (grid.points_per_axis() as f64 / base_points as f64).log2();
                let delta = rho * (-tip_height * tip_growth.powf(level)).exp();
                Some(LogdivProfile::new(amplitude, rho, delta).expect("delta < rho for positive tip height"))
            }
            _ => None,
        }
    }

    /// Nodal samples of `b`.
    pub fn velocity_field(&self, grid: &Grid) -> Result<VectorField> {
        self.check_grid(grid)?;
        let c = grid.center();
        Ok(match self.velocity {
            VelocityKind::Translation { c: v } => VectorField::constant(grid, v),
            VelocityKind::Rotation { omega, r_in, r_out } => from_stream(grid, |r| {
                swirl_stream(r, r_in, r_out, |s| 0.5 * omega * s * s, |s| omega * s)
            }),
            VelocityKind::SobolevSpiral { alpha, r_in, r_out } => from_stream(grid, |r| {
                swirl_stream(r, r_in, r_out, |s| s.powf(alpha + 1.0) / (alpha + 1.0), |s| s.powf(alpha))
            }),
            VelocityKind::Compressive { amp, radius } => VectorField::from_fn(grid, |p| {
                let d = grid.displacement(p, c);
                let s = d[0].hypot(d[1]) / radius;
                if s >= 1.0 {
                    return [0.0, 0.0];
                }
                // grad(amp f(s)) = amp f'(s)/s * d / radius^2, f'(s)/s = -2 f / q^2
                let q = 1.0 - s * s;
                let g = -2.0 * amp * bump_profile(s) / (q * q) / (radius * radius);
                [g * d[0], g * d[1]]
            }),
            VelocityKind::Sawtooth { amplitude, wavelength } => {
                VectorField::from_fn(grid, |p| [amplitude * triangle_wave(p[1], wavelength), 0.0])
            }
            VelocityKind::Logdiv { .. } => {
                let prof = self.logdiv_profile(grid).expect("logdiv scenario");
                VectorField::from_fn(grid, |p| {
                    let d = grid.displacement(p, c);
                    let r = d[0].hypot(d[1]);
                    if r == 0.0 {
                        return [0.0, 0.0];
                    }
                    let v = prof.radial_speed(r) / r;
                    [v * d[0], v * d[1]]
                })
            }
        })
    }

    /// Analytic `div b` sampled at the nodes.
    pub fn divergence_field(&self, grid: &Grid) -> Result<ScalarField> {
        self.check_grid(grid)?;
        let c = grid.center();
        Ok(match self.velocity {
            VelocityKind::Translation { .. }
            | VelocityKind::Rotation { .. }
            | VelocityKind::SobolevSpiral { .. }
            | VelocityKind::Sawtooth { .. } => {
                ScalarField::zeros(grid)
            }
            VelocityKind::Compressive { amp, radius } => ScalarField::from_fn(grid, |p| {
                let s = grid.distance(p, c) / radius;
                if s >= 1.0 {
                    return 0.0;
                }
                // amp (f'' + f'/s) / radius^2 with f = exp(-1/q)
                let q = 1.0 - s * s;
                let f = bump_profile(s);
                let f2 = f * (4.0 * s * s / q.powi(4) - 2.0 / (q * q) - 8.0 * s * s / q.powi(3));
                let f1_over_s = -2.0 * f / (q * q);
                amp * (f2 + f1_over_s) / (radius * radius)
            }),
            VelocityKind::Logdiv { .. } => {
                let prof = self.logdiv_profile(grid).expect("logdiv scenario");
                ScalarField::from_fn(grid, |p| prof.divergence(grid.distance(p, c)))
            }
        })
    }

    pub fn velocity(&self, grid: &Grid) -> Result<SteadyVelocity> {
        SteadyVelocity::new(self.velocity_field(grid)?, self.divergence_field(grid)?)
    }

    /// Unit-height compact bump at `initial_center`.
    pub fn initial_data(&self, grid: &Grid) -> Result<ScalarField> {
        self.check_grid(grid)?;
        Ok(ScalarField::from_fn(grid, |p| {
            E * bump_profile(grid.distance(p, self.initial_center) / self.initial_radius)
        }))
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.dim || grid.period() != self.period {
            return Err(LabError::InvalidGrid(format!(
                "scenario `{}` lives on a {}-dimensional torus of period {}",
                self.name, self.dim, self.period
            )));
        }
        Ok(())
    }

    /// Numerical form of the structural assumptions: `supp div b` inside the
    /// declared box, `L >= 8 R`, and `int |b| / (1 + |x|)` finite.
    pub fn check_assumptions(&self, grid: &Grid) -> Result<AssumptionCheck> {
        let b = self.velocity_field(grid)?;
        let div = self.divergence_field(grid)?;
        let measured = support_half_width(&div.map(|v| if v.abs() > 0.0 { v } else { 0.0 }));
        let support_ok = measured.is_none_or(|w| w <= self.support_radius + grid.spacing());
        let c = grid.center();
        let decay_integral = b
            .magnitude()
            .values()
            .iter()
            .enumerate()
            .map(|(k, m)| m / (1.0 + grid.distance(grid.node(k), c)))
            .sum::<f64>()
            * grid.cell_volume();
        Ok(AssumptionCheck {
            measured_support: measured.unwrap_or(0.0),
            support_ok,
            torus_ok: 8.0 * self.support_radius <= self.period * (1.0 + 1e-12),
            decay_integral,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub measured_support: f64,
    pub support_ok: bool,
    pub torus_ok: bool,
    pub decay_integral: f64,
}

impl AssumptionCheck {
    pub fn holds(&self) -> bool {
        self.support_ok && self.torus_ok && self.decay_integral.is_finite()
    }
}

/// Refinement measurements of `div b` across several resolutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementCertificate {
    pub scenario: String,
    pub points: Vec<usize>,
    pub bmo: Vec<f64>,
    pub linf: Vec<f64>,
}

impl RefinementCertificate {
    /// `max bmo / min bmo`.
    pub fn bmo_spread(&self) -> f64 {
        let max = self.bmo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.bmo.iter().copied().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            max / min
        } else if max == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }

    /// `linf[k+1] / linf[k]` per doubling.
    pub fn linf_growth(&self) -> Vec<f64> {
        self.linf.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// `max linf / min linf - 1`.
    pub fn linf_variation(&self) -> f64 {
        let max = self.linf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.linf.iter().copied().fold(f64::INFINITY, f64::min);
        max / min - 1.0
    }

    /// The `logdiv` contrast: BMO within factor 2, sup norm growing by at
    /// least 1.5 per doubling.
    pub fn logdiv_contrast_holds(&self) -> bool {
        self.bmo_spread() <= 2.0 && self.linf_growth().iter().all(|&g| g >= 1.5)
    }
}

pub fn refinement_certificate(spec: &ScenarioSpec, points: &[usize]) -> Result<RefinementCertificate> {
    let mut bmo = Vec::with_capacity(points.len());
    let mut linf = Vec::with_capacity(points.len());
    for &n in points {
        let div = spec.divergence_field(&spec.grid(n)?)?;
        bmo.push(bmo_dyadic(&div));
        linf.push(div.max_abs());
    }
    Ok(RefinementCertificate {
        scenario: spec.name.to_string(),
        points: points.to_vec(),
        bmo,
        linf,
    })
}

/// Resolutions used by the `logdiv` certificate.
pub const LOGDIV_CERTIFICATE_POINTS: [usize; 3] = [128, 256, 512];
