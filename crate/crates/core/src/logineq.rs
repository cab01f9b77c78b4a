//! The logarithmic BMO-L1 pairing inequality
//!
//! `|integral f g| <= C0 ||f||_BMO ||g||_1 (|ln ||g||_1| + ln(e + ||g||_inf))`
//!
//! for compactly supported `f`: record evaluation, empirical fitting of `C0`
//! over seeded random suites, and checks of the intermediate steps
//! (BMO-Hardy duality, the Zygmund `L log L` bound, the pointwise log split).

use std::f64::consts::E;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fields::{ensure_same_grid, lp_norm, Grid, Point, ScalarField};
use crate::seminorms::{bmo_dyadic, duality_gap, ensure_compact_support, hardy_norm, riesz_transform, zygmund_functional};

/// `|ln l1| + ln(e + linf)`.
pub fn log_bracket(l1_g: f64, linf_g: f64) -> f64 {
    l1_g.ln().abs() + (E + linf_g).ln()
}

/// Both sides of the pairing inequality for one `(f, g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThmDRecord {
    pub lhs: f64,
    pub bmo_f: f64,
    pub l1_g: f64,
    pub linf_g: f64,
    pub rhs_without_c0: f64,
    pub ratio: f64,
}

impl ThmDRecord {
    pub const CSV_HEADER: &'static str = "pair_id,lhs,bmo_f,l1_g,linf_g,rhs_without_C0,ratio";

    pub fn write_csv_row<W: Write>(&self, mut out: W, pair_id: usize) -> io::Result<()> {
        writeln!(
            out,
            "{pair_id},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.lhs, self.bmo_f, self.l1_g, self.linf_g, self.rhs_without_c0, self.ratio
        )
    }
}

/// Evaluates both sides for `f` supported in a box of half-width `<= L/8`
/// and `g` not identically zero.
pub fn thm_d_record(f: &ScalarField, g: &ScalarField) -> Result<ThmDRecord> {
    ensure_same_grid(f.grid(), g.grid())?;
    ensure_compact_support(f)?;
    let linf_g = g.max_abs();
    if linf_g == 0.0 {
        return Err(LabError::arg("g", "identically zero (ln ||g||_1 undefined)"));
    }
    let l1_g = lp_norm(g, 1.0)?;
    let lhs = f.inner(g)?.abs();
    let bmo_f = bmo_dyadic(f);
    let rhs_without_c0 = bmo_f * l1_g * log_bracket(l1_g, linf_g);
    // a nonzero f with support <= L/8 always oscillates, so rhs = 0 means f = 0
    let ratio = if rhs_without_c0 > 0.0 { lhs / rhs_without_c0 } else { 0.0 };
    Ok(ThmDRecord {
        lhs,
        bmo_f,
        l1_g,
        linf_g,
        rhs_without_c0,
        ratio,
    })
}

/// Smallest `C0` that makes the inequality hold on a suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C0Fit {
    pub c0: f64,
    /// Index of the pair attaining `c0`.
    pub argmax: usize,
    pub records: Vec<ThmDRecord>,
}

impl C0Fit {
    pub fn from_records(records: Vec<ThmDRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(LabError::arg("suite", "empty suite"));
        }
        let (argmax, c0) = records
            .iter()
            .map(|r| r.ratio)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, r)| if r > best.1 { (i, r) } else { best });
        Ok(Self { c0, argmax, records })
    }

    /// `lhs <= c0 * rhs` on every record (up to round-off).
    pub fn holds(&self) -> bool {
        self.c0.is_finite()
            && self
                .records
                .iter()
                .all(|r| r.lhs <= self.c0 * r.rhs_without_c0 * (1.0 + 1e-12))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", ThmDRecord::CSV_HEADER)?;
        for (i, r) in self.records.iter().enumerate() {
            r.write_csv_row(&mut out, i)?;
        }
        Ok(())
    }
}

pub fn fit_c0(suite: &[(ScalarField, ScalarField)]) -> Result<C0Fit> {
    let records = suite
        .par_iter()
        .map(|(f, g)| thm_d_record(f, g))
        .collect::<Result<Vec<_>>>()?;
    C0Fit::from_records(records)
}

/// Bumps the suite generator; bump whenever the sampling below changes.
pub const SUITE_VERSION: u32 = 1;

/// Axis-aligned box `[lo, hi)` with a sign, in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedBox {
    pub lo: Point,
    pub hi: Point,
    pub sign: f64,
}

/// Periodic Gaussian `amplitude exp(-|x - center|^2 / width^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: Point,
    pub width: f64,
    pub amplitude: f64,
}

/// Resolution-independent description of one suite pair; sampling the same
/// parameters on finer grids approximates the same continuum functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairParams {
    pub f_boxes: Vec<SignedBox>,
    pub g_bumps: Vec<GaussianBump>,
}

fn inside(b: &SignedBox, p: Point, dim: usize) -> bool {
    (0..dim).all(|a| p[a] >= b.lo[a] && p[a] < b.hi[a])
}

impl PairParams {
    pub fn sample_f(&self, grid: &Grid) -> ScalarField {
        let dim = grid.dim();
        ScalarField::from_fn(grid, |p| {
            self.f_boxes.iter().filter(|b| inside(b, p, dim)).map(|b| b.sign).sum()
        })
    }

    pub fn sample_g(&self, grid: &Grid) -> ScalarField {
        ScalarField::from_fn(grid, |p| {
            self.g_bumps
                .iter()
                .map(|b| {
                    let d = grid.distance(p, b.center) / b.width;
                    b.amplitude * (-d * d).exp()
                })
                .sum()
        })
    }

    pub fn sample(&self, grid: &Grid) -> (ScalarField, ScalarField) {
        (self.sample_f(grid), self.sample_g(grid))
    }
}

/// Seeded random suite on a torus of side `period`: `f` is a sum of one to
/// four random-sign unit indicators of boxes inside the central box of
/// half-width `0.12 L` (so `supp f` stays within `L/8`), `g` a sum of one to
/// three Gaussians with widths in `[L/32, L/8]` and an overall amplitude
/// spread over four decades.
pub fn random_suite(seed: u64, pairs: usize, period: f64) -> Vec<PairParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = 0.5 * period;
    let reach = 0.12 * period;
    (0..pairs)
        .map(|_| {
            let nf = rng.gen_range(1..=4);
            let f_boxes = (0..nf)
                .map(|_| {
                    let mut lo = [0.0; 2];
                    let mut hi = [0.0; 2];
                    for a in 0..2 {
                        let side = rng.gen_range(period / 64.0..period / 8.0);
                        let start = rng.gen_range(c - reach..c + reach - side);
                        lo[a] = start;
                        hi[a] = start + side;
                    }
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    SignedBox { lo, hi, sign }
                })
                .collect();
            let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
            let ng = rng.gen_range(1..=3);
            let g_bumps = (0..ng)
                .map(|_| GaussianBump {
                    center: [rng.gen_range(c - 0.2 * period..c + 0.2 * period), rng.gen_range(c - 0.2 * period..c + 0.2 * period)],
                    width: rng.gen_range(period / 32.0..period / 8.0),
                    amplitude: scale * rng.gen_range(-1.0..1.0),
                })
                .collect();
            PairParams { f_boxes, g_bumps }
        })
        .collect()
}

/// Fits `C0` over a parameter suite sampled on `grid`, with `g` scaled by
/// `g_scale`. Pairs are sampled and evaluated one at a time.
pub fn fit_c0_on_grid(suite: &[PairParams], grid: &Grid, g_scale: f64) -> Result<C0Fit> {
    let records = suite
        .par_iter()
        .map(|p| {
            let (f, g) = p.sample(grid);
            thm_d_record(&f, &g.scale(g_scale))
        })
        .collect::<Result<Vec<_>>>()?;
    C0Fit::from_records(records)
}

/// `max_k ||R_k h||_1` against `1 + integral |h| ln+ |h|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZygmundRecord {
    pub lhs: f64,
    pub rhs_without_c: f64,
    pub ratio: f64,
}

pub fn zygmund_check(h: &ScalarField) -> ZygmundRecord {
    let lhs = (0..h.grid().dim())
        .map(|k| {
            let r = riesz_transform(h, k).expect("axis in range");
            lp_norm(&r, 1.0).expect("p = 1")
        })
        .fold(0.0, f64::max);
    let rhs_without_c = 1.0 + zygmund_functional(h);
    ZygmundRecord {
        lhs,
        rhs_without_c,
        ratio: lhs / rhs_without_c,
    }
}

/// Pointwise check of `|ln g| <= 2 ln(1 + ||g||_inf) + |ln lambda|` on every
/// node with `g >= lambda`.
pub fn log_split_check(g: &ScalarField, lambda: f64) -> Result<bool> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(LabError::arg("lambda", format!("{lambda} must be positive")));
    }
    if !(g.max() > 0.0) {
        return Err(LabError::arg("g", "must be positive somewhere"));
    }
    let bound = 2.0 * g.max_abs().ln_1p() + lambda.ln().abs();
    Ok(g.values()
        .iter()
        .filter(|&&v| v >= lambda)
        .all(|&v| v.ln().abs() <= bound))
}

/// Seeded `(g, lambda)` draws for the log split: positive fields with
/// log-uniform node values in `[1e-3, 1e3]`, and `lambda` alternating
/// between `||g||_1`, a log-uniform value, and a node value of `g` itself
/// (the adversarial case `g = lambda`).
pub fn log_split_draws(seed: u64, count: usize, grid: &Grid) -> Vec<(ScalarField, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let g = ScalarField::from_fn(grid, |_| 10f64.powf(rng.gen_range(-3.0..3.0)));
            let lambda = match i % 3 {
                0 => lp_norm(&g, 1.0).expect("p = 1"),
                1 => 10f64.powf(rng.gen_range(-4.0..4.0)),
                _ => g.values()[rng.gen_range(0..grid.len())],
            };
            (g, lambda)
        })
        .collect()
}

/// The two-step route through the Hardy space for one pair, with the zero-mean
/// part `g~` of `g` (the pairing only sees `g~` up to `mean(g) integral f`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainRecord {
    /// `|integral f g|`.
    pub pairing: f64,
    /// `|integral f g~|`.
    pub pairing_zero_mean: f64,
    /// `|mean(g) integral f|`.
    pub mean_term: f64,
    pub bmo_f: f64,
    /// `||g~||_H1`.
    pub hardy: f64,
    /// `(1 + n)(||g~||_1 + max_k ||R_k g~||_1)`.
    pub riesz_route: f64,
    /// `pairing_zero_mean / (bmo_f hardy)`.
    pub duality_ratio: f64,
}

impl ChainRecord {
    /// The Hardy norm is dominated by the Riesz route.
    pub fn hardy_step_holds(&self) -> bool {
        self.hardy <= self.riesz_route * (1.0 + 1e-12)
    }

    /// One-step pairing bounded by the two-step route with duality constant
    /// `c_dual`, plus the mean term.
    pub fn consistent_with(&self, c_dual: f64) -> bool {
        let bound = c_dual * self.bmo_f * self.riesz_route + self.mean_term;
        self.hardy_step_holds() && self.pairing <= bound * (1.0 + 1e-12) + 1e-14 * self.pairing.max(1.0)
    }
}

pub fn chain_record(f: &ScalarField, g: &ScalarField) -> Result<ChainRecord> {
    ensure_same_grid(f.grid(), g.grid())?;
    ensure_compact_support(f)?;
    let gt = g.zero_mean_part();
    let dual = duality_gap(f, &gt)?;
    let l1 = lp_norm(&gt, 1.0)?;
    let max_r = (0..g.grid().dim())
        .map(|k| lp_norm(&riesz_transform(&gt, k).expect("axis in range"), 1.0).expect("p = 1"))
        .fold(0.0, f64::max);
    let n = g.grid().dim() as f64;
    let bmo_f = bmo_dyadic(f);
    Ok(ChainRecord {
        pairing: f.inner(g)?.abs(),
        pairing_zero_mean: dual.lhs,
        mean_term: (g.mean() * f.integral()).abs(),
        bmo_f,
        hardy: hardy_norm(&gt),
        riesz_route: (1.0 + n) * (l1 + max_r),
        duality_ratio: dual.ratio,
    })
}

/// Suite-level summary of the intermediate steps on one grid.
#[derive(Debug, Clone, Serialize)]
pub struct ChainSummary {
    /// Largest duality ratio (the recorded duality constant).
    pub duality_max: f64,
    /// Largest Zygmund ratio over the normalized fields `g / ||g||_1`.
    pub zygmund_max: f64,
    pub records: Vec<ChainRecord>,
    pub zygmund: Vec<ZygmundRecord>,
}

impl ChainSummary {
    pub fn finite(&self) -> bool {
        self.duality_max.is_finite() && self.zygmund_max.is_finite()
    }

    /// Every pair is consistent with the recorded duality constant.
    pub fn consistent(&self) -> bool {
        self.records.iter().all(|r| r.consistent_with(self.duality_max))
    }
}

pub fn appendix_chain(suite: &[PairParams], grid: &Grid) -> Result<ChainSummary> {
    let rows = suite
        .par_iter()
        .map(|p| {
            let (f, g) = p.sample(grid);
            let l1 = lp_norm(&g, 1.0)?;
            let z = zygmund_check(&g.scale(1.0 / l1));
            Ok((chain_record(&f, &g)?, z))
        })
        .collect::<Result<Vec<_>>>()?;
    let (records, zygmund): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let duality_max = records.iter().map(|r: &ChainRecord| r.duality_ratio).fold(0.0, f64::max);
    let zygmund_max = zygmund.iter().map(|z: &ZygmundRecord| z.ratio).fold(0.0, f64::max);
    Ok(ChainSummary {
        duality_max,
        zygmund_max,
        records,
        zygmund,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Normalized mean oscillation by exhaustive summation over every node
    /// center and dyadic half-width (boxes of `2k + 1` nodes, clipped to the
    /// whole torus).
    fn brute_bmo(f: &ScalarField) -> f64 {
        let g = f.grid();
        let n = g.points_per_axis() as i64;
        let v = f.values();
        let mut best = 0.0_f64;
        let mut k = 1i64;
        while 2 * k <= n {
            let offs: Vec<i64> = if 2 * k + 1 >= n { (0..n).collect() } else { (-k..=k).collect() };
            for c in 0..g.len() {
                let (ci, cj) = g.axes(c);
                let mut vals = Vec::new();
                for &dj in &offs {
                    for &di in &offs {
                        let i = (ci as i64 + di).rem_euclid(n) as usize;
                        let j = (cj as i64 + dj).rem_euclid(n) as usize;
                        vals.push(v[g.index(i, j)]);
                    }
                }
                let m = vals.iter().sum::<f64>() / vals.len() as f64;
                best = best.max(vals.iter().map(|x| (x - m).abs()).sum::<f64>() / vals.len() as f64);
            }
            k *= 2;
        }
        best
    }

    fn grid(n: usize) -> Grid {
        Grid::new(2, 1.0, n).unwrap()
    }

    fn bump_g(g: &Grid) -> ScalarField {
        ScalarField::from_fn(g, |p| {
            let d = g.distance(p, [0.45, 0.52]);
            2.0 * (-d * d / 0.01).exp()
        })
    }

    #[test]
    fn zero_f_gives_zero_record() {
        let g = grid(32);
        let r = thm_d_record(&ScalarField::zeros(&g), &bump_g(&g)).unwrap();
        assert_eq!((r.lhs, r.ratio), (0.0, 0.0));
    }

    #[test]
    fn unit_mass_g_drops_first_bracket_term() {
        let g = grid(32);
        let f = ScalarField::from_fn(&g, |p| if g.distance(p, [0.5, 0.5]) < 0.06 { 1.0 } else { 0.0 });
        let one = ScalarField::constant(&g, 1.0);
        let r = thm_d_record(&f, &one).unwrap();
        assert!((r.l1_g - 1.0).abs() < 1e-14);
        let expected = r.bmo_f * (E + 1.0).ln();
        assert!((r.rhs_without_c0 - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn double_indicator_matches_direct_evaluation() {
        let g = grid(64);
        let h = g.spacing();
        // A = [0.44, 0.5)^2 ... as node ranges; B the adjacent box to the right
        let (a0, a1, b1) = (28usize, 32usize, 36usize);
        let (j0, j1) = (28usize, 32usize);
        let f = ScalarField::from_fn(&g, |p| {
            let (i, j) = ((p[0] / h).round() as usize, (p[1] / h).round() as usize);
            if (j0..j1).contains(&j) && (a0..a1).contains(&i) {
                1.0
            } else if (j0..j1).contains(&j) && (a1..b1).contains(&i) {
                -1.0
            } else {
                0.0
            }
        });
        assert!(f.sum().abs() < 1e-15);
        let gi = f.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
        let rec = thm_d_record(&f, &gi).unwrap();
        let lhs: f64 = f.values().iter().zip(gi.values()).map(|(a, b)| a * b).sum::<f64>() * h * h;
        let l1: f64 = gi.values().iter().map(|v| v.abs()).sum::<f64>() * h * h;
        let bmo = brute_bmo(&f);
        let rhs = bmo * l1 * (l1.ln().abs() + (E + 1.0).ln());
        assert!((rec.lhs - lhs).abs() <= 1e-14);
        assert!((rec.l1_g - l1).abs() <= 1e-14);
        assert_eq!(rec.linf_g, 1.0);
        assert!((rec.bmo_f - bmo).abs() <= 1e-12 * bmo, "{} vs {bmo}", rec.bmo_f);
        assert!((rec.rhs_without_c0 - rhs).abs() <= 1e-12 * rhs);
        assert!((rec.ratio - lhs / rhs).abs() <= 1e-12 * rec.ratio);
    }

    #[test]
    fn invalid_pairs_are_rejected() {
        let g = grid(32);
        let wide = ScalarField::from_fn(&g, |p| if g.distance(p, [0.5, 0.5]) < 0.3 { 1.0 } else { 0.0 });
        assert!(matches!(thm_d_record(&wide, &bump_g(&g)), Err(LabError::Support(_))));
        let f = ScalarField::from_fn(&g, |p| if g.distance(p, [0.5, 0.5]) < 0.06 { 1.0 } else { 0.0 });
        assert!(thm_d_record(&f, &ScalarField::zeros(&g)).is_err());
    }

    #[test]
    fn single_pair_suite_fits_its_ratio() {
        let g = grid(32);
        let suite = random_suite(3, 1, 1.0);
        let (f, gg) = suite[0].sample(&g);
        let r = thm_d_record(&f, &gg).unwrap();
        let fit = fit_c0(&[(f, gg)]).unwrap();
        assert_eq!((fit.c0, fit.argmax), (r.ratio, 0));
        assert!(fit.holds());
        assert!(fit_c0(&[]).is_err());
    }

    #[test]
    fn suite_is_reproducible_and_supported() {
        assert_eq!(random_suite(7, 10, 1.0), random_suite(7, 10, 1.0));
        assert_ne!(random_suite(7, 10, 1.0), random_suite(8, 10, 1.0));
        let g = grid(64);
        for p in random_suite(7, 30, 1.0) {
            let (f, gg) = p.sample(&g);
            assert!(ensure_compact_support(&f).is_ok());
            assert!(gg.max_abs() > 0.0);
        }
    }

    #[test]
    fn fitted_constant_bounded_across_g_scaling() {
        let g = grid(64);
        let suite = random_suite(11, 20, 1.0);
        let base = fit_c0_on_grid(&suite, &g, 1.0).unwrap().c0;
        let sweep = [1e-3, 1.0, 1e3]
            .iter()
            .map(|&l| fit_c0_on_grid(&suite, &g, l).unwrap().c0)
            .fold(0.0, f64::max);
        assert!(base > 0.0 && sweep.is_finite());
        assert!(sweep <= 10.0 * base, "{sweep} vs {base}");
    }

    #[test]
    fn zygmund_of_zero_and_single_mode() {
        let g = grid(64);
        assert_eq!(zygmund_check(&ScalarField::zeros(&g)).lhs, 0.0);
        let s = ScalarField::from_fn(&g, |p| (2.0 * PI * p[0]).sin());
        let z = zygmund_check(&s);
        // R_x sin = -cos, R_y sin = 0; |sin| <= 1 so the L log L term vanishes
        let h = g.spacing();
        let l1_cos: f64 = (0..g.len()).map(|k| (2.0 * PI * g.node(k)[0]).cos().abs()).sum::<f64>() * h * h;
        assert!((z.lhs - l1_cos).abs() <= 1e-10 * l1_cos);
        assert_eq!(z.rhs_without_c, 1.0);
    }

    #[test]
    fn log_split_trivial_and_adversarial() {
        let g = grid(16);
        assert!(log_split_check(&ScalarField::constant(&g, 1.0), 1.0).unwrap());
        for (gg, lambda) in log_split_draws(5, 12, &g) {
            assert!(log_split_check(&gg, lambda).unwrap());
        }
        let near = ScalarField::from_fn(&g, |p| 1e-3 * (1.0 + 1e-9 * p[0]));
        assert!(log_split_check(&near, 1e-3).unwrap());
        assert!(log_split_check(&near, 0.0).is_err());
        assert!(log_split_check(&ScalarField::constant(&g, -1.0), 1.0).is_err());
    }

    #[test]
    fn chain_steps_hold_on_suite() {
        let g = grid(64);
        let suite = random_suite(2, 12, 1.0);
        let s = appendix_chain(&suite, &g).unwrap();
        assert!(s.finite());
        assert!(s.records.iter().all(ChainRecord::hardy_step_holds));
        assert!(s.consistent());
    }

    #[test]
    fn csv_header_and_rows() {
        let g = grid(32);
        let fit = fit_c0_on_grid(&random_suite(1, 3, 1.0), &g, 1.0).unwrap();
        let mut buf = Vec::new();
        fit.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "pair_id,lhs,bmo_f,l1_g,linf_g,rhs_without_C0,ratio");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("1,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn ratio_is_invariant_under_f_scaling(seed in 0u64..500, lambda in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
            let g = grid(32);
            let p = &random_suite(seed, 1, 1.0)[0];
            let (f, gg) = p.sample(&g);
            let a = thm_d_record(&f, &gg).unwrap();
            let b = thm_d_record(&f.scale(lambda), &gg).unwrap();
            prop_assert!((a.ratio - b.ratio).abs() <= 1e-10 * a.ratio.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn log_split_holds_for_random_positive_fields(seed in 0u64..1000) {
            let g = Grid::new(1, 1.0, 64).unwrap();
            for (gg, lambda) in log_split_draws(seed, 3, &g) {
                prop_assert!(log_split_check(&gg, lambda).unwrap());
            }
        }
    }
}
