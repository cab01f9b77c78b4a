//! BMO seminorm, Zygmund functional, Riesz transforms and the Hardy norm
//! on the periodic grid.
//!
//! The BMO seminorm is the normalized mean oscillation
//! `sup_{x, r} |Q|^{-1} * integral_Q |f - f_Q|` over periodic boxes `Q` of
//! half-width `r` centered at grid nodes.

use std::io::{self, Write};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fields::{ensure_same_grid, half_width_nodes, lp_norm, periodic_window, BoxMeanTable, Grid, ScalarField};
use crate::spectral;

/// Dyadic radii `h, 2h, 4h, ..., L/2`.
pub fn dyadic_radii(grid: &Grid) -> Vec<f64> {
    let h = grid.spacing();
    let mut out = Vec::new();
    let mut k = 1usize;
    while 2 * k <= grid.points_per_axis() {
        out.push(k as f64 * h);
        k *= 2;
    }
    out
}

/// Precomputed state for evaluating `sum_Q |f - f_Q|` over many boxes.
///
/// Zero samples contribute `|f_Q|` each, so only the nonzero nodes inside a
/// box are visited; boxes that contain every nonzero node use the sorted
/// nonzero values instead. Compactly supported fields therefore cost far
/// less than a direct sum.
pub struct OscillationTable<'a> {
    field: &'a ScalarField,
    sums: BoxMeanTable,
    nonzero_counts: BoxMeanTable,
    nonzero_total: usize,
    sorted: Vec<f64>,
    sorted_prefix: Vec<f64>,
    // per grid row: (column, value) of nonzero nodes, sorted by column
    rows: Vec<Vec<(usize, f64)>>,
}

impl<'a> OscillationTable<'a> {
    pub fn new(field: &'a ScalarField) -> Self {
        let grid = field.grid();
        let n = grid.points_per_axis();
        let row_count = if grid.dim() == 1 { 1 } else { n };
        let mut rows = vec![Vec::new(); row_count];
        let mut sorted = Vec::new();
        for (k, &v) in field.values().iter().enumerate() {
            if v != 0.0 {
                let (i, j) = grid.axes(k);
                rows[j].push((i, v));
                sorted.push(v);
            }
        }
        sorted.sort_by(f64::total_cmp);
        let mut sorted_prefix = Vec::with_capacity(sorted.len() + 1);
        sorted_prefix.push(0.0);
        let mut acc = 0.0;
        for v in &sorted {
            acc += v;
            sorted_prefix.push(acc);
        }
        let indicator = field.map(|v| if v != 0.0 { 1.0 } else { 0.0 });
        Self {
            field,
            sums: BoxMeanTable::new(field),
            nonzero_counts: BoxMeanTable::new(&indicator),
            nonzero_total: sorted.len(),
            sorted,
            sorted_prefix,
            rows,
        }
    }

    /// `sum_{v nonzero} |v - m|` over all nonzero samples.
    fn all_nonzero_deviation(&self, m: f64) -> f64 {
        let s = self.sorted.len();
        let idx = self.sorted.partition_point(|&v| v < m);
        let below = m * idx as f64 - self.sorted_prefix[idx];
        let above = (self.sorted_prefix[s] - self.sorted_prefix[idx]) - m * (s - idx) as f64;
        below + above
    }

    fn row_deviation(row: &[(usize, f64)], (a, b): (usize, usize), m: f64) -> f64 {
        let lo = row.partition_point(|e| e.0 < a);
        let hi = row.partition_point(|e| e.0 < b);
        row[lo..hi].iter().map(|e| (e.1 - m).abs()).sum()
    }

    /// Mean oscillation `|Q|^{-1} sum_Q |f - f_Q|` of the box of half-width
    /// `half` nodes around node `center`.
    pub fn mean_oscillation(&self, center: usize, half: usize) -> f64 {
        let (nz, _) = self.nonzero_counts.box_sum(center, half);
        let nz = nz.round() as usize;
        if nz == 0 {
            return 0.0;
        }
        let (s, count) = self.sums.box_sum(center, half);
        let m = s / count as f64;
        let zeros = (count - nz) as f64 * m.abs();
        let nonzero = if nz == self.nonzero_total {
            self.all_nonzero_deviation(m)
        } else {
            let grid = self.field.grid();
            let n = grid.points_per_axis();
            let (ci, cj) = grid.axes(center);
            let (xs, nx, _) = periodic_window(ci, half, n);
            let mut acc = 0.0;
            if grid.dim() == 1 {
                for &xr in &xs[..nx] {
                    acc += Self::row_deviation(&self.rows[0], xr, m);
                }
            } else {
                let (ys, ny, _) = periodic_window(cj, half, n);
                for &(y0, y1) in &ys[..ny] {
                    for row in &self.rows[y0..y1] {
                        if row.is_empty() {
                            continue;
                        }
                        for &xr in &xs[..nx] {
                            acc += Self::row_deviation(row, xr, m);
                        }
                    }
                }
            }
            acc
        };
        (nonzero + zeros) / count as f64
    }

    /// Largest mean oscillation over all centers for one box half-width.
    pub fn sup_over_centers(&self, half: usize) -> f64 {
        (0..self.field.grid().len())
            .into_par_iter()
            .map(|c| self.mean_oscillation(c, half))
            .reduce(|| 0.0, f64::max)
    }
}

fn radii_to_half_widths(grid: &Grid, radii: &[f64]) -> Result<Vec<usize>> {
    if radii.is_empty() {
        return Err(LabError::arg("radii", "at least one radius required"));
    }
    let mut halves = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0 && r <= 0.5 * grid.period() * (1.0 + 1e-12)) {
            return Err(LabError::arg("radii", format!("radius {r} outside (0, L/2]")));
        }
        halves.push(half_width_nodes(grid, r));
    }
    halves.sort_unstable();
    halves.dedup();
    Ok(halves)
}

/// Normalized BMO seminorm: the supremum of mean oscillations over every
/// grid-node center and every radius in `radii`.
pub fn bmo_seminorm(field: &ScalarField, radii: &[f64]) -> Result<f64> {
    let halves = radii_to_half_widths(field.grid(), radii)?;
    let table = OscillationTable::new(field);
    Ok(halves
        .into_iter()
        .map(|k| table.sup_over_centers(k))
        .fold(0.0, f64::max))
}

/// [`bmo_seminorm`] over [`dyadic_radii`].
pub fn bmo_dyadic(field: &ScalarField) -> f64 {
    bmo_seminorm(field, &dyadic_radii(field.grid())).expect("dyadic radii are always valid")
}

#[inline]
fn ln_plus(a: f64) -> f64 {
    if a > 1.0 {
        a.ln()
    } else {
        0.0
    }
}

/// `integral |v| ln+ |v|`.
pub fn zygmund_functional(field: &ScalarField) -> f64 {
    let s: f64 = field
        .values()
        .iter()
        .map(|v| {
            let a = v.abs();
            a * ln_plus(a)
        })
        .sum();
    s * field.grid().cell_volume()
}

/// Periodic Riesz transform along `axis` (0-based): the Fourier multiplier
/// `-i xi_axis / |xi|`, zero on the mean mode. The Nyquist mode of `axis`
/// has no odd real-preserving value and is annihilated.
pub fn riesz_transform(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    let dim = field.grid().dim();
    if axis >= dim {
        return Err(LabError::arg("axis", format!("axis {axis} out of range for dimension {dim}")));
    }
    Ok(spectral::apply_multiplier(field, |m| {
        if m.is_zero() || m.nyquist[axis] {
            return Complex64::new(0.0, 0.0);
        }
        let kx = m.k[0] as f64;
        let ky = m.k[1] as f64;
        let norm = kx.hypot(ky);
        Complex64::new(0.0, -(m.k[axis] as f64) / norm)
    }))
}

/// `||g||_1 + sum_k ||R_k g||_1`.
pub fn hardy_norm(field: &ScalarField) -> f64 {
    let mut total = lp_norm(field, 1.0).expect("p = 1");
    for axis in 0..field.grid().dim() {
        let r = riesz_transform(field, axis).expect("axis in range");
        total += lp_norm(&r, 1.0).expect("p = 1");
    }
    total
}

/// `L1, L2, Linf, BMO, Zygmund, Hardy` of one field. The Hardy value is only
/// reported for zero-mean fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeminormReport {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub bmo: f64,
    pub zygmund: f64,
    pub hardy: Option<f64>,
}

impl SeminormReport {
    pub fn of(field: &ScalarField) -> Self {
        let linf = field.max_abs();
        let zero_mean = field.mean().abs() <= 1e-12 * linf.max(f64::MIN_POSITIVE);
        Self {
            l1: lp_norm(field, 1.0).expect("p = 1"),
            l2: lp_norm(field, 2.0).expect("p = 2"),
            linf,
            bmo: bmo_dyadic(field),
            zygmund: zygmund_functional(field),
            hardy: zero_mean.then(|| hardy_norm(field)),
        }
    }

    pub const CSV_HEADER: &'static str = "field_id,l1,l2,linf,bmo,zygmund,hardy";

    pub fn write_csv_row<W: Write>(&self, mut out: W, field_id: &str) -> io::Result<()> {
        let hardy = self.hardy.map(|h| format!("{h:e}")).unwrap_or_default();
        writeln!(
            out,
            "{field_id},{:e},{:e},{:e},{:e},{:e},{hardy}",
            self.l1, self.l2, self.linf, self.bmo, self.zygmund
        )
    }
}

/// Both sides of `|integral f g| <= ||f||_BMO ||g||_H1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `lhs > 0` while `rhs = 0`.
    pub violation: bool,
}

pub fn duality_gap(f: &ScalarField, g: &ScalarField) -> Result<DualityRecord> {
    ensure_same_grid(f.grid(), g.grid())?;
    let scale = g.max_abs().max(f64::MIN_POSITIVE);
    if g.mean().abs() > 1e-10 * scale {
        return Err(LabError::arg("g", format!("mean {} is not zero", g.mean())));
    }
    let lhs = f.inner(g)?.abs();
    let rhs = bmo_dyadic(f) * hardy_norm(g);
    // round-off floor of the pairing sum
    let floor = 1e-12 * f.max_abs() * lp_norm(g, 1.0)?;
    Ok(if rhs > 0.0 {
        DualityRecord {
            lhs,
            rhs,
            ratio: lhs / rhs,
            violation: false,
        }
    } else {
        DualityRecord {
            lhs,
            rhs,
            ratio: if lhs > floor { f64::INFINITY } else { 0.0 },
            violation: lhs > floor,
        }
    })
}

/// Half-width of the smallest periodic box (per axis) that contains every
/// nonzero node, or `None` for the zero field.
pub fn support_half_width(field: &ScalarField) -> Option<f64> {
    let grid = field.grid();
    let n = grid.points_per_axis();
    let mut occupied = vec![vec![false; n]; grid.dim()];
    let mut any = false;
    for (k, &v) in field.values().iter().enumerate() {
        if v != 0.0 {
            any = true;
            let (i, j) = grid.axes(k);
            occupied[0][i] = true;
            if grid.dim() == 2 {
                occupied[1][j] = true;
            }
        }
    }
    if !any {
        return None;
    }
    let mut widest = 0usize;
    for axis in &occupied {
        let idx: Vec<usize> = (0..n).filter(|&i| axis[i]).collect();
        let mut gap = idx[0] + n - idx[idx.len() - 1];
        for w in idx.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        widest = widest.max(n - gap);
    }
    Some(0.5 * widest as f64 * grid.spacing())
}

/// Errors unless the support fits in a box of half-width `L/8`.
pub(crate) fn ensure_compact_support(field: &ScalarField) -> Result<()> {
    if let Some(hw) = support_half_width(field) {
        let limit = field.grid().period() / 8.0;
        if hw > limit * (1.0 + 1e-12) {
            return Err(LabError::Support(format!(
                "support half-width {hw} exceeds L/8 = {limit}"
            )));
        }
    }
    Ok(())
}

/// Empirical constant in `||f||_1 <= |supp f| ||f||_BMO`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportRatio {
    pub l1: f64,
    pub support_measure: f64,
    pub bmo: f64,
    pub ratio: f64,
    /// Nonzero field with vanishing BMO seminorm.
    pub violation: bool,
}

pub fn support_l1_bmo_ratio(f: &ScalarField) -> Result<SupportRatio> {
    ensure_compact_support(f)?;
    let l1 = lp_norm(f, 1.0)?;
    let support_measure = f.support_size() as f64 * f.grid().cell_volume();
    if support_measure == 0.0 {
        return Ok(SupportRatio {
            l1,
            support_measure,
            bmo: 0.0,
            ratio: 0.0,
            violation: false,
        });
    }
    let bmo = bmo_dyadic(f);
    let (ratio, violation) = if bmo > 0.0 {
        (l1 / (support_measure * bmo), false)
    } else {
        (f64::INFINITY, true)
    };
    Ok(SupportRatio {
        l1,
        support_measure,
        bmo,
        ratio,
        violation,
    })
}
