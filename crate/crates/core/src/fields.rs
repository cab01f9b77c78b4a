//! Periodic grids and the sampled fields that live on them.
//!
//! A [`Grid`] is a uniform node lattice on the torus `[0, L)^dim` with
//! `N` nodes per axis. Node `(i, j)` sits at `(i h, j h)` and is stored at
//! flat index `i + N j`, so axis 0 is the fastest-varying one. Integrals are
//! midpoint sums `h^dim * sum(values)`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A point on the torus. In one dimension the second coordinate is zero.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    period: f64,
    points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, period: f64, points_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(LabError::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(LabError::InvalidGrid(format!("period {period} must be positive")));
        }
        if points_per_axis < 8 {
            return Err(LabError::InvalidGrid(format!(
                "{points_per_axis} points per axis, need at least 8"
            )));
        }
        if !points_per_axis.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "{points_per_axis} points per axis is not a power of two"
            )));
        }
        Ok(Self {
            dim,
            period,
            points_per_axis,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.period / self.points_per_axis as f64
    }

    /// Total node count `N^dim`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^dim` of a single node.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Torus volume `L^dim`.
    #[inline]
    pub fn volume(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    /// Center of the fundamental domain, `(L/2, L/2)`.
    pub fn center(&self) -> Point {
        let c = 0.5 * self.period;
        if self.dim == 1 {
            [c, 0.0]
        } else {
            [c, c]
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.points_per_axis * j
    }

    /// Axis indices `(i, j)` of a flat index (`j = 0` in 1D).
    #[inline]
    pub fn axes(&self, index: usize) -> (usize, usize) {
        let n = self.points_per_axis;
        (index % n, index / n)
    }

    #[inline]
    pub fn node(&self, index: usize) -> Point {
        let (i, j) = self.axes(index);
        let h = self.spacing();
        [i as f64 * h, j as f64 * h]
    }

    /// Minimal signed displacement `a - b` on a circle of length `L`.
    #[inline]
    pub fn wrap_delta(&self, a: f64, b: f64) -> f64 {
        let l = self.period;
        let mut d = (a - b) % l;
        if d > 0.5 * l {
            d -= l;
        } else if d < -0.5 * l {
            d += l;
        }
        d
    }

    /// Periodic displacement vector from `origin` to `p`.
    pub fn displacement(&self, p: Point, origin: Point) -> Point {
        if self.dim == 1 {
            [self.wrap_delta(p[0], origin[0]), 0.0]
        } else {
            [self.wrap_delta(p[0], origin[0]), self.wrap_delta(p[1], origin[1])]
        }
    }

    /// Euclidean periodic distance.
    pub fn distance(&self, p: Point, origin: Point) -> f64 {
        let d = self.displacement(p, origin);
        d[0].hypot(d[1])
    }

    /// Nearest node to an arbitrary point.
    pub fn nearest_node(&self, p: Point) -> usize {
        let n = self.points_per_axis as f64;
        let h = self.spacing();
        let snap = |x: f64| -> usize { ((x / h).round().rem_euclid(n)) as usize };
        if self.dim == 1 {
            snap(p[0])
        } else {
            self.index(snap(p[0]), snap(p[1]))
        }
    }

    /// Same lattice with twice the resolution.
    pub fn refined(&self) -> Result<Self> {
        Grid::new(self.dim, self.period, self.points_per_axis * 2)
    }

    /// JSON-style header `{"dim":..,"period":..,"points_per_axis":..}`.
    pub fn header_json(&self) -> String {
        format!(
            "{{\"dim\":{},\"period\":{},\"points_per_axis\":{}}}",
            self.dim, self.period, self.points_per_axis
        )
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::arg(
                "values",
                format!("expected {} samples, got {}", grid.len(), values.len()),
            ));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(LabError::NonFinite { index, value });
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values produced by finite arithmetic on
    /// finite inputs.
    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self {
            grid: *grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at every node. Panics on a non-finite sample, which is a
    /// bug in the caller's closed form.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(Point) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|k| f(grid.node(k))).collect();
        Self::new(*grid, values).expect("sampled function produced a non-finite value")
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(Self::from_vec_unchecked(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scale(&self, lambda: f64) -> Self {
        self.map(|v| lambda * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Midpoint-rule integral over the torus.
    pub fn integral(&self) -> f64 {
        self.sum() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    /// The field minus its mean.
    pub fn zero_mean_part(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `integral(f * g)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Discrete `L_p` norm `(h^dim sum |v|^p)^(1/p)`; `p = f64::INFINITY`
    /// gives the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    /// Number of nodes with a nonzero value.
    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// `index,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{k},{v:e}")?;
        }
        Ok(())
    }
}

pub(crate) fn ensure_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(LabError::GridMismatch)
    }
}

/// One [`ScalarField`] per axis, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(LabError::arg("components", "at least one component required"));
        };
        let grid = *first.grid();
        if components.len() != grid.dim() {
            return Err(LabError::arg(
                "components",
                format!("{} components for a {}-dimensional grid", components.len(), grid.dim()),
            ));
        }
        for c in &components {
            ensure_same_grid(&grid, c.grid())?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn constant(grid: &Grid, c: Point) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|k| ScalarField::constant(grid, c[k]))
                .collect(),
        }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(Point) -> Point) -> Self {
        let samples: Vec<Point> = (0..grid.len()).map(|k| f(grid.node(k))).collect();
        let components = (0..grid.dim())
            .map(|axis| {
                ScalarField::new(*grid, samples.iter().map(|p| p[axis]).collect())
                    .expect("sampled vector field produced a non-finite value")
            })
            .collect();
        Self { components }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    #[inline]
    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    #[inline]
    pub fn at_node(&self, index: usize) -> Point {
        let mut p = [0.0; 2];
        for (axis, c) in self.components.iter().enumerate() {
            p[axis] = c.values()[index];
        }
        p
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scale(lambda)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_same_grid(self.grid(), other.grid())?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect::<Result<_>>()?,
        })
    }

    /// Pointwise `b . v`.
    pub fn dot(&self, other: &Self) -> Result<ScalarField> {
        ensure_same_grid(self.grid(), other.grid())?;
        let mut acc = ScalarField::zeros(self.grid());
        for (a, b) in self.components.iter().zip(&other.components) {
            acc = acc.add(&a.mul(b)?)?;
        }
        Ok(acc)
    }

    /// Pointwise Euclidean modulus.
    pub fn magnitude(&self) -> ScalarField {
        let grid = *self.grid();
        let values = (0..grid.len())
            .map(|k| {
                let p = self.at_node(k);
                p[0].hypot(p[1])
            })
            .collect();
        ScalarField::from_vec_unchecked(grid, values)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude().max()
    }
}

/// Discrete `L_p` norm of a field; see [`ScalarField::lp_norm`].
pub fn lp_norm(field: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(LabError::arg("p", format!("exponent {p} must be >= 1")));
    }
    if p.is_infinite() {
        return Ok(field.max_abs());
    }
    let w = field.grid().cell_volume();
    let v = field.values();
    let s = if p == 1.0 {
        v.iter().map(|x| x.abs()).sum::<f64>() * w
    } else if p == 2.0 {
        return Ok((v.iter().map(|x| x * x).sum::<f64>() * w).sqrt());
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>() * w
    };
    Ok(if p == 1.0 { s } else { s.powf(1.0 / p) })
}

/// Contiguous index ranges `[start, end)` covered by a periodic window of
/// half-width `half` around `center` on a circle of `n` nodes, plus the
/// covered node count. Windows wider than the circle cover it exactly once.
#[inline]
pub(crate) fn periodic_window(center: usize, half: usize, n: usize) -> ([(usize, usize); 2], usize, usize) {
    let width = 2 * half + 1;
    if width >= n {
        return ([(0, n), (0, 0)], 1, n);
    }
    let start = (center + n - half % n) % n;
    let end = start + width;
    if end <= n {
        ([(start, end), (0, 0)], 1, width)
    } else {
        ([(start, n), (0, end - n)], 2, width)
    }
}

/// Prefix sums of a field for O(1) sums and means over periodic boxes.
///
/// A box of half-width `k` nodes around node `c` covers the nodes whose
/// periodic index distance to `c` is at most `k` along every axis.
#[derive(Debug, Clone)]
pub struct BoxMeanTable {
    grid: Grid,
    // (N+1)^dim cumulative sums, axis 0 fastest
    prefix: Vec<f64>,
}

impl BoxMeanTable {
    pub fn new(field: &ScalarField) -> Self {
        let grid = *field.grid();
        let n = grid.points_per_axis();
        let v = field.values();
        let prefix = if grid.dim() == 1 {
            let mut p = vec![0.0; n + 1];
            for i in 0..n {
                p[i + 1] = p[i] + v[i];
            }
            p
        } else {
            let m = n + 1;
            let mut p = vec![0.0; m * m];
            for j in 0..n {
                let mut row = 0.0;
                for i in 0..n {
                    row += v[i + n * j];
                    p[(i + 1) + m * (j + 1)] = p[(i + 1) + m * j] + row;
                }
            }
            p
        };
        Self { grid, prefix }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    fn rect_sum(&self, (x0, x1): (usize, usize), (y0, y1): (usize, usize)) -> f64 {
        let m = self.grid.points_per_axis() + 1;
        let p = &self.prefix;
        p[x1 + m * y1] - p[x0 + m * y1] - p[x1 + m * y0] + p[x0 + m * y0]
    }

    /// Sum of samples and node count of the periodic box of half-width
    /// `half` nodes around node `center`.
    #[inline]
    pub fn box_sum(&self, center: usize, half: usize) -> (f64, usize) {
        let n = self.grid.points_per_axis();
        let (ci, cj) = self.grid.axes(center);
        let (xs, nx, cx) = periodic_window(ci, half, n);
        if self.grid.dim() == 1 {
            let s: f64 = xs[..nx].iter().map(|&(a, b)| self.prefix[b] - self.prefix[a]).sum();
            return (s, cx);
        }
        let (ys, ny, cy) = periodic_window(cj, half, n);
        let mut s = 0.0;
        for &xr in &xs[..nx] {
            for &yr in &ys[..ny] {
                s += self.rect_sum(xr, yr);
            }
        }
        (s, cx * cy)
    }

    /// Arithmetic mean of samples over the box of half-width `half` nodes.
    #[inline]
    pub fn mean(&self, center: usize, half: usize) -> f64 {
        let (s, c) = self.box_sum(center, half);
        s / c as f64
    }

    /// Mean over the box of physical half-width `r` around the node
    /// nearest to `x`.
    pub fn mean_at(&self, x: Point, r: f64) -> f64 {
        self.mean(self.grid.nearest_node(x), half_width_nodes(&self.grid, r))
    }
}

/// Half-width in nodes of a box with physical half-width `r`.
#[inline]
pub fn half_width_nodes(grid: &Grid, r: f64) -> usize {
    ((r / grid.spacing()) + 1e-9).floor().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn make_grid_examples() {
        let g = Grid::new(1, 2.0 * PI, 256).unwrap();
        assert_eq!(g.spacing(), 2.0 * PI / 256.0);
        let g = Grid::new(2, 8.0, 128).unwrap();
        assert_eq!(g.len(), 128 * 128);
        assert!(matches!(Grid::new(1, 1.0, 100), Err(LabError::InvalidGrid(_))));
        assert!(Grid::new(1, 1.0, 4).is_err());
        assert!(Grid::new(1, 0.0, 16).is_err());
        assert!(Grid::new(1, -1.0, 16).is_err());
        assert!(Grid::new(3, 1.0, 16).is_err());
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(
            ScalarField::new(g, v),
            Err(LabError::NonFinite { index: 3, .. })
        ));
        assert!(ScalarField::new(g, vec![0.0; 7]).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        let g = Grid::new(2, 3.0, 16).unwrap();
        let c = ScalarField::constant(&g, -2.5);
        assert!((lp_norm(&c, 1.0).unwrap() - 2.5 * 9.0).abs() < 1e-12);
        let z = ScalarField::zeros(&g);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&z, p).unwrap(), 0.0);
        }
        assert!(lp_norm(&z, 0.5).is_err());
        assert!(lp_norm(&z, f64::NAN).is_err());

        let l = 2.0;
        let g = Grid::new(1, l, 256).unwrap();
        let s = ScalarField::from_fn(&g, |p| (2.0 * PI * p[0] / l).sin());
        let exact = (l / 2.0).sqrt();
        assert!((lp_norm(&s, 2.0).unwrap() - exact).abs() / exact < 1e-10);
        assert!((lp_norm(&s, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lp_norm_homogeneity_and_p_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = Grid::new(2, 1.7, 16).unwrap();
        for _ in 0..20 {
            let f = ScalarField::new(g, (0..g.len()).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
            let lambda: f64 = rng.gen_range(-10.0..10.0);
            for p in [1.0, 2.0, 4.0, f64::INFINITY] {
                let a = lp_norm(&f.scale(lambda), p).unwrap();
                let b = lambda.abs() * lp_norm(&f, p).unwrap();
                assert!((a - b).abs() <= 1e-12 * b);
            }
            let v = g.volume();
            let means: Vec<f64> = [1.0, 2.0, 4.0]
                .iter()
                .map(|&p| lp_norm(&f, p).unwrap() / v.powf(1.0 / p))
                .collect();
            assert!(means[0] <= means[1] * (1.0 + 1e-14));
            assert!(means[1] <= means[2] * (1.0 + 1e-14));
        }
    }

    #[test]
    fn box_mean_constant_and_half_indicator() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let t = BoxMeanTable::new(&ScalarField::constant(&g, 3.25));
        for c in [0, 17, 255] {
            for k in [0, 1, 3, 8, 20] {
                assert!((t.mean(c, k) - 3.25).abs() < 1e-14);
            }
        }
        let g = Grid::new(1, 1.0, 64).unwrap();
        let ind = ScalarField::from_fn(&g, |p| if p[0] < 0.5 { 1.0 } else { 0.0 });
        let t = BoxMeanTable::new(&ind);
        for c in 0..64 {
            assert_eq!(t.mean_at(g.node(c), 0.5), 0.5);
        }
    }

    #[test]
    fn full_torus_box_matches_arithmetic_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Grid::new(2, 1.0, 32).unwrap();
        let f = ScalarField::new(g, (0..g.len()).map(|_| rng.gen_range(-1.0..5.0)).collect()).unwrap();
        let t = BoxMeanTable::new(&f);
        let m = f.mean();
        assert!((t.mean(123, 16) - m).abs() <= 1e-12 * m.abs());
    }

    fn brute_box_mean(f: &ScalarField, center: usize, half: usize) -> f64 {
        let g = f.grid();
        let n = g.points_per_axis() as i64;
        let (ci, cj) = g.axes(center);
        let w = (2 * half as i64 + 1).min(n);
        let mut offsets: Vec<i64> = (-(half as i64)..=(half as i64)).collect();
        if w == n {
            offsets = (0..n).collect();
        }
        let mut s = 0.0;
        let mut c = 0usize;
        if g.dim() == 1 {
            for &di in &offsets {
                let i = (ci as i64 + di).rem_euclid(n) as usize;
                s += f.values()[i];
                c += 1;
            }
        } else {
            for &dj in &offsets {
                for &di in &offsets {
                    let i = (ci as i64 + di).rem_euclid(n) as usize;
                    let j = (cj as i64 + dj).rem_euclid(n) as usize;
                    s += f.values()[g.index(i, j)];
                    c += 1;
                }
            }
        }
        s / c as f64
    }

    #[test]
    fn box_mean_exhaustive_on_small_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [1, 2] {
            let g = Grid::new(dim, 1.0, 16).unwrap();
            let f = ScalarField::new(g, (0..g.len()).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
            let t = BoxMeanTable::new(&f);
            for c in 0..g.len() {
                for k in 0..=9 {
                    let a = t.mean(c, k);
                    let b = brute_box_mean(&f, c, k);
                    assert!((a - b).abs() < 1e-12, "dim {dim} center {c} half {k}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn box_mean_random_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Grid::new(2, 2.0, 64).unwrap();
        let f = ScalarField::new(g, (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap();
        let t = BoxMeanTable::new(&f);
        for _ in 0..100 {
            let x = [rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)];
            let r = rng.gen_range(0.0..1.0);
            let direct = brute_box_mean(&f, g.nearest_node(x), half_width_nodes(&g, r));
            assert!((t.mean_at(x, r) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn field_csv_and_grid_header() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        let f = ScalarField::from_fn(&g, |p| p[0]);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("index,value\n0,0e0\n1,1.25e-1\n"));
        assert_eq!(g.header_json(), "{\"dim\":1,\"period\":1,\"points_per_axis\":8}");
    }

    #[test]
    fn vector_field_requires_matching_grids() {
        let g1 = Grid::new(2, 1.0, 8).unwrap();
        let g2 = Grid::new(2, 1.0, 16).unwrap();
        let r = VectorField::new(vec![ScalarField::zeros(&g1), ScalarField::zeros(&g2)]);
        assert_eq!(r, Err(LabError::GridMismatch));
        assert!(VectorField::new(vec![ScalarField::zeros(&g1)]).is_err());
    }
}
