//! Fourier-multiplier plumbing on the torus.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::fields::{Grid, ScalarField};

/// Signed integer frequency of one Fourier mode, with the Nyquist index
/// flagged per axis (its sign is ambiguous on an even grid).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Mode {
    pub k: [i64; 2],
    pub nyquist: [bool; 2],
}

impl Mode {
    pub fn is_zero(&self) -> bool {
        self.k == [0, 0]
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Plans {
    let mut planner = FftPlanner::new();
    Plans {
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    }
}

fn transpose(buf: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); buf.len()];
    for j in 0..n {
        for i in 0..n {
            out[j + n * i] = buf[i + n * j];
        }
    }
    out
}

fn transform(grid: &Grid, mut buf: Vec<Complex64>, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex64> {
    let n = grid.points_per_axis();
    fft.process(&mut buf);
    if grid.dim() == 2 {
        let mut t = transpose(&buf, n);
        fft.process(&mut t);
        buf = transpose(&t, n);
    }
    buf
}

/// Unnormalized forward DFT.
pub(crate) fn forward(field: &ScalarField) -> Vec<Complex64> {
    let grid = field.grid();
    let p = plans(grid.points_per_axis());
    let buf = field.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, buf, &p.forward)
}

/// Inverse DFT with `1/N^dim` normalization, keeping the real part.
pub(crate) fn inverse_real(grid: &Grid, spectrum: Vec<Complex64>) -> ScalarField {
    let p = plans(grid.points_per_axis());
    let out = transform(grid, spectrum, &p.inverse);
    let scale = 1.0 / grid.len() as f64;
    ScalarField::from_vec_unchecked(*grid, out.iter().map(|c| c.re * scale).collect())
}

#[inline]
fn signed(k: usize, n: usize) -> (i64, bool) {
    if 2 * k == n {
        (k as i64, true)
    } else if 2 * k < n {
        (k as i64, false)
    } else {
        (k as i64 - n as i64, false)
    }
}

pub(crate) fn mode(grid: &Grid, index: usize) -> Mode {
    let n = grid.points_per_axis();
    let (i, j) = grid.axes(index);
    let (kx, nx) = signed(i, n);
    let (ky, ny) = if grid.dim() == 2 { signed(j, n) } else { (0, false) };
    Mode {
        k: [kx, ky],
        nyquist: [nx, ny],
    }
}

/// Applies the Fourier multiplier `symbol(mode)` to a real field.
pub(crate) fn apply_multiplier(field: &ScalarField, symbol: impl Fn(Mode) -> Complex64) -> ScalarField {
    let grid = *field.grid();
    let mut spec = forward(field);
    for (idx, c) in spec.iter_mut().enumerate() {
        *c *= symbol(mode(&grid, idx));
    }
    inverse_real(&grid, spec)
}

/// Periodic convolution `h^dim * sum_j a(x - x_j) b(x_j)` evaluated spectrally.
pub(crate) fn convolve(kernel: &ScalarField, field: &ScalarField) -> ScalarField {
    let grid = *field.grid();
    let ka = forward(kernel);
    let mut fb = forward(field);
    let w = grid.cell_volume();
    for (b, a) in fb.iter_mut().zip(&ka) {
        *b *= a * w;
    }
    inverse_real(&grid, fb)
}
