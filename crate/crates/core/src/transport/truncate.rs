use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fields::ScalarField;

/// Parameters of `T_m(s) = |s|^p` for `|s| < m`, `m^p` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    m: f64,
    p: f64,
    smoothed: bool,
}

impl TruncationSpec {
    pub fn new(m: f64, p: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(LabError::arg("m", format!("{m} must be finite and positive")));
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(LabError::arg("p", format!("{p} must be finite and >= 1")));
        }
        Ok(Self { m, p, smoothed: false })
    }

    /// C1 variant: the kink at `|s| = m` is replaced by a quadratic blend
    /// over `[m - m/100, m + m/100]`.
    pub fn smoothed(self) -> Self {
        Self { smoothed: true, ..self }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_smoothed(&self) -> bool {
        self.smoothed
    }

    fn blend_width(&self) -> f64 {
        self.m / 100.0
    }

    /// `T_m(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        let a = s.abs();
        if !self.smoothed {
            return if a < self.m { a.powf(self.p) } else { self.m.powf(self.p) };
        }
        let hs = self.blend_width();
        let lo = self.m - hs;
        if a <= lo {
            return a.powf(self.p);
        }
        // the slope decays linearly from p lo^(p-1) to zero across the band
        let slope = self.p * lo.powf(self.p - 1.0);
        let x = (a - lo).min(2.0 * hs);
        lo.powf(self.p) + slope * (x - x * x / (4.0 * hs))
    }

    /// `T_m'(s)`; at the kink of the plain variant the one-sided value
    /// from inside is returned.
    pub fn derivative(&self, s: f64) -> f64 {
        let a = s.abs();
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        if !self.smoothed {
            return if a < self.m { sign * self.p * a.powf(self.p - 1.0) } else { 0.0 };
        }
        let hs = self.blend_width();
        let lo = self.m - hs;
        if a <= lo {
            return sign * self.p * a.powf(self.p - 1.0);
        }
        let slope = self.p * lo.powf(self.p - 1.0);
        let x = (a - lo).min(2.0 * hs);
        sign * slope * (1.0 - x / (2.0 * hs))
    }

    /// `sup |T_m'|`.
    pub fn derivative_bound(&self) -> f64 {
        self.p * self.m.powf(self.p - 1.0)
    }
}

/// Pointwise `T_m(u)`.
pub fn truncate(field: &ScalarField, spec: TruncationSpec) -> ScalarField {
    field.map(|s| spec.eval(s))
}

/// Pointwise `T_m'(u)`.
pub fn truncate_derivative(field: &ScalarField, spec: TruncationSpec) -> ScalarField {
    field.map(|s| spec.derivative(s))
}
