//! Independent reference computations used only to cross-validate the fast
//! paths: collocation assembly of the linearized operator, singular-weight
//! quadrature of the weighted norm, and centered finite differences with a
//! Richardson error estimate.
//!
//! Nothing here shares code with the modules it checks — coefficients are
//! extracted by direct quadrature sums (no FFT) and series are evaluated by
//! direct summation.

use crate::field::GridField;

/// Trigonometric coefficients of a grid sample, by direct quadrature sums.
///
/// Exact (to rounding) for fields band-limited below `len/2`.
struct TrigPoly {
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigPoly {
    fn from_grid(g: &GridField, modes: usize) -> Self {
        let m = g.len();
        assert!(2 * modes < m, "grid too coarse for the requested modes");
        let values = g.values();
        let mean = values.iter().sum::<f64>() / m as f64;
        let mut cos = vec![0.0; modes];
        let mut sin = vec![0.0; modes];
        for j in 1..=modes {
            let (mut cj, mut sj) = (0.0, 0.0);
            for (i, &v) in values.iter().enumerate() {
                let t = j as f64 * GridField::theta(m, i);
                cj += v * t.cos();
                sj += v * t.sin();
            }
            cos[j - 1] = 2.0 * cj / m as f64;
            sin[j - 1] = 2.0 * sj / m as f64;
        }
        TrigPoly { mean, cos, sin }
    }

    fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.mean;
        for j in 1..=self.cos.len() {
            let t = j as f64 * theta;
            acc += self.cos[j - 1] * t.cos() + self.sin[j - 1] * t.sin();
        }
        acc
    }

    fn eval_derivative(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for j in 1..=self.cos.len() {
            let jf = j as f64;
            let t = jf * theta;
            acc += -self.cos[j - 1] * jf * t.sin() + self.sin[j - 1] * jf * t.cos();
        }
        acc
    }

    fn eval_hilbert(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for j in 1..=self.cos.len() {
            let t = j as f64 * theta;
            acc += self.cos[j - 1] * t.sin() - self.sin[j - 1] * t.cos();
        }
        acc
    }

    /// Antiderivative of the Hilbert transform, gauge `v(0) = 0`.
    fn eval_velocity(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for j in 1..=self.cos.len() {
            let jf = j as f64;
            let t = jf * theta;
            // ∫ (c_j sin jθ - s_j cos jθ) dθ, fixed so the value at 0 vanishes
            acc += -self.cos[j - 1] / jf * (t.cos() - 1.0) - self.sin[j - 1] / jf * t.sin();
        }
        acc
    }
}

/// Pointwise collocation assembly of
/// `Lη = (1/2) sin 2θ ∂_θη - cos 2θ η + sin 2θ Hη - 2 cos 2θ v` on the grid
/// of the input, via direct-sum spectral evaluation of each term.
pub fn collocation_apply_l(eta: &GridField) -> GridField {
    let m = eta.len();
    let poly = TrigPoly::from_grid(eta, m / 2 - 1);
    let values = (0..m)
        .map(|i| {
            let theta = GridField::theta(m, i);
            let (s2, c2) = ((2.0 * theta).sin(), (2.0 * theta).cos());
            0.5 * s2 * poly.eval_derivative(theta) - c2 * poly.eval(theta)
                + s2 * poly.eval_hilbert(theta)
                - 2.0 * c2 * poly.eval_velocity(theta)
        })
        .collect();
    GridField::new(values)
}

/// Result of the singular-weight quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    /// Estimate of `∫ ρ (∂_θη)^2 dθ` (the squared weighted norm).
    pub value: f64,
    /// Difference against the half-resolution panel sum.
    pub error_estimate: f64,
    /// Set when panel refinement fails to converge — the integrand grows
    /// near the excluded singular nodes, i.e. the input is outside the
    /// weighted space.
    pub outside_span: bool,
}

/// Midpoint quadrature of `ρ (∂_θη)^2` with `ρ = 1/(4π sin^2 θ)` on nodes
/// `θ = -π + (m + 1/2) 2π/panels`, which avoid the singular points
/// `{0, ±π}` by construction.
pub fn quadrature_hdw(eta: &GridField, panels: usize) -> QuadratureResult {
    let poly = TrigPoly::from_grid(eta, eta.len() / 2 - 1);
    let sum_at = |p: usize| -> f64 {
        let h = 2.0 * std::f64::consts::PI / p as f64;
        (0..p)
            .map(|i| {
                let theta = -std::f64::consts::PI + (i as f64 + 0.5) * h;
                let d = poly.eval_derivative(theta);
                let s = theta.sin();
                d * d / (4.0 * std::f64::consts::PI * s * s)
            })
            .sum::<f64>()
            * h
    };
    let coarse = sum_at(panels / 2);
    let value = sum_at(panels);
    let error_estimate = (value - coarse).abs();
    // On the span the integrand is a trigonometric polynomial and the
    // midpoint rule converges; on sin θ-type inputs the sum diverges
    // linearly in the panel count instead.
    let outside_span = error_estimate > 1e-6 * value.abs().max(1e-30) && {
        let finer = sum_at(panels * 2);
        (finer - value).abs() >= 0.5 * error_estimate
    };
    QuadratureResult {
        value,
        error_estimate,
        outside_span,
    }
}

/// Centered second difference with a Richardson error bar.
#[derive(Debug, Clone, Copy)]
pub struct FdEstimate {
    pub value: f64,
    /// `|D_{2h} - D_h| / 3` when the wide stencil fits, else `None`.
    pub error_estimate: Option<f64>,
}

/// Second time derivative of a uniformly sampled series at index `i`
/// (`1 <= i <= len-2`).
pub fn fd_second_derivative(series: &[f64], dt: f64, i: usize) -> FdEstimate {
    assert!(i >= 1 && i + 1 < series.len(), "stencil out of range");
    let d_h = (series[i - 1] - 2.0 * series[i] + series[i + 1]) / (dt * dt);
    let error_estimate = if i >= 2 && i + 2 < series.len() {
        let d_2h = (series[i - 2] - 2.0 * series[i] + series[i + 2]) / (4.0 * dt * dt);
        Some((d_2h - d_h).abs() / 3.0)
    } else {
        None
    };
    FdEstimate {
        value: d_h,
        error_estimate,
    }
}
