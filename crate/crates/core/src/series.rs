//! Sine series and the orthonormal tilde basis of the weighted space, with
//! exact conversions between the two.
//!
//! The tilde basis is `ẽ_k = sin((k+2)θ)/(k+2) - sin(kθ)/k` for `k >= 1`.
//! Under the weighted inner product with `ρ = 1/(4π sin^2 θ)` the family is
//! orthonormal, so the norm of a tilde series is the plain `ℓ^2` norm of its
//! coefficients. The key derivative identity, used throughout, is
//! `∂_θ ẽ_k / sin θ = -2 sin((k+1)θ)`.

use num_traits::{FromPrimitive, Zero};
use std::ops::{Div, Mul, Sub};

use crate::rational::Rational;

/// Coefficients `η_k` on the tilde basis; entry `k-1` holds the coefficient
/// of `ẽ_k`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeSeries {
    coeffs: Vec<f64>,
}

impl TildeSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        TildeSeries { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        TildeSeries {
            coeffs: vec![0.0; n],
        }
    }

    /// `ẽ_k` embedded at truncation `n` (requires `k <= n`).
    pub fn unit(k: u32, n: usize) -> Self {
        assert!(k >= 1 && k as usize <= n);
        let mut coeffs = vec![0.0; n];
        coeffs[(k - 1) as usize] = 1.0;
        TildeSeries { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `ẽ_k` (1-based); zero outside the truncation.
    pub fn coeff(&self, k: u32) -> f64 {
        if k >= 1 && (k as usize) <= self.coeffs.len() {
            self.coeffs[(k - 1) as usize]
        } else {
            0.0
        }
    }

    /// Weighted-space norm, `(Σ η_k^2)^{1/2}` by orthonormality.
    pub fn hdw_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Squared weighted-space norm.
    pub fn hdw_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>()
    }

    pub fn scaled(&self, s: f64) -> TildeSeries {
        TildeSeries {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Zero-pad or truncate to length `n`; truncation discards tail mass.
    pub fn resized(&self, n: usize) -> TildeSeries {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n, 0.0);
        TildeSeries { coeffs }
    }
}

/// Coefficients `b_j` of `sin(jθ)`; entry `j-1` holds `b_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSeries {
    coeffs: Vec<f64>,
}

impl SineSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        SineSeries { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        SineSeries {
            coeffs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `sin(jθ)` (1-based); zero outside the truncation.
    pub fn coeff(&self, j: u32) -> f64 {
        if j >= 1 && (j as usize) <= self.coeffs.len() {
            self.coeffs[(j - 1) as usize]
        } else {
            0.0
        }
    }

    /// `L^2` norm on the torus: `(π Σ b_j^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (std::f64::consts::PI * self.coeffs.iter().map(|c| c * c).sum::<f64>()).sqrt()
    }

    /// Pointwise evaluation by direct summation.
    pub fn eval(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, b)| b * ((i + 1) as f64 * theta).sin())
            .sum()
    }
}

fn tilde_to_sine_in<T>(eta: &[T]) -> Vec<T>
where
    T: Clone + Zero + Sub<Output = T> + Div<Output = T> + FromPrimitive,
{
    let n = eta.len();
    let get = |j: i64| -> T {
        if j >= 1 && (j as usize) <= n {
            eta[(j - 1) as usize].clone()
        } else {
            T::zero()
        }
    };
    (1..=(n as i64 + 2))
        .map(|j| (get(j - 2) - get(j)) / T::from_i64(j).unwrap())
        .collect()
}

fn sine_to_tilde_in<T>(b: &[T]) -> (Vec<T>, [T; 2])
where
    T: Clone + Zero + Sub<Output = T> + Mul<Output = T> + FromPrimitive,
{
    let j_max = b.len();
    // η_j = η_{j-2} - j b_j with η_{-1} = η_0 = 0; membership in the span
    // requires the last two recurrence values to vanish.
    let mut eta: Vec<T> = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let prev = if j >= 3 {
            eta[j - 3].clone()
        } else {
            T::zero()
        };
        eta.push(prev - T::from_usize(j).unwrap() * b[j - 1].clone());
    }
    let tail = [
        if j_max >= 2 {
            eta[j_max - 2].clone()
        } else {
            T::zero()
        },
        if j_max >= 1 {
            eta[j_max - 1].clone()
        } else {
            T::zero()
        },
    ];
    eta.truncate(j_max.saturating_sub(2));
    (eta, tail)
}

/// Expands a tilde series into its sine series:
/// `b_j = (η_{j-2} - η_j) / j` for `j = 1..N+2`.
pub fn tilde_to_sine(eta: &TildeSeries) -> SineSeries {
    SineSeries::new(tilde_to_sine_in(eta.coeffs()))
}

/// Exact-rational twin of [`tilde_to_sine`].
pub fn tilde_to_sine_rational(eta: &[Rational]) -> Vec<Rational> {
    tilde_to_sine_in(eta)
}

/// Result of projecting a sine series onto the tilde basis.
///
/// `residual` is the magnitude of the two unterminated recurrence values; it
/// vanishes exactly when the input lies in the span of the basis (`sin θ`,
/// for instance, is not in the span and leaves a non-decaying tail).
#[derive(Debug, Clone)]
pub struct TildeProjection {
    pub series: TildeSeries,
    pub residual: f64,
}

/// Inverts [`tilde_to_sine`] by the recurrence `η_j = η_{j-2} - j b_j`.
pub fn sine_to_tilde(xi: &SineSeries) -> TildeProjection {
    let (coeffs, tail) = sine_to_tilde_in(xi.coeffs());
    TildeProjection {
        series: TildeSeries::new(coeffs),
        residual: (tail[0] * tail[0] + tail[1] * tail[1]).sqrt(),
    }
}

/// Exact-rational twin of [`sine_to_tilde`]; the second element is the pair
/// of unterminated recurrence values (both zero iff in the span).
pub fn sine_to_tilde_rational(xi: &[Rational]) -> (Vec<Rational>, [Rational; 2]) {
    sine_to_tilde_in(xi)
}

/// Default relative tolerance for span membership in [`sine_to_tilde_checked`].
pub const SPAN_RESIDUAL_TOL: f64 = 1e-10;

/// Projection that fails when the relative residual exceeds `tol`
/// (defaulting to [`SPAN_RESIDUAL_TOL`] when `tol` is `None`).
pub fn sine_to_tilde_checked(
    xi: &SineSeries,
    tol: Option<f64>,
) -> crate::Result<TildeProjection> {
    let tol = tol.unwrap_or(SPAN_RESIDUAL_TOL);
    let proj = sine_to_tilde(xi);
    let scale = proj.series.hdw_norm().max(xi.l2_norm()).max(f64::MIN_POSITIVE);
    if proj.residual > tol * scale {
        return Err(crate::Error::OutsideSpan {
            residual: proj.residual / scale,
            tolerance: tol,
        });
    }
    Ok(proj)
}

/// Orthogonal projection of a sine series onto the first `k_max` tilde
/// modes.
///
/// The inner product against `ẽ_k` reduces, via the cosine expansion of
/// `sin((k+1)θ)/sin θ`, to the cumulative sum `η_k = -Σ_{l<=k, l≡k (2)} l b_l`
/// — the same values the inversion recurrence produces — so the projection
/// needs only sine modes up to `k_max` and is well defined (and cheap) even
/// when the input is not in the span.
pub fn galerkin_project(xi: &SineSeries, k_max: usize) -> TildeSeries {
    let mut eta = vec![0.0; k_max];
    for k in 1..=k_max {
        let prev = if k >= 3 { eta[k - 3] } else { 0.0 };
        eta[k - 1] = prev - k as f64 * xi.coeff(k as u32);
    }
    TildeSeries::new(eta)
}

/// Velocity sine coefficients induced by a tilde series:
/// `v_k = (-η_{k-2} + η_k) / k^2`, `k = 1..N+2` (gauge `v(0) = 0`).
pub fn velocity_from_tilde(eta: &TildeSeries) -> SineSeries {
    let n = eta.len() as i64;
    let coeffs = (1..=(n + 2))
        .map(|k| {
            let get = |j: i64| {
                if j >= 1 {
                    eta.coeff(j as u32)
                } else {
                    0.0
                }
            };
            (-get(k - 2) + get(k)) / ((k * k) as f64)
        })
        .collect();
    SineSeries::new(coeffs)
}

/// Weighted derivative `-√π ρ^{1/2} ∂_θ η = Σ_k η_k sin((k+1)θ)`, with the
/// signed weight `ρ^{1/2} = 1/(2√π sin θ)`.
pub fn weighted_derivative(eta: &TildeSeries) -> SineSeries {
    let mut coeffs = vec![0.0; eta.len() + 1];
    for (i, v) in eta.coeffs().iter().enumerate() {
        coeffs[i + 1] = *v; // sin((k+1)θ) for tilde index k = i+1
    }
    SineSeries::new(coeffs)
}

/// Weighted-space norm of a tilde series (`ℓ^2` of the coefficients).
pub fn hdw_norm(eta: &TildeSeries) -> f64 {
    eta.hdw_norm()
}

/// Cosine expansion of the trigonometric polynomial `sin(kθ)/sin θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineExpansion {
    pub mean: f64,
    /// Entry `j-1` holds the coefficient of `cos(jθ)`.
    pub cos: Vec<f64>,
}

impl CosineExpansion {
    pub fn eval(&self, theta: f64) -> f64 {
        self.mean
            + self
                .cos
                .iter()
                .enumerate()
                .map(|(i, c)| c * ((i + 1) as f64 * theta).cos())
                .sum::<f64>()
    }
}

/// `sin(kθ)/sin θ` as a cosine polynomial: for odd `k = 2l-1` it is
/// `1 + 2 Σ_{j=1}^{l-1} cos(2jθ)`, for even `k = 2l` it is
/// `2 Σ_{j=1}^{l} cos((2j-1)θ)`.
pub fn sin_ratio_expansion(k: u32) -> CosineExpansion {
    assert!(k >= 1);
    if k % 2 == 1 {
        let l = ((k + 1) / 2) as usize;
        let mut cos = vec![0.0; k.saturating_sub(1) as usize];
        for j in 1..l {
            cos[2 * j - 1] = 2.0; // cos(2jθ)
        }
        CosineExpansion { mean: 1.0, cos }
    } else {
        let l = (k / 2) as usize;
        let mut cos = vec![0.0; (k - 1) as usize];
        for j in 1..=l {
            cos[2 * j - 2] = 2.0; // cos((2j-1)θ)
        }
        CosineExpansion { mean: 0.0, cos }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use approx::assert_abs_diff_eq;

    #[test]
    fn tilde_unit_to_sine() {
        let eta = TildeSeries::unit(1, 1);
        let b = tilde_to_sine(&eta);
        assert_eq!(b.coeff(1), -1.0);
        assert_eq!(b.coeff(2), 0.0);
        assert_abs_diff_eq!(b.coeff(3), 1.0 / 3.0);
    }

    #[test]
    fn tilde_two_plus_four_to_sine() {
        // ẽ_2 + ẽ_4: telescoping leaves b_2 = -1/2, b_4 = 0, b_6 = 1/6.
        let mut eta = TildeSeries::zeros(4);
        eta = TildeSeries::new({
            let mut c = eta.coeffs().to_vec();
            c[1] = 1.0;
            c[3] = 1.0;
            c
        });
        let b = tilde_to_sine(&eta);
        assert_eq!(b.coeff(2), -0.5);
        assert_eq!(b.coeff(4), 0.0);
        assert_abs_diff_eq!(b.coeff(6), 1.0 / 6.0);
        assert_eq!(b.coeff(1), 0.0);
        assert_eq!(b.coeff(3), 0.0);
        assert_eq!(b.coeff(5), 0.0);
    }

    #[test]
    fn sine_to_tilde_inverse_example() {
        // sin(3θ)/3 - sin(θ) = ẽ_1
        let xi = SineSeries::new(vec![-1.0, 0.0, 1.0 / 3.0]);
        let proj = sine_to_tilde(&xi);
        assert_eq!(proj.residual, 0.0);
        assert_eq!(proj.series.coeffs(), &[1.0]);
    }

    #[test]
    fn sine_theta_not_in_span() {
        let xi = SineSeries::new(vec![1.0]);
        let proj = sine_to_tilde(&xi);
        assert!(proj.residual > 0.5);
        assert!(sine_to_tilde_checked(&xi, None).is_err());
    }

    #[test]
    fn round_trip_rational_exact() {
        let eta: Vec<Rational> = (1..=16)
            .map(|k| rat(k * k - 7, 3 + (k % 5)))
            .collect();
        let b = tilde_to_sine_rational(&eta);
        let (back, tail) = sine_to_tilde_rational(&b);
        assert_eq!(back, eta);
        assert_eq!(tail, [rat_int(0), rat_int(0)]);
    }

    #[test]
    fn round_trip_float() {
        let coeffs: Vec<f64> = (0..64).map(|i| ((i * 37 + 11) % 19) as f64 / 7.0 - 1.0).collect();
        let eta = TildeSeries::new(coeffs);
        let proj = sine_to_tilde(&tilde_to_sine(&eta));
        assert!(proj.residual < 1e-13);
        for k in 1..=64 {
            assert_abs_diff_eq!(proj.series.coeff(k), eta.coeff(k), epsilon = 1e-14);
        }
    }

    #[test]
    fn galerkin_project_is_orthogonal() {
        // On span members it recovers the coefficients; adding an
        // out-of-span direction (sin θ) shifts only the odd-index cumulative
        // sums by the constant inner-product pattern.
        let eta = TildeSeries::new(vec![0.3, -0.2, 0.7, 0.0, 0.1]);
        let xi = tilde_to_sine(&eta);
        let proj = galerkin_project(&xi, 5);
        for k in 1..=5 {
            assert_abs_diff_eq!(proj.coeff(k), eta.coeff(k), epsilon = 1e-14);
        }
        // projection is idempotent through the round trip
        let again = galerkin_project(&tilde_to_sine(&proj), 5);
        for k in 1..=5 {
            assert_abs_diff_eq!(again.coeff(k), proj.coeff(k), epsilon = 1e-14);
        }
    }

    #[test]
    fn velocity_from_tilde_unit() {
        let eta = TildeSeries::unit(1, 1);
        let v = velocity_from_tilde(&eta);
        assert_eq!(v.coeff(1), 1.0);
        assert_eq!(v.coeff(2), 0.0);
        assert_abs_diff_eq!(v.coeff(3), -1.0 / 9.0);
    }

    #[test]
    fn weighted_derivative_unit_is_next_sine() {
        let eta = TildeSeries::unit(1, 1);
        let u = weighted_derivative(&eta);
        assert_eq!(u.coeff(1), 0.0);
        assert_eq!(u.coeff(2), 1.0);
        // Parseval: ||u||_{L^2}^2 = π Σ η_k^2
        let eta = TildeSeries::new(vec![0.5, -2.0, 0.25]);
        let u = weighted_derivative(&eta);
        assert_abs_diff_eq!(
            u.l2_norm().powi(2),
            std::f64::consts::PI * eta.hdw_norm_sq(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn hdw_norm_orthonormal() {
        for k in 1..=8 {
            assert_eq!(TildeSeries::unit(k, 8).hdw_norm(), 1.0);
        }
        assert_eq!(TildeSeries::unit(2, 4).scaled(3.0).hdw_norm(), 3.0);
        assert_eq!(TildeSeries::zeros(5).hdw_norm(), 0.0);
    }

    #[test]
    fn sin_ratio_expansions() {
        let e = sin_ratio_expansion(1);
        assert_eq!(e.mean, 1.0);
        assert!(e.cos.iter().all(|&c| c == 0.0));

        let e = sin_ratio_expansion(3);
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.cos[1], 2.0); // cos 2θ

        let e = sin_ratio_expansion(2);
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.cos[0], 2.0); // 2 cos θ

        // Pointwise agreement with sin(kθ)/sin θ away from the zeros of sin.
        for k in 1..=9u32 {
            let e = sin_ratio_expansion(k);
            for i in 0..40 {
                let theta = -3.0 + 0.151 * i as f64;
                if theta.sin().abs() < 1e-3 {
                    continue;
                }
                let want = (k as f64 * theta).sin() / theta.sin();
                assert_abs_diff_eq!(e.eval(theta), want, epsilon = 1e-9);
            }
        }
    }
}
