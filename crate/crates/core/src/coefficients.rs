//! Coefficient sequences of the linearized chain around `-sin 2θ`, computed
//! in exact rational arithmetic, together with certified bounds on the
//! eigenvalues of the associated 2x2 quadratic forms.
//!
//! The sequences are
//!
//! * `d_k   = (k-2)^2 (k+2) / (4 k^2)` — the couplings of the chain,
//! * `diff_k = -d_{k+2} + d_k` — the diagonal (energy production) terms,
//! * `a_k   = diff_k^2` and `ε_k = -2 d_{k+2}^2 + d_k d_{k+2} + d_{k+2} d_{k+4}`
//!   — the entries of the form matrix `A_k = [[a_k, ε_k], [ε_k, a_{k+2}]]`.
//!
//! Every `A_k` is positive definite and its eigenvalues stay inside the
//! bracket `(1/50, 3/5)` while `a_k` stays inside `[(3/8)^2, (11/18)^2]`;
//! [`certify_bounds`] establishes this for a whole index range with exact
//! leading-minor sign tests, so no floating-point rounding can produce a
//! false pass.

use num_bigint::BigInt;
use serde::Serialize;

use crate::rational::{self, rat, to_f64, Rational};

/// Lower end of the certified eigenvalue bracket, `1/50`.
pub const LAMBDA_MIN: f64 = 0.02;

/// Upper end of the certified eigenvalue bracket, `3/5`.
pub const LAMBDA_MAX: f64 = 0.6;

/// Exact `1/50`.
pub fn lambda_min_exact() -> Rational {
    rat(1, 50)
}

/// Exact `3/5`.
pub fn lambda_max_exact() -> Rational {
    rat(3, 5)
}

fn big(k: u32) -> BigInt {
    BigInt::from(k)
}

/// Chain coupling `d_k = (k-2)^2 (k+2) / (4 k^2)`.
///
/// Defined for `k >= 1`; `d_2 = 0`.
pub fn d_coeff(k: u32) -> Rational {
    assert!(k >= 1, "d_k requires k >= 1 (the formula divides by k^2)");
    let k = big(k);
    let km2 = &k - BigInt::from(2);
    let kp2 = &k + BigInt::from(2);
    let num = &km2 * &km2 * kp2;
    let den = BigInt::from(4) * &k * &k;
    Rational::new(num, den)
}

/// Diagonal term `diff_k = -d_{k+2} + d_k`, via its closed form
/// `-(k^4 + 4k^3 + 8k^2 - 8k - 16) / (2 (k+2)^2 k^2)`.
///
/// Agrees with `d_coeff(k) - d_coeff(k+2)` exactly.
pub fn diff_coeff(k: u32) -> Rational {
    assert!(k >= 1, "diff_k requires k >= 1");
    let k = big(k);
    let k2 = &k * &k;
    let num = -(&k2 * &k2
        + BigInt::from(4) * &k2 * &k
        + BigInt::from(8) * &k2
        - BigInt::from(8) * &k
        - BigInt::from(16));
    let kp2 = &k + BigInt::from(2);
    let den = BigInt::from(2) * &kp2 * &kp2 * k2;
    Rational::new(num, den)
}

/// Off-diagonal form entry
/// `ε_k = -2 d_{k+2}^2 + d_k d_{k+2} + d_{k+2} d_{k+4}`, via its closed form
/// `(-2k^3 + 32k + 32) / ((k+2)^4 (k+4))`.
pub fn eps_coeff(k: u32) -> Rational {
    assert!(k >= 1, "ε_k requires k >= 1");
    let k = big(k);
    let num = BigInt::from(-2) * &k * &k * &k + BigInt::from(32) * &k + BigInt::from(32);
    let kp2 = &k + BigInt::from(2);
    let den = (&kp2 * &kp2) * (&kp2 * &kp2) * (&k + BigInt::from(4));
    Rational::new(num, den)
}

/// `a_k = diff_k^2`, the diagonal entry of the form matrix.
pub fn a_coeff(k: u32) -> Rational {
    let d = diff_coeff(k);
    &d * &d
}

/// Symmetric 2x2 form matrix `A_k` coupling modes `k` and `k+2`.
#[derive(Debug, Clone, Serialize)]
pub struct FormMatrix {
    #[serde(serialize_with = "rational::serialize")]
    pub a11: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub a12: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub a22: Rational,
}

impl FormMatrix {
    /// Exact determinant `a11 a22 - a12^2`.
    pub fn det(&self) -> Rational {
        &self.a11 * &self.a22 - &self.a12 * &self.a12
    }

    /// Exact trace.
    pub fn trace(&self) -> Rational {
        &self.a11 + &self.a22
    }
}

/// `A_k = [[a_k, ε_k], [ε_k, a_{k+2}]]` with exact entries.
pub fn form_matrix(k: u32) -> FormMatrix {
    FormMatrix {
        a11: a_coeff(k),
        a12: eps_coeff(k),
        a22: a_coeff(k + 2),
    }
}

/// Eigenvalues `(λ_k^1, λ_k^2)` of `A_k`, ordered `λ_k^1 <= λ_k^2`.
///
/// The radicand is assembled in exact arithmetic and rounded once, so the
/// result is accurate to a few ulps of the square root.
pub fn eigenvalues(k: u32) -> (f64, f64) {
    let a = a_coeff(k);
    let a2 = a_coeff(k + 2);
    let eps = eps_coeff(k);
    let diff = &a - &a2;
    let radicand = &diff * &diff + rational::rat_int(4) * &eps * &eps;
    let trace = to_f64(&(&a + &a2));
    let root = to_f64(&radicand).sqrt();
    ((trace - root) / 2.0, (trace + root) / 2.0)
}

/// Exact values and float shadows of every coefficient at one index.
#[derive(Debug, Clone, Serialize)]
pub struct CoeffRecord {
    pub k: u32,
    #[serde(serialize_with = "rational::serialize")]
    pub d_k: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub diff_k: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub a_k: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub eps_k: Rational,
    pub lam1_k: f64,
    pub lam2_k: f64,
}

impl CoeffRecord {
    pub fn new(k: u32) -> Self {
        let (lam1_k, lam2_k) = eigenvalues(k);
        CoeffRecord {
            k,
            d_k: d_coeff(k),
            diff_k: diff_coeff(k),
            a_k: a_coeff(k),
            eps_k: eps_coeff(k),
            lam1_k,
            lam2_k,
        }
    }
}

/// Outcome of the exact bound certification over `1 <= k <= k_max`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsCertificate {
    pub k_max: u32,
    /// Eigenvalue bracket, exclusive on both sides.
    #[serde(serialize_with = "rational::serialize")]
    pub lower: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub upper: Rational,
    /// `a_k` bracket, inclusive on both sides.
    #[serde(serialize_with = "rational::serialize")]
    pub a_lower: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub a_upper: Rational,
    pub verified: bool,
    pub failures: Vec<u32>,
}

/// Certifies, in exact arithmetic, that for every `1 <= k <= k_max`
///
/// * `(3/8)^2 <= a_k <= (11/18)^2`, and
/// * `1/50 < λ_k^1 <= λ_k^2 < 3/5`,
///
/// the latter via positivity of the leading minors of `A_k - (1/50) I` and
/// `(3/5) I - A_k`. A failure indicates an implementation bug, not new
/// mathematics: the bracket holds for all `k >= 1`.
pub fn certify_bounds(k_max: u32) -> BoundsCertificate {
    assert!(k_max >= 1);
    let lo = lambda_min_exact();
    let hi = lambda_max_exact();
    let a_lo = rat(9, 64); // (3/8)^2
    let a_hi = rat(121, 324); // (11/18)^2
    let zero = Rational::from_integer(BigInt::from(0));

    let mut failures = Vec::new();
    // a_{k+2} from the previous same-parity step becomes the next a_k.
    let mut cache: [Option<(u32, Rational)>; 2] = [None, None];
    for k in 1..=k_max {
        let par = (k % 2) as usize;
        let a = match cache[par].take() {
            Some((idx, v)) if idx == k => v,
            _ => a_coeff(k),
        };
        let a2 = a_coeff(k + 2);
        let eps = eps_coeff(k);
        let eps2 = &eps * &eps;

        let a_in_bracket = a >= a_lo && a <= a_hi;
        let m1 = &a - &lo;
        let m1b = &a2 - &lo;
        let lower_ok = m1 > zero && &m1 * &m1b - &eps2 > zero;
        let m2 = &hi - &a;
        let m2b = &hi - &a2;
        let upper_ok = m2 > zero && &m2 * &m2b - &eps2 > zero;

        if !(a_in_bracket && lower_ok && upper_ok) {
            failures.push(k);
        }
        cache[par] = Some((k + 2, a2));
    }

    BoundsCertificate {
        k_max,
        lower: lo,
        upper: hi,
        a_lower: a_lo,
        a_upper: a_hi,
        verified: failures.is_empty(),
        failures,
    }
}

/// Continuous envelope `f(x) = -1/2 - 2 (x^2 - 2x - 4) / ((x+2)^2 x^2)` whose
/// integer samples are `diff_k`.
pub fn envelope(x: f64) -> f64 {
    assert!(x >= 1.0, "envelope is defined for x >= 1");
    -0.5 - 2.0 * (x * x - 2.0 * x - 4.0) / ((x + 2.0) * (x + 2.0) * x * x)
}

/// Exact evaluation of the envelope at a rational point.
pub fn envelope_rational(x: &Rational) -> Rational {
    assert!(*x >= rational::rat_int(1));
    let two = rational::rat_int(2);
    let num = x * x - &two * x - rational::rat_int(4);
    let den = (x + &two) * (x + &two) * (x * x);
    -rat(1, 2) - two * num / den
}

/// Location report for the single critical point of the envelope.
///
/// `f'(x)` has the sign of `x^3 - 3x^2 - 10x - 8` on `x >= 1`, which changes
/// sign exactly once, inside `(5, 6)`; `f` decreases before the root and
/// increases after it.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointReport {
    pub bracket: (f64, f64),
    pub x0: f64,
    pub f_at_x0: f64,
}

/// Locates the critical point by bisection on the cubic factor of `f'`.
pub fn envelope_critical_point() -> CriticalPointReport {
    let g = |x: f64| x * x * x - 3.0 * x * x - 10.0 * x - 8.0;
    let (mut lo, mut hi) = (5.0_f64, 6.0_f64);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let x0 = 0.5 * (lo + hi);
    CriticalPointReport {
        bracket: (5.0, 6.0),
        x0,
        f_at_x0: envelope(x0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    #[test]
    fn quoted_values() {
        assert_eq!(d_coeff(2), rat_int(0));
        assert_eq!(d_coeff(1), rat(3, 4));
        assert_eq!(d_coeff(3), rat(5, 36));
        assert_eq!(diff_coeff(1), rat(11, 18));
        assert_eq!(diff_coeff(2), rat(-3, 8));
        assert_eq!(diff_coeff(5), rat(-1269, 2450));
        assert_eq!(eps_coeff(1), rat(62, 405));
        assert_eq!(eps_coeff(4), rat(1, 324));
        assert!(eps_coeff(5) < rat_int(0));
    }

    #[test]
    fn diff_matches_difference_of_d() {
        for k in 1..=2000 {
            assert_eq!(diff_coeff(k), d_coeff(k) - d_coeff(k + 2), "k = {k}");
        }
    }

    #[test]
    fn eps_matches_defining_combination() {
        for k in 1..=2000 {
            let (dk, dk2, dk4) = (d_coeff(k), d_coeff(k + 2), d_coeff(k + 4));
            let direct = rat_int(-2) * &dk2 * &dk2 + &dk * &dk2 + &dk2 * &dk4;
            assert_eq!(eps_coeff(k), direct, "k = {k}");
        }
    }

    #[test]
    #[should_panic(expected = "k >= 1")]
    fn rejects_k_zero() {
        d_coeff(0);
    }

    #[test]
    fn form_matrix_positive_definite() {
        for k in 1..=2000 {
            let m = form_matrix(k);
            assert!(m.det() > rat_int(0), "det <= 0 at k = {k}");
            assert!(m.trace() > rat_int(0), "trace <= 0 at k = {k}");
        }
    }

    #[test]
    fn a2_a4_product_matches_quoted_factors() {
        // a_2 a_4 = (3/8)^2 (37/72)^2
        let lhs = a_coeff(2) * a_coeff(4);
        let rhs = rat(3, 8) * rat(3, 8) * rat(37, 72) * rat(37, 72);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn eigenvalue_product_matches_determinant() {
        for k in [1, 2, 3, 7, 50, 1000] {
            let (l1, l2) = eigenvalues(k);
            assert!(l1 <= l2);
            let det = to_f64(&form_matrix(k).det());
            assert!(
                (l1 * l2 - det).abs() <= 1e-12 * det.abs(),
                "k = {k}: {l1} * {l2} vs {det}"
            );
        }
    }

    #[test]
    fn certify_small_range() {
        let cert = certify_bounds(512);
        assert!(cert.verified, "failures: {:?}", cert.failures);
        // Boundary cases hit with equality: a_1 = (11/18)^2, a_2 = (3/8)^2.
        assert_eq!(a_coeff(1), rat(121, 324));
        assert_eq!(a_coeff(2), rat(9, 64));
        assert!(certify_bounds(1).verified);
    }

    #[test]
    fn envelope_samples() {
        assert_eq!(envelope_rational(&rat_int(6)), rat(-149, 288));
        for k in 1..=64u32 {
            let exact = envelope_rational(&rat_int(k as i64));
            assert_eq!(exact, diff_coeff(k), "envelope vs diff at k = {k}");
        }
        // f(5) <= f(k) <= -1/2 for k >= 4
        for k in 4..=512 {
            let f = envelope_rational(&rat_int(k));
            assert!(f <= rat(-1, 2) && f >= rat(-1269, 2450), "k = {k}");
        }
    }

    #[test]
    fn envelope_critical_point_in_bracket() {
        let report = envelope_critical_point();
        assert!(report.x0 > 5.0 && report.x0 < 6.0);
        // Monotone decrease before, increase after.
        assert!(envelope(report.x0 - 0.5) > report.f_at_x0);
        assert!(envelope(report.x0 + 0.5) > report.f_at_x0);
    }

    #[test]
    fn asymptotic_quarter() {
        let k = 1000;
        let a = to_f64(&a_coeff(k));
        let (l1, l2) = eigenvalues(k);
        for v in [a, l1, l2] {
            assert!((v - 0.25).abs() < 1e-3, "value {v} not near 1/4");
        }
    }
}
