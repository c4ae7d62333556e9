//! The truncated chain ODE for the linearized dynamics around `-sin 2θ`,
//! expressed on the tilde basis:
//!
//! `dη_k/dt = -d_k η_{k-2} + (d_k - d_{k+2}) η_k + d_{k+2} η_{k+2}`
//!
//! with `η_{-1} = η_0 = 0` and couplings beyond the truncation dropped (their
//! instantaneous flux is logged). The module also carries the energy
//! diagnostics: the production term `Σ diff_k η_k^2`, the hyperbolic
//! comparison envelopes `J_i`, and the exact quadratic-form decomposition of
//! the second derivative of the energy.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::coefficients::{self, LAMBDA_MIN};
use crate::rational::{to_f64, Rational};
use crate::series::TildeSeries;
use crate::{Error, Result};

/// Stride-2 tridiagonal operator of the truncated chain at truncation `n`.
///
/// Row `k` (1-based) has entries `sub[k-1] = -d_k` on `η_{k-2}`,
/// `diag[k-1] = d_k - d_{k+2}` on `η_k`, `sup[k-1] = d_{k+2}` on `η_{k+2}`.
/// Entries couple indices of equal parity only.
#[derive(Debug, Clone)]
pub struct ChainOperator {
    n: usize,
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    /// `d_{n+1}`, `d_{n+2}`: magnitudes of the couplings that exit the
    /// truncation through the last two rows.
    exit: (f64, f64),
}

impl ChainOperator {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "chain truncation must be at least 2");
        let d: Vec<f64> = (1..=n as u32 + 2)
            .map(|k| to_f64(&coefficients::d_coeff(k)))
            .collect();
        let diag: Vec<f64> = (1..=n as u32)
            .map(|k| to_f64(&coefficients::diff_coeff(k)))
            .collect();
        ChainOperator {
            n,
            sub: (0..n).map(|i| -d[i]).collect(),
            diag,
            sup: (0..n).map(|i| d[i + 2]).collect(),
            exit: (d[n], d[n + 1]),
        }
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// `out = (chain) η`; `η` and `out` have length `n`.
    pub fn apply(&self, eta: &[f64], out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(eta.len(), n);
        debug_assert_eq!(out.len(), n);
        for i in 0..n {
            let mut v = self.diag[i] * eta[i];
            if i >= 2 {
                v += self.sub[i] * eta[i - 2];
            }
            if i + 2 < n {
                v += self.sup[i] * eta[i + 2];
            }
            out[i] = v;
        }
    }

    /// Magnitude of the couplings dropped at the boundary for the state
    /// `η`: `|d_{n+1} η_{n-1}| + |d_{n+2} η_n|`.
    pub fn exit_flux(&self, eta: &[f64]) -> f64 {
        let n = self.n;
        (self.exit.0 * eta[n - 2]).abs() + (self.exit.1 * eta[n - 1]).abs()
    }

    /// The logged per-sample flux `|d_{n+2} η_n|`.
    pub fn tail_flux(&self, eta: &[f64]) -> f64 {
        (self.exit.1 * eta[self.n - 1]).abs()
    }
}

/// Action of `-L` on the sine basis vector `e_k = sin(kθ)` as a sparse list
/// of `(frequency, exact coefficient)` pairs:
/// `-L e_k = A_k e_{k+2} + B_k e_{k-2}` with `A_k = -(k-2)^2/(4k)` and
/// `B_k = (k+2)(k-2)/(4k)`; `e_2` is annihilated and for `k <= 2` the
/// down-coupling folds back (`e_{-1} = -e_1`, `e_0 = 0`).
pub fn apply_l_sine(k: u32) -> Vec<(u32, Rational)> {
    assert!(k >= 1);
    if k == 2 {
        return Vec::new();
    }
    let ki = k as i64;
    let a = Rational::new((-(ki - 2) * (ki - 2)).into(), (4 * ki).into());
    let b = Rational::new(((ki + 2) * (ki - 2)).into(), (4 * ki).into());
    if k == 1 {
        // B_1 e_{-1} = -B_1 e_1 = (3/4) e_1
        vec![(1, -b), (3, a)]
    } else {
        vec![(k - 2, b), (k + 2, a)]
    }
}

/// Action of `-L` on a tilde series under its own truncation; the second
/// component reports the magnitude of the dropped boundary couplings.
pub fn apply_l_tilde(eta: &TildeSeries) -> (TildeSeries, f64) {
    let n = eta.len().max(2);
    let op = ChainOperator::new(n);
    let padded = eta.resized(n);
    let mut out = vec![0.0; n];
    op.apply(padded.coeffs(), &mut out);
    let flux = op.exit_flux(padded.coeffs());
    (TildeSeries::new(out), flux)
}

/// Energy production term `⟨-Lη, η⟩_ρ = Σ_k diff_k η_k^2`.
pub fn rayleigh(eta: &TildeSeries) -> f64 {
    eta.coeffs()
        .iter()
        .enumerate()
        .map(|(i, &v)| to_f64(&coefficients::diff_coeff(i as u32 + 1)) * v * v)
        .sum()
}

/// Exact-rational twin of [`rayleigh`].
pub fn rayleigh_rational(eta: &[Rational]) -> Rational {
    eta.iter()
        .enumerate()
        .map(|(i, v)| coefficients::diff_coeff(i as u32 + 1) * v * v)
        .fold(Rational::zero(), |acc, t| acc + t)
}

/// Comparison envelope
/// `J(t) = (E_0 + R_0/√λ)/2 e^{2√λ t} + (E_0 - R_0/√λ)/2 e^{-2√λ t}`
/// where `E_0 = ⟨η_0,η_0⟩_ρ` and `R_0 = ⟨-Lη_0,η_0⟩_ρ`.
pub fn comparison_bound(energy0: f64, rayleigh0: f64, lambda: f64, t: f64) -> f64 {
    assert!(lambda > 0.0);
    let s = lambda.sqrt();
    let plus = 0.5 * (energy0 + rayleigh0 / s);
    let minus = 0.5 * (energy0 - rayleigh0 / s);
    plus * (2.0 * s * t).exp() + minus * (-2.0 * s * t).exp()
}

/// [`comparison_bound`] evaluated from initial data.
pub fn comparison_bounds(eta0: &TildeSeries, lambda: f64, t: f64) -> f64 {
    comparison_bound(eta0.hdw_norm_sq(), rayleigh(eta0), lambda, t)
}

/// Itemized result of the decomposition of
/// `S_n = d/dt Σ_{k<=n} diff_k η_k^2` into boundary squares, the positive
/// definite forms `f_k` and the two boundary remainders.
#[derive(Debug, Clone)]
pub struct SformParts<T> {
    /// `2 Σ_k [-d_k diff_k η_{k-2} η_k + diff_k^2 η_k^2 + d_{k+2} diff_k η_k η_{k+2}]`
    pub direct: T,
    /// `boundary + forms + remainders` — algebraically identical to `direct`.
    pub decomposed: T,
    pub boundary: T,
    pub forms: T,
    pub remainders: T,
}

fn sform_in<T>(eta: &[T], n: usize, d: impl Fn(u32) -> T, diff: impl Fn(u32) -> T) -> SformParts<T>
where
    T: Clone + Zero + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    assert!(n >= 2, "the decomposition needs at least two boundary rows");
    assert!(n <= eta.len(), "n exceeds the truncation of the series");
    let get = |k: i64| -> T {
        if k >= 1 && (k as usize) <= eta.len() {
            eta[(k - 1) as usize].clone()
        } else {
            T::zero()
        }
    };
    // Direct route: row-by-row products from the chain equation.
    let mut direct = T::zero();
    for k in 1..=n as i64 {
        let dk = d(k as u32);
        let dk2 = d(k as u32 + 2);
        let df = diff(k as u32);
        let term = -dk * df.clone() * get(k - 2) * get(k)
            + df.clone() * df.clone() * get(k) * get(k)
            + dk2 * df * get(k) * get(k + 2);
        direct = direct + term.clone() + term;
    }

    // Decomposed route: boundary squares + positive forms + remainders.
    let sq = |k: u32| {
        let df = diff(k);
        let v = get(k as i64);
        df.clone() * df * v.clone() * v
    };
    let boundary = sq(1) + sq(2) + sq(n as u32 - 1) + sq(n as u32);

    let mut forms = T::zero();
    for k in 1..=(n as i64 - 2) {
        let ku = k as u32;
        let eps = {
            // -2 d_{k+2}^2 + d_k d_{k+2} + d_{k+2} d_{k+4}
            let dk2 = d(ku + 2);
            let prod = d(ku) * dk2.clone() + dk2.clone() * d(ku + 4);
            prod - (dk2.clone() * dk2.clone() + dk2.clone() * dk2)
        };
        let cross = eps * get(k) * get(k + 2);
        forms = forms + sq(ku) + cross.clone() + cross + sq(ku + 2);
    }

    let remainder = |k: i64| {
        let r = d(k as u32 + 2) * diff(k as u32) * get(k) * get(k + 2);
        r.clone() + r
    };
    let remainders = remainder(n as i64 - 1) + remainder(n as i64);

    let decomposed = boundary.clone() + forms.clone() + remainders.clone();
    SformParts {
        direct,
        decomposed,
        boundary,
        forms,
        remainders,
    }
}

/// Float decomposition of `S_n` for a tilde series (out-of-range indices,
/// including `η_{n+1}`, `η_{n+2}` beyond the truncation, count as zero).
pub fn sform_decomposition(eta: &TildeSeries, n: usize) -> SformParts<f64> {
    sform_in(
        eta.coeffs(),
        n,
        |k| to_f64(&coefficients::d_coeff(k)),
        |k| to_f64(&coefficients::diff_coeff(k)),
    )
}

/// Exact-rational decomposition of `S_n`; `direct == decomposed` holds as an
/// identity of rationals.
pub fn sform_decomposition_rational(eta: &[Rational], n: usize) -> SformParts<Rational> {
    sform_in(eta, n, coefficients::d_coeff, coefficients::diff_coeff)
}

/// Kinds of initial data for the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    SingleMode,
    TwoMode,
    EvenFamily,
    Custom,
}

/// Declarative initial-data specification: a kind plus a sparse map from
/// tilde index to amplitude. For `two_mode` with `window = true`, the
/// amplitudes must satisfy the two-sided admissibility window that places
/// the production term in `[0, √λ_min · ‖η_0‖^2]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialData {
    pub kind: InitKind,
    pub amplitudes: BTreeMap<u32, f64>,
    #[serde(default)]
    pub window: bool,
}

impl InitialData {
    pub fn single_mode(k: u32, amplitude: f64) -> Self {
        InitialData {
            kind: InitKind::SingleMode,
            amplitudes: BTreeMap::from([(k, amplitude)]),
            window: false,
        }
    }

    pub fn two_mode(a1: f64, k: u32, ak: f64, window: bool) -> Self {
        InitialData {
            kind: InitKind::TwoMode,
            amplitudes: BTreeMap::from([(1, a1), (k, ak)]),
            window,
        }
    }

    pub fn even_family(amps: &[(u32, f64)]) -> Self {
        InitialData {
            kind: InitKind::EvenFamily,
            amplitudes: amps.iter().copied().collect(),
            window: false,
        }
    }

    pub fn custom(amps: &[(u32, f64)]) -> Self {
        InitialData {
            kind: InitKind::Custom,
            amplitudes: amps.iter().copied().collect(),
            window: false,
        }
    }
}

// Slack for window checks on amplitudes that sit exactly on a boundary in
// exact arithmetic but round in floats.
const WINDOW_SLACK: f64 = 1e-12;

/// Admissible interval for `a_k^2` in the two-mode family, given `a_1`.
///
/// Upper end enforces `⟨-Lη_0,η_0⟩ >= 0`; the lower end (active only with
/// the window flag) additionally enforces `⟨-Lη_0,η_0⟩ <= √λ_min ‖η_0‖^2`.
pub fn two_mode_window(k: u32, a1: f64) -> (f64, f64) {
    assert!(k >= 2);
    let gap = -to_f64(&coefficients::diff_coeff(k)); // d_{k+2} - d_k > 0 for k >= 2
    let top = to_f64(&coefficients::diff_coeff(1)); // 11/18
    let sqrt_lambda = LAMBDA_MIN.sqrt();
    let lower = (top - sqrt_lambda) / (sqrt_lambda + gap) * a1 * a1;
    let upper = top / gap * a1 * a1;
    (lower, upper)
}

/// Builds the tilde series for an [`InitialData`] spec, validating the
/// structural constraints of its kind.
pub fn build_initial_data(spec: &InitialData) -> Result<TildeSeries> {
    if spec.amplitudes.is_empty() {
        return Err(Error::InadmissibleData("no amplitudes given".into()));
    }
    for (&k, &a) in &spec.amplitudes {
        if k == 0 {
            return Err(Error::InadmissibleData("tilde indices start at 1".into()));
        }
        if !a.is_finite() {
            return Err(Error::InadmissibleData(format!(
                "amplitude at index {k} is not finite"
            )));
        }
    }
    let nonzero = spec.amplitudes.values().any(|&a| a != 0.0);
    if !nonzero {
        return Err(Error::InadmissibleData("all amplitudes are zero".into()));
    }

    match spec.kind {
        InitKind::SingleMode => {
            if spec.amplitudes.len() != 1 {
                return Err(Error::InadmissibleData(
                    "single_mode takes exactly one amplitude".into(),
                ));
            }
        }
        InitKind::TwoMode => {
            let a1 = *spec.amplitudes.get(&1).ok_or_else(|| {
                Error::InadmissibleData("two_mode requires an amplitude at index 1".into())
            })?;
            let (&k, &ak) = spec
                .amplitudes
                .iter()
                .find(|(&k, _)| k >= 2)
                .ok_or_else(|| {
                    Error::InadmissibleData("two_mode requires a second index k >= 2".into())
                })?;
            if spec.amplitudes.len() != 2 || a1 == 0.0 || ak == 0.0 {
                return Err(Error::InadmissibleData(
                    "two_mode takes exactly two nonzero amplitudes, at 1 and at k >= 2".into(),
                ));
            }
            let (lower, upper) = two_mode_window(k, a1);
            let ak2 = ak * ak;
            if ak2 > upper * (1.0 + WINDOW_SLACK) {
                return Err(Error::InadmissibleData(format!(
                    "a_{k}^2 = {ak2:.6e} above the admissible interval [{lower:.6e}, {upper:.6e}] \
                     (production term would be negative)"
                )));
            }
            if spec.window && ak2 < lower * (1.0 - WINDOW_SLACK) {
                return Err(Error::InadmissibleData(format!(
                    "a_{k}^2 = {ak2:.6e} below the admissible interval [{lower:.6e}, {upper:.6e}] \
                     (production term would exceed √λ_min ‖η_0‖^2)"
                )));
            }
        }
        InitKind::EvenFamily => {
            if spec.amplitudes.keys().any(|&k| k % 2 != 0) {
                return Err(Error::InadmissibleData(
                    "even_family amplitudes must sit on even tilde indices".into(),
                ));
            }
        }
        InitKind::Custom => {}
    }

    let n = *spec.amplitudes.keys().max().unwrap() as usize;
    let mut coeffs = vec![0.0; n];
    for (&k, &a) in &spec.amplitudes {
        coeffs[(k - 1) as usize] = a;
    }
    Ok(TildeSeries::new(coeffs))
}

/// Gate for the instability experiments:
/// `0 <= ⟨-Lη_0,η_0⟩ <= √λ_min ⟨η_0,η_0⟩` (with a relative slack for
/// boundary data).
pub fn check_instability_hypothesis(eta0: &TildeSeries) -> Result<()> {
    let r = rayleigh(eta0);
    let bound = LAMBDA_MIN.sqrt() * eta0.hdw_norm_sq();
    let slack = WINDOW_SLACK * eta0.hdw_norm_sq().max(1.0);
    if r < -slack || r > bound + slack {
        return Err(Error::InadmissibleData(format!(
            "production term {r:.6e} outside [0, {bound:.6e}]; pick amplitudes inside the \
             two-mode admissibility window"
        )));
    }
    Ok(())
}

/// Configuration of a linear chain run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearRunConfig {
    pub t_final: f64,
    pub dt: f64,
    /// Chain truncation.
    pub n: usize,
    /// Keep a state snapshot every this many steps (`0` = endpoints only).
    #[serde(default)]
    pub snapshot_every: usize,
}

impl Default for LinearRunConfig {
    fn default() -> Self {
        LinearRunConfig {
            t_final: 10.0,
            dt: 1e-3,
            n: 256,
            snapshot_every: 0,
        }
    }
}

/// Scalar diagnostics per time sample plus sparse state snapshots.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub rayleigh: Vec<f64>,
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    pub tail_flux: Vec<f64>,
    /// `(step index, state)` — always includes the first and last step.
    pub snapshots: Vec<(usize, TildeSeries)>,
    pub config: LinearRunConfig,
}

const LINEAR_GUARD_FACTOR: f64 = 1e12;

/// Integrates the truncated chain with the classical fixed-step 4th-order
/// scheme, recording energy, production term, both comparison envelopes and
/// the truncation flux at every step.
///
/// Aborts (blow-up guard) if the energy exceeds `1e12` times its initial
/// value — a sign of a too-large step or of an instability run past its
/// horizon.
pub fn evolve_linear(eta0: &TildeSeries, config: &LinearRunConfig) -> Result<Trajectory> {
    if !(config.dt > 0.0) {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    if config.n < eta0.len().max(2) {
        return Err(Error::InvalidConfig(format!(
            "truncation n = {} below the initial data support {}",
            config.n,
            eta0.len()
        )));
    }
    let op = ChainOperator::new(config.n);
    let n = config.n;
    let steps = (config.t_final / config.dt).round() as usize;
    let dt = config.dt;

    let mut eta = eta0.resized(n).coeffs().to_vec();
    let energy0: f64 = eta.iter().map(|v| v * v).sum();
    let rayleigh0 = rayleigh(&TildeSeries::new(eta.clone()));

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        rayleigh: Vec::with_capacity(steps + 1),
        j1: Vec::with_capacity(steps + 1),
        j2: Vec::with_capacity(steps + 1),
        tail_flux: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
        config: config.clone(),
    };

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    let record = |traj: &mut Trajectory, step: usize, eta: &[f64]| {
        let t = step as f64 * dt;
        let series = TildeSeries::new(eta.to_vec());
        traj.times.push(t);
        traj.energy.push(series.hdw_norm_sq());
        traj.rayleigh.push(rayleigh(&series));
        traj.j1
            .push(comparison_bound(energy0, rayleigh0, coefficients::LAMBDA_MIN, t));
        traj.j2
            .push(comparison_bound(energy0, rayleigh0, coefficients::LAMBDA_MAX, t));
        traj.tail_flux.push(op.tail_flux(eta));
        let snap = step == 0
            || step == steps
            || (config.snapshot_every > 0 && step % config.snapshot_every == 0);
        if snap {
            traj.snapshots.push((step, series));
        }
    };

    record(&mut traj, 0, &eta);
    for step in 1..=steps {
        op.apply(&eta, &mut k1);
        for i in 0..n {
            stage[i] = eta[i] + 0.5 * dt * k1[i];
        }
        op.apply(&stage, &mut k2);
        for i in 0..n {
            stage[i] = eta[i] + 0.5 * dt * k2[i];
        }
        op.apply(&stage, &mut k3);
        for i in 0..n {
            stage[i] = eta[i] + dt * k3[i];
        }
        op.apply(&stage, &mut k4);
        for i in 0..n {
            eta[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        let energy: f64 = eta.iter().map(|v| v * v).sum();
        if !energy.is_finite() || energy > LINEAR_GUARD_FACTOR * energy0.max(f64::MIN_POSITIVE) {
            return Err(Error::BlowupGuard {
                t: step as f64 * dt,
                quantity: "energy",
                value: energy,
            });
        }
        record(&mut traj, step, &eta);
    }
    Ok(traj)
}
