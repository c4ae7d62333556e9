//! Dealiased pseudo-spectral solver for the gCLM family
//! `∂_t ω + a u ∂_θ ω = ω ∂_θ u`, `∂_θ u = Hω`, and for the perturbation
//! system around the steady state `-sin 2θ`, together with the stability and
//! instability experiments stated around that state.
//!
//! Quadratic products are formed on the grid and truncated back to the
//! retained band; with the two-thirds rule (`modes <= M/3`) the retained
//! band is alias-free.
//!
//! The two formulations use different state vectors. The vorticity
//! formulation evolves plain Fourier amplitudes of `ω`. The perturbation
//! formulation evolves tilde-basis coefficients of `η` and projects the
//! right-hand side back onto the tilde span every evaluation: a sharp sine
//! cutoff does not respect the weighted space (the chopped tail leaves a
//! residue with `∂_θη(0) != 0` whose weighted norm is spurious), while the
//! projected system is the weighted Galerkin truncation and stays in the
//! span by construction.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::field::{FourierField, GridTransform};
use crate::linear::{self, LinearRunConfig};
use crate::series::{self, TildeSeries};
use crate::{Error, Result};

/// Dealiasing rule for quadratic products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    TwoThirds,
    None,
}

/// Pseudo-spectral solver configuration. The velocity gauge is always
/// `u(0) = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Grid size (power of two).
    pub m: usize,
    /// Retained frequencies after dealiasing.
    pub modes: usize,
    /// Fixed time step.
    pub dt: f64,
    /// Transport parameter: `1` = De Gregorio, `0` = CLM.
    pub a: f64,
    pub dealias: Dealias,
    /// Diagnostics are recorded every this many steps.
    pub sample_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            m: 512,
            modes: 170,
            dt: 1e-3,
            a: 1.0,
            dealias: Dealias::TwoThirds,
            sample_every: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.m.is_power_of_two() || self.m < 16 {
            return Err(Error::InvalidConfig(format!(
                "grid size {} must be a power of two >= 16",
                self.m
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidConfig("sample_every must be >= 1".into()));
        }
        let cap = match self.dealias {
            Dealias::TwoThirds => self.m / 3,
            Dealias::None => self.m / 2 - 1,
        };
        if self.modes < 8 || self.modes > cap {
            return Err(Error::InvalidConfig(format!(
                "modes = {} violates the admissible range [8, {}] for grid {} ({:?})",
                self.modes, cap, self.m, self.dealias
            )));
        }
        Ok(())
    }

    /// Tilde truncation of the perturbation state; its sine expansion then
    /// fills the retained band exactly.
    pub fn tilde_truncation(&self) -> usize {
        self.modes - 2
    }
}

/// The evolved unknowns.
#[derive(Debug, Clone)]
pub enum StateVector {
    /// Full vorticity `ω` as Fourier amplitudes.
    Vorticity(FourierField),
    /// Perturbation `η` (with `ω = -sin 2θ + η`) as tilde coefficients.
    Perturbation(TildeSeries),
}

/// Time-stamped solver state.
#[derive(Debug, Clone)]
pub struct NonlinearState {
    pub vector: StateVector,
    pub t: f64,
}

impl NonlinearState {
    pub fn vorticity(field: FourierField) -> Self {
        NonlinearState {
            vector: StateVector::Vorticity(field),
            t: 0.0,
        }
    }

    pub fn perturbation(eta: TildeSeries) -> Self {
        NonlinearState {
            vector: StateVector::Perturbation(eta),
            t: 0.0,
        }
    }

    /// The perturbation `η = ω + sin 2θ` as a field on `modes` frequencies.
    pub fn perturbation_field(&self, modes: usize) -> Result<FourierField> {
        match &self.vector {
            StateVector::Perturbation(eta) => field_from_tilde(eta, modes),
            StateVector::Vorticity(omega) => {
                if omega.modes() < 2 {
                    return Err(Error::InvalidConfig("vorticity field too short".into()));
                }
                let mut f = omega.clone();
                f.sin[1] += 1.0;
                Ok(f)
            }
        }
    }

    /// The evolved unknown itself as a field (`ω` or `η`).
    fn unknown_field(&self, modes: usize) -> Result<FourierField> {
        match &self.vector {
            StateVector::Vorticity(omega) => Ok(omega.clone()),
            StateVector::Perturbation(eta) => field_from_tilde(eta, modes),
        }
    }
}

/// Scalar diagnostics of one sample.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Weighted-space norm of the perturbation.
    pub hdw_norm: f64,
    /// Residual of the tilde projection (zero by construction for
    /// tilde-backed states).
    pub hdw_residual: f64,
    pub l2_norm: f64,
    pub sup_norm: f64,
    /// Mass on odd-frequency sine modes.
    pub parity_leak: f64,
    /// Spectral mass above `2/3` of the retained band.
    pub tail_mass: f64,
}

/// Blow-up guard event: the run stopped here, last good state persisted.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GuardTrip {
    pub t: f64,
    pub sup: f64,
}

/// Guard threshold on the sup norm of the evolved field.
pub const GUARD_SUP: f64 = 1e6;

/// Sampled run record of one nonlinear trajectory.
#[derive(Debug, Clone)]
pub struct NonlinearRun {
    pub times: Vec<f64>,
    pub diagnostics: Vec<Diagnostics>,
    /// `(t, perturbation as a spectral field)` at snapshot times.
    pub snapshots: Vec<(f64, FourierField)>,
    pub final_state: NonlinearState,
    pub guard: Option<GuardTrip>,
}

/// Pseudo-spectral right-hand sides and the fixed-step 4th-order integrator,
/// with grids and plans prepared once per configuration.
pub struct PseudoSpectral {
    cfg: SolverConfig,
    transform: GridTransform,
    sin2t: Vec<f64>,
    cos2t: Vec<f64>,
}

impl PseudoSpectral {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let transform = GridTransform::new(cfg.m);
        let theta = |i: usize| crate::field::GridField::theta(cfg.m, i);
        Ok(PseudoSpectral {
            sin2t: (0..cfg.m).map(|i| (2.0 * theta(i)).sin()).collect(),
            cos2t: (0..cfg.m).map(|i| (2.0 * theta(i)).cos()).collect(),
            transform,
            cfg,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn transform(&self) -> &GridTransform {
        &self.transform
    }

    fn grid(&self, f: &FourierField) -> Vec<f64> {
        self.transform.to_grid(f).values().to_vec()
    }

    fn spectral(&self, values: Vec<f64>) -> FourierField {
        self.transform
            .from_grid(&crate::field::GridField::new(values), self.cfg.modes)
    }

    /// `-a u ∂_θ ω + ω ∂_θ u` with `u` recovered under the `u(0) = 0` gauge.
    pub fn rhs_vorticity(&self, omega: &FourierField) -> FourierField {
        let u = omega.velocity();
        let gu = self.grid(&u);
        let gdu = self.grid(&u.derivative());
        let go = self.grid(omega);
        let gdo = self.grid(&omega.derivative());
        let a = self.cfg.a;
        let values: Vec<f64> = (0..self.cfg.m)
            .map(|i| -a * gu[i] * gdo[i] + go[i] * gdu[i])
            .collect();
        self.spectral(values)
    }

    /// `-Lη + N(η)` for the perturbation around `-sin 2θ`, with
    /// `Lη = (1/2) sin 2θ ∂_θη - cos 2θ η + sin 2θ Hη - 2 cos 2θ v`,
    /// `N(η) = ∂_θv η - v ∂_θη` and `∂_θ v = Hη`, `v(0) = 0`.
    pub fn rhs_perturbation(&self, eta: &FourierField) -> FourierField {
        let v = eta.velocity();
        let ge = self.grid(eta);
        let gde = self.grid(&eta.derivative());
        let gh = self.grid(&eta.hilbert()); // = ∂_θ v on the grid
        let gv = self.grid(&v);
        let values: Vec<f64> = (0..self.cfg.m)
            .map(|i| {
                let (s2, c2) = (self.sin2t[i], self.cos2t[i]);
                let l = 0.5 * s2 * gde[i] - c2 * ge[i] + s2 * gh[i] - 2.0 * c2 * gv[i];
                let n = gh[i] * ge[i] - gv[i] * gde[i];
                -l + n
            })
            .collect();
        self.spectral(values)
    }

    /// [`Self::rhs_perturbation`] followed by the orthogonal projection onto
    /// the tilde span — the weighted Galerkin right-hand side. The
    /// projection touches only sine modes below the truncation, which the
    /// dealiased grid products compute exactly.
    pub fn rhs_perturbation_tilde(&self, eta: &TildeSeries) -> Result<TildeSeries> {
        let k_max = self.cfg.tilde_truncation();
        debug_assert!(eta.len() <= k_max);
        let field = field_from_tilde(eta, self.cfg.modes)?;
        let rhs = self.rhs_perturbation(&field);
        Ok(series::galerkin_project(&rhs.sine_part(), k_max))
    }

    /// One classical 4th-order step.
    pub fn step(&self, state: &mut NonlinearState) -> Result<()> {
        let dt = self.cfg.dt;
        match &mut state.vector {
            StateVector::Vorticity(field) => {
                let k1 = self.rhs_vorticity(field);
                let mut y2 = field.clone();
                y2.add_scaled(&k1, 0.5 * dt);
                let k2 = self.rhs_vorticity(&y2);
                let mut y3 = field.clone();
                y3.add_scaled(&k2, 0.5 * dt);
                let k3 = self.rhs_vorticity(&y3);
                let mut y4 = field.clone();
                y4.add_scaled(&k3, dt);
                let k4 = self.rhs_vorticity(&y4);
                field.add_scaled(&k1, dt / 6.0);
                field.add_scaled(&k2, dt / 3.0);
                field.add_scaled(&k3, dt / 3.0);
                field.add_scaled(&k4, dt / 6.0);
            }
            StateVector::Perturbation(eta) => {
                let k_max = self.cfg.tilde_truncation();
                let y = eta.resized(k_max);
                let k1 = self.rhs_perturbation_tilde(&y)?;
                let k2 = self.rhs_perturbation_tilde(&axpy(&y, &k1, 0.5 * dt))?;
                let k3 = self.rhs_perturbation_tilde(&axpy(&y, &k2, 0.5 * dt))?;
                let k4 = self.rhs_perturbation_tilde(&axpy(&y, &k3, dt))?;
                let mut out = y.coeffs().to_vec();
                for i in 0..k_max {
                    out[i] += dt / 6.0
                        * (k1.coeffs()[i]
                            + 2.0 * k2.coeffs()[i]
                            + 2.0 * k3.coeffs()[i]
                            + k4.coeffs()[i]);
                }
                *eta = TildeSeries::new(out);
            }
        }
        state.t += dt;
        Ok(())
    }

    /// Diagnostics of the current state.
    pub fn diagnostics(&self, state: &NonlinearState) -> Result<Diagnostics> {
        let eta = state.perturbation_field(self.cfg.modes)?;
        let (hdw_norm, hdw_residual) = match &state.vector {
            StateVector::Perturbation(t) => (t.hdw_norm(), 0.0),
            StateVector::Vorticity(_) => {
                let proj = series::sine_to_tilde(&eta.sine_part());
                (proj.series.hdw_norm(), proj.residual)
            }
        };
        let grid = self.transform.to_grid(&eta);
        let cut = 2 * self.cfg.modes / 3;
        Ok(Diagnostics {
            hdw_norm,
            hdw_residual,
            l2_norm: eta.l2_norm(),
            sup_norm: grid.sup_norm(),
            parity_leak: eta.odd_frequency_sine_mass(),
            tail_mass: eta.tail_mass(cut),
        })
    }

    fn guard_check(&self, state: &NonlinearState) -> Result<Option<GuardTrip>> {
        let (finite, coeff_l1) = match &state.vector {
            StateVector::Vorticity(f) => (
                f.mean.is_finite()
                    && f.cos.iter().all(|c| c.is_finite())
                    && f.sin.iter().all(|c| c.is_finite()),
                f.mean.abs()
                    + f.cos.iter().map(|c| c.abs()).sum::<f64>()
                    + f.sin.iter().map(|c| c.abs()).sum::<f64>(),
            ),
            StateVector::Perturbation(eta) => (
                eta.coeffs().iter().all(|c| c.is_finite()),
                // |ẽ_k| <= 1/k + 1/(k+2) <= 2
                eta.coeffs().iter().map(|c| 2.0 * c.abs()).sum::<f64>(),
            ),
        };
        if !finite {
            return Ok(Some(GuardTrip {
                t: state.t,
                sup: f64::NAN,
            }));
        }
        // coeff_l1 bounds the sup norm; take the exact sup only when the
        // bound says a trip is possible.
        if coeff_l1 > GUARD_SUP {
            let sup = self
                .transform
                .to_grid(&state.unknown_field(self.cfg.modes)?)
                .sup_norm();
            if sup > GUARD_SUP {
                return Ok(Some(GuardTrip { t: state.t, sup }));
            }
        }
        Ok(None)
    }

    /// Runs to `t_final`, sampling diagnostics every `sample_every` steps
    /// and persisting perturbation snapshots every `snapshot_every` samples
    /// (`0` = first and last only). A guard trip ends the run early with the
    /// last good state kept.
    pub fn evolve(
        &self,
        state0: NonlinearState,
        t_final: f64,
        snapshot_every: usize,
    ) -> Result<NonlinearRun> {
        let steps = (t_final / self.cfg.dt).round() as usize;
        let mut state = state0;
        let mut run = NonlinearRun {
            times: Vec::new(),
            diagnostics: Vec::new(),
            snapshots: Vec::new(),
            final_state: state.clone(),
            guard: None,
        };
        let mut sample_index = 0usize;

        macro_rules! record {
            ($state:expr, $force_snap:expr) => {{
                run.times.push($state.t);
                run.diagnostics.push(self.diagnostics($state)?);
                if $force_snap || (snapshot_every > 0 && sample_index % snapshot_every == 0) {
                    run.snapshots
                        .push(($state.t, $state.perturbation_field(self.cfg.modes)?));
                }
                sample_index += 1;
            }};
        }

        record!(&state, true);
        let mut last_good = state.clone();
        for step in 1..=steps {
            self.step(&mut state)?;
            if let Some(trip) = self.guard_check(&state)? {
                run.guard = Some(trip);
                break;
            }
            last_good = state.clone();
            if step % self.cfg.sample_every == 0 || step == steps {
                record!(&state, step == steps);
            }
        }
        run.final_state = last_good;
        Ok(run)
    }
}

fn axpy(y: &TildeSeries, k: &TildeSeries, s: f64) -> TildeSeries {
    let mut out = y.coeffs().to_vec();
    for (o, v) in out.iter_mut().zip(k.coeffs()) {
        *o += s * v;
    }
    TildeSeries::new(out)
}

/// Odd field on the retained band built from tilde-basis amplitudes.
pub fn field_from_tilde(eta: &TildeSeries, modes: usize) -> Result<FourierField> {
    FourierField::from_sine(&series::tilde_to_sine(eta), modes)
}

/// Pass/fail record of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

/// Least-squares exponential-rate fit over a declared window.
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub t_begin: f64,
    pub t_end: f64,
    /// Slope of `ln ‖η‖` over the window.
    pub rate: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

/// Named sampled scalar series, ready for two-column CSV emission.
#[derive(Debug, Clone, Serialize)]
pub struct SampledSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Label, configuration, sampled series, fitted rate and verdicts of one
/// experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub label: String,
    pub solver: SolverConfig,
    pub params: serde_json::Value,
    pub series: Vec<SampledSeries>,
    pub fit: Option<RateFit>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub guard: Option<GuardTrip>,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }
}

fn fit_log_rate(times: &[f64], values: &[f64], t_begin: f64, t_end: f64) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(&t, &v)| t >= t_begin && t <= t_end && v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    let rate = (n * sxy - sx * sy) / denom;
    let intercept = (sy - rate * sx) / n;
    let residual_rms = (pts
        .iter()
        .map(|(t, y)| {
            let r = y - (intercept + rate * t);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Some(RateFit {
        t_begin,
        t_end,
        rate,
        intercept,
        residual_rms,
    })
}

/// Tolerance added to the `-3/8` decay rate when judging stability runs.
pub const DECAY_RATE_TOL: f64 = 0.05;

/// Parity-leak ceiling for runs confined to the even-frequency subspace.
pub const PARITY_TOL: f64 = 1e-12;

/// Nonlinear decay experiment: evolves `amplitude * Σ_{k in modes} ẽ_k`
/// (all indices even) and fits the decay rate of the weighted norm over the
/// tail window `[T/2, T]`. The verdict requires the fitted rate to be at
/// most `-3/8 + 0.05` with the parity invariant intact.
pub fn stability_experiment(
    amplitude: f64,
    mode_set: &[u32],
    t_final: f64,
    cfg: &SolverConfig,
) -> Result<ExperimentReport> {
    if amplitude == 0.0 {
        return Err(Error::InadmissibleData(
            "stability run needs nonzero amplitude".into(),
        ));
    }
    if mode_set.is_empty() || mode_set.iter().any(|&k| k == 0 || k % 2 != 0) {
        return Err(Error::InadmissibleData(
            "stability mode set must be nonempty and even".into(),
        ));
    }
    let amps: Vec<(u32, f64)> = mode_set.iter().map(|&k| (k, amplitude)).collect();
    let eta0 = linear::build_initial_data(&linear::InitialData::even_family(&amps))?;
    let solver = PseudoSpectral::new(cfg.clone())?;
    let run = solver.evolve(
        NonlinearState::perturbation(eta0.resized(cfg.tilde_truncation())),
        t_final,
        0,
    )?;

    let hdw: Vec<f64> = run.diagnostics.iter().map(|d| d.hdw_norm).collect();
    let parity_max = run
        .diagnostics
        .iter()
        .fold(0.0_f64, |m, d| m.max(d.parity_leak));
    let fit = fit_log_rate(&run.times, &hdw, t_final / 2.0, t_final);
    let rate = fit.as_ref().map(|f| f.rate).unwrap_or(f64::INFINITY);

    let mut verdicts = BTreeMap::new();
    verdicts.insert(
        "decay_rate".into(),
        Verdict {
            pass: run.guard.is_none() && rate <= -3.0 / 8.0 + DECAY_RATE_TOL,
            value: rate,
            tolerance: -3.0 / 8.0 + DECAY_RATE_TOL,
        },
    );
    verdicts.insert(
        "parity_leak".into(),
        Verdict {
            pass: parity_max < PARITY_TOL,
            value: parity_max,
            tolerance: PARITY_TOL,
        },
    );
    verdicts.insert(
        "guard_clear".into(),
        Verdict {
            pass: run.guard.is_none(),
            value: run.guard.map(|g| g.sup).unwrap_or(0.0),
            tolerance: GUARD_SUP,
        },
    );

    Ok(ExperimentReport {
        label: "stability".into(),
        solver: cfg.clone(),
        params: serde_json::json!({
            "amplitude": amplitude,
            "modes": mode_set,
            "t_final": t_final,
        }),
        series: vec![
            SampledSeries {
                name: "hdw_norm".into(),
                times: run.times.clone(),
                values: hdw,
            },
            SampledSeries {
                name: "parity_leak".into(),
                times: run.times.clone(),
                values: run.diagnostics.iter().map(|d| d.parity_leak).collect(),
            },
            SampledSeries {
                name: "tail_mass".into(),
                times: run.times.clone(),
                values: run.diagnostics.iter().map(|d| d.tail_mass).collect(),
            },
        ],
        fit,
        verdicts,
        guard: run.guard,
    })
}

/// Options of the scaled-family instability experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct InstabilityOptions {
    /// Scaling factors applied to the base data.
    pub epsilons: Vec<f64>,
    /// Growth threshold on `‖u(t)‖_{L^2} / ‖u_0^ε‖_{L^2}`.
    pub threshold: f64,
    /// Give up (verdict false) past this horizon.
    pub t_max: f64,
    /// Cross-check this ε against the linear chain (1% envelope).
    pub linear_check: Option<f64>,
}

impl Default for InstabilityOptions {
    fn default() -> Self {
        InstabilityOptions {
            epsilons: vec![1e-2, 1e-3, 1e-4],
            threshold: 10.0,
            t_max: 60.0,
            linear_check: None,
        }
    }
}

/// Scaled-family instability experiment.
///
/// The base data must put the production term inside `[0, √λ_min ‖η_0‖^2]`.
/// For each ε the perturbation `ε η_0` is evolved until the weighted-norm
/// growth ratio exceeds the threshold; the verdict asks every ε to cross
/// before the guard trips. The ratio is `‖u(t)‖_{L^2}/‖u_0^ε‖_{L^2}` for the
/// weighted derivative `u = ρ^{1/2} ∂_θ η`, which equals the weighted-norm
/// ratio of `η` itself.
pub fn instability_experiment(
    init: &linear::InitialData,
    opts: &InstabilityOptions,
    cfg: &SolverConfig,
) -> Result<ExperimentReport> {
    let eta0 = linear::build_initial_data(init)?;
    linear::check_instability_hypothesis(&eta0)?;
    if opts.epsilons.is_empty() {
        return Err(Error::InvalidConfig("no epsilons given".into()));
    }
    let solver = PseudoSpectral::new(cfg.clone())?;
    let base = eta0.resized(cfg.tilde_truncation());
    let norm0 = eta0.hdw_norm();

    let mut verdicts = BTreeMap::new();
    let mut series_out = Vec::new();
    let mut first_guard = None;
    let steps_max = (opts.t_max / cfg.dt).round() as usize;

    for &eps in &opts.epsilons {
        if !(eps > 0.0) {
            return Err(Error::InvalidConfig("epsilons must be positive".into()));
        }
        let mut state = NonlinearState::perturbation(base.scaled(eps));
        let denom = eps * norm0;
        let mut times = vec![0.0];
        let mut ratios = vec![1.0];
        let mut crossed_at = None;
        let mut guard = None;
        for step in 1..=steps_max {
            solver.step(&mut state)?;
            if let Some(trip) = solver.guard_check(&state)? {
                guard = Some(trip);
                break;
            }
            if step % cfg.sample_every == 0 {
                let d = solver.diagnostics(&state)?;
                let ratio = d.hdw_norm / denom;
                times.push(state.t);
                ratios.push(ratio);
                if ratio > opts.threshold {
                    crossed_at = Some(state.t);
                    break;
                }
            }
        }
        if first_guard.is_none() {
            first_guard = guard;
        }
        verdicts.insert(
            format!("crossed_eps_{eps:e}"),
            Verdict {
                pass: crossed_at.is_some(),
                value: crossed_at.unwrap_or(f64::INFINITY),
                tolerance: opts.t_max,
            },
        );
        series_out.push(SampledSeries {
            name: format!("ratio_eps_{eps:e}"),
            times,
            values: ratios,
        });
    }

    // Linear-regime cross-check: the nonlinear growth ratio of a tiny ε must
    // ride the linear chain's ratio within 1% until the crossing. The
    // nonlinear leg runs first so the linear reference only needs to reach
    // the observed crossing time (its energy would hit the linear guard by
    // the experiment horizon).
    if let Some(eps) = opts.linear_check {
        let mut state = NonlinearState::perturbation(base.scaled(eps));
        let denom = eps * norm0;
        let mut crossed = false;
        let mut samples: Vec<(usize, f64)> = Vec::new();
        for step in 1..=steps_max {
            solver.step(&mut state)?;
            if solver.guard_check(&state)?.is_some() {
                break;
            }
            if step % cfg.sample_every == 0 {
                let ratio = solver.diagnostics(&state)?.hdw_norm / denom;
                samples.push((step, ratio));
                if ratio > opts.threshold {
                    crossed = true;
                    break;
                }
            }
        }
        let last_step = samples.last().map(|s| s.0).unwrap_or(0);
        let lin = linear::evolve_linear(
            &eta0,
            &LinearRunConfig {
                t_final: last_step as f64 * cfg.dt,
                dt: cfg.dt,
                n: 256,
                snapshot_every: 0,
            },
        )?;
        let mut max_rel_dev = 0.0_f64;
        for &(step, ratio) in &samples {
            let lin_ratio = (lin.energy[step] / lin.energy[0]).sqrt();
            max_rel_dev = max_rel_dev.max((ratio - lin_ratio).abs() / lin_ratio);
        }
        verdicts.insert(
            "linear_regime_match".into(),
            Verdict {
                pass: crossed && max_rel_dev < 0.01,
                value: max_rel_dev,
                tolerance: 0.01,
            },
        );
        series_out.push(SampledSeries {
            name: format!("ratio_eps_{eps:e}_linear_check"),
            times: samples.iter().map(|s| s.0 as f64 * cfg.dt).collect(),
            values: samples.iter().map(|s| s.1).collect(),
        });
    }

    Ok(ExperimentReport {
        label: "instability".into(),
        solver: cfg.clone(),
        params: serde_json::json!({
            "init": init,
            "epsilons": opts.epsilons,
            "threshold": opts.threshold,
            "t_max": opts.t_max,
            "linear_check": opts.linear_check,
        }),
        series: series_out,
        fit: None,
        verdicts,
        guard: first_guard,
    })
}
