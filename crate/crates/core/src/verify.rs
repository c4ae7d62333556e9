//! Cross-validation of the fast spectral paths against the independent
//! reference computations in [`crate::oracle`], plus the equivalence of the
//! two nonlinear formulations. Backs the `verify --cross-check` surface and
//! the acceptance suite.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::field::{FourierField, GridTransform};
use crate::nonlinear::{self, NonlinearState, PseudoSpectral, SolverConfig};
use crate::series::{self, TildeSeries};
use crate::{linear, oracle, Result};

/// One named check: observed value against its pinned tolerance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CheckOutcome {
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

/// Outcome of the full cross-check suite.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub checks: BTreeMap<String, CheckOutcome>,
}

impl CrossCheck {
    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|v| v.pass)
    }
}

pub const COLLOCATION_TOL: f64 = 1e-11;
pub const QUADRATURE_TOL: f64 = 1e-8;
pub const FORMULATION_TOL: f64 = 1e-10;

fn random_tilde(rng: &mut ChaCha8Rng, n: usize) -> TildeSeries {
    let dist = Uniform::new_inclusive(-1.0, 1.0);
    TildeSeries::new((0..n).map(|_| dist.sample(rng)).collect())
}

/// Collocation assembly of the linearized operator against the tilde-chain
/// route on random band-limited odd fields; returns the worst relative
/// sup-norm deviation.
pub fn collocation_check(seed: u64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 128;
    let tf = GridTransform::new(m);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let eta = random_tilde(&mut rng, 24);
        let xi = series::tilde_to_sine(&eta);
        let field = FourierField::from_sine(&xi, 30).expect("fits retained band");
        let grid = tf.to_grid(&field);

        let oracle_l = oracle::collocation_apply_l(&grid);

        // fast path: Lη = -(chain η), with two spare indices so nothing is
        // dropped at the boundary
        let (neg_l, _) = linear::apply_l_tilde(&eta.resized(26));
        let l_sine = series::tilde_to_sine(&neg_l.scaled(-1.0));
        let expect = tf.to_grid(&FourierField::from_sine(&l_sine, 30).expect("fits"));

        let sup_ref = expect.sup_norm().max(1e-300);
        let sup_diff = oracle_l
            .values()
            .iter()
            .zip(expect.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        worst = worst.max(sup_diff / sup_ref);
    }
    worst
}

/// Singular-weight quadrature of the weighted norm against the coefficient
/// formula on random tilde-span functions; returns the worst relative error.
pub fn quadrature_check(seed: u64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let m = 256;
    let tf = GridTransform::new(m);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let eta = random_tilde(&mut rng, 16);
        let xi = series::tilde_to_sine(&eta);
        let field = FourierField::from_sine(&xi, 20).expect("fits");
        let grid = tf.to_grid(&field);
        let q = oracle::quadrature_hdw(&grid, 1024);
        assert!(!q.outside_span, "random span member flagged outside span");
        let want = eta.hdw_norm_sq();
        worst = worst.max((q.value - want).abs() / want.max(1e-300));
    }
    worst
}

/// Perturbation vs vorticity formulation of the same initial data over
/// `t_final`; returns the sup-norm of the difference of the perturbations.
pub fn formulation_check(t_final: f64) -> Result<f64> {
    let cfg = SolverConfig::default();
    let eta0 = TildeSeries::new(vec![0.01, 0.01, -0.005]);
    let solver = PseudoSpectral::new(cfg.clone())?;

    let pert = solver.evolve(
        NonlinearState::perturbation(eta0.resized(cfg.tilde_truncation())),
        t_final,
        0,
    )?;

    let mut omega0 = nonlinear::field_from_tilde(&eta0, cfg.modes)?;
    omega0.sin[1] -= 1.0;
    let vort = solver.evolve(NonlinearState::vorticity(omega0), t_final, 0)?;

    let fa = pert.final_state.perturbation_field(cfg.modes)?;
    let fb = vort.final_state.perturbation_field(cfg.modes)?;
    let tf = solver.transform();
    let ga = tf.to_grid(&fa);
    let gb = tf.to_grid(&fb);
    Ok(ga
        .values()
        .iter()
        .zip(gb.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max))
}

/// Full suite at pinned tolerances.
pub fn cross_check(seed: u64) -> Result<CrossCheck> {
    let mut checks = BTreeMap::new();

    let worst = collocation_check(seed, 100);
    checks.insert(
        "oracle_collocation".to_string(),
        CheckOutcome {
            pass: worst <= COLLOCATION_TOL,
            value: worst,
            tolerance: COLLOCATION_TOL,
        },
    );

    let worst = quadrature_check(seed, 20);
    checks.insert(
        "oracle_quadrature".to_string(),
        CheckOutcome {
            pass: worst <= QUADRATURE_TOL,
            value: worst,
            tolerance: QUADRATURE_TOL,
        },
    );

    let sup = formulation_check(1.0)?;
    checks.insert(
        "formulation_equivalence".to_string(),
        CheckOutcome {
            pass: sup <= FORMULATION_TOL,
            value: sup,
            tolerance: FORMULATION_TOL,
        },
    );

    // Grid sampling sanity: round trip of a band-limited field.
    let tf = GridTransform::new(64);
    let mut f = FourierField::zeros(20);
    for j in 0..20 {
        f.cos[j] = ((j * j + 1) as f64).sin();
        f.sin[j] = ((j * 3 + 2) as f64).cos();
    }
    let back = tf.from_grid(&tf.to_grid(&f), 20);
    let mut worst: f64 = (back.mean - f.mean).abs();
    for j in 0..20 {
        worst = worst.max((back.cos[j] - f.cos[j]).abs());
        worst = worst.max((back.sin[j] - f.sin[j]).abs());
    }
    checks.insert(
        "grid_round_trip".to_string(),
        CheckOutcome {
            pass: worst <= 1e-12,
            value: worst,
            tolerance: 1e-12,
        },
    );

    Ok(CrossCheck { checks })
}
