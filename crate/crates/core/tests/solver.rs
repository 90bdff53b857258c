use std::sync::Arc;

use drsplit::experiments::{gen_lad, gen_tv_with_signal, rng_for, tv_flat_threshold, TvSignal};
use drsplit::pddr::SchurSide;
use drsplit::*;
use nalgebra::Cholesky;
use rand_distr::{Distribution, StandardNormal};

fn quadratic(m: usize, n: usize, seed: u64) -> (PdProblem, Vector) {
    let mut rng = rng_for(seed);
    let k = DenseMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    let b = Vector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
    let x_star = Cholesky::new(DenseMatrix::identity(n, n) + k.transpose() * &k)
        .unwrap()
        .solve(&(k.transpose() * &b));
    let kb = b.clone();
    let prob = PdProblem::new(
        ProxMap::QuadraticFidelity { data: Vector::zeros(n) },
        ProxMap::QuadraticFidelityConj { data: b },
        Arc::new(k.clone()),
        move |x| 0.5 * x.norm_squared() + 0.5 * (&k * x - &kb).norm_squared(),
    );
    (prob, x_star)
}

#[test]
fn quadratic_matches_normal_equations_for_every_policy() {
    let policies = [
        StepsizePolicy::Constant { t: 1.0, s: 1.0 },
        StepsizePolicy::Constant { t: 0.2, s: 3.0 },
        StepsizePolicy::TAdaptive(AdaptiveConfig::default()),
        StepsizePolicy::TsAdaptive(AdaptiveConfig::default()),
    ];
    for (m, n) in [(30, 12), (8, 20)] {
        let (prob, x_star) = quadratic(m, n, (m * n) as u64);
        for policy in &policies {
            let opts = SolveOptions { max_iter: 5000, tol: 1e-14, ..Default::default() };
            let res = solve(&prob, policy, &opts).unwrap();
            let err = (&res.x - &x_star).norm();
            assert!(err <= 1e-6, "{} ({m}x{n}): {err:e}", policy.label());
        }
    }
}

#[test]
fn schur_sides_give_identical_iterates() {
    for (m, n) in [(15, 6), (6, 15)] {
        let (prob, _) = quadratic(m, n, 77);
        let opts = SolveOptions { max_iter: 60, ..Default::default() };
        let policy = StepsizePolicy::TsAdaptive(AdaptiveConfig::default());
        let a = solve(&prob.clone().with_schur_side(SchurSide::Primal), &policy, &opts).unwrap();
        let b = solve(&prob.with_schur_side(SchurSide::Dual), &policy, &opts).unwrap();
        assert!((&a.x - &b.x).norm() <= 1e-10 * a.x.norm().max(1.0));
        for (ra, rb) in a.trace.records.iter().zip(&b.trace.records) {
            assert!((ra.t - rb.t).abs() <= 1e-9 * ra.t && (ra.s - rb.s).abs() <= 1e-9 * ra.s);
        }
    }
}

#[test]
fn tv_vanishing_penalty_returns_data() {
    let signal = TvSignal { level_std: 1.0, ..Default::default() };
    let (inst, prob) = gen_tv_with_signal(3, 200, 0.0, 1e-8, signal).unwrap();
    let res = solve(&prob, &StepsizePolicy::TsAdaptive(AdaptiveConfig::default()), &SolveOptions::default()).unwrap();
    assert!((&res.x - &inst.noisy).norm() <= 1e-4);
}

#[test]
fn tv_above_flat_threshold_is_constant() {
    let (inst, _) = gen_tv_with_signal(4, 60, 0.2, 1.0, TvSignal::default()).unwrap();
    let lambda = 1.5 * tv_flat_threshold(&inst.noisy);
    let flat = drsplit::experiments::TvInstance::from_signal(inst.clean.clone(), inst.noisy.clone(), lambda, 4).unwrap();
    let opts = SolveOptions { max_iter: 5000, ..Default::default() };
    let res = solve(&flat.problem(), &StepsizePolicy::Constant { t: 1.0, s: 1.0 }, &opts).unwrap();
    let mean = inst.noisy.mean();
    assert!(res.x.iter().all(|v| (v - mean).abs() <= 1e-6), "not flat");
}

#[test]
fn lad_long_run_is_optimal() {
    let (inst, prob) = gen_lad(21, 40, 15, 0.5).unwrap();
    let opts = SolveOptions { max_iter: 20_000, ..Default::default() };
    let res = solve(&prob, &StepsizePolicy::TsAdaptive(AdaptiveConfig::default()), &opts).unwrap();
    assert!(inst.optimality_residual(&res.x, 1e-8) <= 1e-6);
    let best = res.trace.records.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
    assert!(inst.objective(&res.x) <= best + 1e-8);
}

#[test]
fn nonfinite_prox_is_reported() {
    let broken = PdProblem::new(
        ProxMap::custom("nan", |x: &Vector, _| x.map(|_| f64::NAN)),
        ProxMap::Zero,
        Arc::new(DenseMatrix::identity(3, 3)),
        |_| 0.0,
    );
    let err = solve(&broken, &StepsizePolicy::Constant { t: 1.0, s: 2.0 }, &SolveOptions::default());
    assert!(matches!(err, Err(Error::NonFinite { k: 0, .. })), "{err:?}");
}

#[test]
fn tolerance_stops_early_and_trace_is_consistent() {
    let (prob, _) = quadratic(10, 4, 2);
    let opts = SolveOptions { max_iter: 10_000, tol: 1e-9, ..Default::default() };
    let res = solve(&prob, &StepsizePolicy::Constant { t: 1.0, s: 1.0 }, &opts).unwrap();
    let n = res.trace.len();
    assert!(n < 10_000);
    assert!(res.trace.last().unwrap().residual <= 1e-9);
    assert!(res.trace.records.iter().enumerate().all(|(k, r)| r.k == k));
    assert_eq!(res.state.k, n);
}

#[test]
fn invalid_options_are_rejected() {
    let (prob, _) = quadratic(4, 2, 3);
    let policy = StepsizePolicy::Constant { t: 1.0, s: 1.0 };
    let bad = SolveOptions { p0: Some(Vector::zeros(7)), ..Default::default() };
    assert!(matches!(solve(&prob, &policy, &bad), Err(Error::DimensionMismatch { .. })));
    assert!(solve(&prob, &StepsizePolicy::Constant { t: -1.0, s: 1.0 }, &SolveOptions::default()).is_err());
    let cfg = AdaptiveConfig { a_t: 2.0, b_t: 1.0, ..Default::default() };
    assert!(solve(&prob, &StepsizePolicy::TsAdaptive(cfg), &SolveOptions::default()).is_err());
}
