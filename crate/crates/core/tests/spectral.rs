use drsplit::experiments::{gen_monotone_pair, rng_for};
use drsplit::spectral::*;
use drsplit::{DenseMatrix, Vector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng_for(seed);
    DenseMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng))
}

#[test]
fn general_monotone_pairs_stay_in_disc() {
    for seed in 0..10u64 {
        let n = 8;
        let g = gaussian(n, seed);
        let skew = gaussian(n, seed + 100);
        // A = GᵀG + (S − Sᵀ) is monotone but not symmetric; B is skew
        let a = g.transpose() * &g + (&skew - skew.transpose());
        let s2 = gaussian(n, seed + 200);
        let b = &s2 - s2.transpose();
        let pair = LinearMonotonePair::general(a, b).unwrap();
        let mut rng = rng_for(seed + 300);
        let delta = Vector::from_fn(n, |_, _| 10f64.powf(rng.random_range(-1.0..1.0)));
        let report = check_disc(&pair, &delta).unwrap();
        assert!(report.all_contained(), "seed {seed}");
        assert!(report.spectral_radius <= 1.0 + DISC_TOL);
    }
}

#[test]
fn optimal_stepsizes_minimize_denominator() {
    let pair = gen_monotone_pair(8, 6).unwrap();
    let (a1, a2_inv) = (pair.a1(), pair.a2_inv());
    let mut rng = rng_for(8);
    let z1 = Vector::from_fn(6, |_, _| StandardNormal.sample(&mut rng));
    let z2 = Vector::from_fn(6, |_, _| StandardNormal.sample(&mut rng));
    let (t, s) = optimal_local_stepsizes(&z1, &z2, &a1, &a2_inv).unwrap();
    let phi = |t: f64| z1.norm_squared() / t + t * (&a1 * &z1).norm_squared();
    let psi = |s: f64| z2.norm_squared() / s + s * (&a2_inv * &z2).norm_squared();
    for x in log_grid(1e-3, 1e3, 400) {
        assert!(phi(t) <= phi(x) * (1.0 + 1e-12));
        assert!(psi(s) <= psi(x) * (1.0 + 1e-12));
    }
}

#[test]
fn radius_scan_reports_grid_minimum() {
    let pair = gen_monotone_pair(2, 5).unwrap();
    let grid = log_grid(1e-2, 1e2, 7);
    let scan = radius_scan(&pair, &grid, &grid).unwrap();
    assert_eq!(scan.rows.len(), 49);
    assert!(scan.rows.iter().all(|r| r.rho <= 1.0 + DISC_TOL && r.rho >= 0.0));
    assert!(scan.rows.iter().all(|r| scan.best.rho <= r.rho));
    let direct = spectral_radius(&build_h(&pair, &pair.block_delta(scan.best.t, scan.best.s)).unwrap()).unwrap();
    assert!((direct - scan.best.rho).abs() <= 1e-12);
}

#[test]
fn c_value_is_scale_free() {
    let pair = gen_monotone_pair(3, 4).unwrap();
    let delta = pair.block_delta(0.7, 2.0);
    let z: drsplit::linalg::ComplexVector = drsplit::linalg::ComplexVector::from_fn(8, |i, _| {
        num_complex::Complex64::new(i as f64 - 3.0, 0.5 * i as f64)
    });
    let c = c_value(&pair.a, &delta, &z).unwrap();
    let scaled = z.map(|v| v * num_complex::Complex64::new(0.0, -3.0));
    assert!((c_value(&pair.a, &delta, &scaled).unwrap() - c).abs() <= 1e-12 * c.max(1.0));
    assert!(c > 0.0);
    assert!(disc_radius(c) < 0.5);
}
