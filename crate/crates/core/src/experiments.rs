//! Problem generators for the bundled experiments:
//! ℓ¹-regularized least absolute deviations, 1-D total-variation denoising
//! and random monotone matrix pairs for spectral scans.
//!
//! All randomness comes from a `ChaCha8` generator seeded by the caller, so a
//! seed fully determines an instance.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};

use crate::adaptive::StepsizePolicy;
use crate::error::{invalid, Result};
use crate::linalg::{spd_factor, spd_solve, DenseMatrix, Vector};
use crate::linear_map::{ForwardDifference, LinearMap};
use crate::operators::{ProxMap, RegularizationWeight};
use crate::pddr::{solve, PdProblem, SolveOptions, SolveResult, SolveTrace};
use crate::spectral::LinearMonotonePair;

/// Regularization added to the Gram matrices of [`gen_monotone_pair`].
pub const PAIR_EPSILON: f64 = 0.1;
pub const DEFAULT_PLATEAUS: usize = 5;
pub const DEFAULT_LEVEL_STD: f64 = 0.02;
pub const DEFAULT_TV_NOISE: f64 = 0.15;

/// The seeded generator behind every random instance.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    // column-major fill order is part of the determinism contract
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `min ‖Ax − b‖₁ + λ‖x‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadInstance {
    pub a: DenseMatrix,
    pub b: Vector,
    pub lambda: RegularizationWeight,
    pub seed: u64,
}

impl LadInstance {
    pub fn objective(&self, x: &Vector) -> f64 {
        lad_objective(&self.a, &self.b, self.lambda.get(), x)
    }

    /// `f = λ‖·‖₁`, `g = ‖· − b‖₁`, `K = A`.
    pub fn problem(&self) -> PdProblem {
        let (a, b, lambda) = (self.a.clone(), self.b.clone(), self.lambda.get());
        PdProblem::new(
            ProxMap::L1 { weight: lambda },
            ProxMap::ShiftedL1Conj { shift: self.b.clone() },
            Arc::new(self.a.clone()),
            move |x| lad_objective(&a, &b, lambda, x),
        )
    }

    /// `dist(0, ∂F(x))`, treating residual and iterate entries with magnitude
    /// at most `zero_tol` as zeros whose sign is free in `[−1, 1]`.
    pub fn optimality_residual(&self, x: &Vector, zero_tol: f64) -> f64 {
        lad_optimality_residual(&self.a, &self.b, self.lambda.get(), x, zero_tol)
    }
}

pub fn lad_objective(a: &DenseMatrix, b: &Vector, lambda: f64, x: &Vector) -> f64 {
    (a * x - b).lp_norm(1) + lambda * x.lp_norm(1)
}

/// Standard-normal `A` (`m × n`) and `b`.
pub fn gen_lad(seed: u64, m: usize, n: usize, lambda: f64) -> Result<(LadInstance, PdProblem)> {
    if n == 0 || m <= n {
        return Err(invalid("m/n", format!("need m > n > 0, got m = {m}, n = {n}")));
    }
    let lambda = RegularizationWeight::new(lambda)?;
    let mut rng = rng_for(seed);
    let a = normal_matrix(&mut rng, m, n);
    let b = Vector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
    let inst = LadInstance { a, b, lambda, seed };
    let prob = inst.problem();
    Ok((inst, prob))
}

fn lad_optimality_residual(a: &DenseMatrix, b: &Vector, lambda: f64, x: &Vector, zero_tol: f64) -> f64 {
    let r = a * x - b;
    let fixed_xi = r.map(|v| if v.abs() > zero_tol { v.signum() } else { 0.0 });
    let free: Vec<usize> = (0..r.len()).filter(|&i| r[i].abs() <= zero_tol).collect();
    let x_free: Vec<bool> = x.iter().map(|v| v.abs() <= zero_tol).collect();
    let base = a.tr_mul(&fixed_xi)
        + Vector::from_fn(x.len(), |j, _| if x_free[j] { 0.0 } else { lambda * x[j].signum() });

    // For a fixed ξ the best η on the free x-coordinates is a clamp, leaving
    // φ(g) = ½ Σ_fixed g² + ½ Σ_free max(|g| − λ, 0)² with g = base + A_freeᵀ ξ.
    let shrink = |g: &Vector| {
        Vector::from_fn(g.len(), |j, _| {
            if x_free[j] {
                g[j].signum() * (g[j].abs() - lambda).max(0.0)
            } else {
                g[j]
            }
        })
    };
    if free.is_empty() {
        return shrink(&base).norm();
    }
    let a_free = DenseMatrix::from_fn(free.len(), x.len(), |i, j| a[(free[i], j)]);
    let lipschitz = {
        // power iteration on A_free A_freeᵀ
        let mut v = Vector::from_element(free.len(), 1.0);
        let mut est = 1.0;
        for _ in 0..100 {
            let w = &a_free * a_free.tr_mul(&v);
            est = w.norm() / v.norm();
            v = w.normalize();
        }
        est * 1.01
    };
    let grad = |xi: &Vector| &a_free * shrink(&(&base + a_free.tr_mul(xi)));
    let mut xi = Vector::zeros(free.len());
    let mut z = xi.clone();
    let mut theta = 1.0_f64;
    for _ in 0..20_000 {
        let next = (&z - grad(&z) / lipschitz).map(|v| v.clamp(-1.0, 1.0));
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        z = &next + (&next - &xi) * ((theta - 1.0) / theta_next);
        xi = next;
        theta = theta_next;
    }
    shrink(&(&base + a_free.tr_mul(&xi))).norm()
}

/// `min ½‖x − x_δ‖² + λ‖Dx‖₁` with forward differences `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct TvInstance {
    pub clean: Vector,
    pub noisy: Vector,
    pub d: ForwardDifference,
    pub lambda: RegularizationWeight,
    pub seed: u64,
}

impl TvInstance {
    pub fn from_signal(clean: Vector, noisy: Vector, lambda: f64, seed: u64) -> Result<Self> {
        if noisy.len() < 2 || clean.len() != noisy.len() {
            return Err(invalid("n", format!("need n ≥ 2 matching samples, got {} / {}", clean.len(), noisy.len())));
        }
        Ok(Self {
            d: ForwardDifference::new(noisy.len()),
            clean,
            noisy,
            lambda: RegularizationWeight::new(lambda)?,
            seed,
        })
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        tv_objective(&self.noisy, self.lambda.get(), x)
    }

    /// `f = ½‖· − x_δ‖²`, `g = λ‖·‖₁`, `K = D`.
    pub fn problem(&self) -> PdProblem {
        let (data, lambda) = (self.noisy.clone(), self.lambda.get());
        PdProblem::new(
            ProxMap::QuadraticFidelity { data: self.noisy.clone() },
            ProxMap::Box { radius: self.lambda },
            Arc::new(self.d),
            move |x| tv_objective(&data, lambda, x),
        )
    }
}

pub fn tv_objective(data: &Vector, lambda: f64, x: &Vector) -> f64 {
    let fidelity = 0.5 * (x - data).norm_squared();
    let tv: f64 = x.as_slice().windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    fidelity + lambda * tv
}

/// Smallest `λ` for which the TV minimizer is the constant `mean(x_δ)`:
/// `max_k |Σ_{i≤k} (x_δ,i − mean)|`.
pub fn tv_flat_threshold(noisy: &Vector) -> f64 {
    let mean = noisy.mean();
    let mut partial = 0.0;
    let mut max = 0.0f64;
    for v in noisy.iter().take(noisy.len().saturating_sub(1)) {
        partial += v - mean;
        max = max.max(partial.abs());
    }
    max
}

/// Ground-truth model for [`gen_tv_with_signal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvSignal {
    pub plateaus: usize,
    /// Standard deviation of the plateau levels.
    pub level_std: f64,
}

impl Default for TvSignal {
    fn default() -> Self {
        Self {
            plateaus: DEFAULT_PLATEAUS,
            level_std: DEFAULT_LEVEL_STD,
        }
    }
}

/// Piecewise-constant signal with `plateaus` levels drawn from
/// `N(0, level_std²)` at random breakpoints.
pub fn piecewise_constant(rng: &mut ChaCha8Rng, n: usize, plateaus: usize, level_std: f64) -> Vector {
    let plateaus = plateaus.clamp(1, n);
    let mut breaks: Vec<usize> = sample(rng, n - 1, plateaus - 1).into_iter().map(|i| i + 1).collect();
    breaks.sort_unstable();
    let levels: Vec<f64> = (0..plateaus)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            level_std * z
        })
        .collect();
    Vector::from_fn(n, |i, _| levels[breaks.partition_point(|&b| b <= i)])
}

/// Piecewise-constant ground truth plus `N(0, noise²)` noise.
pub fn gen_tv(seed: u64, n: usize, noise: f64, lambda: f64) -> Result<(TvInstance, PdProblem)> {
    gen_tv_with_signal(seed, n, noise, lambda, TvSignal::default())
}

pub fn gen_tv_with_signal(
    seed: u64,
    n: usize,
    noise: f64,
    lambda: f64,
    signal: TvSignal,
) -> Result<(TvInstance, PdProblem)> {
    if n < 2 {
        return Err(invalid("n", format!("need n ≥ 2, got {n}")));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(invalid("noise", format!("must be nonnegative, got {noise}")));
    }
    if !(signal.level_std >= 0.0) || !signal.level_std.is_finite() {
        return Err(invalid("level_std", format!("must be nonnegative, got {}", signal.level_std)));
    }
    let mut rng = rng_for(seed);
    let clean = piecewise_constant(&mut rng, n, signal.plateaus, signal.level_std);
    let normal = Normal::new(0.0, noise).map_err(|e| invalid("noise", e.to_string()))?;
    let noisy = clean.map(|v| v + normal.sample(&mut rng));
    let inst = TvInstance::from_signal(clean, noisy, lambda, seed)?;
    let prob = inst.problem();
    Ok((inst, prob))
}

/// `A₁ = GᵀG + εI`, `A₂ = G'ᵀG' + εI` with standard-normal `G`, `G'`, and `K`
/// with entries uniform on `[0, 1]`, all `half_dim × half_dim`.
pub fn gen_monotone_pair(seed: u64, half_dim: usize) -> Result<LinearMonotonePair> {
    if half_dim == 0 {
        return Err(invalid("half_dim", "must be at least 1"));
    }
    let mut rng = rng_for(seed);
    let n = half_dim;
    let gram = |rng: &mut ChaCha8Rng| {
        let g = normal_matrix(rng, n, n);
        let mut a = g.tr_mul(&g);
        for i in 0..n {
            a[(i, i)] += PAIR_EPSILON;
        }
        // exact symmetry for the factorization
        (a.clone() + a.transpose()) * 0.5
    };
    let a1 = gram(&mut rng);
    let a2 = gram(&mut rng);
    let unit = Uniform::new_inclusive(0.0, 1.0).map_err(|e| invalid("uniform", e.to_string()))?;
    let k = DenseMatrix::from_fn(n, n, |_, _| rng.sample(unit));

    let factor = spd_factor(&a2)?;
    let mut a2_inv = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let e = Vector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
        a2_inv.set_column(j, &spd_solve(&factor, &e)?);
    }
    let a2_inv = (a2_inv.clone() + a2_inv.transpose()) * 0.5;
    LinearMonotonePair::from_blocks(&a1, &a2_inv, &k)
}

/// Cross product of constant policies over two stepsize grids.
pub fn grid_policies(t_grid: &[f64], s_grid: &[f64]) -> Vec<StepsizePolicy> {
    t_grid
        .iter()
        .flat_map(|&t| s_grid.iter().map(move |&s| StepsizePolicy::Constant { t, s }))
        .collect()
}

/// Solves `prob` once per policy from the same initial point. Policies run
/// on worker threads; results keep the input order.
pub fn run_comparison_full(
    prob: &PdProblem,
    policies: &[StepsizePolicy],
    opts: &SolveOptions,
) -> Result<Vec<SolveResult>> {
    if policies.is_empty() {
        return Err(invalid("policies", "need at least one policy"));
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(policies.len());
    let chunk = policies.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = policies
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|p| solve(prob, p, opts))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(policies.len());
        for h in handles {
            out.extend(h.join().expect("comparison worker panicked")?);
        }
        Ok(out)
    })
}

pub fn run_comparison(prob: &PdProblem, policies: &[StepsizePolicy], opts: &SolveOptions) -> Result<Vec<SolveTrace>> {
    Ok(run_comparison_full(prob, policies, opts)?
        .into_iter()
        .map(|r| r.trace)
        .collect())
}

/// Checks `⟨Kx, y⟩ = ⟨x, Kᵀy⟩` on `count` seeded random probes.
pub fn adjoint_check(k: &dyn LinearMap, seed: u64, count: usize) -> f64 {
    let mut rng = rng_for(seed);
    let probes: Vec<(Vector, Vector)> = (0..count)
        .map(|_| {
            (
                Vector::from_fn(k.cols(), |_, _| StandardNormal.sample(&mut rng)),
                Vector::from_fn(k.rows(), |_, _| StandardNormal.sample(&mut rng)),
            )
        })
        .collect();
    crate::linear_map::adjoint_mismatch(k, &probes)
}
