//! Douglas-Rachford cores.
//!
//! * [`w_dr_step`]: the preconditioned iteration
//!   `w⁺ = w + J_{ΔB}(2 J_{ΔA} w − w) − J_{ΔA} w` for a diagonal `Δ`.
//! * [`pd_dr_step`] / [`solve`]: the primal-dual scheme for
//!   `min f(x) + g(Kx)` with independent primal and dual stepsizes `(t, s)`,
//!   where the coupled resolvent of the skew operator is reduced to one
//!   symmetric positive-definite Schur-complement solve.

use std::fmt;
use std::sync::Arc;

use crate::adaptive::StepsizePolicy;
use crate::error::{invalid, Error, Result};
use crate::linalg::{spd_factor, spd_solve, DenseMatrix, SpdFactor, Vector};
use crate::linear_map::LinearMap;
use crate::operators::ProxMap;

/// Relative change of `t·s` beyond which a cached factor is rebuilt.
pub const CACHE_KEY_TOL: f64 = 1e-12;

/// Which block the Schur complement keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurSide {
    /// `I + t s KᵀK` (size `n`): eliminate the dual block.
    Primal,
    /// `I + t s KKᵀ` (size `m`): eliminate the primal block.
    Dual,
}

/// Solver for `[I, tKᵀ; −sK, I] (u, v) = (r1, r2)`.
///
/// Only the product `t·s` enters the factored matrix, so a factor can be
/// reused for as long as that product stays put.
#[derive(Clone)]
pub struct BlockResolvent {
    k: Arc<dyn LinearMap>,
    side: SchurSide,
    gram: DenseMatrix,
}

impl fmt::Debug for BlockResolvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockResolvent")
            .field("k", &self.k)
            .field("side", &self.side)
            .finish()
    }
}

/// Output of one block solve.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub u: Vector,
    pub v: Vector,
    pub factor: SpdFactor,
    pub refactored: bool,
}

impl BlockResolvent {
    /// Picks the smaller Schur block.
    pub fn new(k: Arc<dyn LinearMap>) -> Self {
        let side = if k.rows() < k.cols() {
            SchurSide::Dual
        } else {
            SchurSide::Primal
        };
        Self::with_side(k, side)
    }

    pub fn with_side(k: Arc<dyn LinearMap>, side: SchurSide) -> Self {
        let dense = k.to_dense();
        let gram = match side {
            SchurSide::Primal => dense.tr_mul(&dense),
            SchurSide::Dual => &dense * dense.transpose(),
        };
        Self { k, side, gram }
    }

    pub fn side(&self) -> SchurSide {
        self.side
    }

    pub fn map(&self) -> &dyn LinearMap {
        self.k.as_ref()
    }

    fn factor_for(&self, ts: f64) -> Result<SpdFactor> {
        let mut s = &self.gram * ts;
        for i in 0..s.nrows() {
            s[(i, i)] += 1.0;
        }
        Ok(spd_factor(&s)?.with_fingerprint(ts))
    }

    pub fn solve(&self, r1: &Vector, r2: &Vector, t: f64, s: f64, cache: Option<SpdFactor>) -> Result<BlockSolution> {
        let (n, m) = (self.k.cols(), self.k.rows());
        if r1.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: r1.len() });
        }
        if r2.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: r2.len() });
        }
        if !(t > 0.0) || !(s > 0.0) {
            return Err(invalid("stepsize", format!("need t, s > 0, got ({t}, {s})")));
        }
        let ts = t * s;
        let (factor, refactored) = match cache {
            Some(f) if (f.fingerprint() - ts).abs() <= CACHE_KEY_TOL * ts => (f, false),
            _ => (self.factor_for(ts)?, true),
        };
        let (u, v) = match self.side {
            SchurSide::Primal => {
                // (I + ts KᵀK) u = r1 − t Kᵀ r2,  v = r2 + s K u
                let rhs = r1 - self.k.apply_adjoint(r2) * t;
                let u = spd_solve(&factor, &rhs)?;
                let v = r2 + self.k.apply(&u) * s;
                (u, v)
            }
            SchurSide::Dual => {
                // (I + ts KKᵀ) v = r2 + s K r1,  u = r1 − t Kᵀ v
                let rhs = r2 + self.k.apply(r1) * s;
                let v = spd_solve(&factor, &rhs)?;
                let u = r1 - self.k.apply_adjoint(&v) * t;
                (u, v)
            }
        };
        Ok(BlockSolution { u, v, factor, refactored })
    }
}

/// One-shot block resolvent; builds the Gram matrix on every call.
pub fn block_resolvent(
    k: Arc<dyn LinearMap>,
    r1: &Vector,
    r2: &Vector,
    t: f64,
    s: f64,
    cache: Option<SpdFactor>,
) -> Result<BlockSolution> {
    BlockResolvent::new(k).solve(r1, r2, t, s, cache)
}

type Objective = dyn Fn(&Vector) -> f64 + Send + Sync;

/// `min_x f(x) + g(Kx)`, given through `prox_{tf}`, `prox_{sg*}` and `K`.
#[derive(Clone)]
pub struct PdProblem {
    pub f_prox: ProxMap,
    pub gstar_prox: ProxMap,
    resolvent: BlockResolvent,
    objective: Arc<Objective>,
}

impl fmt::Debug for PdProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdProblem")
            .field("f_prox", &self.f_prox)
            .field("gstar_prox", &self.gstar_prox)
            .field("resolvent", &self.resolvent)
            .finish()
    }
}

impl PdProblem {
    pub fn new<F>(f_prox: ProxMap, gstar_prox: ProxMap, k: Arc<dyn LinearMap>, objective: F) -> Self
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
    {
        Self {
            f_prox,
            gstar_prox,
            resolvent: BlockResolvent::new(k),
            objective: Arc::new(objective),
        }
    }

    /// Forces the Schur block; the default picks the smaller one.
    pub fn with_schur_side(mut self, side: SchurSide) -> Self {
        self.resolvent = BlockResolvent::with_side(self.resolvent.k.clone(), side);
        self
    }

    pub fn k(&self) -> &dyn LinearMap {
        self.resolvent.map()
    }

    pub fn resolvent(&self) -> &BlockResolvent {
        &self.resolvent
    }

    pub fn primal_dim(&self) -> usize {
        self.k().cols()
    }

    pub fn dual_dim(&self) -> usize {
        self.k().rows()
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        (self.objective)(x)
    }
}

/// Shadow iterate `(p, q̃)` of the primal-dual scheme with its stepsizes.
#[derive(Debug, Clone)]
pub struct DrState {
    pub p: Vector,
    pub q: Vector,
    t: f64,
    s: f64,
    pub k: usize,
    cache: Option<SpdFactor>,
    factorizations: usize,
}

impl DrState {
    pub fn new(p: Vector, q: Vector, t: f64, s: f64) -> Result<Self> {
        let mut st = Self {
            p,
            q,
            t: 1.0,
            s: 1.0,
            k: 0,
            cache: None,
            factorizations: 0,
        };
        st.set_stepsizes(t, s)?;
        Ok(st)
    }

    pub fn zeros(prob: &PdProblem, t: f64, s: f64) -> Result<Self> {
        Self::new(Vector::zeros(prob.primal_dim()), Vector::zeros(prob.dual_dim()), t, s)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn set_stepsizes(&mut self, t: f64, s: f64) -> Result<()> {
        if !(t > 0.0 && s > 0.0 && t.is_finite() && s.is_finite()) {
            return Err(invalid("stepsize", format!("need finite t, s > 0, got ({t}, {s})")));
        }
        self.t = t;
        self.s = s;
        Ok(())
    }

    pub fn cached_factor(&self) -> Option<&SpdFactor> {
        self.cache.as_ref()
    }

    /// Number of Schur factorizations built over this state's lifetime.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }
}

/// Intermediate quantities of one primal-dual step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub x: Vector,
    pub y: Vector,
    pub u: Vector,
    pub v: Vector,
}

/// One primal-dual DR step at the state's current `(t, s)`:
///
/// ```text
/// x = prox_{t f}(p),  ỹ = prox_{s g*}(q̃)
/// (u, ṽ) = [I, tKᵀ; −sK, I]⁻¹ (2x − p, 2ỹ − q̃)
/// p⁺ = p + u − x,  q̃⁺ = q̃ + ṽ − ỹ
/// ```
pub fn pd_dr_step(state: &mut DrState, prob: &PdProblem) -> Result<StepOutput> {
    let x = prob.f_prox.apply(&state.p, state.t);
    let y = prob.gstar_prox.apply(&state.q, state.s);
    let r1 = &x * 2.0 - &state.p;
    let r2 = &y * 2.0 - &state.q;
    let sol = prob
        .resolvent
        .solve(&r1, &r2, state.t, state.s, state.cache.take())?;
    if sol.refactored {
        state.factorizations += 1;
    }
    state.cache = Some(sol.factor);
    state.p += &sol.u - &x;
    state.q += &sol.v - &y;
    state.k += 1;
    Ok(StepOutput { x, y, u: sol.u, v: sol.v })
}

/// One step of `w⁺ = w + J_{ΔB}(2 J_{ΔA} w − w) − J_{ΔA} w`.
///
/// Both resolvents receive the diagonal of `Δ` alongside their input. Returns
/// `(w⁺, J_{ΔA} w)`; the second component is the primal iterate.
pub fn w_dr_step<JA, JB>(w: &Vector, delta: &Vector, ja: JA, jb: JB) -> Result<(Vector, Vector)>
where
    JA: Fn(&Vector, &Vector) -> Result<Vector>,
    JB: Fn(&Vector, &Vector) -> Result<Vector>,
{
    if delta.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: w.len(), got: delta.len() });
    }
    if let Some(bad) = delta.iter().find(|d| !(**d > 0.0)) {
        return Err(invalid("delta", format!("entries must be positive, got {bad}")));
    }
    let a = ja(w, delta)?;
    let b = jb(&(&a * 2.0 - w), delta)?;
    Ok((w + b - &a, a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Stop once the relative change of `(p, q̃)` is at most this.
    pub tol: f64,
    pub t0: f64,
    pub s0: f64,
    pub p0: Option<Vector>,
    pub q0: Option<Vector>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            tol: 0.0,
            t0: 1.0,
            s0: 1.0,
            p0: None,
            q0: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub objective: f64,
    pub t: f64,
    pub s: f64,
    pub residual: f64,
}

/// Per-iteration log of a solve. `t` and `s` are the stepsizes used by that
/// iteration, `residual` the relative change of `(p, q̃)` it produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vector,
    pub y: Vector,
    pub trace: SolveTrace,
    pub state: DrState,
}

/// Runs the primal-dual scheme, updating `(t, s)` through `policy` after each
/// step.
pub fn solve(prob: &PdProblem, policy: &StepsizePolicy, opts: &SolveOptions) -> Result<SolveResult> {
    policy.validate()?;
    if !(opts.t0 > 0.0 && opts.s0 > 0.0) {
        return Err(invalid("t0/s0", format!("need positive initial stepsizes, got ({}, {})", opts.t0, opts.s0)));
    }
    let (t0, s0) = policy.initial(opts.t0, opts.s0);
    let p0 = opts.p0.clone().unwrap_or_else(|| Vector::zeros(prob.primal_dim()));
    let q0 = opts.q0.clone().unwrap_or_else(|| Vector::zeros(prob.dual_dim()));
    if p0.len() != prob.primal_dim() {
        return Err(Error::DimensionMismatch { expected: prob.primal_dim(), got: p0.len() });
    }
    if q0.len() != prob.dual_dim() {
        return Err(Error::DimensionMismatch { expected: prob.dual_dim(), got: q0.len() });
    }
    let mut state = DrState::new(p0, q0, t0, s0)?;
    let mut trace = SolveTrace::default();
    let mut x = prob.f_prox.apply(&state.p, state.t);
    let mut y = prob.gstar_prox.apply(&state.q, state.s);

    for k in 0..opts.max_iter {
        let p_old = state.p.clone();
        let q_old = state.q.clone();
        let (t, s) = (state.t, state.s);
        let out = pd_dr_step(&mut state, prob)?;

        let step = ((&state.p - &p_old).norm_squared() + (&state.q - &q_old).norm_squared()).sqrt();
        let scale = (p_old.norm_squared() + q_old.norm_squared()).sqrt().max(1.0);
        let residual = step / scale;
        let objective = prob.objective(&out.x);
        let finite = residual.is_finite()
            && out.x.iter().chain(out.y.iter()).all(|v| v.is_finite())
            && state.p.iter().chain(state.q.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite { k, t, s });
        }
        trace.records.push(TraceRecord { k, objective, t, s, residual });
        x = out.x;
        y = out.y;
        if residual <= opts.tol {
            break;
        }
        let (t1, s1) = policy.next(t, s, &x, &p_old, &y, &q_old, k);
        state.set_stepsizes(t1, s1).map_err(|_| Error::NonFinite { k, t: t1, s: s1 })?;
    }
    Ok(SolveResult { x, y, trace, state })
}
