//! Degenerate variable-metric proximal point iteration
//! `u^{k+1} = (M_k + T)⁻¹ M_k u^k`.
//!
//! The metrics `M_k` may be singular; progress is measured in the
//! `M_k`-seminorm, which is the quantity the convergence theory drives to
//! zero.

use crate::error::{Error, Result};
use crate::linalg::{concat, seminorm, split, DenseMatrix, Vector};
use crate::pddr::{BlockResolvent, PdProblem};

/// A sequence of preconditioned resolvents `J_T^{M_k}` with their metrics.
pub trait PreconditionedResolvent {
    fn resolve(&self, u: &Vector, k: usize) -> Result<Vector>;
    fn metric(&self, k: usize) -> DenseMatrix;
}

/// Adapter for closures.
pub struct FnResolvent<R, M> {
    pub resolve: R,
    pub metric: M,
}

impl<R, M> PreconditionedResolvent for FnResolvent<R, M>
where
    R: Fn(&Vector, usize) -> Result<Vector>,
    M: Fn(usize) -> DenseMatrix,
{
    fn resolve(&self, u: &Vector, k: usize) -> Result<Vector> {
        (self.resolve)(u, k)
    }

    fn metric(&self, k: usize) -> DenseMatrix {
        (self.metric)(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpaRecord {
    pub k: usize,
    /// `‖J u^k − u^k‖_{M_k}`.
    pub m_residual: f64,
    pub euclidean_step: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PpaTrace {
    pub records: Vec<PpaRecord>,
}

/// Iterates until the `M_k`-residual drops to `tol` or `max_iter` steps ran.
pub fn ppp_iterate<R: PreconditionedResolvent + ?Sized>(
    u0: &Vector,
    resolvent: &R,
    max_iter: usize,
    tol: f64,
) -> Result<(Vector, PpaTrace)> {
    let mut u = u0.clone();
    let mut trace = PpaTrace::default();
    for k in 0..max_iter {
        let next = resolvent.resolve(&u, k)?;
        if next.len() != u.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), got: next.len() });
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::ResolventNonFinite { k });
        }
        let diff = &next - &u;
        let m_residual = seminorm(&diff, &resolvent.metric(k))?;
        trace.records.push(PpaRecord {
            k,
            m_residual,
            euclidean_step: diff.norm(),
        });
        u = next;
        if m_residual <= tol {
            break;
        }
    }
    Ok((u, trace))
}

/// The block metric `[[Δ⁻¹, −I], [−I, Δ]]` for a diagonal `Δ`.
pub fn dr_metric(delta: &Vector) -> DenseMatrix {
    let n = delta.len();
    let mut m = DenseMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, i)] = 1.0 / delta[i];
        m[(n + i, n + i)] = delta[i];
        m[(i, n + i)] = -1.0;
        m[(n + i, i)] = -1.0;
    }
    m
}

type Resolvent<'a> = Box<dyn Fn(&Vector, &Vector) -> Result<Vector> + 'a>;

/// Douglas-Rachford written as a proximal point iteration on `u = (x, y)` for
/// `T = [[A, I], [−I, B⁻¹]]` with the degenerate metric [`dr_metric`].
///
/// One step is `x⁺ = J_{ΔA}(x − Δy)` and
/// `y⁺ = Δ⁻¹((2x⁺ − w) − J_{ΔB}(2x⁺ − w))` with `w = x − Δy`.
pub struct DrProximalPoint<'a> {
    delta: Box<dyn Fn(usize) -> Vector + 'a>,
    ja: Resolvent<'a>,
    jb: Resolvent<'a>,
}

impl<'a> DrProximalPoint<'a> {
    pub fn new<D, JA, JB>(delta: D, ja: JA, jb: JB) -> Self
    where
        D: Fn(usize) -> Vector + 'a,
        JA: Fn(&Vector, &Vector) -> Result<Vector> + 'a,
        JB: Fn(&Vector, &Vector) -> Result<Vector> + 'a,
    {
        Self {
            delta: Box::new(delta),
            ja: Box::new(ja),
            jb: Box::new(jb),
        }
    }

    /// The primal-dual splitting of `prob` with `Δ = diag(t I, s I)`.
    pub fn primal_dual(prob: &'a PdProblem, t: f64, s: f64) -> Self {
        let (n, m) = (prob.primal_dim(), prob.dual_dim());
        let delta = Vector::from_fn(n + m, |i, _| if i < n { t } else { s });
        let resolvent: &BlockResolvent = prob.resolvent();
        Self::new(
            move |_| delta.clone(),
            move |w, d| {
                let (p, q) = split(w, n);
                Ok(concat(&prob.f_prox.apply(&p, d[0]), &prob.gstar_prox.apply(&q, d[n])))
            },
            move |w, d| {
                let (r1, r2) = split(w, n);
                let sol = resolvent.solve(&r1, &r2, d[0], d[n], None)?;
                Ok(concat(&sol.u, &sol.v))
            },
        )
    }

    /// `x − Δ y` for `u = (x, y)`; the DR variable `w` of this iterate.
    pub fn shadow(&self, u: &Vector, k: usize) -> Vector {
        let delta = (self.delta)(k);
        let (x, y) = split(u, delta.len());
        x - delta.component_mul(&y)
    }
}

impl PreconditionedResolvent for DrProximalPoint<'_> {
    fn resolve(&self, u: &Vector, k: usize) -> Result<Vector> {
        let delta = (self.delta)(k);
        let n = delta.len();
        if u.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: u.len() });
        }
        let (x, y) = split(u, n);
        let w = &x - delta.component_mul(&y);
        let x_next = (self.ja)(&w, &delta)?;
        let reflected = &x_next * 2.0 - &w;
        let jb = (self.jb)(&reflected, &delta)?;
        let y_next = (reflected - jb).component_div(&delta);
        Ok(concat(&x_next, &y_next))
    }

    fn metric(&self, k: usize) -> DenseMatrix {
        dr_metric(&(self.delta)(k))
    }
}
