//! Closed-form proximal operators and the diagonal generalized Moreau
//! decomposition.
//!
//! Every prox takes its stepsize per call, so a policy that changes `(t, s)`
//! each iteration never rebuilds operator objects. A stepsize of zero returns
//! the input unchanged.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg::Vector;

/// Penalty weight of a regularizer. Always strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RegularizationWeight(f64);

impl RegularizationWeight {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(invalid("lambda", format!("must be positive and finite, got {value}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Componentwise soft thresholding `sign(x)·max(|x| − τ, 0)`.
pub fn prox_l1(x: &Vector, tau: f64) -> Vector {
    x.map(|v| soft(v, tau))
}

#[inline]
fn soft(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Prox of `s·g*` with `g = ‖· − b‖₁`:
/// `y − s b − soft(y − s b, 1)`.
pub fn prox_shifted_l1_conj(y: &Vector, s: f64, b: &Vector) -> Result<Vector> {
    check_len(b.len(), y.len())?;
    Ok(Vector::from_fn(y.len(), |i, _| {
        let z = y[i] - s * b[i];
        z - soft(z, 1.0)
    }))
}

/// Prox of `t·½‖· − x_δ‖²`: `(p + t x_δ)/(1 + t)`.
pub fn prox_quadratic_fidelity(p: &Vector, t: f64, data: &Vector) -> Result<Vector> {
    check_len(data.len(), p.len())?;
    if t == 0.0 {
        return Ok(p.clone());
    }
    Ok(Vector::from_fn(p.len(), |i, _| (p[i] + t * data[i]) / (1.0 + t)))
}

/// Projection onto the box `[−λ, λ]ⁿ`, i.e. the prox of the conjugate of
/// `λ‖·‖₁` for any stepsize.
pub fn prox_box_dual(q: &Vector, weight: RegularizationWeight) -> Vector {
    let r = weight.get();
    q.map(|v| v.clamp(-r, r))
}

/// `J_{ΣT⁻¹}(x) = x − Σ J_{Σ⁻¹T}(Σ⁻¹ x)` for diagonal `Σ`.
///
/// `primal_resolvent(z, σ)` must evaluate `J_{Σ⁻¹T}(z)` for the diagonal
/// metric `σ`.
pub fn moreau_dual_resolvent<F>(x: &Vector, sigma: &Vector, primal_resolvent: F) -> Result<Vector>
where
    F: Fn(&Vector, &Vector) -> Vector,
{
    check_len(x.len(), sigma.len())?;
    if let Some(bad) = sigma.iter().find(|v| !(**v > 0.0)) {
        return Err(invalid("sigma", format!("entries must be positive, got {bad}")));
    }
    let scaled = x.component_div(sigma);
    let inner = primal_resolvent(&scaled, sigma);
    Ok(x - sigma.component_mul(&inner))
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

type ProxFn = dyn Fn(&Vector, f64) -> Vector + Send + Sync;

/// A single-valued prox/resolvent evaluator `(input, stepsize) ↦ output`.
///
/// The closed-form variants cover the functions used by the bundled
/// experiments; [`ProxMap::Custom`] accepts any other resolvent.
#[derive(Clone)]
pub enum ProxMap {
    /// `f = 0`.
    Zero,
    /// Indicator of `{0}`, the conjugate of `f = 0`.
    ZeroIndicator,
    /// `f = w‖·‖₁`.
    L1 { weight: f64 },
    /// `f = ‖· − b‖₁`.
    ShiftedL1 { shift: Vector },
    /// Conjugate of `‖· − b‖₁`: `⟨b, ·⟩ + ι_{‖·‖∞ ≤ 1}`.
    ShiftedL1Conj { shift: Vector },
    /// Indicator of `[−r, r]ⁿ`, the conjugate of `r‖·‖₁`.
    Box { radius: RegularizationWeight },
    /// `f = ½‖· − d‖²`.
    QuadraticFidelity { data: Vector },
    /// Conjugate of `½‖· − d‖²`: `½‖·‖² + ⟨d, ·⟩`.
    QuadraticFidelityConj { data: Vector },
    Custom { tag: String, eval: Arc<ProxFn> },
}

impl fmt::Debug for ProxMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProxMap({})", self.tag())
    }
}

impl ProxMap {
    pub fn custom<F>(tag: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
    {
        ProxMap::Custom {
            tag: tag.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn tag(&self) -> &str {
        match self {
            ProxMap::Zero => "zero",
            ProxMap::ZeroIndicator => "indicator{0}",
            ProxMap::L1 { .. } => "l1",
            ProxMap::ShiftedL1 { .. } => "shifted-l1",
            ProxMap::ShiftedL1Conj { .. } => "shifted-l1-conj",
            ProxMap::Box { .. } => "box",
            ProxMap::QuadraticFidelity { .. } => "quadratic-fidelity",
            ProxMap::QuadraticFidelityConj { .. } => "quadratic-fidelity-conj",
            ProxMap::Custom { tag, .. } => tag,
        }
    }

    /// Evaluates `prox_{step·f}(input)`.
    ///
    /// # Panics
    /// If a parametrized variant's vector length differs from the input's.
    pub fn apply(&self, input: &Vector, step: f64) -> Vector {
        if step == 0.0 {
            return input.clone();
        }
        match self {
            ProxMap::Zero => input.clone(),
            ProxMap::ZeroIndicator => Vector::zeros(input.len()),
            ProxMap::L1 { weight } => prox_l1(input, step * weight),
            ProxMap::ShiftedL1 { shift } => {
                assert_eq!(shift.len(), input.len(), "shift length");
                shift + prox_l1(&(input - shift), step)
            }
            ProxMap::ShiftedL1Conj { shift } => {
                prox_shifted_l1_conj(input, step, shift).expect("shift length")
            }
            ProxMap::Box { radius } => prox_box_dual(input, *radius),
            ProxMap::QuadraticFidelity { data } => {
                prox_quadratic_fidelity(input, step, data).expect("data length")
            }
            ProxMap::QuadraticFidelityConj { data } => {
                assert_eq!(data.len(), input.len(), "data length");
                (input - data * step) / (1.0 + step)
            }
            ProxMap::Custom { eval, .. } => eval(input, step),
        }
    }

    /// The prox of the Fenchel conjugate, for the closed-form variants.
    pub fn conjugate(&self) -> Option<ProxMap> {
        Some(match self {
            ProxMap::Zero => ProxMap::ZeroIndicator,
            ProxMap::ZeroIndicator => ProxMap::Zero,
            ProxMap::L1 { weight } => ProxMap::Box {
                radius: RegularizationWeight::new(*weight).ok()?,
            },
            ProxMap::Box { radius } => ProxMap::L1 {
                weight: radius.get(),
            },
            ProxMap::ShiftedL1 { shift } => ProxMap::ShiftedL1Conj {
                shift: shift.clone(),
            },
            ProxMap::ShiftedL1Conj { shift } => ProxMap::ShiftedL1 {
                shift: shift.clone(),
            },
            ProxMap::QuadraticFidelity { data } => ProxMap::QuadraticFidelityConj { data: data.clone() },
            ProxMap::QuadraticFidelityConj { data } => ProxMap::QuadraticFidelity { data: data.clone() },
            ProxMap::Custom { .. } => return None,
        })
    }
}
