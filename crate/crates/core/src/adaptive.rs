//! Adaptive primal/dual stepsize control.
//!
//! Each update multiplies the current stepsize by a relaxed, safeguarded
//! ratio
//!
//! ```text
//! t⁺ = [(1 − ω_k) + ω_k · proj_[a, b](‖x‖ / ‖p − x‖)] · t
//! ```
//!
//! and clips the result to a hard cap. The ratio estimates the local optimal
//! stepsize `‖z‖ / ‖A z‖` with `(p − x)/t` standing in for an element of the
//! subdifferential at `x`. The dual stepsize uses `(ỹ, q̃)` the same way.

use crate::error::{invalid, Result};
use crate::linalg::Vector;

/// Relaxation schedule `k ↦ ω_k ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaSchedule {
    /// `ω_k = 2⁻ᵏ`.
    Halving,
    /// `ω_k = r^k` for a ratio `r ∈ (0, 1)`.
    Geometric(f64),
}

impl OmegaSchedule {
    pub fn at(self, k: usize) -> f64 {
        match self {
            OmegaSchedule::Halving => default_omega(k),
            OmegaSchedule::Geometric(r) => r.powf(k as f64),
        }
    }
}

/// `2⁻ᵏ`, exact, and exactly zero once it drops below the smallest subnormal.
pub fn default_omega(k: usize) -> f64 {
    match k {
        0..=1022 => f64::from_bits(((1023 - k) as u64) << 52),
        1023..=1074 => f64::from_bits(1u64 << (1074 - k)),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub a_t: f64,
    pub b_t: f64,
    pub a_s: f64,
    pub b_s: f64,
    pub omega_t: OmegaSchedule,
    pub omega_s: OmegaSchedule,
    /// Upper bound on the stepsize values themselves (not on the ratios).
    pub cap: f64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            a_t: 1e-4,
            b_t: 1e4,
            a_s: 1e-4,
            b_s: 1e4,
            omega_t: OmegaSchedule::Halving,
            omega_s: OmegaSchedule::Halving,
            cap: 1e4,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        let interval = |name, a: f64, b: f64| {
            if a > 0.0 && a < b && b.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("need 0 < a < b < inf, got [{a}, {b}]")))
            }
        };
        interval("a_t/b_t", self.a_t, self.b_t)?;
        interval("a_s/b_s", self.a_s, self.b_s)?;
        if !(self.cap > 0.0) || !self.cap.is_finite() {
            return Err(invalid("cap", format!("must be positive and finite, got {}", self.cap)));
        }
        for (name, sched) in [("omega_t", self.omega_t), ("omega_s", self.omega_s)] {
            if let OmegaSchedule::Geometric(r) = sched {
                if !(r > 0.0 && r < 1.0) {
                    return Err(invalid(name, format!("ratio must lie in (0, 1), got {r}")));
                }
            }
        }
        Ok(())
    }
}

/// One relaxed safeguarded multiplicative update.
///
/// `num / den` is the raw ratio; `den = 0` takes the ratio as `b` unless
/// `num = 0` as well, in which case the stepsize is returned unchanged.
pub fn relaxed_update(step: f64, num: f64, den: f64, omega: f64, a: f64, b: f64, cap: f64) -> f64 {
    let ratio = if den > 0.0 {
        (num / den).clamp(a, b)
    } else if num > 0.0 {
        b
    } else {
        return step.min(cap);
    };
    let multiplier = (1.0 - omega) + omega * ratio;
    (multiplier * step).min(cap)
}

/// Next `(t, s)` from the iterate `(x^k, p^k, ỹ^k, q̃^k)` of the primal-dual
/// scheme.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_update(
    t: f64,
    s: f64,
    x: &Vector,
    p: &Vector,
    y: &Vector,
    q: &Vector,
    k: usize,
    cfg: &AdaptiveConfig,
) -> (f64, f64) {
    let t_next = relaxed_update(
        t,
        x.norm(),
        (p - x).norm(),
        cfg.omega_t.at(k),
        cfg.a_t,
        cfg.b_t,
        cfg.cap,
    );
    let s_next = relaxed_update(
        s,
        y.norm(),
        (q - y).norm(),
        cfg.omega_s.at(k),
        cfg.a_s,
        cfg.b_s,
        cfg.cap,
    );
    (t_next, s_next)
}

/// How `(t, s)` evolve over a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizePolicy {
    Constant { t: f64, s: f64 },
    /// One shared adaptive stepsize `t = s`, driven by the ratio of the
    /// stacked iterate `(x, ỹ)` to the stacked residual `(p − x, q̃ − ỹ)`.
    /// Uses `a_t`, `b_t` and `omega_t` of the config.
    TAdaptive(AdaptiveConfig),
    /// Independent primal and dual adaptive stepsizes.
    TsAdaptive(AdaptiveConfig),
}

impl StepsizePolicy {
    pub fn label(&self) -> String {
        match self {
            StepsizePolicy::Constant { t, s } => format!("constant(t={t},s={s})"),
            StepsizePolicy::TAdaptive(_) => "t-adaptive".to_string(),
            StepsizePolicy::TsAdaptive(_) => "ts-adaptive".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StepsizePolicy::Constant { t, s } => {
                if *t > 0.0 && *s > 0.0 && t.is_finite() && s.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("stepsize", format!("constant stepsizes must be positive, got ({t}, {s})")))
                }
            }
            StepsizePolicy::TAdaptive(cfg) | StepsizePolicy::TsAdaptive(cfg) => cfg.validate(),
        }
    }

    /// Initial stepsizes given the solver's requested `(t0, s0)`.
    pub fn initial(&self, t0: f64, s0: f64) -> (f64, f64) {
        match *self {
            StepsizePolicy::Constant { t, s } => (t, s),
            StepsizePolicy::TAdaptive(cfg) => {
                let t = t0.min(cfg.cap);
                (t, t)
            }
            StepsizePolicy::TsAdaptive(cfg) => (t0.min(cfg.cap), s0.min(cfg.cap)),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn next(&self, t: f64, s: f64, x: &Vector, p: &Vector, y: &Vector, q: &Vector, k: usize) -> (f64, f64) {
        match self {
            StepsizePolicy::Constant { .. } => (t, s),
            StepsizePolicy::TAdaptive(cfg) => {
                let num = (x.norm_squared() + y.norm_squared()).sqrt();
                let den = ((p - x).norm_squared() + (q - y).norm_squared()).sqrt();
                let t = relaxed_update(t, num, den, cfg.omega_t.at(k), cfg.a_t, cfg.b_t, cfg.cap);
                (t, t)
            }
            StepsizePolicy::TsAdaptive(cfg) => adaptive_update(t, s, x, p, y, q, k, cfg),
        }
    }
}
