use std::fmt;
use std::sync::Arc;

use super::trend::{geometric_ladder, rate_exponent, simpson, RATE_THRESHOLD};
use crate::{Error, Result};

type Rule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A nondecreasing function `Φ: [0, ∞] → [0, ∞]`, stored through `log Φ`.
#[derive(Clone)]
pub struct PhiSpec {
    log_phi: Rule,
    delta: f64,
    t_max: f64,
    samples: Vec<f64>,
}

impl fmt::Debug for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiSpec")
            .field("delta", &self.delta)
            .field("t_max", &self.t_max)
            .field("samples", &self.samples.len())
            .finish()
    }
}

fn default_samples(t_max: f64) -> Vec<f64> {
    let mut s: Vec<f64> = (0..=8000).map(|k| k as f64 / 8.0).collect();
    s.extend(geometric_ladder(1e-6, t_max, 400));
    s.sort_by(f64::total_cmp);
    s.dedup();
    s
}

impl PhiSpec {
    /// From `Φ` itself. `Φ(t) = ∞` is allowed and marks a blow-up.
    pub fn new(phi: impl Fn(f64) -> f64 + Send + Sync + 'static, delta: f64) -> Result<Self> {
        Self::from_log(move |t| phi(t).ln(), delta)
    }

    /// From `log Φ`, which avoids overflow for fast-growing `Φ`.
    pub fn from_log(log_phi: impl Fn(f64) -> f64 + Send + Sync + 'static, delta: f64) -> Result<Self> {
        let t_max = 1e12;
        Self::build(Arc::new(log_phi), delta, t_max, default_samples(t_max))
    }

    /// Replaces the sample set used for monotonicity and inversion.
    pub fn with_samples(self, mut samples: Vec<f64>) -> Result<Self> {
        samples.sort_by(f64::total_cmp);
        samples.dedup();
        Self::build(self.log_phi, self.delta, self.t_max, samples)
    }

    /// Upper end of the integration ladder.
    pub fn with_t_max(self, t_max: f64) -> Result<Self> {
        Self::build(self.log_phi, self.delta, t_max, self.samples)
    }

    fn build(log_phi: Rule, delta: f64, t_max: f64, samples: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("Δ must be positive, got {delta}")));
        }
        if !(t_max > delta) {
            return Err(Error::InvalidParameter(format!("T_max = {t_max} must exceed Δ = {delta}")));
        }
        if samples.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::InvalidParameter("samples must be nonnegative".into()));
        }
        let mut last = f64::NEG_INFINITY;
        for &t in &samples {
            let v = log_phi(t);
            if v.is_nan() {
                return Err(Error::InvalidParameter(format!("Φ({t}) is not a number")));
            }
            if v < last {
                return Err(Error::InvalidParameter(format!("Φ decreases at t = {t}")));
            }
            last = v;
        }
        Ok(Self {
            log_phi,
            delta,
            t_max,
            samples,
        })
    }

    pub fn log_phi(&self, t: f64) -> f64 {
        (self.log_phi)(t)
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.log_phi(t).exp()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// `Φ⁻¹(τ) = inf{t : Φ(t) ≥ τ}` over the sample set; `f64::INFINITY` when
/// no sample qualifies.
pub fn inverse_nondecreasing(phi: &PhiSpec, tau: f64) -> f64 {
    let log_tau = tau.ln();
    phi.samples
        .iter()
        .copied()
        .find(|&t| phi.log_phi(t) >= log_tau)
        .unwrap_or(f64::INFINITY)
}

/// Outcome of the divergence test for `∫_Δ^∞ log Φ(t) dt/t²`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiVerdict {
    pub divergent: bool,
    /// The lower limit actually used (raised above the zero set of Φ).
    pub delta: f64,
    pub t: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub exponent: f64,
    pub note: Option<String>,
}

/// Divergence trend of `∫_Δ^T log Φ(t) dt/t²` as `T` climbs a ladder that
/// is geometric in `ln T`.
pub fn phi_condition(phi: &PhiSpec) -> PhiVerdict {
    // t₀ = sup{t : Φ(t) = 0}; the integral must start beyond it.
    let t0 = phi
        .samples
        .iter()
        .copied()
        .filter(|&t| phi.log_phi(t) == f64::NEG_INFINITY)
        .fold(0.0, f64::max);
    let mut note = None;
    let mut delta = phi.delta;
    if t0 >= phi.t_max || phi.log_phi(phi.t_max) == f64::NEG_INFINITY {
        return PhiVerdict {
            divergent: false,
            delta,
            t: Vec::new(),
            cumulative: Vec::new(),
            exponent: f64::NEG_INFINITY,
            note: Some("Φ vanishes on the whole tail".into()),
        };
    }
    if delta <= t0 {
        let next = phi.samples.iter().copied().find(|&t| t > t0).unwrap_or(t0 * 2.0);
        delta = next;
        note = Some(format!("Δ raised to {delta:e} above the zero set of Φ"));
    }
    let start = delta.max(std::f64::consts::E) * 2.0;
    let ln_ladder = geometric_ladder(start.ln(), phi.t_max.ln(), 48);
    let t: Vec<f64> = ln_ladder.iter().map(|s| s.exp()).collect();
    // In s = ln t the integrand log Φ(t) dt/t² becomes log Φ(e^s) e^{−s} ds.
    let f = |s: f64| {
        let v = phi.log_phi(s.exp());
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            v * (-s).exp()
        }
    };
    let mut cumulative = vec![simpson(f, delta.ln(), ln_ladder[0], 64)];
    for w in ln_ladder.windows(2) {
        let piece = simpson(f, w[0], w[1], 32);
        cumulative.push(cumulative.last().unwrap() + piece);
    }
    if cumulative.iter().any(|v| v.is_infinite()) {
        return PhiVerdict {
            divergent: true,
            delta,
            t,
            cumulative,
            exponent: f64::INFINITY,
            note: Some("Φ is infinite at a finite point".into()),
        };
    }
    let u: Vec<f64> = t.iter().map(|t| t.ln()).collect();
    let exponent = rate_exponent(&u, &cumulative);
    PhiVerdict {
        divergent: exponent >= RATE_THRESHOLD,
        delta,
        t,
        cumulative,
        exponent,
        note,
    }
}
