use num_complex::Complex64;
use std::f64::consts::PI;

use crate::field::{BoundaryData, Polyline};
use crate::{Error, Result};

/// The Schwarz integral on the unit disk discretized by the trapezoid rule:
/// `f(z) = (1/M) Σ φ(ζ_k) (ζ_k + z)/(ζ_k − z)` with `ζ_k = e^{2πik/M}`.
/// Normalized by `Im f(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchwarzRule {
    nodes: Vec<Complex64>,
    values: Vec<f64>,
}

impl SchwarzRule {
    /// From `M` values at the equiangular nodes.
    pub fn from_samples(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 nodes, got {}", values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidBoundaryData(format!("non-finite value at node {k}")));
        }
        let m = values.len();
        let nodes = (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
            .collect();
        Ok(Self { nodes, values })
    }

    pub fn nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Radius `1 − 2π/M` below which the rule is accurate.
    pub fn accurate_radius(&self) -> f64 {
        1.0 - 2.0 * PI / self.nodes.len() as f64
    }

    /// Evaluates the rule; logs a warning beyond [`accurate_radius`](Self::accurate_radius).
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        if z.norm() > self.accurate_radius() {
            log::warn!("Schwarz rule evaluated at |z| = {:.6} beyond the accurate radius {:.6}", z.norm(), self.accurate_radius());
        }
        let sum: Complex64 = self
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&zeta, &v)| v * (zeta + z) / (zeta - z))
            .sum();
        sum / self.nodes.len() as f64
    }

    /// Like [`evaluate`](Self::evaluate) but refuses points beyond the accurate radius.
    pub fn evaluate_checked(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() <= self.accurate_radius()) {
            return Err(Error::Resolution(format!(
                "|z| = {} exceeds 1 − 2π/M = {}",
                z.norm(),
                self.accurate_radius()
            )));
        }
        Ok(self.evaluate(z))
    }
}

/// Schwarz rule for `φ(ζ)` given as a function on the unit circle.
pub fn schwarz_disk(phi: impl Fn(Complex64) -> f64, m: usize) -> Result<SchwarzRule> {
    let values = (0..m)
        .map(|k| phi(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)))
        .collect();
    SchwarzRule::from_samples(values)
}

/// Schwarz rule for boundary data on a polygonal unit circle (first
/// component), read off at the boundary point nearest to each node.
pub fn schwarz_disk_from_boundary(phi: &BoundaryData, m: usize) -> Result<SchwarzRule> {
    let comp = &phi.components()[0];
    let poly = Polyline::new_unchecked(comp.iter().map(|&(z, _)| z).collect())?;
    let far = comp.iter().map(|&(z, _)| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    if far > 0.05 {
        return Err(Error::InvalidBoundaryData(format!("vertices lie up to {far:.3} away from the unit circle")));
    }
    schwarz_disk(
        |zeta| {
            let (segment, s, _, _) = poly.nearest(zeta);
            phi.value_on_segment(0, segment, s)
        },
        m,
    )
}
