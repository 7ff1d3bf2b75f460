//! Dilatation quotients and the numerical solvability criteria built on them.
//!
//! `K_μ = (1+|μ|)/(1−|μ|)` and the tangent dilatation
//! `K^T_μ(z, z₀) = |1 − μ(z)·(z̄−z̄₀)/(z−z₀)|² / (1 − |μ(z)|²)` both equal 1
//! off the support of μ, and `1/K_μ ≤ K^T_μ ≤ K_μ`.
//!
//! Conditions stated as limits (`ε → 0`, `T → ∞`) are evaluated on geometric
//! ladders and decided by the scale-free trend statistics of [`trend`].
//! Disk quadratures skip the sample cell that contains `z₀`.

mod phi;
mod solvability;
pub mod trend;

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::field::{Grid, MuField, RealField};
use crate::{Error, Result};

pub use phi::{inverse_nondecreasing, phi_condition, PhiSpec, PhiVerdict};
pub use solvability::{
    default_probes, solvability_report, Criterion, CriterionVerdict, ProbeResult, SolvabilityOptions,
    SolvabilityReport,
};

use trend::{geometric_ladder, tail_growth_exponent, rate_exponent, simpson, GROWTH_THRESHOLD, RATE_THRESHOLD};

/// `(1+|μ|)/(1−|μ|)`.
pub fn dilatation_quotient(mu: Complex64) -> f64 {
    let m = mu.norm();
    (1.0 + m) / (1.0 - m)
}

/// `K^T_μ(z, z₀)` for the value `μ = μ(z)`. At `z = z₀` the direction is
/// undefined and `K_μ` is returned.
pub fn tangent_dilatation(mu: Complex64, z: Complex64, z0: Complex64) -> f64 {
    let d = z - z0;
    if d == Complex64::new(0.0, 0.0) {
        return dilatation_quotient(mu);
    }
    let rot = d.conj() / d;
    (Complex64::new(1.0, 0.0) - rot * mu).norm_sqr() / (1.0 - mu.norm_sqr())
}

/// `K_μ` per sample; exactly 1 off the support.
pub fn k_mu(mu: &MuField) -> RealField {
    let support = mu.support();
    let mut k = 0;
    mu.values().map(|m| {
        let v = if support[k] { dilatation_quotient(m) } else { 1.0 };
        k += 1;
        v
    })
}

/// `K^T_μ(·, z₀)` per sample; exactly 1 off the support.
pub fn k_t_mu(mu: &MuField, z0: Complex64) -> RealField {
    let grid = *mu.grid();
    let support = mu.support();
    let values = mu
        .values()
        .values()
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            if support[k] {
                let (i, j) = grid.ij(k);
                tangent_dilatation(m, grid.point(i, j), z0)
            } else {
                1.0
            }
        })
        .collect();
    RealField::from_values(grid, values).expect("same grid")
}

fn check_inside(grid: &Grid, z0: Complex64, r: f64) -> Result<()> {
    let edge = grid.half_width() - 0.5 * grid.spacing();
    if z0.re - r < -edge || z0.re + r > edge || z0.im - r < -edge || z0.im + r > edge {
        return Err(Error::OutsideGrid(format!("disk of radius {r:e} around {z0} leaves the grid")));
    }
    Ok(())
}

fn check_resolved(grid: &Grid, eps: f64) -> Result<()> {
    let limit = 2.0 * grid.spacing();
    if eps < limit * (1.0 - 1e-12) {
        return Err(Error::Resolution(format!("radius {eps:e} is below 2h = {limit:e}")));
    }
    Ok(())
}

/// Mean of `field` over `max(16, ⌈2πr/h⌉)` equiangular points of the circle
/// `|z − z₀| = r`, by bilinear interpolation.
pub fn circle_mean(field: &RealField, z0: Complex64, r: f64) -> Result<f64> {
    let grid = field.grid();
    if !(r > grid.spacing()) {
        return Err(Error::Resolution(format!("circle radius {r:e} is not above h")));
    }
    check_inside(grid, z0, r)?;
    let count = ((2.0 * PI * r / grid.spacing()).ceil() as usize).max(16);
    let mut sum = 0.0;
    for m in 0..count {
        let z = z0 + Complex64::from_polar(r, 2.0 * PI * m as f64 / count as f64);
        sum += field
            .interpolate(z)
            .ok_or_else(|| Error::OutsideGrid(format!("circle point {z} outside the grid")))?;
    }
    Ok(sum / count as f64)
}

/// Circle mean `k^T_μ(z₀, r)` of the tangent dilatation.
pub fn circle_mean_kt(mu: &MuField, z0: Complex64, r: f64) -> Result<f64> {
    circle_mean(&k_t_mu(mu, z0), z0, r)
}

/// Samples of the disk `|z − z₀| < ε`, minus the cell containing `z₀`.
fn disk_samples(grid: &Grid, z0: Complex64, eps: f64) -> Vec<usize> {
    let (fx, fy) = grid.continuous_index(z0);
    let reach = eps / grid.spacing() + 1.0;
    let n = grid.n() as f64;
    let lo = |f: f64| (f - reach).floor().clamp(0.0, n - 1.0) as usize;
    let hi = |f: f64| (f + reach).ceil().clamp(0.0, n - 1.0) as usize;
    let center = grid.cell_of(z0);
    let mut out = Vec::new();
    for j in lo(fy)..=hi(fy) {
        for i in lo(fx)..=hi(fx) {
            if Some((i, j)) != center && (grid.point(i, j) - z0).norm() < eps {
                out.push(grid.index(i, j));
            }
        }
    }
    out
}

/// Mean of `field` over the disk `B(z₀, ε)`.
pub fn disk_mean(field: &RealField, z0: Complex64, eps: f64) -> Result<f64> {
    let grid = field.grid();
    check_resolved(grid, eps)?;
    check_inside(grid, z0, eps)?;
    let idx = disk_samples(grid, z0, eps);
    Ok(idx.iter().map(|&k| field.values()[k]).sum::<f64>() / idx.len() as f64)
}

/// Mean of `|φ − φ_B|` over the disk `B = B(z₀, ε)`.
pub fn mean_oscillation(phi: &RealField, z0: Complex64, eps: f64) -> Result<f64> {
    let grid = phi.grid();
    check_resolved(grid, eps)?;
    check_inside(grid, z0, eps)?;
    let idx = disk_samples(grid, z0, eps);
    Ok(oscillation(phi.values(), &idx))
}

fn oscillation(values: &[f64], idx: &[usize]) -> f64 {
    let n = idx.len() as f64;
    let mean = idx.iter().map(|&k| values[k]).sum::<f64>() / n;
    idx.iter().map(|&k| (values[k] - mean).abs()).sum::<f64>() / n
}

/// Mean oscillations along a shrinking radius sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct FmoEstimate {
    pub eps: Vec<f64>,
    pub oscillations: Vec<f64>,
    /// Largest oscillation over the smaller half of the radii.
    pub limsup_estimate: f64,
    /// Growth exponent of the oscillations over the smaller radii.
    pub exponent: f64,
    pub passed: bool,
}

/// Finite mean oscillation at `z₀`: the oscillations stay bounded as `ε`
/// shrinks along `eps`.
pub fn fmo_estimate(phi: &RealField, z0: Complex64, eps: &[f64]) -> Result<FmoEstimate> {
    if eps.len() < 2 {
        return Err(Error::InvalidParameter("need at least two radii".into()));
    }
    let oscillations = eps
        .iter()
        .map(|&e| mean_oscillation(phi, z0, e))
        .collect::<Result<Vec<_>>>()?;
    let exponent = tail_growth_exponent(eps, &oscillations);
    let tail = &oscillations[oscillations.len() / 2..];
    let limsup_estimate = tail.iter().copied().fold(0.0, f64::max);
    Ok(FmoEstimate {
        eps: eps.to_vec(),
        oscillations,
        limsup_estimate,
        exponent,
        passed: exponent <= GROWTH_THRESHOLD && limsup_estimate.is_finite(),
    })
}

/// Supremum of mean oscillations over disks centered on a `windows × windows`
/// sublattice with dyadic radii `2h, 4h, …`, restricted to disks inside
/// `mask` (or the grid).
pub fn bmo_norm_masked(phi: &RealField, mask: Option<&[bool]>, windows: usize) -> f64 {
    let grid = *phi.grid();
    let n = grid.n();
    let windows = windows.clamp(1, n);
    let h = grid.spacing();
    let mut best: f64 = 0.0;
    for a in 0..windows {
        for b in 0..windows {
            let i = ((a as f64 + 0.5) * n as f64 / windows as f64) as usize;
            let j = ((b as f64 + 0.5) * n as f64 / windows as f64) as usize;
            if mask.is_some_and(|m| !m[grid.index(i, j)]) {
                continue;
            }
            let z0 = grid.point(i, j);
            let mut r = 2.0 * h;
            while check_inside(&grid, z0, r).is_ok() {
                let idx = disk_samples(&grid, z0, r);
                if mask.is_some_and(|m| idx.iter().any(|&k| !m[k])) {
                    break;
                }
                best = best.max(oscillation(phi.values(), &idx));
                r *= 2.0;
            }
        }
    }
    best
}

/// [`bmo_norm_masked`] over the whole grid.
pub fn bmo_norm(phi: &RealField, windows: usize) -> f64 {
    bmo_norm_masked(phi, None, windows)
}

/// The Lehto integral `∫_ε^{ε₀} dr / (r k(r))` along a geometric ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct LehtoResult {
    /// The integral down to the smallest radius.
    pub value: f64,
    pub eps: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Rate exponent against `ln ln(e/ε)`.
    pub exponent: f64,
    pub divergent: bool,
}

/// Lehto integral of a circle-mean rule `k(r)`.
pub fn lehto_integral_rule(k: impl Fn(f64) -> f64, eps: f64, eps0: f64) -> Result<LehtoResult> {
    if !(eps > 0.0 && eps < eps0) {
        return Err(Error::InvalidParameter(format!("need 0 < ε < ε₀, got ε = {eps:e}, ε₀ = {eps0:e}")));
    }
    let levels = ((eps0 / eps).ln() * 2.0).ceil().clamp(8.0, 64.0) as usize;
    let ladder = geometric_ladder(eps0, eps, levels);
    let mut cumulative = vec![0.0];
    for w in ladder.windows(2) {
        let piece = simpson(|s| 1.0 / k(s.exp()), w[1].ln(), w[0].ln(), 16);
        cumulative.push(cumulative.last().unwrap() + piece);
    }
    let u: Vec<f64> = ladder.iter().map(|&e| 1.0 - e.ln()).collect();
    let exponent = rate_exponent(&u, &cumulative);
    Ok(LehtoResult {
        value: *cumulative.last().unwrap(),
        eps: ladder,
        cumulative,
        exponent,
        divergent: exponent >= RATE_THRESHOLD,
    })
}

/// Lehto integral of the sampled tangent dilatation around `z₀`.
pub fn lehto_integral(mu: &MuField, z0: Complex64, eps: f64, eps0: f64) -> Result<LehtoResult> {
    let grid = mu.grid();
    check_resolved(grid, eps)?;
    if eps0 > grid.half_width() / 2.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("ε₀ = {eps0:e} exceeds L/2")));
    }
    check_inside(grid, z0, eps0)?;
    let kt = k_t_mu(mu, z0);
    lehto_integral_field(&kt, z0, eps, eps0)
}

fn lehto_integral_field(kt: &RealField, z0: Complex64, eps: f64, eps0: f64) -> Result<LehtoResult> {
    // Circle means are evaluated eagerly so interpolation errors surface.
    circle_mean(kt, z0, eps0)?;
    lehto_integral_rule(|r| circle_mean(kt, z0, r).unwrap_or(f64::NAN), eps, eps0)
}

/// Integrals of `φ / (|z−z₀| log(1/|z−z₀|))²` outside shrinking disks and their ratios to `ln ln(1/ε)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogBound {
    pub eps: Vec<f64>,
    pub integrals: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Rate exponent of the integrals against `ln ln(1/ε)`.
    pub exponent: f64,
    pub bounded: bool,
}

fn log_bound(eps0: f64, eps: &[f64], integrals: Vec<f64>) -> LogBound {
    let ratios = eps
        .iter()
        .zip(&integrals)
        .map(|(&e, &i)| i / (1.0 / e).ln().ln())
        .collect();
    let mut u = vec![(1.0 / eps0).ln()];
    u.extend(eps.iter().map(|e| (1.0 / e).ln()));
    let mut cum = vec![0.0];
    cum.extend(integrals.iter().copied());
    let exponent = rate_exponent(&u, &cum);
    LogBound {
        eps: eps.to_vec(),
        integrals,
        ratios,
        exponent,
        bounded: exponent <= GROWTH_THRESHOLD,
    }
}

fn check_log_bound_args(eps: &[f64], eps0: f64) -> Result<()> {
    let cap = (-std::f64::consts::E).exp();
    if !(eps0 > 0.0 && eps0 < cap) {
        return Err(Error::InvalidParameter(format!("ε₀ = {eps0:e} must lie in (0, e^-e)")));
    }
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e < eps0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("radii must decrease within (0, ε₀)".into()));
    }
    Ok(())
}

/// `∫_{ε<|z−z₀|<ε₀} φ(z) / (|z−z₀| log(1/|z−z₀|))² dm(z)` by grid quadrature,
/// for each `ε` of the decreasing sequence.
pub fn fmo_log_bound_check(phi: &RealField, z0: Complex64, eps: &[f64], eps0: f64) -> Result<LogBound> {
    check_log_bound_args(eps, eps0)?;
    let grid = phi.grid();
    check_resolved(grid, *eps.last().unwrap())?;
    check_inside(grid, z0, eps0)?;
    let h2 = grid.spacing().powi(2);
    let idx = disk_samples(grid, z0, eps0);
    let integrals = eps
        .iter()
        .map(|&e| {
            idx.iter()
                .filter_map(|&k| {
                    let (i, j) = grid.ij(k);
                    let r = (grid.point(i, j) - z0).norm();
                    (r > e).then(|| phi.values()[k] * h2 / (r * (1.0 / r).ln()).powi(2))
                })
                .sum()
        })
        .collect();
    Ok(log_bound(eps0, eps, integrals))
}

/// The same integral for an analytic rule, by polar quadrature about `z₀`.
pub fn fmo_log_bound_rule(phi: impl Fn(Complex64) -> f64, z0: Complex64, eps: &[f64], eps0: f64) -> Result<LogBound> {
    check_log_bound_args(eps, eps0)?;
    const ANGLES: usize = 64;
    let ring = |r: f64| {
        (0..ANGLES)
            .map(|m| phi(z0 + Complex64::from_polar(r, 2.0 * PI * (m as f64 + 0.5) / ANGLES as f64)))
            .sum::<f64>()
            * (2.0 * PI / ANGLES as f64)
    };
    // In s = ln r the measure r dr / (r log(1/r))² becomes ds / s².
    let mut integrals = Vec::with_capacity(eps.len());
    let mut acc = 0.0;
    let mut upper = eps0;
    for &e in eps {
        acc += simpson(|s| ring(s.exp()) / (s * s), e.ln(), upper.ln(), 64);
        integrals.push(acc);
        upper = e;
    }
    Ok(log_bound(eps0, eps, integrals))
}

/// Lehto-style divergence of `∫ dr / (r q(r))` for the circle means `q` of `Q`
/// around `z₀`, over `2h ≤ r ≤ min(1, reach)`.
pub fn ring_mean_trend(q: &RealField, z0: Complex64) -> Result<LehtoResult> {
    let grid = q.grid();
    let edge = grid.half_width() - 0.5 * grid.spacing();
    let reach = [edge - z0.re, edge + z0.re, edge - z0.im, edge + z0.im]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let r1 = (0.95 * reach).min(1.0);
    let r0 = 2.0 * grid.spacing();
    if !(r1 > 2.0 * r0) {
        return Err(Error::Resolution(format!("no room for rings around {z0}")));
    }
    lehto_integral_field(q, z0, r0, r1)
}

pub fn ring_mean_divergence(q: &RealField, z0: Complex64) -> Result<bool> {
    if q.values().iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidParameter("Q must be nonnegative".into()));
    }
    Ok(ring_mean_trend(q, z0)?.divergent)
}

#[cfg(test)]
mod tests;
