use num_complex::Complex64;
use rayon::prelude::*;

use super::trend::{geometric_ladder, growth_exponent, tail_growth_exponent, rate_exponent, GROWTH_THRESHOLD, RATE_THRESHOLD};
use super::{
    check_inside, circle_mean, disk_mean, disk_samples, fmo_estimate, k_mu, k_t_mu, lehto_integral_field,
    oscillation, phi_condition, LehtoResult, PhiSpec,
};
use crate::field::{DomainSpec, MuField, RealField};
use crate::report::Report;
use crate::{Error, Result};

/// The sufficient conditions evaluated per probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    FmoDominant,
    BmoDominant,
    MeanBounded,
    LehtoDivergent,
    LogOrder,
    PhiIntegral,
    ExpIntegral,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::FmoDominant => "FMO_dominant",
            Criterion::BmoDominant => "BMO_dominant",
            Criterion::MeanBounded => "mean_bounded",
            Criterion::LehtoDivergent => "Lehto_divergent",
            Criterion::LogOrder => "log_order",
            Criterion::PhiIntegral => "Phi_integral",
            Criterion::ExpIntegral => "exp_integral",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeResult {
    pub z0: Complex64,
    /// The trend exponent the verdict is based on.
    pub value: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionVerdict {
    pub criterion: Criterion,
    pub results: Vec<ProbeResult>,
    /// Conjunction over the probes.
    pub aggregate: bool,
    pub eps_min: f64,
    pub eps0: f64,
    pub rings: usize,
}

#[derive(Clone, Debug)]
pub struct SolvabilityOptions {
    /// Exponent in `∫ exp(α K_μ)`.
    pub alpha: f64,
    /// Number of radii in each shrinking ladder.
    pub rings: usize,
    pub phi: Option<PhiSpec>,
}

impl Default for SolvabilityOptions {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            rings: 12,
            phi: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolvabilityReport {
    pub probes: Vec<Complex64>,
    /// `∫_D K_μ dm` by grid quadrature.
    pub k_integral: f64,
    /// Rate exponent of `∫_{D∖B(z*, ε)} K_μ` around the maximum `z*` of `K_μ`.
    pub k_l1_exponent: f64,
    pub k_in_l1: bool,
    pub verdicts: Vec<CriterionVerdict>,
    /// Criteria satisfied at each probe.
    pub passed_under: Vec<Vec<Criterion>>,
    pub aggregate: bool,
    pub alpha: f64,
}

impl SolvabilityReport {
    pub fn verdict(&self, c: Criterion) -> Option<&CriterionVerdict> {
        self.verdicts.iter().find(|v| v.criterion == c)
    }

    pub fn probe_passed(&self, k: usize) -> bool {
        !self.passed_under[k].is_empty()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("solvability");
        r.int("probes", self.probes.len() as i128)
            .float("alpha", self.alpha)
            .float("k_integral", self.k_integral)
            .float("k_l1_exponent", self.k_l1_exponent)
            .flag("k_in_l1", self.k_in_l1);
        for v in &self.verdicts {
            let name = v.criterion.name();
            r.flag(&format!("{name}.aggregate"), v.aggregate)
                .float(&format!("{name}.eps_min"), v.eps_min)
                .float(&format!("{name}.eps0"), v.eps0)
                .int(&format!("{name}.rings"), v.rings as i128);
        }
        for (k, z) in self.probes.iter().enumerate() {
            r.text(&format!("probe.{k}.z0"), format!("{:e} {:e}", z.re, z.im));
            for v in &self.verdicts {
                let p = v.results[k];
                r.text(
                    &format!("probe.{k}.{}", v.criterion.name()),
                    format!("{} {:e}", if p.passed { "pass" } else { "fail" }, p.value),
                );
            }
            let names: Vec<&str> = self.passed_under[k].iter().map(|c| c.name()).collect();
            r.text(&format!("probe.{k}.passed_under"), if names.is_empty() { "none".to_string() } else { names.join(",") });
        }
        r.flag("aggregate", self.aggregate);
        r
    }
}

/// Boundary vertices (at most 64 per component, evenly spaced) plus a 5×5
/// sublattice of interior samples.
pub fn default_probes(d: &DomainSpec) -> Vec<Complex64> {
    let mut probes = Vec::new();
    for p in d.components() {
        let n = p.len();
        let step = n.div_ceil(64);
        probes.extend(p.vertices().iter().step_by(step).copied());
    }
    let grid = d.grid();
    let (i0, i1, j0, j1) = d.mask_bounds();
    for a in 0..5 {
        for b in 0..5 {
            let i = i0 + (i1 - i0) * (2 * a + 1) / 10;
            let j = j0 + (j1 - j0) * (2 * b + 1) / 10;
            if d.contains_sample(i, j) {
                probes.push(grid.point(i, j));
            }
        }
    }
    probes
}

struct ProbeOutcome {
    values: Vec<(Criterion, f64, bool)>,
}

fn masked_sum_outside(values: &[f64], mask: &[bool], grid: &crate::field::Grid, z0: Complex64, eps: f64) -> f64 {
    let h2 = grid.spacing().powi(2);
    values
        .iter()
        .zip(mask)
        .enumerate()
        .filter(|(k, (_, &m))| {
            let (i, j) = grid.ij(*k);
            m && (grid.point(i, j) - z0).norm() > eps
        })
        .map(|(_, (v, _))| v * h2)
        .sum()
}

/// Rate exponent of partial integrals `∫_{|z−z₀|>ε}` along the shrinking
/// ladder against `ln(e/ε)`; convergent below the rate threshold.
fn tail_exponent(ladder: &[f64], partial: &[f64]) -> f64 {
    if partial.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let u: Vec<f64> = ladder.iter().map(|&e| 1.0 - e.ln()).collect();
    let cum: Vec<f64> = partial.iter().map(|v| v - partial[0]).collect();
    rate_exponent(&u, &cum)
}

/// Sup of mean oscillations at each dyadic radius `2h·2^m`, with centers on
/// a lattice of spacing about `r/2` and disks kept inside `mask`.
fn bmo_scale_profile(phi: &RealField, mask: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let grid = *phi.grid();
    let h = grid.spacing();
    let n = grid.n();
    let mut radii = Vec::new();
    let mut sups = Vec::new();
    let mut r = 2.0 * h;
    while r < grid.half_width() / 2.0 {
        let step = ((r / (2.0 * h)).round() as usize).max(1);
        let mut best: f64 = 0.0;
        let mut any = false;
        for j in (0..n).step_by(step) {
            for i in (0..n).step_by(step) {
                if !mask[grid.index(i, j)] {
                    continue;
                }
                let z0 = grid.point(i, j);
                if check_inside(&grid, z0, r).is_err() {
                    continue;
                }
                let idx = disk_samples(&grid, z0, r);
                if idx.iter().any(|&k| !mask[k]) {
                    continue;
                }
                any = true;
                best = best.max(oscillation(phi.values(), &idx));
            }
        }
        if !any {
            break;
        }
        radii.push(r);
        sups.push(best);
        r *= 2.0;
    }
    radii.reverse();
    sups.reverse();
    (radii, sups)
}

/// Evaluates the solvability criteria of `μ` on `d` at `probes`.
pub fn solvability_report(
    mu: &MuField,
    d: &DomainSpec,
    probes: &[Complex64],
    options: &SolvabilityOptions,
) -> Result<SolvabilityReport> {
    if probes.is_empty() {
        return Err(Error::InvalidParameter("empty probe set".into()));
    }
    let grid = *mu.grid();
    grid.ensure_same(d.grid())?;
    if !(options.alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("α must be positive, got {}", options.alpha)));
    }
    let rings = options.rings.max(3);
    let h = grid.spacing();
    let eps_min = 2.0 * h;
    let mask = d.mask();
    let k = k_mu(mu);

    // K_μ ∈ L¹(D): partial integrals around the maximum of K_μ.
    let kmax_index = (0..grid.len())
        .filter(|&i| mask[i])
        .fold(None::<usize>, |best, i| match best {
            Some(b) if k.values()[b] >= k.values()[i] => Some(b),
            _ => Some(i),
        })
        .ok_or_else(|| Error::InvalidDomain("empty mask".into()))?;
    let (ki, kj) = grid.ij(kmax_index);
    let zmax = grid.point(ki, kj);
    let l1_ladder = geometric_ladder(grid.half_width() / 4.0, eps_min, rings - 1);
    let l1_values: Vec<f64> = l1_ladder
        .iter()
        .map(|&e| masked_sum_outside(k.values(), mask, &grid, zmax, e))
        .collect();
    let k_integral = masked_sum_outside(k.values(), mask, &grid, zmax, -1.0);
    let k_l1_exponent = tail_exponent(&l1_ladder, &l1_values);
    let k_in_l1 = k_integral.is_finite() && k_l1_exponent < RATE_THRESHOLD;

    // BMO dominant: K_μ itself, scale by scale.
    let (bmo_radii, bmo_sups) = bmo_scale_profile(&k, mask);
    let bmo_exponent = if bmo_radii.len() >= 2 {
        growth_exponent(&bmo_radii, &bmo_sups)
    } else {
        0.0
    };
    let bmo_passed = bmo_exponent <= GROWTH_THRESHOLD && bmo_sups.iter().all(|v| v.is_finite());

    let exp_field = k.map(|v| (options.alpha * v).exp());
    let phi_divergent = options.phi.as_ref().map(|p| phi_condition(p).divergent);
    let half_width = grid.half_width();
    let edge = half_width - 0.5 * h;

    let outcomes: Vec<Result<(ProbeOutcome, f64)>> = probes
        .par_iter()
        .map(|&z0| {
            let reach = [edge - z0.re, edge + z0.re, edge - z0.im, edge + z0.im]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let eps0 = (half_width / 4.0).min(0.9 * reach);
            if !(eps0 >= 2.0 * eps_min) {
                return Err(Error::Resolution(format!("probe {z0} is too close to the grid edge")));
            }
            let ladder = geometric_ladder(eps0, eps_min, rings - 1);
            let kt = k_t_mu(mu, z0);
            let mut values = Vec::new();

            // K^T ≤ K_μ, so each condition may also be read off the majorant.
            let mean_kind = |field: &RealField| -> Result<(f64, LehtoResult, f64)> {
                let means = ladder.iter().map(|&e| disk_mean(field, z0, e)).collect::<Result<Vec<_>>>()?;
                let beta = tail_growth_exponent(&ladder, &means);
                let lehto = lehto_integral_field(field, z0, eps_min, eps0)?;
                let circle = ladder.iter().map(|&e| circle_mean(field, z0, e)).collect::<Result<Vec<_>>>()?;
                let rung1: Vec<f64> = ladder.iter().zip(&circle).map(|(&e, &c)| c / (1.0 - e.ln())).collect();
                let rung2: Vec<f64> = ladder
                    .iter()
                    .zip(&circle)
                    .map(|(&e, &c)| {
                        let l = 1.0 - e.ln();
                        c / (l * (1.0 + l.ln()))
                    })
                    .collect();
                let log = tail_growth_exponent(&ladder, &rung1).min(tail_growth_exponent(&ladder, &rung2));
                Ok((beta, lehto, log))
            };
            let (beta_t, lehto_t, log_t) = mean_kind(&kt)?;
            let (beta_k, lehto_k, log_k) = mean_kind(&k)?;
            let beta = beta_t.min(beta_k);
            values.push((Criterion::MeanBounded, beta, beta <= GROWTH_THRESHOLD));
            let gamma = lehto_t.exponent.max(lehto_k.exponent);
            values.push((Criterion::LehtoDivergent, gamma, lehto_t.divergent || lehto_k.divergent));
            let log = log_t.min(log_k);
            values.push((Criterion::LogOrder, log, log <= GROWTH_THRESHOLD));

            let partial: Vec<f64> = ladder
                .iter()
                .map(|&e| masked_sum_outside(exp_field.values(), mask, &grid, z0, e))
                .collect();
            let be = tail_exponent(&ladder, &partial);
            values.push((Criterion::ExpIntegral, be, be < RATE_THRESHOLD));

            let fmo = fmo_estimate(&k, z0, &ladder)?;
            values.push((Criterion::FmoDominant, fmo.exponent, fmo.passed));

            if let (Some(phi), Some(divergent)) = (&options.phi, phi_divergent) {
                let phik = kt.map(|v| phi.phi(v));
                let all = vec![true; grid.len()];
                let partial: Vec<f64> = ladder
                    .iter()
                    .map(|&e| {
                        let near = phik.values().iter().enumerate().map(|(i, &v)| {
                            let (a, b) = grid.ij(i);
                            if (grid.point(a, b) - z0).norm() < eps0 { v } else { 0.0 }
                        });
                        let near: Vec<f64> = near.collect();
                        masked_sum_outside(&near, &all, &grid, z0, e)
                    })
                    .collect();
                let bp = tail_exponent(&ladder, &partial);
                values.push((Criterion::PhiIntegral, bp, divergent && bp < RATE_THRESHOLD));
            }
            Ok((ProbeOutcome { values }, eps0))
        })
        .collect();
    let mut per_probe = Vec::with_capacity(probes.len());
    let mut eps0_max: f64 = 0.0;
    for o in outcomes {
        let (o, e) = o?;
        eps0_max = eps0_max.max(e);
        per_probe.push(o);
    }

    let mut order = vec![
        Criterion::FmoDominant,
        Criterion::BmoDominant,
        Criterion::MeanBounded,
        Criterion::LehtoDivergent,
        Criterion::LogOrder,
        Criterion::ExpIntegral,
    ];
    if options.phi.is_some() {
        order.push(Criterion::PhiIntegral);
    }
    let mut verdicts = Vec::new();
    for &c in &order {
        let results: Vec<ProbeResult> = probes
            .iter()
            .zip(&per_probe)
            .map(|(&z0, o)| {
                if c == Criterion::BmoDominant {
                    return ProbeResult {
                        z0,
                        value: bmo_exponent,
                        passed: bmo_passed,
                    };
                }
                let &(_, value, passed) = o.values.iter().find(|v| v.0 == c).expect("criterion evaluated");
                ProbeResult { z0, value, passed }
            })
            .collect();
        verdicts.push(CriterionVerdict {
            criterion: c,
            aggregate: results.iter().all(|r| r.passed),
            results,
            eps_min,
            eps0: eps0_max,
            rings,
        });
    }
    let passed_under: Vec<Vec<Criterion>> = (0..probes.len())
        .map(|k| {
            verdicts
                .iter()
                .filter(|v| v.results[k].passed)
                .map(|v| v.criterion)
                .collect()
        })
        .collect();
    let aggregate = k_in_l1 && passed_under.iter().all(|p| !p.is_empty());
    Ok(SolvabilityReport {
        probes: probes.to_vec(),
        k_integral,
        k_l1_exponent,
        k_in_l1,
        verdicts,
        passed_under,
        aggregate,
        alpha: options.alpha,
    })
}
