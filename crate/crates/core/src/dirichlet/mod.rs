//! Dirichlet problems `Re f → φ` at the boundary for Beltrami equations,
//! solved by composition `f = h ∘ g`.
//!
//! `g` is the normalized Beltrami solution for μ extended by zero off the
//! domain, `D* = g(D)` carries the pushed-forward data `φ* = φ ∘ g⁻¹`, and
//! `h = u + iv` with `u` harmonic on `D*` and `v` its conjugate. On multiply
//! connected domains `v` has a period around each hole and only `Re f` is
//! single-valued.

mod annulus;
mod conjugate;
mod harmonic;
mod schwarz;

use num_complex::Complex64;

use crate::beltrami::{default_fit_radius, renormalize, solve_normalized, AffineFit, QCMap};
use crate::field::{BoundaryData, ComplexField, DomainSpec, MuField, Polyline, RealField};
use crate::report::Report;
use crate::{Error, Result};

pub use annulus::{annulus_dirichlet, AnnulusSolution};
pub use conjugate::{conjugate_with_periods, gradient, path_integrate, period_around, period_around_with};
pub use harmonic::{harmonic_dirichlet, harmonic_dirichlet_with, HarmonicOptions, HarmonicSolution};
pub use schwarz::{schwarz_disk, schwarz_disk_from_boundary, SchwarzRule};

pub(crate) use conjugate::{hole_periods, rotated_flux};
pub(crate) use harmonic::extend_off_mask as harmonic_extend;

/// A Dirichlet problem for the Beltrami equation on a domain.
#[derive(Clone, Debug)]
pub struct BoundaryProblem {
    domain: DomainSpec,
    mu: MuField,
    phi: BoundaryData,
}

impl BoundaryProblem {
    /// μ is restricted to the domain mask.
    pub fn new(domain: DomainSpec, mu: &MuField, phi: BoundaryData) -> Result<Self> {
        mu.grid().ensure_same(domain.grid())?;
        phi.check_matches(&domain)?;
        let mu = mu.restrict_to_domain(&domain)?;
        Ok(Self { domain, mu, phi })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn mu(&self) -> &MuField {
        &self.mu
    }

    pub fn phi(&self) -> &BoundaryData {
        &self.phi
    }
}

#[derive(Clone, Debug)]
pub struct DirichletOptions {
    pub beltrami_tol: f64,
    pub beltrami_max_iter: usize,
    pub harmonic: HarmonicOptions,
    /// Far-field fit radius; 1.5 × the support radius when `None`.
    pub fit_radius: Option<f64>,
}

impl Default for DirichletOptions {
    fn default() -> Self {
        Self {
            beltrami_tol: 1e-10,
            beltrami_max_iter: 500,
            harmonic: HarmonicOptions::default(),
            fit_radius: None,
        }
    }
}

/// The assembled solution `f = h ∘ g`.
#[derive(Clone, Debug)]
pub struct RegularSolution {
    pub g: QCMap,
    pub fit: Option<AffineFit>,
    pub image_domain: DomainSpec,
    pub image_boundary: BoundaryData,
    /// Harmonic `Re h` on the image grid.
    pub u: RealField,
    /// Conjugate `Im h` on the image grid (one branch).
    pub v: RealField,
    /// `h ∘ g` on the source mask, 0 elsewhere.
    pub f: ComplexField,
    /// Largest `|Re f − φ|` over the source boundary vertices.
    pub boundary_error: f64,
    /// Period of `v` around each hole, in hole order.
    pub periods: Vec<f64>,
    pub multi_valued: bool,
    pub harmonic_iterations: usize,
}

impl RegularSolution {
    /// `u ∘ g` on the source mask.
    pub fn real_part(&self) -> RealField {
        self.f.real()
    }

    pub fn to_report(&self) -> Report {
        let grid = self.f.grid();
        let mut r = Report::new("dirichlet");
        r.float("L", grid.half_width())
            .int("N", grid.n() as i128)
            .int("beltrami.iterations", self.g.iterations as i128)
            .float("beltrami.residual_l2", self.g.residual_l2)
            .float("beltrami.min_jacobian", self.g.min_jacobian);
        if let Some(fit) = self.fit {
            r.float("fit.a_minus_1", (fit.a - 1.0).norm()).float("fit.b", fit.b.norm());
        }
        r.int("harmonic.iterations", self.harmonic_iterations as i128)
            .float("boundary_error", self.boundary_error)
            .int("holes", self.periods.len() as i128)
            .floats("periods", &self.periods)
            .flag("multi_valued", self.multi_valued);
        r
    }
}

/// Maps the boundary polylines of `d` vertexwise through `g` and carries
/// the data along.
pub fn pushforward_boundary(g: &QCMap, d: &DomainSpec, phi: &BoundaryData) -> Result<(DomainSpec, BoundaryData)> {
    g.grid().ensure_same(d.grid())?;
    phi.check_matches(d)?;
    let mut mapped = Vec::with_capacity(d.components().len());
    for (c, p) in d.components().iter().enumerate() {
        let vertices = p
            .vertices()
            .iter()
            .map(|&z| {
                g.evaluate(z)
                    .ok_or_else(|| Error::OutsideGrid(format!("boundary vertex {z} of component {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        mapped.push(Polyline::new(vertices).map_err(|e| match e {
            Error::Topology(m) => Error::Topology(format!("image of component {c}: {m}")),
            other => other,
        })?);
    }
    let vertices: Vec<Vec<Complex64>> = mapped.iter().map(|p| p.vertices().to_vec()).collect();
    let image = DomainSpec::from_components(*d.grid(), mapped)?;
    Ok((image, phi.with_vertices(&vertices)?))
}

/// Runs the composition pipeline. Errors carry the stage that produced them.
pub fn solve_dirichlet(p: &BoundaryProblem, options: &DirichletOptions) -> Result<RegularSolution> {
    let d = p.domain();
    d.check_resolved()?;
    let grid = *d.grid();

    let (g, fit) = if p.mu().is_zero() {
        (QCMap::identity(grid), None)
    } else {
        let g = solve_normalized(p.mu(), options.beltrami_tol, options.beltrami_max_iter)
            .map_err(Error::stage("beltrami"))?;
        match options.fit_radius.or_else(|| default_fit_radius(p.mu())) {
            Some(r) => {
                let (g, fit) = renormalize(&g, r).map_err(Error::stage("renormalize"))?;
                (g, Some(fit))
            }
            None => (g, None),
        }
    };

    let (image, phi_star) = pushforward_boundary(&g, d, p.phi()).map_err(Error::stage("pushforward"))?;
    let harmonic = harmonic_dirichlet_with(&image, &phi_star, &options.harmonic).map_err(Error::stage("harmonic"))?;
    let u = harmonic.u;
    let (ci, cj) = image.central_sample();
    let (v, periods) =
        conjugate_with_periods(&u, &image, grid.point(ci, cj)).map_err(Error::stage("conjugate"))?;

    let mut f = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (k, value) in f.iter_mut().enumerate() {
        if !d.mask()[k] {
            continue;
        }
        let w = g.f.values()[k];
        let (Some(re), Some(im)) = (u.interpolate(w), v.interpolate(w)) else {
            let (i, j) = grid.ij(k);
            return Err(Error::stage("assemble")(Error::OutsideGrid(format!(
                "g maps sample ({i}, {j}) to {w}"
            ))));
        };
        *value = Complex64::new(re, im);
    }

    let mut boundary_error: f64 = 0.0;
    for (comp, data) in phi_star.components().iter().zip(p.phi().components()) {
        for (&(w, _), &(_, target)) in comp.iter().zip(data) {
            let re = u
                .interpolate(w)
                .ok_or_else(|| Error::stage("assemble")(Error::OutsideGrid(format!("image vertex {w}"))))?;
            boundary_error = boundary_error.max((re - target).abs());
        }
    }
    let scale = p.phi().max().abs().max(p.phi().min().abs()).max(1.0);
    let multi_valued = periods.iter().any(|q| q.abs() > 1e-6 * scale);
    Ok(RegularSolution {
        g,
        fit,
        image_domain: image,
        image_boundary: phi_star,
        u,
        v,
        f: ComplexField::from_values(grid, f)?,
        boundary_error,
        periods,
        multi_valued,
        harmonic_iterations: harmonic.iterations,
    })
}

#[cfg(test)]
mod tests;
