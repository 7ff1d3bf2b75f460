//! The dictionary between Beltrami coefficients and symmetric conductivity
//! matrices with unit determinant, and the divergence-form equation
//! `div(A∇u) = 0`.
//!
//! `A = [[|1−μ|², −2 Im μ], [−2 Im μ, |1+μ|²]] / (1 − |μ|²)` and back
//! `μ_A = −(a11 − a22 + i(a12 + a21)) / (2 + a11 + a22)`. If `f = u + iv`
//! solves `f_z̄ = μ f_z` then `div(A∇u) = 0` and `∇v = J A ∇u`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ops::{Add, Mul};

use crate::dirichlet::{
    gradient, harmonic_extend, hole_periods, path_integrate, rotated_flux, solve_dirichlet, BoundaryProblem,
    DirichletOptions, RegularSolution,
};
use crate::field::{BoundaryData, DomainSpec, Field, Grid, MatrixField, MuField, RealField};
use crate::report::Report;
use crate::{Error, Result};

/// A real 2×2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a11: 1.0, a12: 0.0, a21: 0.0, a22: 1.0 };

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    /// `A·(x, y)`.
    pub fn apply(self, v: (f64, f64)) -> (f64, f64) {
        (self.a11 * v.0 + self.a12 * v.1, self.a21 * v.0 + self.a22 * v.1)
    }

    pub fn det(self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn transpose(self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Largest eigenvalue of a symmetric matrix.
    pub fn max_eigenvalue(self) -> f64 {
        let m = 0.5 * (self.a11 + self.a22);
        let d = (0.25 * (self.a11 - self.a22).powi(2) + self.a12 * self.a21).max(0.0).sqrt();
        m + d
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

/// The Hodge operator: counterclockwise rotation by π/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hodge;

impl Hodge {
    pub const J: Mat2 = Mat2::new(0.0, -1.0, 1.0, 0.0);

    pub fn matrix(self) -> Mat2 {
        Self::J
    }

    pub fn apply(self, v: (f64, f64)) -> (f64, f64) {
        (-v.1, v.0)
    }
}

/// `A(μ)` for a single value.
pub fn matrix_of(mu: Complex64) -> Mat2 {
    let d = 1.0 - mu.norm_sqr();
    let off = -2.0 * mu.im / d;
    Mat2::new((1.0 - mu).norm_sqr() / d, off, off, (1.0 + mu).norm_sqr() / d)
}

/// `μ_A` for a single matrix.
pub fn mu_of(a: Mat2) -> Complex64 {
    -Complex64::new(a.a11 - a.a22, a.a12 + a.a21) / (2.0 + a.a11 + a.a22)
}

/// A symmetric, unit-determinant, elliptic matrix per sample; the identity
/// off the region of interest.
#[derive(Clone, Debug, PartialEq)]
pub struct ConductivityField {
    a: MatrixField,
}

impl ConductivityField {
    /// Validates symmetry, `det A = 1` and `(1+a11)(1+a22) > a12 a21`, each
    /// to a tolerance of `1e-12` relative to the entries.
    pub fn new(a: MatrixField) -> Result<Self> {
        let grid = *a.grid();
        for (k, m) in a.values().iter().enumerate() {
            let (i, j) = grid.ij(k);
            if m.to_array().iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { i, j });
            }
            let scale = m.to_array().iter().fold(1.0_f64, |s, v| s.max(v.abs()));
            if (m.a12 - m.a21).abs() > 1e-12 * scale {
                return Err(Error::InvalidParameter(format!("A is not symmetric at sample ({i}, {j})")));
            }
            if (m.det() - 1.0).abs() > 1e-12 * scale * scale {
                return Err(Error::InvalidParameter(format!(
                    "det A = {} at sample ({i}, {j})",
                    m.det()
                )));
            }
            if !((1.0 + m.a11) * (1.0 + m.a22) > m.a12 * m.a21) {
                return Err(Error::MatrixNotElliptic { i, j });
            }
        }
        Ok(Self { a })
    }

    pub fn identity(grid: Grid) -> Self {
        Self {
            a: Field::filled(grid, Mat2::IDENTITY),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    pub fn matrices(&self) -> &MatrixField {
        &self.a
    }

    pub fn get(&self, i: usize, j: usize) -> Mat2 {
        self.a.get(i, j)
    }

    pub fn into_matrices(self) -> MatrixField {
        self.a
    }
}

/// `A(μ)` per sample; the identity off the support.
pub fn mu_to_matrix(mu: &MuField) -> ConductivityField {
    let support = mu.support();
    let values = mu
        .values()
        .values()
        .iter()
        .zip(support)
        .map(|(&m, &s)| if s { matrix_of(m) } else { Mat2::IDENTITY })
        .collect();
    ConductivityField {
        a: Field::from_values(*mu.grid(), values).expect("same grid"),
    }
}

/// `μ_A` per sample, supported where `A` differs from the identity.
pub fn matrix_to_mu(a: &ConductivityField) -> Result<MuField> {
    let support: Vec<bool> = a.matrices().values().iter().map(|&m| m != Mat2::IDENTITY).collect();
    mu_on(a, support)
}

/// `μ_A` restricted to the mask of `d`.
pub fn matrix_to_mu_on(a: &ConductivityField, d: &DomainSpec) -> Result<MuField> {
    a.grid().ensure_same(d.grid())?;
    let support: Vec<bool> = a
        .matrices()
        .values()
        .iter()
        .zip(d.mask())
        .map(|(&m, &inside)| inside && m != Mat2::IDENTITY)
        .collect();
    mu_on(a, support)
}

fn mu_on(a: &ConductivityField, support: Vec<bool>) -> Result<MuField> {
    let grid = *a.grid();
    for (k, m) in a.matrices().values().iter().enumerate() {
        if support[k] && !((1.0 + m.a11) * (1.0 + m.a22) > m.a12 * m.a21) {
            let (i, j) = grid.ij(k);
            return Err(Error::MatrixNotElliptic { i, j });
        }
    }
    let values = a
        .matrices()
        .values()
        .iter()
        .zip(&support)
        .map(|(&m, &s)| if s { mu_of(m) } else { Complex64::new(0.0, 0.0) })
        .collect();
    MuField::new(Field::from_values(grid, values)?, support)
}

/// Stream function `v` with `∇v = J A ∇u`, integrated from `basepoint`,
/// plus its period around each hole of `d`.
pub fn stream_function(
    u: &RealField,
    a: &ConductivityField,
    d: &DomainSpec,
    basepoint: Complex64,
) -> Result<(RealField, Vec<f64>)> {
    u.grid().ensure_same(d.grid())?;
    a.grid().ensure_same(d.grid())?;
    let g = rotated_flux(u, a.matrices(), d.mask());
    let v = path_integrate(d, basepoint, &g)?;
    Ok((v, hole_periods(u, Some(a.matrices()), d)?))
}

/// Result of an A-harmonic Dirichlet solve.
#[derive(Clone, Debug)]
pub struct PotentialSolution {
    /// `u = 𝓗 ∘ g` on the mask, extended linearly through the boundary data
    /// for two cells beyond it.
    pub u: RealField,
    pub mu: MuField,
    pub solution: RegularSolution,
    /// `∫_D K_{μ_A} dm` by grid quadrature.
    pub k_integral: f64,
}

impl PotentialSolution {
    pub fn to_report(&self) -> Report {
        let mut r = Report::new("potential");
        r.float("k_integral", self.k_integral)
            .float("mu_max", self.mu.max_modulus())
            .extend("pipeline", &self.solution.to_report());
        r
    }
}

/// `div(A∇u) = 0` in `d` with `u = φ` on the boundary, via `μ_A` and the
/// Beltrami composition pipeline.
pub fn a_harmonic_solve(d: &DomainSpec, a: &ConductivityField, phi: &BoundaryData, tol: f64) -> Result<RealField> {
    let mut options = DirichletOptions::default();
    options.harmonic.tol = tol;
    Ok(a_harmonic_solve_with(d, a, phi, &options)?.u)
}

pub fn a_harmonic_solve_with(
    d: &DomainSpec,
    a: &ConductivityField,
    phi: &BoundaryData,
    options: &DirichletOptions,
) -> Result<PotentialSolution> {
    a.grid().ensure_same(d.grid())?;
    let mu = matrix_to_mu_on(a, d)?;
    let h2 = d.grid().spacing().powi(2);
    let k_integral: f64 = mu
        .values()
        .values()
        .iter()
        .zip(d.mask())
        .filter(|(_, &m)| m)
        .map(|(v, _)| (1.0 + v.norm()) / (1.0 - v.norm()) * h2)
        .sum();
    let problem = BoundaryProblem::new(d.clone(), &mu, phi.clone())?;
    let solution = solve_dirichlet(&problem, options)?;
    let mut u = solution.f.real().into_values();
    harmonic_extend(d, phi, &mut u);
    Ok(PotentialSolution {
        u: RealField::from_values(*d.grid(), u)?,
        mu,
        solution,
        k_integral,
    })
}

/// The smooth bump `ψ(z) = exp(−1/(1 − ρ²))`, `ρ = |z − c|/r`, supported in
/// the disk `|z − c| < r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: Complex64,
    pub radius: f64,
}

impl Bump {
    pub fn value(&self, z: Complex64) -> f64 {
        let rho2 = (z - self.center).norm_sqr() / (self.radius * self.radius);
        if rho2 >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - rho2)).exp()
        }
    }

    pub fn gradient(&self, z: Complex64) -> (f64, f64) {
        let w = z - self.center;
        let r2 = self.radius * self.radius;
        let rho2 = w.norm_sqr() / r2;
        if rho2 >= 1.0 {
            return (0.0, 0.0);
        }
        let s = 1.0 - rho2;
        let factor = (-1.0 / s).exp() * (-2.0 / (s * s * r2));
        (factor * w.re, factor * w.im)
    }
}

/// `count` bumps with radii uniform in `[0.1, 0.3] ×` the diameter of the
/// outer boundary and centers uniform in the mask, kept inside `d`.
pub fn random_bumps(d: &DomainSpec, count: usize, seed: u64) -> Result<Vec<Bump>> {
    let grid = d.grid();
    let diameter = d.components().iter().map(|p| p.diameter()).fold(0.0, f64::max);
    let (i0, i1, j0, j1) = d.mask_bounds();
    let (lo, hi) = (grid.point(i0, j0), grid.point(i1, j1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 100_000 {
            return Err(Error::InvalidDomain(format!(
                "could not place {count} test bumps inside the domain"
            )));
        }
        let radius = diameter * rng.gen_range(0.1..0.3);
        let center = Complex64::new(rng.gen_range(lo.re..hi.re), rng.gen_range(lo.im..hi.im));
        let bump = Bump { center, radius };
        if d.contains_point(center) && d.nearest_boundary(center).distance > radius * (1.0 + 1e-9) {
            out.push(bump);
        }
    }
    Ok(out)
}

/// `∫ ⟨A∇u, ∇ψ⟩ dm` per bump, with `∇u` by centered differences and `∇ψ`
/// exact.
pub fn weak_residual(u: &RealField, a: &ConductivityField, d: &DomainSpec, bumps: &[Bump]) -> Result<Vec<f64>> {
    u.grid().ensure_same(d.grid())?;
    a.grid().ensure_same(d.grid())?;
    let grid = *d.grid();
    let h2 = grid.spacing().powi(2);
    let grad = gradient(u, d.mask());
    bumps
        .iter()
        .enumerate()
        .map(|(b, bump)| {
            if !d.contains_point(bump.center) || d.nearest_boundary(bump.center).distance < bump.radius {
                return Err(Error::InvalidParameter(format!("test bump {b} leaves the domain")));
            }
            let mut sum = 0.0;
            for k in 0..grid.len() {
                let (i, j) = grid.ij(k);
                let z = grid.point(i, j);
                if (z - bump.center).norm() >= bump.radius {
                    continue;
                }
                if !d.mask()[k] {
                    return Err(Error::InvalidParameter(format!("test bump {b} covers samples off the mask")));
                }
                let (ax, ay) = a.matrices().values()[k].apply(grad[k]);
                let (px, py) = bump.gradient(z);
                sum += (ax * px + ay * py) * h2;
            }
            Ok(sum)
        })
        .collect()
}

#[cfg(test)]
mod tests;
