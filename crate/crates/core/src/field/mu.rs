use num_complex::Complex64;

use super::{ComplexField, DomainSpec, Grid};
use crate::{Error, Result};

/// A sampled Beltrami coefficient with its compact support.
///
/// Invariants: `|μ| < 1` on the support, `μ = 0` off it, and the support
/// stays at least `L/4` away from the grid edge so the periodic transforms
/// have room to decay.
#[derive(Clone, Debug, PartialEq)]
pub struct MuField {
    values: ComplexField,
    support: Vec<bool>,
}

impl MuField {
    pub fn new(values: ComplexField, support: Vec<bool>) -> Result<Self> {
        let grid = *values.grid();
        if support.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "support mask has {} entries, grid needs {}",
                support.len(),
                grid.len()
            )));
        }
        let limit = grid.support_limit() + 1e-12 * grid.half_width();
        for (k, (&mu, &inside)) in values.values().iter().zip(&support).enumerate() {
            let (i, j) = grid.ij(k);
            if !(mu.re.is_finite() && mu.im.is_finite()) {
                return Err(Error::NonFinite { i, j });
            }
            if inside {
                let modulus = mu.norm();
                if modulus >= 1.0 {
                    return Err(Error::NotElliptic { i, j, modulus });
                }
                let z = grid.point(i, j);
                if z.re.abs() > limit || z.im.abs() > limit {
                    return Err(Error::SupportMargin { i, j });
                }
            } else if mu != Complex64::new(0.0, 0.0) {
                return Err(Error::OffSupport { i, j });
            }
        }
        Ok(Self { values, support })
    }

    pub fn zero(grid: Grid) -> Self {
        Self {
            values: ComplexField::filled(grid, Complex64::new(0.0, 0.0)),
            support: vec![false; grid.len()],
        }
    }

    /// Samples `rule` on the samples where `inside` holds and sets μ = 0
    /// elsewhere.
    pub fn from_fn(
        grid: Grid,
        rule: impl Fn(Complex64) -> Complex64,
        inside: impl Fn(Complex64) -> bool,
    ) -> Result<Self> {
        let support: Vec<bool> = grid.points().map(&inside).collect();
        let values = ComplexField::sample_function(grid, |z| {
            if inside(z) {
                rule(z)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })?;
        Self::new(values, support)
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    pub fn values(&self) -> &ComplexField {
        &self.values
    }

    pub fn support(&self) -> &[bool] {
        &self.support
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values.get(i, j)
    }

    /// Largest `|μ|` over the samples.
    pub fn max_modulus(&self) -> f64 {
        self.values.max_abs()
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// Radius of the smallest origin-centered disk containing the support.
    pub fn support_radius(&self) -> f64 {
        let grid = self.grid();
        self.support
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(k, _)| {
                let (i, j) = grid.ij(k);
                grid.point(i, j).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Zeroes μ off `domain.mask` and intersects the support with the mask.
    pub fn restrict_to_domain(&self, domain: &DomainSpec) -> Result<Self> {
        let values = self.values.restrict_to_domain(domain)?;
        let support = self
            .support
            .iter()
            .zip(domain.mask())
            .map(|(&s, &m)| s && m)
            .collect();
        Ok(Self { values, support })
    }

    /// Applies `f` to every supported value; the caller keeps `|μ| < 1`.
    pub fn map_supported(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        let values = self.values.map(&f);
        let mut values = values;
        for (v, &s) in values.values_mut().iter_mut().zip(&self.support) {
            if !s {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        Self::new(values, self.support.clone())
    }
}
