use num_complex::Complex64;

use super::DomainSpec;
use crate::{Error, Result};

/// Real boundary values attached to the vertices of each boundary component.
///
/// Values between vertices are linear along the polyline segments.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    components: Vec<Vec<(Complex64, f64)>>,
    modulus: f64,
}

impl BoundaryData {
    pub fn new(components: Vec<Vec<(Complex64, f64)>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidBoundaryData("no components".into()));
        }
        let mut modulus: f64 = 0.0;
        for (c, comp) in components.iter().enumerate() {
            if comp.len() < 3 {
                return Err(Error::InvalidBoundaryData(format!(
                    "component {c} has {} vertices",
                    comp.len()
                )));
            }
            for (k, &(z, v)) in comp.iter().enumerate() {
                if !(v.is_finite() && z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::InvalidBoundaryData(format!(
                        "non-finite entry at component {c}, vertex {k}"
                    )));
                }
                let (z1, v1) = comp[(k + 1) % comp.len()];
                let d = (z1 - z).norm();
                if d > 0.0 {
                    modulus = modulus.max((v1 - v).abs() / d);
                }
            }
        }
        Ok(Self { components, modulus })
    }

    /// Evaluates `phi` at every boundary vertex of `domain`.
    pub fn from_fn(domain: &DomainSpec, phi: impl Fn(Complex64) -> f64) -> Result<Self> {
        Self::new(
            domain
                .components()
                .iter()
                .map(|p| p.vertices().iter().map(|&z| (z, phi(z))).collect())
                .collect(),
        )
    }

    /// One constant value per component.
    pub fn constant_per_component(domain: &DomainSpec, values: &[f64]) -> Result<Self> {
        if values.len() != domain.components().len() {
            return Err(Error::InvalidBoundaryData(format!(
                "{} values for {} components",
                values.len(),
                domain.components().len()
            )));
        }
        Self::new(
            domain
                .components()
                .iter()
                .zip(values)
                .map(|(p, &v)| p.vertices().iter().map(|&z| (z, v)).collect())
                .collect(),
        )
    }

    pub fn components(&self) -> &[Vec<(Complex64, f64)>] {
        &self.components
    }

    /// Largest `|Δφ| / |Δz|` between adjacent vertices.
    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn value(&self, component: usize, vertex: usize) -> f64 {
        self.components[component][vertex].1
    }

    /// Linear interpolation along segment `segment` at parameter `s`.
    pub fn value_on_segment(&self, component: usize, segment: usize, s: f64) -> f64 {
        let comp = &self.components[component];
        let a = comp[segment].1;
        let b = comp[(segment + 1) % comp.len()].1;
        a + (b - a) * s
    }

    pub fn min(&self) -> f64 {
        self.iter_values().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.iter_values().fold(f64::NEG_INFINITY, f64::max)
    }

    fn iter_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().flatten().map(|&(_, v)| v)
    }

    /// Checks that the data lines up vertex by vertex with `domain`.
    pub fn check_matches(&self, domain: &DomainSpec) -> Result<()> {
        let comps = domain.components();
        if comps.len() != self.components.len() {
            return Err(Error::InvalidBoundaryData(format!(
                "data has {} components, domain has {}",
                self.components.len(),
                comps.len()
            )));
        }
        let tol = 1e-9 * domain.grid().half_width();
        for (c, (p, data)) in comps.iter().zip(&self.components).enumerate() {
            if p.len() != data.len() {
                return Err(Error::InvalidBoundaryData(format!(
                    "component {c}: {} values for {} vertices",
                    data.len(),
                    p.len()
                )));
            }
            if p
                .vertices()
                .iter()
                .zip(data)
                .any(|(&z, &(w, _))| (z - w).norm() > tol)
            {
                return Err(Error::InvalidBoundaryData(format!(
                    "component {c}: vertices do not match the domain"
                )));
            }
        }
        Ok(())
    }

    /// Same values attached to new vertex positions.
    pub fn with_vertices(&self, vertices: &[Vec<Complex64>]) -> Result<Self> {
        if vertices.len() != self.components.len()
            || vertices.iter().zip(&self.components).any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::InvalidBoundaryData("vertex layout mismatch".into()));
        }
        Self::new(
            vertices
                .iter()
                .zip(&self.components)
                .map(|(vs, comp)| vs.iter().zip(comp).map(|(&z, &(_, v))| (z, v)).collect())
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    #[test]
    fn linear_data_has_unit_modulus() {
        let grid = Grid::new(2.0, 32).unwrap();
        let d = DomainSpec::disk(grid, Complex64::new(0.0, 0.0), 1.0, 64).unwrap();
        let phi = BoundaryData::from_fn(&d, |z| z.re).unwrap();
        assert!(phi.modulus() <= 1.0 + 1e-12);
        assert!(phi.modulus() > 0.9);
        phi.check_matches(&d).unwrap();
        assert!((phi.value_on_segment(0, 0, 0.5) - 0.5 * (1.0 + phi.value(0, 1))).abs() < 1e-15);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let z = |x: f64| Complex64::new(x, 1.0 - x);
        let bad = vec![vec![(z(0.0), 0.0), (z(1.0), f64::NAN), (z(0.5), 1.0)]];
        assert!(BoundaryData::new(bad).is_err());
    }
}
