//! Grids and sampled fields on the square `[-L, L]²`.
//!
//! Samples sit at cell centers: sample `(i, j)` is the point
//! `-L + (i + ½)h + i(-L + (j + ½)h)` with `h = 2L/N`. Storage is row-major
//! with rows indexed by `j` (the `y` direction), so the flat index of
//! `(i, j)` is `j·N + i`.

mod boundary;
mod domain;
pub mod io;
mod mu;

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::{Error, Result};

pub use boundary::BoundaryData;
pub use domain::{DomainSpec, Polyline};
pub use mu::MuField;

/// Uniform cell-centered grid on `[-L, L]²` with `N` samples per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("L must be positive, got {half_width}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("N must be even and >= 8, got {n}")));
        }
        Ok(Self { half_width, n })
    }

    /// `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `h = 2L/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell-center coordinate of index `k` along either axis.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.spacing()
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.coord(i), self.coord(j))
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn ij(&self, index: usize) -> (usize, usize) {
        (index % self.n, index / self.n)
    }

    /// Continuous index coordinates of `z`: sample `(i, j)` sits at `(i, j)`.
    #[inline]
    pub fn continuous_index(&self, z: Complex64) -> (f64, f64) {
        let h = self.spacing();
        (
            (z.re + self.half_width) / h - 0.5,
            (z.im + self.half_width) / h - 0.5,
        )
    }

    /// The cell (of side `h`, centered on a sample) containing `z`.
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let h = self.spacing();
        let fx = ((z.re + self.half_width) / h).floor();
        let fy = ((z.im + self.half_width) / h).floor();
        let n = self.n as f64;
        if fx >= 0.0 && fy >= 0.0 && fx < n && fy < n {
            Some((fx as usize, fy as usize))
        } else {
            None
        }
    }

    /// Bilinear stencil at `z`: lower-left sample and fractional offsets.
    /// `None` when `z` lies outside the hull of the sample points.
    pub fn bilinear_stencil(&self, z: Complex64) -> Option<(usize, usize, f64, f64)> {
        let (fx, fy) = self.continuous_index(z);
        let last = (self.n - 1) as f64;
        let eps = 1e-9;
        if !(fx >= -eps && fy >= -eps && fx <= last + eps && fy <= last + eps) {
            return None;
        }
        let fx = fx.clamp(0.0, last);
        let fy = fy.clamp(0.0, last);
        let i0 = (fx.floor() as usize).min(self.n - 2);
        let j0 = (fy.floor() as usize).min(self.n - 2);
        Some((i0, j0, fx - i0 as f64, fy - j0 as f64))
    }

    /// Largest `|x|` or `|y|` a sample may have while keeping the `L/4`
    /// support margin.
    pub fn support_limit(&self) -> f64 {
        0.75 * self.half_width
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(move |k| {
            let (i, j) = self.ij(k);
            self.point(i, j)
        })
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected_l: self.half_width,
                expected_n: self.n,
                got_l: other.half_width,
                got_n: other.n,
            })
        }
    }
}

/// Values that can be linearly interpolated.
pub trait Lerp: Copy + Add<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Add<Output = T> + Mul<f64, Output = T>> Lerp for T {}

/// Sampled values over a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
}

pub type ComplexField = Field<Complex64>;
pub type RealField = Field<f64>;
pub type MatrixField = Field<crate::conductivity::Mat2>;

impl<T: Copy> Field<T> {
    pub fn filled(grid: Grid, value: T) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Evaluates `rule` at every sample point, without validation.
    pub fn from_fn(grid: Grid, mut rule: impl FnMut(Complex64) -> T) -> Self {
        let values = grid.points().map(&mut rule).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let k = self.grid.index(i, j);
        self.values[k] = value;
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Field<U> {
        Field {
            grid: self.grid,
            values: self.values.iter().copied().map(f).collect(),
        }
    }

    pub fn zip_map<U: Copy, V: Copy>(
        &self,
        other: &Field<U>,
        mut f: impl FnMut(T, U) -> V,
    ) -> Result<Field<V>> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl<T: Lerp> Field<T> {
    /// Bilinear interpolation at `z`; `None` outside the sample hull.
    pub fn interpolate(&self, z: Complex64) -> Option<T> {
        let (i0, j0, tx, ty) = self.grid.bilinear_stencil(z)?;
        let v00 = self.get(i0, j0);
        let v10 = self.get(i0 + 1, j0);
        let v01 = self.get(i0, j0 + 1);
        let v11 = self.get(i0 + 1, j0 + 1);
        Some(
            v00 * ((1.0 - tx) * (1.0 - ty))
                + v10 * (tx * (1.0 - ty))
                + v01 * ((1.0 - tx) * ty)
                + v11 * (tx * ty),
        )
    }
}

impl<T: Copy + Default> Field<T> {
    /// Zeroes every value off `domain.mask`.
    pub fn restrict_to_domain(&self, domain: &DomainSpec) -> Result<Self> {
        self.grid.ensure_same(domain.grid())?;
        let values = self
            .values
            .iter()
            .zip(domain.mask())
            .map(|(&v, &inside)| if inside { v } else { T::default() })
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }
}

impl ComplexField {
    /// Samples `rule` at cell centers, rejecting non-finite values.
    pub fn sample_function(grid: Grid, rule: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            let (i, j) = grid.ij(k);
            let v = rule(grid.point(i, j));
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { i, j });
            }
            values.push(v);
        }
        Ok(Self { grid, values })
    }

    /// Discrete `L²` norm `sqrt(Σ|v|² h²)`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.spacing();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() * h
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn real(&self) -> RealField {
        self.map(|v| v.re)
    }

    pub fn imag(&self) -> RealField {
        self.map(|v| v.im)
    }
}

impl RealField {
    pub fn sample_function(grid: Grid, rule: impl Fn(Complex64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            let (i, j) = grid.ij(k);
            let v = rule(grid.point(i, j));
            if !v.is_finite() {
                return Err(Error::NonFinite { i, j });
            }
            values.push(v);
        }
        Ok(Self { grid, values })
    }

    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.spacing();
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt() * h
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Samples `rule` at the cell centers of `grid`.
pub fn sample_function(grid: Grid, rule: impl Fn(Complex64) -> Complex64) -> Result<ComplexField> {
    ComplexField::sample_function(grid, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid::new(1.0, 6).is_err());
        assert!(Grid::new(1.0, 9).is_err());
        assert!(Grid::new(0.0, 8).is_err());
        assert!(Grid::new(f64::NAN, 8).is_err());
        assert!(Grid::new(1.0, 8).is_ok());
    }

    #[test]
    fn zero_function_samples_to_zero() {
        let grid = Grid::new(1.0, 8).unwrap();
        let f = sample_function(grid, |_| Complex64::new(0.0, 0.0)).unwrap();
        assert!(f.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn identity_samples_to_cell_centers() {
        let grid = Grid::new(1.0, 8).unwrap();
        let f = sample_function(grid, |z| z).unwrap();
        for j in 0..8 {
            for i in 0..8 {
                let z = f.get(i, j);
                assert_eq!(z.re, -1.0 + (i as f64 + 0.5) * 0.25);
                assert_eq!(z.im, -1.0 + (j as f64 + 0.5) * 0.25);
            }
        }
    }

    #[test]
    fn gaussian_peaks_at_the_four_central_cells() {
        let grid = Grid::new(2.0, 256).unwrap();
        let f = sample_function(grid, |z| Complex64::new((-z.norm_sqr()).exp(), 0.0)).unwrap();
        let max = f.values().iter().map(|v| v.re).fold(f64::MIN, f64::max);
        let argmax: Vec<_> = (0..grid.len())
            .filter(|&k| f.values()[k].re == max)
            .map(|k| grid.ij(k))
            .collect();
        assert_eq!(argmax, vec![(127, 127), (128, 127), (127, 128), (128, 128)]);
    }

    #[test]
    fn non_finite_sample_is_rejected_with_index() {
        let grid = Grid::new(1.0, 8).unwrap();
        let err = sample_function(grid, |z| {
            if z.re > 0.8 && z.im > 0.8 {
                Complex64::new(f64::NAN, 0.0)
            } else {
                z
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { i: 7, j: 7 }));
    }

    #[test]
    fn bilinear_interpolation_is_exact_for_affine_fields() {
        let grid = Grid::new(1.0, 16).unwrap();
        let f = RealField::from_fn(grid, |z| 3.0 * z.re - 2.0 * z.im + 0.5);
        let z = Complex64::new(0.123, -0.456);
        let v = f.interpolate(z).unwrap();
        assert!((v - (3.0 * 0.123 + 2.0 * 0.456 + 0.5)).abs() < 1e-13);
        assert!(f.interpolate(Complex64::new(0.99, 0.0)).is_none());
    }

    proptest! {
        #[test]
        fn index_coordinate_round_trip(n in (4usize..64).prop_map(|k| 2 * k), l in 0.1f64..10.0, i in 0usize..128, j in 0usize..128) {
            let grid = Grid::new(l, n).unwrap();
            let (i, j) = (i % n, j % n);
            let k = grid.index(i, j);
            prop_assert_eq!(grid.ij(k), (i, j));
            prop_assert_eq!(grid.cell_of(grid.point(i, j)), Some((i, j)));
        }
    }
}
