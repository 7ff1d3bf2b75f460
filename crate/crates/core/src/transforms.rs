//! FFT-based Cauchy and Beurling transforms.
//!
//! Conventions, used throughout the crate:
//!
//! * Cauchy transform: `Cω(z) = (1/π) ∫ ω(ζ) / (z − ζ) dm(ζ)`, so that
//!   `∂̄(Cω) = ω`. For the indicator of the unit disk, `Cω(z) = z̄` inside
//!   and `1/z` outside.
//! * Beurling transform: `Sω = ∂(Cω)`, the principal value
//!   `−(1/π) ∫ ω(ζ) / (z − ζ)² dm(ζ)`, with Fourier multiplier `ξ̄/ξ`.
//!
//! Fields are embedded in a zero-padded periodic box (padding factor 2 by
//! default). Frequencies are `ξ = ξ₁ + iξ₂` with `ξ₁, ξ₂ = 2πk/(P h)`.
//! Multipliers: `∂̄ ↦ iξ/2`, `∂ ↦ iξ̄/2`, `C ↦ 2/(iξ)`, `S ↦ ξ̄/ξ`; the
//! zero frequency maps to 0 for all of them.
//!
//! The periodic Cauchy transform loses the mean of ω. The compact variants
//! remove it first by subtracting `M·g`, where `M = ∫ω` and `g` is a unit-mass
//! Gaussian, and add back the closed forms of `Cg` and `Sg`. The remaining
//! constant ambiguity of the periodic `C` is fixed by making the mean over a
//! far circle vanish, as it does for the true transform of a mean-zero
//! compactly supported density.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::field::{ComplexField, Field, Grid};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// What to do when a density reaches into the grid's edge margin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WrapPolicy {
    #[default]
    Error,
    Warn,
}

/// Half-open index window `[i0, i1) × [j0, j1)` on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl Window {
    pub fn full(grid: &Grid) -> Self {
        Self {
            i0: 0,
            i1: grid.n(),
            j0: 0,
            j1: grid.n(),
        }
    }

    /// Bounding window of the samples where `keep` holds.
    pub fn bounding(grid: &Grid, keep: impl Fn(usize) -> bool) -> Option<Self> {
        let n = grid.n();
        let mut w = Self {
            i0: n,
            i1: 0,
            j0: n,
            j1: 0,
        };
        for k in (0..grid.len()).filter(|&k| keep(k)) {
            let (i, j) = grid.ij(k);
            w.i0 = w.i0.min(i);
            w.i1 = w.i1.max(i + 1);
            w.j0 = w.j0.min(j);
            w.j1 = w.j1.max(j + 1);
        }
        (w.i0 < w.i1).then_some(w)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.i0 && i < self.i1 && j >= self.j0 && j < self.j1
    }

    /// Grows the window by `m` samples on every side, clamped to the grid.
    pub fn dilate(&self, m: usize, grid: &Grid) -> Self {
        Self {
            i0: self.i0.saturating_sub(m),
            i1: (self.i1 + m).min(grid.n()),
            j0: self.j0.saturating_sub(m),
            j1: (self.j1 + m).min(grid.n()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symbol {
    Dbar,
    D,
    Cauchy,
    Beurling,
}

/// Precomputed FFT plans and frequency tables for one grid.
pub struct TransformPlan {
    grid: Grid,
    padding: usize,
    size: usize,
    offset: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
    freq: Vec<f64>,
    policy: WrapPolicy,
}

impl std::fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPlan")
            .field("grid", &self.grid)
            .field("padding", &self.padding)
            .field("policy", &self.policy)
            .finish()
    }
}

impl TransformPlan {
    /// Plan with padding factor 2.
    pub fn new(grid: Grid) -> Self {
        Self::with_padding(grid, 2).expect("padding 2 is valid")
    }

    pub fn with_padding(grid: Grid, padding: usize) -> Result<Self> {
        if padding < 2 {
            return Err(Error::InvalidParameter(format!("padding factor {padding} < 2")));
        }
        let size = padding * grid.n();
        let offset = (size - grid.n()) / 2;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let scale = 2.0 * PI / (size as f64 * grid.spacing());
        let freq = (0..size)
            .map(|k| {
                let signed = if k < size / 2 { k as f64 } else { k as f64 - size as f64 };
                signed * scale
            })
            .collect();
        Ok(Self {
            grid,
            padding,
            size,
            offset,
            forward,
            inverse,
            scratch_len,
            freq,
            policy: WrapPolicy::Error,
        })
    }

    pub fn with_policy(mut self, policy: WrapPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    /// The grid of the padded periodic box; its samples extend the base grid.
    pub fn padded_grid(&self) -> Grid {
        Grid::new(self.grid.half_width() * self.padding as f64, self.size).expect("valid padded grid")
    }

    /// Beurling multiplier `ξ̄/ξ` at FFT indices `(k1, k2)`.
    pub fn beurling_multiplier(&self, k1: usize, k2: usize) -> Complex64 {
        self.multiplier(Symbol::Beurling, k1, k2)
    }

    #[inline]
    fn multiplier(&self, symbol: Symbol, k1: usize, k2: usize) -> Complex64 {
        if k1 == 0 && k2 == 0 {
            return ZERO;
        }
        let xi = Complex64::new(self.freq[k1], self.freq[k2]);
        let nyquist = k1 == self.size / 2 || k2 == self.size / 2;
        match symbol {
            Symbol::Beurling => xi.conj() * xi.conj() / xi.norm_sqr(),
            Symbol::Cauchy => Complex64::new(0.0, -2.0) * xi.conj() / xi.norm_sqr(),
            Symbol::Dbar if nyquist => ZERO,
            Symbol::D if nyquist => ZERO,
            Symbol::Dbar => Complex64::new(0.0, 0.5) * xi,
            Symbol::D => Complex64::new(0.0, 0.5) * xi.conj(),
        }
    }

    /// Applies a multiplier to padded rows `in_rows` (each of length `P`,
    /// already filled) and returns padded rows `out_rows` restricted to
    /// padded columns `out_cols`.
    fn apply(
        &self,
        mut input: Vec<Complex64>,
        in_rows: Range<usize>,
        symbol: Symbol,
        out_rows: Range<usize>,
        out_cols: Range<usize>,
    ) -> Vec<Complex64> {
        let p = self.size;
        let nin = in_rows.len();
        let nout = out_rows.len();
        debug_assert_eq!(input.len(), nin * p);
        let fresh = || (vec![ZERO; p], vec![ZERO; self.scratch_len]);

        input.par_chunks_mut(p).for_each_init(
            || vec![ZERO; self.scratch_len],
            |scratch, row| self.forward.process_with_scratch(row, scratch),
        );

        // Column pass, one column of the spectrum at a time.
        let mut columns = vec![ZERO; p * nout];
        columns
            .par_chunks_mut(nout)
            .enumerate()
            .for_each_init(fresh, |(col, scratch), (k1, out)| {
                col.fill(ZERO);
                for (r, l) in in_rows.clone().enumerate() {
                    col[l] = input[r * p + k1];
                }
                self.forward.process_with_scratch(col, scratch);
                for (k2, v) in col.iter_mut().enumerate() {
                    *v *= self.multiplier(symbol, k1, k2);
                }
                self.inverse.process_with_scratch(col, scratch);
                out.copy_from_slice(&col[out_rows.clone()]);
            });
        drop(input);

        // Transpose back into rows, in blocks of rows for locality.
        let mut rows = vec![ZERO; nout * p];
        const BLOCK: usize = 16;
        rows.par_chunks_mut(BLOCK * p)
            .enumerate()
            .for_each(|(b, chunk)| {
                let r0 = b * BLOCK;
                let count = chunk.len() / p;
                for k1 in 0..p {
                    let src = &columns[k1 * nout + r0..k1 * nout + r0 + count];
                    for (r, &v) in src.iter().enumerate() {
                        chunk[r * p + k1] = v;
                    }
                }
            });
        drop(columns);

        let scale = 1.0 / (p as f64 * p as f64);
        let width = out_cols.len();
        let mut out = vec![ZERO; nout * width];
        rows.par_chunks_mut(p)
            .zip(out.par_chunks_mut(width))
            .for_each_init(
                || vec![ZERO; self.scratch_len],
                |scratch, (row, dst)| {
                    self.inverse.process_with_scratch(row, scratch);
                    for (d, &v) in dst.iter_mut().zip(&row[out_cols.clone()]) {
                        *d = v * scale;
                    }
                },
            );
        out
    }

    /// Copies `window` of `field` into zero-padded rows.
    fn embed(&self, field: &ComplexField, window: Window) -> (Vec<Complex64>, Range<usize>) {
        let p = self.size;
        let rows = window.j0 + self.offset..window.j1 + self.offset;
        let mut buf = vec![ZERO; rows.len() * p];
        for (r, j) in (window.j0..window.j1).enumerate() {
            for i in window.i0..window.i1 {
                buf[r * p + i + self.offset] = field.get(i, j);
            }
        }
        (buf, rows)
    }

    fn crop_rows(&self) -> Range<usize> {
        self.offset..self.offset + self.grid.n()
    }

    /// Bounding window of the nonzero samples, checked against the margin.
    pub fn support_window(&self, field: &ComplexField) -> Result<Option<Window>> {
        self.grid.ensure_same(field.grid())?;
        let limit = self.grid.support_limit() + 1e-12 * self.grid.half_width();
        let values = field.values();
        let window = Window::bounding(&self.grid, |k| values[k] != ZERO);
        if let Some(w) = window {
            for (i, j) in [(w.i0, w.j0), (w.i1 - 1, w.j1 - 1)] {
                let z = self.grid.point(i, j);
                if z.re.abs() > limit || z.im.abs() > limit {
                    match self.policy {
                        WrapPolicy::Error => return Err(Error::Wraparound { i, j }),
                        WrapPolicy::Warn => {
                            log::warn!("density reaches sample ({i}, {j}) inside the edge margin")
                        }
                    }
                }
            }
        }
        Ok(window)
    }

    fn plain(&self, field: &ComplexField, symbol: Symbol) -> Result<ComplexField> {
        let Some(window) = self.support_window(field)? else {
            return Ok(Field::filled(self.grid, ZERO));
        };
        let (buf, rows) = self.embed(field, window);
        let cols = self.crop_rows();
        let out = self.apply(buf, rows, symbol, self.crop_rows(), cols);
        Field::from_values(self.grid, out)
    }

    /// Spectral `∂̄` of a compactly supported field.
    pub fn dbar(&self, field: &ComplexField) -> Result<ComplexField> {
        self.plain(field, Symbol::Dbar)
    }

    /// Spectral `∂` of a compactly supported field.
    pub fn d(&self, field: &ComplexField) -> Result<ComplexField> {
        self.plain(field, Symbol::D)
    }

    /// The periodic Beurling multiplier applied to the padded field,
    /// cropped back to the grid. The mean of ω is annihilated.
    pub fn beurling_transform(&self, omega: &ComplexField) -> Result<ComplexField> {
        self.plain(omega, Symbol::Beurling)
    }

    /// The periodic Beurling transform on the whole padded box. On
    /// mean-zero densities it is an isometry of the padded `L²` norm.
    pub fn beurling_transform_padded(&self, omega: &ComplexField) -> Result<ComplexField> {
        let padded = self.padded_grid();
        let Some(window) = self.support_window(omega)? else {
            return Ok(Field::filled(padded, ZERO));
        };
        let (buf, rows) = self.embed(omega, window);
        let out = self.apply(buf, rows, Symbol::Beurling, 0..self.size, 0..self.size);
        Field::from_values(padded, out)
    }

    /// Splits off the mean: returns padded rows holding `ω − M·g`, their
    /// range, `M` and the Gaussian.
    fn remove_mean(&self, omega: &ComplexField, window: Window) -> (Vec<Complex64>, Range<usize>, Complex64, Gaussian) {
        let h = self.grid.spacing();
        let mass: Complex64 = omega.values().iter().sum::<Complex64>() * (h * h);
        let lo = self.grid.point(window.i0, window.j0);
        let hi = self.grid.point(window.i1 - 1, window.j1 - 1);
        let center = (lo + hi) * 0.5;
        let width = self.grid.half_width() / 6.0;
        let p = self.size;
        let padded = self.padded_grid();
        // Rows where the Gaussian is not negligible, plus the support rows.
        let reach = 7.0 * width;
        let g_rows = |c: f64| {
            let (a, _) = padded.continuous_index(Complex64::new(c - reach, 0.0));
            let (b, _) = padded.continuous_index(Complex64::new(c + reach, 0.0));
            (a.floor().max(0.0) as usize, (b.ceil() as usize + 1).min(p))
        };
        let (ga, gb) = if mass == ZERO { (p, 0) } else { g_rows(center.im) };
        let r0 = ga.min(window.j0 + self.offset);
        let r1 = gb.max(window.j1 + self.offset);
        let rows = r0..r1;
        let mut buf = vec![ZERO; rows.len() * p];
        let mut gauss = Gaussian {
            center,
            width,
            norm: 0.0,
        };
        if mass != ZERO {
            let (ca, cb) = g_rows(center.re);
            let mut total = 0.0;
            for l in ga..gb {
                for k in ca..cb {
                    total += gauss.raw(padded.point(k, l));
                }
            }
            gauss.norm = 1.0 / (total * h * h);
            for l in ga..gb {
                for k in ca..cb {
                    buf[(l - r0) * p + k] = -mass * gauss.density(padded.point(k, l));
                }
            }
        }
        for j in window.j0..window.j1 {
            for i in window.i0..window.i1 {
                buf[(j + self.offset - r0) * p + i + self.offset] += omega.get(i, j);
            }
        }
        (buf, rows, mass, gauss)
    }

    /// Cauchy transform of a compactly supported density, normalized so
    /// that `Cω(z) → 0` as `z → ∞`.
    pub fn cauchy_transform(&self, omega: &ComplexField) -> Result<ComplexField> {
        let Some(window) = self.support_window(omega)? else {
            return Ok(Field::filled(self.grid, ZERO));
        };
        let (buf, rows, mass, gauss) = self.remove_mean(omega, window);
        let p = self.size;
        let padded = self.padded_grid();
        // Output rows: the crop plus the far circle used for the constant.
        let radius = 1.5 * self.grid.half_width();
        let (_, top) = padded.continuous_index(Complex64::new(0.0, radius));
        let (_, bottom) = padded.continuous_index(Complex64::new(0.0, -radius));
        let out_rows = (bottom.floor() as usize).min(self.offset)..((top.ceil() as usize) + 1).max(self.offset + self.grid.n());
        let out = self.apply(buf, rows, Symbol::Cauchy, out_rows.clone(), 0..p);

        let count = ((2.0 * PI * radius / self.grid.spacing()).ceil() as usize).max(256);
        let mut constant = ZERO;
        for m in 0..count {
            let z = Complex64::from_polar(radius, 2.0 * PI * m as f64 / count as f64);
            let (fx, fy) = padded.continuous_index(z);
            let (i0, j0) = (fx.floor() as usize, fy.floor() as usize);
            let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
            let at = |i: usize, j: usize| out[(j - out_rows.start) * p + i % p];
            constant += at(i0, j0) * ((1.0 - tx) * (1.0 - ty))
                + at(i0 + 1, j0) * (tx * (1.0 - ty))
                + at(i0, j0 + 1) * ((1.0 - tx) * ty)
                + at(i0 + 1, j0 + 1) * (tx * ty);
        }
        constant /= count as f64;

        let n = self.grid.n();
        let mut values = Vec::with_capacity(self.grid.len());
        for j in 0..n {
            let row = (j + self.offset - out_rows.start) * p + self.offset;
            for i in 0..n {
                let mut v = out[row + i] - constant;
                if mass != ZERO {
                    v += mass * gauss.cauchy(self.grid.point(i, j));
                }
                values.push(v);
            }
        }
        Field::from_values(self.grid, values)
    }

    /// Beurling transform of a compactly supported density, including the
    /// contribution of its mean. Only `output` is computed; the rest is 0.
    pub fn beurling_compact_within(&self, omega: &ComplexField, output: Window) -> Result<ComplexField> {
        let Some(window) = self.support_window(omega)? else {
            return Ok(Field::filled(self.grid, ZERO));
        };
        let (buf, rows, mass, gauss) = self.remove_mean(omega, window);
        let out_rows = output.j0 + self.offset..output.j1 + self.offset;
        let out_cols = output.i0 + self.offset..output.i1 + self.offset;
        let out = self.apply(buf, rows, Symbol::Beurling, out_rows, out_cols);
        let mut field = Field::filled(self.grid, ZERO);
        let width = output.i1 - output.i0;
        for j in output.j0..output.j1 {
            for i in output.i0..output.i1 {
                let mut v = out[(j - output.j0) * width + i - output.i0];
                if mass != ZERO {
                    v += mass * gauss.beurling(self.grid.point(i, j));
                }
                field.set(i, j, v);
            }
        }
        Ok(field)
    }

    /// [`Self::beurling_compact_within`] on the whole grid.
    pub fn beurling_compact(&self, omega: &ComplexField) -> Result<ComplexField> {
        self.beurling_compact_within(omega, Window::full(&self.grid))
    }
}

/// Unit-mass Gaussian `exp(−|z−c|²/s²)/(π s²)`, renormalized to unit
/// discrete mass, with the closed forms of its Cauchy and Beurling transforms.
struct Gaussian {
    center: Complex64,
    width: f64,
    norm: f64,
}

impl Gaussian {
    fn raw(&self, z: Complex64) -> f64 {
        (-(z - self.center).norm_sqr() / (self.width * self.width)).exp()
    }

    fn density(&self, z: Complex64) -> f64 {
        self.raw(z) * self.norm
    }

    /// `(1 − e^{−r²/s²}) / (π (z − c))`.
    fn cauchy(&self, z: Complex64) -> Complex64 {
        let w = z - self.center;
        let x = w.norm_sqr() / (self.width * self.width);
        if x == 0.0 {
            return ZERO;
        }
        -(-x).exp_m1() / (PI * w)
    }

    /// `(x e^{−x} − 1 + e^{−x}) / (π (z − c)²)` with `x = r²/s²`.
    fn beurling(&self, z: Complex64) -> Complex64 {
        let w = z - self.center;
        let s2 = self.width * self.width;
        let x = w.norm_sqr() / s2;
        if x < 1e-3 {
            // x e^{−x} − 1 + e^{−x} = Σ_{m≥2} (−1)^{m−1} (m−1) x^m / m!, and x²/w² = w̄²/s⁴.
            let series = -0.5 + x * (1.0 / 3.0 + x * (-1.0 / 8.0 + x * (1.0 / 30.0 + x * (-1.0 / 144.0))));
            return w.conj() * w.conj() * (series / (PI * s2 * s2));
        }
        (x * (-x).exp() + (-x).exp_m1()) / (PI * w * w)
    }
}

/// The singular integrals used by the Beltrami solver.
pub trait SingularIntegrals {
    fn grid(&self) -> &Grid;

    /// `Cω`, decaying at infinity.
    fn cauchy(&self, omega: &ComplexField) -> Result<ComplexField>;

    /// `Sω` computed on `output`; zero elsewhere.
    fn beurling_within(&self, omega: &ComplexField, output: Window) -> Result<ComplexField>;
}

impl SingularIntegrals for TransformPlan {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn cauchy(&self, omega: &ComplexField) -> Result<ComplexField> {
        self.cauchy_transform(omega)
    }

    fn beurling_within(&self, omega: &ComplexField, output: Window) -> Result<ComplexField> {
        self.beurling_compact_within(omega, output)
    }
}

/// Reference kernels by direct summation over all sample pairs (O(N⁴)),
/// excluding the self cell.
#[derive(Clone, Copy, Debug)]
pub struct DirectQuadrature {
    grid: Grid,
}

impl DirectQuadrature {
    pub fn new(grid: Grid) -> Self {
        Self { grid }
    }

    fn sum(&self, omega: &ComplexField, output: Window, kernel: impl Fn(Complex64) -> Complex64 + Sync) -> Result<ComplexField> {
        self.grid.ensure_same(omega.grid())?;
        let h2 = self.grid.spacing().powi(2);
        let sources: Vec<(Complex64, Complex64)> = omega
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != ZERO)
            .map(|(k, &v)| {
                let (i, j) = self.grid.ij(k);
                (self.grid.point(i, j), v * h2)
            })
            .collect();
        let grid = self.grid;
        let values: Vec<Complex64> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = grid.ij(k);
                if !output.contains(i, j) {
                    return ZERO;
                }
                let z = grid.point(i, j);
                sources
                    .iter()
                    .filter(|(zeta, _)| *zeta != z)
                    .map(|&(zeta, w)| w * kernel(z - zeta))
                    .sum()
            })
            .collect();
        Field::from_values(grid, values)
    }
}

impl SingularIntegrals for DirectQuadrature {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn cauchy(&self, omega: &ComplexField) -> Result<ComplexField> {
        self.sum(omega, Window::full(&self.grid), |d| 1.0 / (PI * d))
    }

    fn beurling_within(&self, omega: &ComplexField, output: Window) -> Result<ComplexField> {
        self.sum(omega, output, |d| -1.0 / (PI * d * d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(grid: Grid, sigma: f64, cutoff: f64, c: Complex64) -> (ComplexField, ComplexField, ComplexField) {
        // φ = exp(−|z−c|²/σ²): ∂φ = −(z̄−c̄)/σ² φ, ∂̄φ = −(z−c)/σ² φ.
        let phi = |z: Complex64| (-(z - c).norm_sqr() / (sigma * sigma)).exp();
        let inside = |z: Complex64| (z - c).norm() < cutoff;
        let f = Field::from_fn(grid, |z| if inside(z) { Complex64::new(phi(z), 0.0) } else { ZERO });
        let d = Field::from_fn(grid, |z| if inside(z) { -(z - c).conj() / (sigma * sigma) * phi(z) } else { ZERO });
        let db = Field::from_fn(grid, |z| if inside(z) { -(z - c) / (sigma * sigma) * phi(z) } else { ZERO });
        (f, d, db)
    }

    fn rel_err(a: &ComplexField, b: &ComplexField) -> f64 {
        let diff = a.zip_map(b, |x, y| x - y).unwrap();
        diff.l2_norm() / b.l2_norm()
    }

    #[test]
    fn zero_maps_to_zero() {
        let plan = TransformPlan::new(Grid::new(1.0, 16).unwrap());
        let z = Field::filled(*plan.grid(), ZERO);
        assert_eq!(plan.cauchy_transform(&z).unwrap(), z);
        assert_eq!(plan.beurling_transform(&z).unwrap(), z);
    }

    #[test]
    fn multipliers_have_unit_modulus() {
        let plan = TransformPlan::new(Grid::new(1.0, 16).unwrap());
        for k1 in 0..32 {
            for k2 in 0..32 {
                let m = plan.beurling_multiplier(k1, k2).norm();
                if k1 == 0 && k2 == 0 {
                    assert_eq!(m, 0.0);
                } else {
                    assert!((m - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn beurling_maps_dbar_to_d_for_gaussian() {
        let grid = Grid::new(2.0, 512).unwrap();
        let plan = TransformPlan::new(grid);
        let (_, d, db) = bump(grid, 0.3, 1.35, Complex64::new(0.1, -0.05));
        let s = plan.beurling_transform(&db).unwrap();
        let e = rel_err(&s, &d);
        assert!(e < 1e-6, "relative error {e}");
    }

    #[test]
    fn cauchy_inverts_dbar_for_gaussian() {
        let grid = Grid::new(2.0, 512).unwrap();
        let plan = TransformPlan::new(grid);
        let (phi, _, db) = bump(grid, 0.3, 1.35, Complex64::new(0.1, -0.05));
        let c = plan.cauchy_transform(&db).unwrap();
        let e = rel_err(&c, &phi);
        assert!(e < 1e-3, "relative error {e}");
    }

    #[test]
    fn cauchy_of_disk_indicator_matches_closed_form_and_direct_sum() {
        let grid = Grid::new(2.0, 128).unwrap();
        let plan = TransformPlan::new(grid);
        let disk = Field::from_fn(grid, |z| if z.norm() < 1.0 { Complex64::new(1.0, 0.0) } else { ZERO });
        let c = plan.cauchy_transform(&disk).unwrap();
        let direct = DirectQuadrature::new(grid).cauchy(&disk).unwrap();
        let (i, j) = (64, 64);
        let z = grid.point(i, j);
        assert!((c.get(i, j) - direct.get(i, j)).norm() < 1e-2);
        assert!((c.get(i, j) - z.conj()).norm() < 1e-2);
        let mut worst_in: f64 = 0.0;
        let mut worst_out: f64 = 0.0;
        for (k, z) in grid.points().enumerate() {
            let (i, j) = grid.ij(k);
            if z.norm() < 0.8 {
                worst_in = worst_in.max((c.get(i, j) - z.conj()).norm());
            } else if z.norm() > 1.2 {
                worst_out = worst_out.max((c.get(i, j) - 1.0 / z).norm());
            }
        }
        assert!(worst_in < 2e-2, "inside {worst_in}");
        assert!(worst_out < 2e-2, "outside {worst_out}");
    }

    #[test]
    fn fft_and_direct_beurling_agree_off_center_mean() {
        let grid = Grid::new(2.0, 32).unwrap();
        let plan = TransformPlan::new(grid);
        let (_, _, db) = bump(grid, 0.35, 1.2, Complex64::new(0.2, 0.1));
        // Add a nonzero mean so the zero-mode correction is exercised.
        let g = Field::from_fn(grid, |z| {
            let w = z - Complex64::new(-0.2, 0.3);
            if w.norm() < 1.0 { Complex64::new((-(w.norm_sqr()) / 0.1).exp(), 0.5) } else { ZERO }
        });
        let omega = db.zip_map(&g, |a, b| a + b).unwrap();
        let fft = plan.beurling_compact(&omega).unwrap();
        let direct = DirectQuadrature::new(grid).beurling_within(&omega, Window::full(&grid)).unwrap();
        let e = rel_err(&fft, &direct);
        assert!(e < 0.1, "relative difference {e}");
        let fft = plan.cauchy_transform(&omega).unwrap();
        let direct = DirectQuadrature::new(grid).cauchy(&omega).unwrap();
        let e = rel_err(&fft, &direct);
        assert!(e < 0.05, "relative difference {e}");
    }

    #[test]
    fn support_in_margin_is_rejected() {
        let grid = Grid::new(1.0, 16).unwrap();
        let mut f = Field::filled(grid, ZERO);
        f.set(0, 8, Complex64::new(1.0, 0.0));
        let plan = TransformPlan::new(grid);
        assert!(matches!(plan.cauchy_transform(&f), Err(Error::Wraparound { i: 0, j: 8 })));
        let plan = TransformPlan::new(grid).with_policy(WrapPolicy::Warn);
        assert!(plan.cauchy_transform(&f).is_ok());
    }
}
