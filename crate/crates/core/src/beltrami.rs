//! Normalized solutions of the Beltrami equation `f_z̄ = μ f_z` in the plane.
//!
//! For compactly supported μ with `|μ| ≤ 1 − δ`, the solution with
//! `f(z) = z + o(1)` at infinity is `f = z + Cω`, where the density ω solves
//! `ω = μ + μ·Sω`. Then `f_z̄ = ω` and `f_z = 1 + Sω`.

use num_complex::Complex64;

use crate::field::{ComplexField, Field, Grid, MuField};
use crate::transforms::{SingularIntegrals, TransformPlan, Window};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A sampled quasiconformal map with its derivative fields.
#[derive(Clone, Debug, PartialEq)]
pub struct QCMap {
    pub f: ComplexField,
    pub fz: ComplexField,
    pub fzbar: ComplexField,
    /// Density with `f = z + Cω`.
    pub omega: ComplexField,
    /// `‖f_z̄ − μ f_z‖₂ / ‖f_z‖₂` from the solver's own derivative fields.
    pub residual_l2: f64,
    pub iterations: usize,
    /// `‖ω_{n+1} − ω_n‖₂` per iteration.
    pub increments: Vec<f64>,
    /// Smallest `|f_z|² − |f_z̄|²` over the support of μ (1 without support).
    pub min_jacobian: f64,
    /// Affine fit `(a, b)` removed by [`renormalize`], if any.
    pub renormalization: Option<(Complex64, Complex64)>,
}

impl QCMap {
    /// The identity map on `grid`.
    pub fn identity(grid: Grid) -> Self {
        Self {
            f: Field::from_fn(grid, |z| z),
            fz: Field::filled(grid, ONE),
            fzbar: Field::filled(grid, ZERO),
            omega: Field::filled(grid, ZERO),
            residual_l2: 0.0,
            iterations: 0,
            increments: Vec::new(),
            min_jacobian: 1.0,
            renormalization: None,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    pub fn jacobian_positive(&self) -> bool {
        self.min_jacobian > 0.0
    }

    /// Bilinear interpolation of `f`.
    pub fn evaluate(&self, z: Complex64) -> Option<Complex64> {
        self.f.interpolate(z)
    }

    /// `|f_z|² − |f_z̄|²` per sample.
    pub fn jacobian(&self) -> crate::field::RealField {
        self.fz
            .zip_map(&self.fzbar, |a, b| a.norm_sqr() - b.norm_sqr())
            .expect("fields share a grid")
    }

    pub fn to_report(&self) -> crate::report::Report {
        let grid = self.grid();
        let mut r = crate::report::Report::new("beltrami");
        r.float("L", grid.half_width())
            .int("N", grid.n() as i128)
            .int("iterations", self.iterations as i128)
            .float("residual_l2", self.residual_l2)
            .float("min_jacobian", self.min_jacobian)
            .flag("jacobian_positive", self.jacobian_positive())
            .floats("increments", &self.increments);
        if let Some((a, b)) = self.renormalization {
            r.floats("renormalization", &[a.re, a.im, b.re, b.im]);
        }
        r
    }

    /// Beltrami residual from centered differences of `f` itself, over
    /// samples at least `band` away from the grid edge.
    pub fn fd_residual_l2(&self, mu: &MuField, band: usize) -> Result<f64> {
        self.grid().ensure_same(mu.grid())?;
        let grid = *self.grid();
        let n = grid.n();
        let band = band.max(1);
        let h = grid.spacing();
        let (mut num, mut den) = (0.0, 0.0);
        for j in band..n - band {
            for i in band..n - band {
                let fx = (self.f.get(i + 1, j) - self.f.get(i - 1, j)) / (2.0 * h);
                let fy = (self.f.get(i, j + 1) - self.f.get(i, j - 1)) / (2.0 * h);
                let fz = (fx - Complex64::i() * fy) * 0.5;
                let fzbar = (fx + Complex64::i() * fy) * 0.5;
                num += (fzbar - mu.get(i, j) * fz).norm_sqr();
                den += fz.norm_sqr();
            }
        }
        Ok((num / den).sqrt())
    }
}

/// Solves with the FFT transforms on μ's grid.
pub fn solve_normalized(mu: &MuField, tol: f64, max_iter: usize) -> Result<QCMap> {
    solve_normalized_with(mu, tol, max_iter, &TransformPlan::new(*mu.grid()))
}

/// Solves `ω = μ + μ·Sω` by Neumann iteration from `ω₀ = μ`.
pub fn solve_normalized_with(
    mu: &MuField,
    tol: f64,
    max_iter: usize,
    kernels: &dyn SingularIntegrals,
) -> Result<QCMap> {
    let grid = *mu.grid();
    grid.ensure_same(kernels.grid())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let support = mu.support();
    let Some(window) = Window::bounding(&grid, |k| support[k]) else {
        return Ok(QCMap::identity(grid));
    };
    if mu.is_zero() {
        return Ok(QCMap::identity(grid));
    }
    let h = grid.spacing();
    let muv = mu.values().values();
    let mut omega = mu.values().clone();
    let mut increments = Vec::new();
    loop {
        let s = kernels.beurling_within(&omega, window)?;
        let mut next = omega.clone();
        let mut sq = 0.0;
        for (k, v) in next.values_mut().iter_mut().enumerate() {
            if support[k] {
                let w = muv[k] * (ONE + s.values()[k]);
                sq += (w - *v).norm_sqr();
                *v = w;
            }
        }
        let inc = sq.sqrt() * h;
        increments.push(inc);
        omega = next;
        log::debug!("beltrami iteration {}: increment {inc:.3e}", increments.len());
        if inc < tol {
            break;
        }
        if increments.len() >= max_iter || !inc.is_finite() {
            return Err(Error::NotConverged {
                solver: "beltrami",
                iterations: increments.len(),
                last: inc,
            });
        }
    }
    let s = kernels.beurling_within(&omega, Window::full(&grid))?;
    let cauchy = kernels.cauchy(&omega)?;
    let f = Field::from_fn(grid, |z| z).zip_map(&cauchy, |z, c| z + c)?;
    let fz = s.map(|v| ONE + v);
    let fzbar = omega.clone();
    let (mut num, mut min_jacobian) = (0.0, f64::INFINITY);
    for k in 0..grid.len() {
        num += (fzbar.values()[k] - muv[k] * fz.values()[k]).norm_sqr();
        if support[k] {
            min_jacobian = min_jacobian.min(fz.values()[k].norm_sqr() - fzbar.values()[k].norm_sqr());
        }
    }
    let den: f64 = fz.values().iter().map(|v| v.norm_sqr()).sum();
    Ok(QCMap {
        f,
        fz,
        fzbar,
        omega,
        residual_l2: (num / den).sqrt(),
        iterations: increments.len(),
        increments,
        min_jacobian,
        renormalization: None,
    })
}

/// Result of an affine far-field fit `f ≈ a z + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineFit {
    pub a: Complex64,
    pub b: Complex64,
    pub samples: usize,
}

/// Least-squares fit of `f ≈ a z + b` over samples with
/// `|z| ∈ [radius, 1.1 radius]`.
pub fn affine_fit(map: &QCMap, radius: f64) -> Result<AffineFit> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("fit radius {radius}")));
    }
    let grid = *map.grid();
    let (mut szz, mut sz, mut n, mut szf, mut sf) = (0.0, ZERO, 0usize, ZERO, ZERO);
    for (k, z) in grid.points().enumerate() {
        let r = z.norm();
        if r >= radius && r <= 1.1 * radius {
            let f = map.f.values()[k];
            szz += z.norm_sqr();
            sz += z;
            n += 1;
            szf += z.conj() * f;
            sf += f;
        }
    }
    if n < 3 {
        return Err(Error::OutsideGrid(format!(
            "fit annulus at radius {radius} holds {n} samples"
        )));
    }
    // [Σ|z|²  Σz̄] [a]   [Σ z̄ f]
    // [Σz     n ] [b] = [Σ f  ]
    let nf = n as f64;
    let det = szz * nf - sz.norm_sqr();
    let a = (szf * nf - sz.conj() * sf) / det;
    let b = (sf * szz - sz * szf) / det;
    Ok(AffineFit { a, b, samples: n })
}

/// Returns `(f − b)/a` for the far-field fit `f ≈ a z + b`.
pub fn renormalize(map: &QCMap, fit_radius: f64) -> Result<(QCMap, AffineFit)> {
    let fit = affine_fit(map, fit_radius)?;
    if fit.a.norm() < 1e-6 {
        return Err(Error::DegenerateFit(fit.a.norm()));
    }
    let inv = 1.0 / fit.a;
    let mut out = map.clone();
    out.f = map.f.map(|f| (f - fit.b) * inv);
    out.fz = map.fz.map(|v| v * inv);
    out.fzbar = map.fzbar.map(|v| v * inv);
    out.omega = map.omega.map(|v| v * inv);
    out.min_jacobian = map.min_jacobian * inv.norm_sqr();
    out.renormalization = Some(match map.renormalization {
        Some((a0, b0)) => (a0 * fit.a, fit.a * b0 + fit.b),
        None => (fit.a, fit.b),
    });
    Ok((out, fit))
}

/// Default fit radius: 1.5 times the support radius of μ, if the fit
/// annulus still holds samples; `None` otherwise.
pub fn default_fit_radius(mu: &MuField) -> Option<f64> {
    let grid = mu.grid();
    let r = (1.5 * mu.support_radius()).max(2.0 * grid.spacing());
    (1.1 * r < grid.half_width() * std::f64::consts::SQRT_2 * 0.95).then_some(r)
}

/// Caps `|μ|` at `cap`, keeping the phase.
pub fn truncate(mu: &MuField, cap: f64) -> Result<MuField> {
    mu.map_supported(|m| {
        let r = m.norm();
        if r <= cap {
            m
        } else {
            m * (cap / r)
        }
    })
}

/// One solved level of a truncation ladder.
#[derive(Clone, Debug)]
pub struct LadderLevel {
    pub cap: f64,
    pub map: QCMap,
}

#[derive(Clone, Debug)]
pub struct LadderReport {
    pub levels: Vec<LadderLevel>,
    /// Sup distance between consecutive maps over the support window.
    pub distances: Vec<f64>,
    pub converged: bool,
    /// Consecutive distances strictly decrease.
    pub decreasing: bool,
    /// Index of the level that failed to solve, with the error message.
    pub failure: Option<(usize, String)>,
}

/// Solves the capped coefficients `μ_c` for increasing caps `c`.
pub fn truncation_ladder(mu: &MuField, caps: &[f64], tol: f64, max_iter: usize) -> Result<LadderReport> {
    if caps.is_empty() {
        return Err(Error::InvalidParameter("no caps".into()));
    }
    if caps.iter().any(|&c| !(c > 0.0 && c < 1.0)) || caps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "caps must increase strictly within (0, 1): {caps:?}"
        )));
    }
    let grid = *mu.grid();
    let support = mu.support();
    let window = Window::bounding(&grid, |k| support[k]).unwrap_or_else(|| Window::full(&grid));
    let plan = TransformPlan::new(grid);
    let mut levels: Vec<LadderLevel> = Vec::new();
    let mut distances = Vec::new();
    let mut failure = None;
    for (idx, &cap) in caps.iter().enumerate() {
        let capped = truncate(mu, cap)?;
        match solve_normalized_with(&capped, tol, max_iter, &plan) {
            Ok(map) => {
                if let Some(prev) = levels.last() {
                    let mut d: f64 = 0.0;
                    for j in window.j0..window.j1 {
                        for i in window.i0..window.i1 {
                            d = d.max((map.f.get(i, j) - prev.map.f.get(i, j)).norm());
                        }
                    }
                    distances.push(d);
                }
                levels.push(LadderLevel { cap, map });
            }
            Err(e) => {
                failure = Some((idx, e.to_string()));
                break;
            }
        }
    }
    let decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    let converged = failure.is_none() && distances.last().is_some_and(|&d| d < 10.0 * tol);
    Ok(LadderReport {
        levels,
        distances,
        converged,
        decreasing,
        failure,
    })
}

/// Spatial index over the dual quads of a map for pointwise inversion.
struct QuadIndex {
    origin: Complex64,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

impl QuadIndex {
    fn new(map: &QCMap) -> Self {
        let grid = map.grid();
        let n = grid.n();
        let f = map.f.values();
        let (mut lo, mut hi) = (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for w in f {
            lo = Complex64::new(lo.re.min(w.re), lo.im.min(w.im));
            hi = Complex64::new(hi.re.max(w.re), hi.im.max(w.im));
        }
        let cell = grid.spacing() * 2.0;
        let cols = (((hi.re - lo.re) / cell).ceil() as usize).clamp(1, 4 * n);
        let rows = (((hi.im - lo.im) / cell).ceil() as usize).clamp(1, 4 * n);
        let cell = ((hi.re - lo.re) / cols as f64).max((hi.im - lo.im) / rows as f64).max(f64::MIN_POSITIVE);
        let mut index = Self {
            origin: lo,
            cell,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
        };
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let q = [map.f.get(i, j), map.f.get(i + 1, j), map.f.get(i, j + 1), map.f.get(i + 1, j + 1)];
                let (a, b) = bbox(&q);
                let (c0, r0) = index.cell_of(a);
                let (c1, r1) = index.cell_of(b);
                for r in r0..=r1 {
                    for c in c0..=c1 {
                        index.buckets[r * index.cols + c].push((j * (n - 1) + i) as u32);
                    }
                }
            }
        }
        index
    }

    fn cell_of(&self, w: Complex64) -> (usize, usize) {
        let c = ((w.re - self.origin.re) / self.cell).floor().clamp(0.0, (self.cols - 1) as f64) as usize;
        let r = ((w.im - self.origin.im) / self.cell).floor().clamp(0.0, (self.rows - 1) as f64) as usize;
        (c, r)
    }
}

fn bbox(q: &[Complex64; 4]) -> (Complex64, Complex64) {
    let mut lo = q[0];
    let mut hi = q[0];
    for w in &q[1..] {
        lo = Complex64::new(lo.re.min(w.re), lo.im.min(w.im));
        hi = Complex64::new(hi.re.max(w.re), hi.im.max(w.im));
    }
    (lo, hi)
}

/// Solves `B(s, t) = w` for the bilinear patch through `q` by Newton's
/// method; returns `(s, t)` when it lands inside the unit square.
fn invert_bilinear(q: &[Complex64; 4], w: Complex64) -> Option<(f64, f64)> {
    let [q00, q10, q01, q11] = *q;
    let eval = |s: f64, t: f64| q00 * ((1.0 - s) * (1.0 - t)) + q10 * (s * (1.0 - t)) + q01 * ((1.0 - s) * t) + q11 * (s * t);
    let (mut s, mut t) = (0.5, 0.5);
    for _ in 0..30 {
        let r = eval(s, t) - w;
        let ds = (q10 - q00) * (1.0 - t) + (q11 - q01) * t;
        let dt = (q01 - q00) * (1.0 - s) + (q11 - q10) * s;
        let det = ds.re * dt.im - ds.im * dt.re;
        if det.abs() < 1e-300 {
            return None;
        }
        let step_s = (r.re * dt.im - r.im * dt.re) / det;
        let step_t = (ds.re * r.im - ds.im * r.re) / det;
        s -= step_s;
        t -= step_t;
        if step_s.abs() + step_t.abs() < 1e-14 {
            break;
        }
    }
    let tol = 1e-9;
    let scale = (q10 - q00).norm() + (q01 - q00).norm();
    if s >= -tol && s <= 1.0 + tol && t >= -tol && t <= 1.0 + tol && (eval(s, t) - w).norm() <= 1e-9 * scale.max(1e-300) {
        Some((s.clamp(0.0, 1.0), t.clamp(0.0, 1.0)))
    } else {
        None
    }
}

/// Pointwise inverse of the bilinear interpolant of `map.f`. `None` marks
/// points outside the image of the sample hull. Among several containing
/// quads the one with the smallest index wins.
pub fn invert_on(map: &QCMap, points: &[Complex64]) -> Vec<Option<Complex64>> {
    let index = QuadIndex::new(map);
    let grid = *map.grid();
    let n = grid.n();
    let h = grid.spacing();
    points
        .iter()
        .map(|&w| {
            if !(w.re.is_finite() && w.im.is_finite()) {
                return None;
            }
            let (c, r) = index.cell_of(w);
            let inside = w.re >= index.origin.re
                && w.im >= index.origin.im
                && w.re <= index.origin.re + index.cell * index.cols as f64
                && w.im <= index.origin.im + index.cell * index.rows as f64;
            if !inside {
                return None;
            }
            let mut candidates = index.buckets[r * index.cols + c].clone();
            candidates.sort_unstable();
            for quad in candidates {
                let (i, j) = (quad as usize % (n - 1), quad as usize / (n - 1));
                let q = [map.f.get(i, j), map.f.get(i + 1, j), map.f.get(i, j + 1), map.f.get(i + 1, j + 1)];
                let (lo, hi) = bbox(&q);
                let pad = 1e-12 * (1.0 + w.norm());
                if w.re < lo.re - pad || w.re > hi.re + pad || w.im < lo.im - pad || w.im > hi.im + pad {
                    continue;
                }
                if let Some((s, t)) = invert_bilinear(&q, w) {
                    return Some(grid.point(i, j) + Complex64::new(s * h, t * h));
                }
            }
            None
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial(grid: Grid) -> MuField {
        MuField::from_fn(grid, |z| z / z.conj() / 3.0, |z| z.norm() < 1.0).unwrap()
    }

    #[test]
    fn zero_mu_gives_identity() {
        let grid = Grid::new(2.0, 64).unwrap();
        let map = solve_normalized(&MuField::zero(grid), 1e-10, 10).unwrap();
        assert_eq!(map.iterations, 0);
        assert!(map.f.values().iter().zip(grid.points()).all(|(f, z)| *f == z));
    }

    #[test]
    fn radial_stretch_is_close_at_moderate_resolution() {
        let grid = Grid::new(2.0, 256).unwrap();
        let map = solve_normalized(&radial(grid), 1e-10, 200).unwrap();
        let err = grid
            .points()
            .zip(map.f.values())
            .map(|(z, f)| {
                let exact = if z.norm() < 1.0 { z * z.norm() } else { z };
                (f - exact).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-2, "sup error {err}");
        assert!(map.jacobian_positive());
    }

    #[test]
    fn increments_decrease_for_small_mu() {
        let grid = Grid::new(2.0, 64).unwrap();
        let mu = MuField::from_fn(
            grid,
            |z| Complex64::new(0.4, 0.2) * (-(4.0 * z.norm_sqr())).exp() * (1.0 + z),
            |z| z.norm() < 1.2,
        )
        .unwrap();
        let map = solve_normalized(&mu, 1e-12, 200).unwrap();
        assert!(map.increments.windows(2).all(|w| w[1] < w[0]));
        assert!(map.residual_l2 < 1e-10);
    }

    #[test]
    fn max_iter_exhaustion_is_reported() {
        let grid = Grid::new(2.0, 32).unwrap();
        let err = solve_normalized(&radial(grid), 1e-14, 2).unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 2, .. }));
    }

    #[test]
    fn renormalize_inverts_affine_maps() {
        let grid = Grid::new(2.0, 32).unwrap();
        let mut map = QCMap::identity(grid);
        let (same, fit) = renormalize(&map, 1.0).unwrap();
        assert!((fit.a - ONE).norm() < 1e-14 && fit.b.norm() < 1e-14);
        assert!(same.f.zip_map(&map.f, |a, b| (a - b).norm()).unwrap().max_abs() < 1e-14);
        map.f = map.f.map(|z| 2.0 * z + 3.0);
        let (back, _) = renormalize(&map, 1.0).unwrap();
        for (w, z) in back.f.values().iter().zip(grid.points()) {
            assert!((w - z).norm() < 1e-13);
        }
        map.f = map.f.map(|_| Complex64::new(1.0, 1.0));
        assert!(matches!(renormalize(&map, 1.0), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn inversion_of_identity_and_outside_points() {
        let grid = Grid::new(1.0, 16).unwrap();
        let map = QCMap::identity(grid);
        let w = [Complex64::new(0.123, -0.456), Complex64::new(5.0, 0.0)];
        let z = invert_on(&map, &w);
        assert!((z[0].unwrap() - w[0]).norm() < 1e-12);
        assert!(z[1].is_none());
    }

    #[test]
    fn inversion_of_radial_stretch() {
        let grid = Grid::new(2.0, 256).unwrap();
        let mut map = QCMap::identity(grid);
        map.f = Field::from_fn(grid, |z| if z.norm() < 1.0 { z * z.norm() } else { z });
        let z = invert_on(&map, &[Complex64::new(0.25, 0.0)])[0].unwrap();
        assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-3, "{z}");
    }

    #[test]
    fn caps_must_increase() {
        let grid = Grid::new(2.0, 16).unwrap();
        assert!(truncation_ladder(&MuField::zero(grid), &[0.5, 0.5], 1e-8, 10).is_err());
        assert!(truncation_ladder(&MuField::zero(grid), &[0.5, 1.0], 1e-8, 10).is_err());
    }
}
