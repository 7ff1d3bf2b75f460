use std::f64::consts::PI;

use num_complex::Complex64;

use super::Grid;
use crate::{Error, Result};

/// A closed polyline; the last vertex connects back to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    vertices: Vec<Complex64>,
}

/// Where a segment query hit a boundary component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryHit {
    pub component: usize,
    pub segment: usize,
    /// Parameter along the boundary segment, in `[0, 1]`.
    pub s: f64,
    pub point: Complex64,
    /// Distance from the query origin.
    pub distance: f64,
}

impl Polyline {
    pub fn new(vertices: Vec<Complex64>) -> Result<Self> {
        let p = Self::new_unchecked(vertices)?;
        if !p.is_simple() {
            return Err(Error::Topology("polyline self-intersects".into()));
        }
        Ok(p)
    }

    /// Builds a polyline without the O(n²) simplicity check.
    pub fn new_unchecked(vertices: Vec<Complex64>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain(format!(
                "a closed polyline needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidDomain("non-finite polyline vertex".into()));
        }
        Ok(Self { vertices })
    }

    /// Counterclockwise regular `m`-gon inscribed in the circle `|z - c| = r`.
    pub fn circle(center: Complex64, radius: f64, m: usize) -> Result<Self> {
        if !(radius > 0.0) || m < 3 {
            return Err(Error::InvalidDomain(format!("circle radius {radius}, {m} vertices")));
        }
        let vertices = (0..m)
            .map(|k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / m as f64))
            .collect();
        Self::new_unchecked(vertices)
    }

    /// Counterclockwise axis-aligned rectangle.
    pub fn rectangle(lower_left: Complex64, upper_right: Complex64) -> Result<Self> {
        let (a, b) = (lower_left, upper_right);
        Self::new(vec![
            a,
            Complex64::new(b.re, a.im),
            b,
            Complex64::new(a.re, b.im),
        ])
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Segment `k` runs from vertex `k` to vertex `k + 1` (cyclically).
    pub fn segment(&self, k: usize) -> (Complex64, Complex64) {
        let n = self.vertices.len();
        (self.vertices[k], self.vertices[(k + 1) % n])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        (0..self.vertices.len()).map(move |k| self.segment(k))
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (k, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[k + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self
            .segments()
            .map(|(a, b)| a.re * b.im - b.re * a.im)
            .sum::<f64>()
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, z: Complex64) -> bool {
        let mut inside = false;
        for (a, b) in self.segments() {
            if (a.im > z.im) != (b.im > z.im) {
                let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
                if z.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True when no two non-adjacent segments intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = self.segment(i);
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = self.segment(j);
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Closest point on the polyline: `(segment, s, point, distance)`.
    pub fn nearest(&self, z: Complex64) -> (usize, f64, Complex64, f64) {
        let mut best = (0, 0.0, self.vertices[0], f64::INFINITY);
        for (k, (a, b)) in self.segments().enumerate() {
            let ab = b - a;
            let len2 = ab.norm_sqr();
            let s = if len2 > 0.0 {
                (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let p = a + ab * s;
            let d = (z - p).norm();
            if d < best.3 {
                best = (k, s, p, d);
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new_unchecked(self.vertices.iter().map(|&v| f(v)).collect())
    }
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

pub(crate) fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Parameters `(t, s)` of the intersection of `p + t(q - p)` with
/// `a + s(b - a)`, if both lie in `[0, 1]`.
fn segment_intersection(p: Complex64, q: Complex64, a: Complex64, b: Complex64) -> Option<(f64, f64)> {
    let r = q - p;
    let e = b - a;
    let denom = r.re * e.im - r.im * e.re;
    if denom == 0.0 {
        return None;
    }
    let w = a - p;
    let t = (w.re * e.im - w.im * e.re) / denom;
    let s = (w.re * r.im - w.im * r.re) / denom;
    let tol = 1e-12;
    if t >= -tol && t <= 1.0 + tol && s >= -tol && s <= 1.0 + tol {
        Some((t.clamp(0.0, 1.0), s.clamp(0.0, 1.0)))
    } else {
        None
    }
}

/// A bounded domain: the samples inside it plus its boundary polylines.
///
/// Membership follows the even-odd rule over all components, so holes are
/// simply components nested inside another one.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    grid: Grid,
    mask: Vec<bool>,
    components: Vec<Polyline>,
    holes: Vec<bool>,
    buckets: Vec<Vec<(u32, u32)>>,
}

impl PartialEq for DomainSpec {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.mask == other.mask && self.components == other.components
    }
}

impl DomainSpec {
    pub fn from_components(grid: Grid, components: Vec<Polyline>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDomain("no boundary components".into()));
        }
        for (c, p) in components.iter().enumerate() {
            if !(p.diameter() > 0.0) {
                return Err(Error::InvalidDomain(format!("boundary component {c} has zero diameter")));
            }
            if !p.is_simple() {
                return Err(Error::Topology(format!("boundary component {c} self-intersects")));
            }
        }
        for a in 0..components.len() {
            for b in a + 1..components.len() {
                for (p, q) in components[a].segments() {
                    for (r, s) in components[b].segments() {
                        if segments_intersect(p, q, r, s) {
                            return Err(Error::Topology(format!(
                                "boundary components {a} and {b} intersect"
                            )));
                        }
                    }
                }
            }
        }
        let mask = scanline_mask(&grid, &components);
        if !mask.iter().any(|&m| m) {
            return Err(Error::InvalidDomain("domain contains no samples".into()));
        }
        let n = grid.n();
        for k in 0..n {
            for (i, j) in [(k, 0), (k, n - 1), (0, k), (n - 1, k)] {
                if mask[grid.index(i, j)] {
                    return Err(Error::InvalidDomain("domain touches the grid edge".into()));
                }
            }
        }
        let holes = (0..components.len())
            .map(|c| {
                let v = components[c].vertices()[0];
                let depth = components
                    .iter()
                    .enumerate()
                    .filter(|&(o, p)| o != c && p.contains(v))
                    .count();
                depth % 2 == 1
            })
            .collect();
        let buckets = bucket_segments(&grid, &components);
        Ok(Self {
            grid,
            mask,
            components,
            holes,
            buckets,
        })
    }

    pub fn disk(grid: Grid, center: Complex64, radius: f64, vertices: usize) -> Result<Self> {
        Self::from_components(grid, vec![Polyline::circle(center, radius, vertices)?])
    }

    pub fn annulus(grid: Grid, center: Complex64, inner: f64, outer: f64, vertices: usize) -> Result<Self> {
        if !(inner < outer) {
            return Err(Error::InvalidDomain(format!("annulus radii {inner} >= {outer}")));
        }
        Self::from_components(
            grid,
            vec![
                Polyline::circle(center, outer, vertices)?,
                Polyline::circle(center, inner, vertices)?,
            ],
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn contains_sample(&self, i: usize, j: usize) -> bool {
        self.mask[self.grid.index(i, j)]
    }

    pub fn components(&self) -> &[Polyline] {
        &self.components
    }

    /// True when component `c` bounds a hole (the domain lies outside it).
    pub fn is_hole(&self, c: usize) -> bool {
        self.holes[c]
    }

    pub fn hole_indices(&self) -> Vec<usize> {
        (0..self.components.len()).filter(|&c| self.holes[c]).collect()
    }

    /// Even-odd membership of an arbitrary point.
    pub fn contains_point(&self, z: Complex64) -> bool {
        self.components.iter().filter(|p| p.contains(z)).count() % 2 == 1
    }

    pub fn sample_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Smallest component diameter and its index.
    pub fn min_component_diameter(&self) -> (usize, f64) {
        self.components
            .iter()
            .enumerate()
            .map(|(c, p)| (c, p.diameter()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    /// Refuses components whose diameter is below `2h`.
    pub fn check_resolved(&self) -> Result<()> {
        let limit = 2.0 * self.grid.spacing();
        let (component, diameter) = self.min_component_diameter();
        if diameter < limit {
            return Err(Error::DegenerateBoundary {
                component,
                diameter,
                limit,
            });
        }
        Ok(())
    }

    /// Nearest crossing of the segment `p → q` with the boundary, where
    /// `p` and `q` are centers of neighboring samples.
    pub fn first_crossing(&self, p: Complex64, q: Complex64) -> Option<BoundaryHit> {
        let mut best: Option<BoundaryHit> = None;
        let mut consider = |cell: Option<(usize, usize)>| {
            let Some((i, j)) = cell else { return };
            for &(c, s) in &self.buckets[self.grid.index(i, j)] {
                let (a, b) = self.components[c as usize].segment(s as usize);
                if let Some((t, sp)) = segment_intersection(p, q, a, b) {
                    let distance = t * (q - p).norm();
                    if best.map_or(true, |h| distance < h.distance) {
                        best = Some(BoundaryHit {
                            component: c as usize,
                            segment: s as usize,
                            s: sp,
                            point: a + (b - a) * sp,
                            distance,
                        });
                    }
                }
            }
        };
        consider(self.grid.cell_of(p));
        consider(self.grid.cell_of(q));
        best
    }

    /// Closest boundary point to `z` over all components.
    pub fn nearest_boundary(&self, z: Complex64) -> BoundaryHit {
        let mut best = BoundaryHit {
            component: 0,
            segment: 0,
            s: 0.0,
            point: z,
            distance: f64::INFINITY,
        };
        for (c, p) in self.components.iter().enumerate() {
            let (segment, s, point, distance) = p.nearest(z);
            if distance < best.distance {
                best = BoundaryHit {
                    component: c,
                    segment,
                    s,
                    point,
                    distance,
                };
            }
        }
        best
    }

    /// Index bounding box `(i_min, i_max, j_min, j_max)` of the mask.
    pub fn mask_bounds(&self) -> (usize, usize, usize, usize) {
        let n = self.grid.n();
        let mut b = (n, 0, n, 0);
        for (k, &m) in self.mask.iter().enumerate() {
            if m {
                let (i, j) = self.grid.ij(k);
                b.0 = b.0.min(i);
                b.1 = b.1.max(i);
                b.2 = b.2.min(j);
                b.3 = b.3.max(j);
            }
        }
        b
    }

    /// The mask sample nearest to the centroid of the mask.
    pub fn central_sample(&self) -> (usize, usize) {
        let (mut sx, mut sy, mut count) = (0.0, 0.0, 0.0);
        for (k, &m) in self.mask.iter().enumerate() {
            if m {
                let (i, j) = self.grid.ij(k);
                sx += i as f64;
                sy += j as f64;
                count += 1.0;
            }
        }
        let (cx, cy) = (sx / count, sy / count);
        let mut best = (0, 0);
        let mut best_d = f64::INFINITY;
        for (k, &m) in self.mask.iter().enumerate() {
            if m {
                let (i, j) = self.grid.ij(k);
                let d = (i as f64 - cx).powi(2) + (j as f64 - cy).powi(2);
                if d < best_d {
                    best_d = d;
                    best = (i, j);
                }
            }
        }
        best
    }
}

/// Even-odd fill by horizontal scanlines through the sample rows.
fn scanline_mask(grid: &Grid, components: &[Polyline]) -> Vec<bool> {
    let n = grid.n();
    let mut mask = vec![false; grid.len()];
    let mut crossings = Vec::new();
    for j in 0..n {
        let y = grid.coord(j);
        crossings.clear();
        for p in components {
            for (a, b) in p.segments() {
                if (a.im > y) != (b.im > y) {
                    crossings.push(a.re + (y - a.im) * (b.re - a.re) / (b.im - a.im));
                }
            }
        }
        crossings.sort_by(|a, b| a.total_cmp(b));
        for pair in crossings.chunks_exact(2) {
            for i in 0..n {
                let x = grid.coord(i);
                if x > pair[0] && x < pair[1] {
                    mask[grid.index(i, j)] = true;
                }
            }
        }
    }
    mask
}

/// Segments listed per grid cell overlapping their bounding box.
fn bucket_segments(grid: &Grid, components: &[Polyline]) -> Vec<Vec<(u32, u32)>> {
    let n = grid.n() as isize;
    let h = grid.spacing();
    let l = grid.half_width();
    let mut buckets = vec![Vec::new(); grid.len()];
    let to_cell = |v: f64| ((v + l) / h).floor() as isize;
    for (c, p) in components.iter().enumerate() {
        for (s, (a, b)) in p.segments().enumerate() {
            let pad = 1e-9 * h;
            let i0 = to_cell(a.re.min(b.re) - pad).max(0);
            let i1 = to_cell(a.re.max(b.re) + pad).min(n - 1);
            let j0 = to_cell(a.im.min(b.im) - pad).max(0);
            let j1 = to_cell(a.im.max(b.im) + pad).min(n - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[grid.index(i as usize, j as usize)].push((c as u32, s as u32));
                }
            }
        }
    }
    buckets
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_mask_area_matches_pi() {
        let grid = Grid::new(2.0, 256).unwrap();
        let d = DomainSpec::disk(grid, Complex64::new(0.0, 0.0), 1.0, 2048).unwrap();
        let h = grid.spacing();
        let area = d.sample_count() as f64 * h * h;
        assert!((area - PI).abs() / PI < 0.02, "area {area}");
    }

    #[test]
    fn annulus_inner_circle_is_a_hole() {
        let grid = Grid::new(1.5, 64).unwrap();
        let d = DomainSpec::annulus(grid, Complex64::new(0.0, 0.0), 0.3, 1.0, 256).unwrap();
        assert!(!d.is_hole(0));
        assert!(d.is_hole(1));
        assert!(!d.contains_point(Complex64::new(0.0, 0.0)));
        assert!(d.contains_point(Complex64::new(0.5, 0.0)));
    }

    #[test]
    fn crossings_are_found_between_neighbors() {
        let grid = Grid::new(2.0, 64).unwrap();
        let d = DomainSpec::disk(grid, Complex64::new(0.0, 0.0), 1.0, 512).unwrap();
        let p = Complex64::new(0.96875 + 0.03125 - 0.0625, 0.03125);
        let q = p + Complex64::new(0.0625, 0.0);
        let hit = d.first_crossing(p, q).unwrap();
        assert!((hit.point.norm() - 1.0).abs() < 1e-4);
        assert!(hit.distance > 0.0 && hit.distance < 0.0625);
    }

    #[test]
    fn rejects_domains_touching_the_edge_and_self_intersections() {
        let grid = Grid::new(1.0, 16).unwrap();
        assert!(DomainSpec::disk(grid, Complex64::new(0.0, 0.0), 1.2, 64).is_err());
        let bowtie = Polyline::new(vec![
            Complex64::new(-0.5, -0.5),
            Complex64::new(0.5, 0.5),
            Complex64::new(0.5, -0.5),
            Complex64::new(-0.5, 0.5),
        ]);
        assert!(bowtie.is_err());
    }
}
