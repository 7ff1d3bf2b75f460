use num_complex::Complex64;
use std::collections::VecDeque;

use crate::conductivity::Mat2;
use crate::field::{DomainSpec, Grid, MatrixField, RealField};
use crate::{Error, Result};

use super::harmonic::DIRS;

fn neighbor(grid: &Grid, k: usize, (di, dj): (isize, isize)) -> Option<usize> {
    let (i, j) = grid.ij(k);
    let (a, b) = (i as isize + di, j as isize + dj);
    let n = grid.n() as isize;
    (a >= 0 && b >= 0 && a < n && b < n).then(|| grid.index(a as usize, b as usize))
}

/// Derivative of `u` along one axis at sample `k`: centered when both
/// neighbors lie in `mask`, one-sided otherwise, 0 when isolated.
fn axis_derivative(u: &RealField, mask: &[bool], k: usize, axis: usize) -> f64 {
    let grid = u.grid();
    let h = grid.spacing();
    let v = u.values();
    let inside = |q: Option<usize>| q.filter(|&q| mask[q]);
    let plus = inside(neighbor(grid, k, DIRS[2 * axis]));
    let minus = inside(neighbor(grid, k, DIRS[2 * axis + 1]));
    match (plus, minus) {
        (Some(p), Some(m)) => (v[p] - v[m]) / (2.0 * h),
        (Some(p), None) => (v[p] - v[k]) / h,
        (None, Some(m)) => (v[k] - v[m]) / h,
        (None, None) => 0.0,
    }
}

/// `∇u` on the mask by centered differences with one-sided fallback at the
/// mask edge; `(0, 0)` off the mask.
pub fn gradient(u: &RealField, mask: &[bool]) -> Vec<(f64, f64)> {
    (0..u.grid().len())
        .map(|k| {
            if mask[k] {
                (axis_derivative(u, mask, k, 0), axis_derivative(u, mask, k, 1))
            } else {
                (0.0, 0.0)
            }
        })
        .collect()
}

/// Integrates the vector field `g` along a breadth-first spanning tree of
/// each connected piece of the mask, by the trapezoid rule on each edge.
/// The piece containing `basepoint` starts from 0 there; other pieces start
/// from 0 at their first sample. Off-mask samples within two cells take
/// the mean of their mask neighbors.
pub fn path_integrate(d: &DomainSpec, basepoint: Complex64, g: &[(f64, f64)]) -> Result<RealField> {
    let grid = *d.grid();
    let mask = d.mask();
    let start = grid
        .cell_of(basepoint)
        .map(|(i, j)| grid.index(i, j))
        .filter(|&k| mask[k])
        .ok_or_else(|| Error::InvalidParameter(format!("basepoint {basepoint} is outside the domain")))?;
    let h = grid.spacing();
    let mut v = vec![0.0; grid.len()];
    let mut seen = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    let seeds = std::iter::once(start).chain(0..grid.len());
    for seed in seeds {
        if !mask[seed] || seen[seed] {
            continue;
        }
        seen[seed] = true;
        queue.push_back(seed);
        while let Some(k) = queue.pop_front() {
            for (s, &dir) in DIRS.iter().enumerate() {
                let Some(q) = neighbor(&grid, k, dir) else { continue };
                if !mask[q] || seen[q] {
                    continue;
                }
                let axis = s / 2;
                let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                let comp = |p: usize| if axis == 0 { g[p].0 } else { g[p].1 };
                v[q] = v[k] + sign * h * 0.5 * (comp(k) + comp(q));
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }
    extend_by_neighbors(&grid, mask, &mut v);
    RealField::from_values(grid, v)
}

fn extend_by_neighbors(grid: &Grid, mask: &[bool], v: &mut [f64]) {
    let mut known: Vec<bool> = mask.to_vec();
    for _ in 0..2 {
        let mut updates = Vec::new();
        for k in 0..grid.len() {
            if known[k] {
                continue;
            }
            let (mut sum, mut count) = (0.0, 0);
            for dj in -1..=1 {
                for di in -1..=1 {
                    if let Some(q) = neighbor(grid, k, (di, dj)) {
                        if known[q] {
                            sum += v[q];
                            count += 1;
                        }
                    }
                }
            }
            if count > 0 {
                updates.push((k, sum / count as f64));
            }
        }
        for (k, val) in updates {
            v[k] = val;
            known[k] = true;
        }
    }
}

/// Samples inside the hole components `holes`, dilated `dilation` times in
/// the 8-neighborhood.
fn dilated_holes(d: &DomainSpec, holes: &[usize], dilation: usize) -> Vec<bool> {
    let grid = *d.grid();
    let mut set = vec![false; grid.len()];
    for &c in holes {
        let poly = &d.components()[c];
        let mut any = false;
        for k in 0..grid.len() {
            let (i, j) = grid.ij(k);
            if !d.mask()[k] && poly.contains(grid.point(i, j)) {
                set[k] = true;
                any = true;
            }
        }
        if !any {
            if let Some((i, j)) = grid.cell_of(poly.vertices()[0]) {
                set[grid.index(i, j)] = true;
            }
        }
    }
    for _ in 0..dilation {
        let mut next = set.clone();
        for k in 0..grid.len() {
            if set[k] {
                for dj in -1..=1 {
                    for di in -1..=1 {
                        if let Some(q) = neighbor(&grid, k, (di, dj)) {
                            next[q] = true;
                        }
                    }
                }
            }
        }
        set = next;
    }
    set
}

/// Outward flux `Σ h·(A∇u)·n` across the edges between `inside` and its
/// complement, evaluated at edge midpoints. `None` if an edge leaves the mask.
fn loop_flux(u: &RealField, a: Option<&MatrixField>, mask: &[bool], inside: &[bool]) -> Option<f64> {
    let grid = *u.grid();
    let h = grid.spacing();
    let v = u.values();
    let mut flux = 0.0;
    for k in 0..grid.len() {
        if !inside[k] {
            continue;
        }
        for (s, &dir) in DIRS.iter().enumerate() {
            let q = neighbor(&grid, k, dir)?;
            if inside[q] {
                continue;
            }
            if !mask[k] || !mask[q] {
                return None;
            }
            let axis = s / 2;
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            let along = sign * (v[q] - v[k]) / h;
            let other = 1 - axis;
            let tangential = 0.5 * (axis_derivative(u, mask, k, other) + axis_derivative(u, mask, q, other));
            let (gx, gy) = if axis == 0 { (along, tangential) } else { (tangential, along) };
            let (wx, wy) = match a {
                Some(a) => (a.values()[k] + a.values()[q]).apply((gx, gy)),
                None => (2.0 * gx, 2.0 * gy),
            };
            let (nx, ny) = if axis == 0 { (sign, 0.0) } else { (0.0, sign) };
            flux += 0.5 * h * (wx * nx + wy * ny);
        }
    }
    Some(flux)
}

/// Flux of `A∇u` (or `∇u`) around the union of the given holes: the period
/// of the conjugate (stream) function along a loop enclosing exactly them.
pub fn period_around_with(
    u: &RealField,
    a: Option<&MatrixField>,
    d: &DomainSpec,
    holes: &[usize],
    dilation: usize,
) -> Result<f64> {
    u.grid().ensure_same(d.grid())?;
    if let Some(&c) = holes.iter().find(|&&c| c >= d.components().len() || !d.is_hole(c)) {
        return Err(Error::InvalidParameter(format!("component {c} is not a hole")));
    }
    let inside = dilated_holes(d, holes, dilation);
    loop_flux(u, a, d.mask(), &inside)
        .ok_or_else(|| Error::Resolution(format!("dilation {dilation} around holes {holes:?} leaves the domain")))
}

pub fn period_around(u: &RealField, d: &DomainSpec, holes: &[usize], dilation: usize) -> Result<f64> {
    period_around_with(u, None, d, holes, dilation)
}

/// Period around each hole, on the first loop (dilation 2, then 1, 3, 4, …)
/// that stays in the domain.
pub(crate) fn hole_periods(u: &RealField, a: Option<&MatrixField>, d: &DomainSpec) -> Result<Vec<f64>> {
    d.hole_indices()
        .into_iter()
        .map(|c| {
            for dilation in [2, 1, 3, 4, 5, 6, 8] {
                if let Ok(p) = period_around_with(u, a, d, &[c], dilation) {
                    return Ok(p);
                }
            }
            Err(Error::Resolution(format!("no closed loop of samples around hole {c}")))
        })
        .collect()
}

/// Harmonic conjugate `v` of `u` from the discrete Cauchy–Riemann
/// increments `v_x = −u_y`, `v_y = u_x`, plus one period per hole.
pub fn conjugate_with_periods(u: &RealField, d: &DomainSpec, basepoint: Complex64) -> Result<(RealField, Vec<f64>)> {
    u.grid().ensure_same(d.grid())?;
    let g: Vec<(f64, f64)> = gradient(u, d.mask()).into_iter().map(|(ux, uy)| (-uy, ux)).collect();
    let v = path_integrate(d, basepoint, &g)?;
    Ok((v, hole_periods(u, None, d)?))
}

/// Stream-function increments `J·A·∇u`, with `J(x, y) = (−y, x)`.
pub(crate) fn rotated_flux(u: &RealField, a: &MatrixField, mask: &[bool]) -> Vec<(f64, f64)> {
    gradient(u, mask)
        .into_iter()
        .zip(a.values())
        .map(|(g, m): ((f64, f64), &Mat2)| {
            let (wx, wy) = m.apply(g);
            (-wy, wx)
        })
        .collect()
}
