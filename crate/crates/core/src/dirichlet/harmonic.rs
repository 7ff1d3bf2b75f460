use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::{BoundaryData, DomainSpec, RealField};
use crate::{Error, Result};

/// One row of the Shortley–Weller system in fixed-point form
/// `u_P = Σ coef·u_nbr + rhs`.
#[derive(Clone, Copy, Debug)]
struct Row {
    cell: u32,
    nbr: [u32; 4],
    coef: [f64; 4],
    rhs: f64,
}

/// A neighbor arm of a mask sample: another sample, or a boundary crossing
/// at `theta·h` carrying `value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Arm {
    Sample(usize),
    Wall { theta: f64, value: f64 },
}

/// Directions in the order east, west, north, south.
pub(crate) const DIRS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Arms of every mask sample, in mask-index order.
pub(crate) fn arms(d: &DomainSpec, phi: &BoundaryData) -> Vec<(usize, [Arm; 4])> {
    let grid = *d.grid();
    let h = grid.spacing();
    let n = grid.n();
    let mut out = Vec::with_capacity(d.sample_count());
    for k in 0..grid.len() {
        if !d.mask()[k] {
            continue;
        }
        let (i, j) = grid.ij(k);
        let p = grid.point(i, j);
        let mut a = [Arm::Sample(k); 4];
        for (slot, &(di, dj)) in DIRS.iter().enumerate() {
            let (qi, qj) = ((i as isize + di) as usize, (j as isize + dj) as usize);
            debug_assert!(qi < n && qj < n);
            let q = grid.point(qi, qj);
            let qk = grid.index(qi, qj);
            a[slot] = match d.first_crossing(p, q) {
                Some(hit) => Arm::Wall {
                    theta: hit.distance / h,
                    value: phi.value_on_segment(hit.component, hit.segment, hit.s),
                },
                None if d.mask()[qk] => Arm::Sample(qk),
                None => {
                    let hit = d.nearest_boundary(q);
                    Arm::Wall {
                        theta: 1.0,
                        value: phi.value_on_segment(hit.component, hit.segment, hit.s),
                    }
                }
            };
        }
        out.push((k, a));
    }
    out
}

fn rows(arms: &[(usize, [Arm; 4])]) -> Vec<Row> {
    arms.iter()
        .map(|&(k, a)| {
            let theta = |arm: Arm| match arm {
                Arm::Sample(_) => 1.0,
                Arm::Wall { theta, .. } => theta,
            };
            let mut row = Row {
                cell: k as u32,
                nbr: [k as u32; 4],
                coef: [0.0; 4],
                rhs: 0.0,
            };
            // A crossing through the sample itself pins it.
            if let Some(v) = a.iter().find_map(|&arm| match arm {
                Arm::Wall { theta, value } if theta < 1e-9 => Some(value),
                _ => None,
            }) {
                row.rhs = v;
                return row;
            }
            let mut w = [0.0; 4];
            for axis in 0..2 {
                let (p, m) = (theta(a[2 * axis]), theta(a[2 * axis + 1]));
                w[2 * axis] = 2.0 / (p * (p + m));
                w[2 * axis + 1] = 2.0 / (m * (p + m));
            }
            let total: f64 = w.iter().sum();
            for s in 0..4 {
                match a[s] {
                    Arm::Sample(q) => {
                        row.nbr[s] = q as u32;
                        row.coef[s] = w[s] / total;
                    }
                    Arm::Wall { value, .. } => row.rhs += w[s] / total * value,
                }
            }
            row
        })
        .collect()
}

/// Iteration controls for [`harmonic_dirichlet_with`].
#[derive(Clone, Copy, Debug)]
pub struct HarmonicOptions {
    /// Stop when the largest Gauss–Seidel correction falls below
    /// `tol · max(1, max|φ|)`.
    pub tol: f64,
    /// Defaults to `50 ×` the mask extent in cells when `None`.
    pub max_iter: Option<usize>,
}

impl Default for HarmonicOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HarmonicSolution {
    /// The solution on the mask; off the mask, samples within two cells of
    /// it carry a local linear extension through the boundary data and all
    /// others are 0.
    pub u: RealField,
    pub iterations: usize,
    pub last_correction: f64,
}

/// Shortley–Weller solve of `Δu = 0` on `d` with `u = φ` on the boundary.
pub fn harmonic_dirichlet(d: &DomainSpec, phi: &BoundaryData, tol: f64) -> Result<RealField> {
    Ok(harmonic_dirichlet_with(d, phi, &HarmonicOptions { tol, max_iter: None })?.u)
}

pub fn harmonic_dirichlet_with(d: &DomainSpec, phi: &BoundaryData, options: &HarmonicOptions) -> Result<HarmonicSolution> {
    if !(options.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", options.tol)));
    }
    d.check_resolved()?;
    phi.check_matches(d)?;
    let grid = *d.grid();
    let arms = arms(d, phi);
    check_reachable(d, &arms)?;
    let rows = rows(&arms);

    let (i0, i1, j0, j1) = d.mask_bounds();
    let extent = (i1 - i0).max(j1 - j0) + 1;
    let max_iter = options.max_iter.unwrap_or(50 * extent + 100);
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / extent as f64).sin());
    let scale = phi.max().abs().max(phi.min().abs()).max(1.0);
    let threshold = options.tol * scale;

    let mean = {
        let all: Vec<f64> = phi.components().iter().flatten().map(|&(_, v)| v).collect();
        all.iter().sum::<f64>() / all.len() as f64
    };
    let mut u = vec![0.0; grid.len()];
    for r in &rows {
        u[r.cell as usize] = mean;
    }
    let colors: [Vec<Row>; 2] = {
        let mut red = Vec::new();
        let mut black = Vec::new();
        for r in &rows {
            let (i, j) = grid.ij(r.cell as usize);
            if (i + j) % 2 == 0 {
                red.push(*r);
            } else {
                black.push(*r);
            }
        }
        [red, black]
    };

    let mut iterations = 0;
    let mut last = f64::INFINITY;
    while iterations < max_iter {
        iterations += 1;
        let mut largest: f64 = 0.0;
        for color in &colors {
            let updates: Vec<(f64, f64)> = color
                .par_iter()
                .map(|r| {
                    let mut gs = r.rhs;
                    for s in 0..4 {
                        gs += r.coef[s] * u[r.nbr[s] as usize];
                    }
                    let old = u[r.cell as usize];
                    (old + omega * (gs - old), (gs - old).abs())
                })
                .collect();
            for (r, (v, c)) in color.iter().zip(updates) {
                u[r.cell as usize] = v;
                largest = largest.max(c);
            }
        }
        last = largest;
        if largest < threshold {
            break;
        }
    }
    log::debug!("harmonic solve: {iterations} sweeps, last correction {last:.3e}");
    if !(last < threshold) {
        return Err(Error::NotConverged {
            solver: "harmonic",
            iterations,
            last,
        });
    }
    extend_off_mask(d, phi, &mut u);
    Ok(HarmonicSolution {
        u: RealField::from_values(grid, u)?,
        iterations,
        last_correction: last,
    })
}

/// Every connected piece of the mask must touch the boundary.
fn check_reachable(d: &DomainSpec, arms: &[(usize, [Arm; 4])]) -> Result<()> {
    let grid = d.grid();
    let mut position = vec![usize::MAX; grid.len()];
    for (p, &(k, _)) in arms.iter().enumerate() {
        position[k] = p;
    }
    let mut seen = vec![false; arms.len()];
    for start in 0..arms.len() {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut touches = false;
        while let Some(p) = stack.pop() {
            for arm in arms[p].1 {
                match arm {
                    Arm::Wall { .. } => touches = true,
                    Arm::Sample(q) => {
                        let qp = position[q];
                        if !seen[qp] {
                            seen[qp] = true;
                            stack.push(qp);
                        }
                    }
                }
            }
        }
        if !touches {
            let (i, j) = grid.ij(arms[start].0);
            return Err(Error::UnreachableBoundary { i, j });
        }
    }
    Ok(())
}

/// Off-mask samples within two cells of the mask get a weighted
/// least-squares plane through the nearest boundary point (value φ) and
/// the mask samples within three cells, evaluated at the sample.
pub(crate) fn extend_off_mask(d: &DomainSpec, phi: &BoundaryData, u: &mut [f64]) {
    let grid = *d.grid();
    let h = grid.spacing();
    let n = grid.n() as isize;
    let mask = d.mask();
    let within = |k: usize, r: isize| {
        let (i, j) = grid.ij(k);
        let mut out = Vec::new();
        for dj in -r..=r {
            for di in -r..=r {
                let (a, b) = (i as isize + di, j as isize + dj);
                if a >= 0 && b >= 0 && a < n && b < n {
                    let q = grid.index(a as usize, b as usize);
                    if mask[q] {
                        out.push(q);
                    }
                }
            }
        }
        out
    };
    let near: Vec<usize> = (0..grid.len())
        .filter(|&k| !mask[k] && !within(k, 2).is_empty())
        .collect();
    let values: Vec<f64> = near
        .par_iter()
        .map(|&k| {
            let (i, j) = grid.ij(k);
            let q = grid.point(i, j);
            let hit = d.nearest_boundary(q);
            let wall = phi.value_on_segment(hit.component, hit.segment, hit.s);
            // Normal equations for u ≈ c + gx·x + gy·y in units of h about q.
            let mut m = [[0.0; 3]; 3];
            let mut rhs = [0.0; 3];
            let mut add = |z: Complex64, v: f64, w: f64| {
                let x = [1.0, (z.re - q.re) / h, (z.im - q.im) / h];
                for r in 0..3 {
                    for c in 0..3 {
                        m[r][c] += w * x[r] * x[c];
                    }
                    rhs[r] += w * x[r] * v;
                }
            };
            add(hit.point, wall, 4.0);
            for p in within(k, 3) {
                let (a, b) = grid.ij(p);
                add(grid.point(a, b), u[p], 1.0);
            }
            solve3(m, rhs).map(|x| x[0]).filter(|v| v.is_finite()).unwrap_or(wall)
        })
        .collect();
    for (k, v) in near.into_iter().zip(values) {
        u[k] = v;
    }
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for c in 0..3 {
        let mut a = m;
        for row in 0..3 {
            a[row][c] = r[row];
        }
        out[c] = det(a) / d;
    }
    Some(out)
}
