use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::{Error, Result};

/// Dirichlet solution on a circular annulus computed in log-polar
/// coordinates `(s, θ) = (ln|z − c|, arg(z − c))`, where the Laplacian
/// becomes `u_ss + u_θθ`. Each angular Fourier mode of the 5-point
/// discretization is a tridiagonal system in `s`.
///
/// This resolves inner radii far below any Cartesian grid spacing.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusSolution {
    center: Complex64,
    s0: f64,
    ds: f64,
    angular: usize,
    /// `values[k * angular + t]` at `s = s0 + k·ds`, `θ = 2πt/angular`.
    values: Vec<f64>,
}

pub fn annulus_dirichlet(
    center: Complex64,
    r_inner: f64,
    r_outer: f64,
    inner: impl Fn(f64) -> f64,
    outer: impl Fn(f64) -> f64,
    radial: usize,
    angular: usize,
) -> Result<AnnulusSolution> {
    if !(r_inner > 0.0 && r_inner < r_outer && r_outer.is_finite()) {
        return Err(Error::InvalidDomain(format!("annulus radii {r_inner} and {r_outer}")));
    }
    if radial < 2 || angular < 4 {
        return Err(Error::InvalidParameter(format!("resolution {radial}×{angular} is too coarse")));
    }
    let s0 = r_inner.ln();
    let ds = (r_outer.ln() - s0) / radial as f64;
    let dtheta = 2.0 * PI / angular as f64;
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(angular);
    let inverse = planner.plan_fft_inverse(angular);
    let sample = |f: &dyn Fn(f64) -> f64| -> Result<Vec<Complex64>> {
        let mut v: Vec<Complex64> = (0..angular)
            .map(|t| Complex64::new(f(t as f64 * dtheta), 0.0))
            .collect();
        if v.iter().any(|c| !c.re.is_finite()) {
            return Err(Error::InvalidBoundaryData("non-finite annulus boundary value".into()));
        }
        forward.process(&mut v);
        Ok(v)
    };
    let a = sample(&inner)?;
    let b = sample(&outer)?;

    let nodes = radial + 1;
    let mut modes = vec![Complex64::new(0.0, 0.0); nodes * angular];
    for m in 0..angular {
        let lambda = (2.0 * (PI * m as f64 / angular as f64).sin() / dtheta).powi(2);
        // (u_{k+1} − 2u_k + u_{k−1}) − λ ds² u_k = 0, k = 1..radial−1.
        let diag = -2.0 - lambda * ds * ds;
        let interior = radial - 1;
        let mut c_prime = vec![0.0; interior];
        let mut d_prime = vec![Complex64::new(0.0, 0.0); interior];
        for k in 0..interior {
            let mut rhs = Complex64::new(0.0, 0.0);
            if k == 0 {
                rhs -= a[m];
            }
            if k == interior - 1 {
                rhs -= b[m];
            }
            let denom = if k == 0 { diag } else { diag - c_prime[k - 1] };
            c_prime[k] = 1.0 / denom;
            d_prime[k] = if k == 0 { rhs / denom } else { (rhs - d_prime[k - 1]) / denom };
        }
        modes[m] = a[m];
        modes[radial * angular + m] = b[m];
        let mut next = Complex64::new(0.0, 0.0);
        for k in (0..interior).rev() {
            let val = d_prime[k] - c_prime[k] * next;
            modes[(k + 1) * angular + m] = val;
            next = val;
        }
    }
    let mut values = Vec::with_capacity(nodes * angular);
    for k in 0..nodes {
        let mut row = modes[k * angular..(k + 1) * angular].to_vec();
        inverse.process(&mut row);
        values.extend(row.iter().map(|c| c.re / angular as f64));
    }
    Ok(AnnulusSolution {
        center,
        s0,
        ds,
        angular,
        values,
    })
}

impl AnnulusSolution {
    /// Bilinear interpolation in `(s, θ)`; `None` outside the annulus.
    pub fn evaluate(&self, z: Complex64) -> Option<f64> {
        let w = z - self.center;
        let r = w.norm();
        if !(r > 0.0) {
            return None;
        }
        let radial = self.values.len() / self.angular - 1;
        let x = (r.ln() - self.s0) / self.ds;
        if !(x >= -1e-9 && x <= radial as f64 + 1e-9) {
            return None;
        }
        let x = x.clamp(0.0, radial as f64);
        let k = (x.floor() as usize).min(radial - 1);
        let tx = x - k as f64;
        let y = w.arg().rem_euclid(2.0 * PI) / (2.0 * PI / self.angular as f64);
        let t = (y.floor() as usize) % self.angular;
        let ty = y - y.floor();
        let t1 = (t + 1) % self.angular;
        let at = |k: usize, t: usize| self.values[k * self.angular + t];
        Some(
            at(k, t) * (1.0 - tx) * (1.0 - ty)
                + at(k + 1, t) * tx * (1.0 - ty)
                + at(k, t1) * (1.0 - tx) * ty
                + at(k + 1, t1) * tx * ty,
        )
    }
}
