use super::*;
use crate::field::{DomainSpec, Grid};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn k_of(mu: Complex64) -> f64 {
    (1.0 + mu.norm()) / (1.0 - mu.norm())
}

#[test]
fn hodge_rotates() {
    assert_eq!(Hodge.apply((1.0, 0.0)), (0.0, 1.0));
    assert_eq!(Hodge.matrix() * Hodge.matrix(), Mat2::IDENTITY * -1.0);
    assert_eq!(Hodge.matrix().apply((0.3, -2.0)), Hodge.apply((0.3, -2.0)));
}

#[test]
fn diagonal_stretch() {
    for k in [1.0, 2.0, 7.5, 1e3] {
        let a = Mat2::new(1.0 / k, 0.0, 0.0, k);
        let mu = mu_of(a);
        assert!((mu - c((k - 1.0) / (k + 1.0), 0.0)).norm() < 1e-14);
        assert!((k_of(mu) - k).abs() < 1e-9 * k);
    }
    assert_eq!(matrix_of(c(0.0, 0.0)), Mat2::IDENTITY);
}

#[test]
fn field_validation() {
    let grid = Grid::new(1.0, 8).unwrap();
    assert!(ConductivityField::new(Field::filled(grid, Mat2::new(2.0, 0.0, 0.0, 0.5))).is_ok());
    let bad_det = ConductivityField::new(Field::filled(grid, Mat2::new(2.0, 0.0, 0.0, 1.0)));
    assert!(matches!(bad_det, Err(Error::InvalidParameter(_))));
    let asym = ConductivityField::new(Field::filled(grid, Mat2::new(1.0, 0.5, 0.0, 1.0)));
    assert!(matches!(asym, Err(Error::InvalidParameter(_))));
    let negative = ConductivityField::new(Field::filled(grid, Mat2::new(-1.0, 0.0, 0.0, -1.0)));
    assert!(matches!(negative, Err(Error::MatrixNotElliptic { .. })));
    let bad = ConductivityField {
        a: Field::filled(grid, Mat2::new(-1.0, 0.0, 0.0, -1.0)),
    };
    assert!(matches!(matrix_to_mu(&bad), Err(Error::MatrixNotElliptic { .. })));
}

#[test]
fn dictionary_on_fields() {
    let grid = Grid::new(2.0, 32).unwrap();
    let mu = MuField::from_fn(grid, |z| z * 0.6, |z| z.norm() < 0.9).unwrap();
    let a = mu_to_matrix(&mu);
    let back = matrix_to_mu(&a).unwrap();
    for k in 0..grid.len() {
        assert!((back.values().values()[k] - mu.values().values()[k]).norm() < 1e-12);
        let m = a.matrices().values()[k];
        assert!((m.det() - 1.0).abs() < 1e-12);
    }
    assert!(ConductivityField::new(a.into_matrices()).is_ok());
}

proptest! {
    #[test]
    fn round_trip(r in 0.0..0.999f64, t in 0.0..std::f64::consts::TAU) {
        let mu = Complex64::from_polar(r, t);
        let a = matrix_of(mu);
        prop_assert!((a.det() - 1.0).abs() < 1e-12 * a.max_eigenvalue().max(1.0));
        prop_assert_eq!(a.a12, a.a21);
        prop_assert!((mu_of(a) - mu).norm() < 1e-12 * k_of(mu));
        prop_assert!((a.max_eigenvalue() - k_of(mu)).abs() < 1e-9 * k_of(mu));
    }

    #[test]
    fn conjugation_identity(r in 0.0..0.95f64, t in 0.0..std::f64::consts::TAU, p in -1.0..1.0f64, q in -1.0..1.0f64) {
        // f = αz + βz̄ with β = μ ᾱ... pick f_z = 1 + ip, f_z̄ = μ f_z.
        let mu = Complex64::from_polar(r, t);
        let fz = c(1.0, p + q);
        let fzb = mu * fz;
        // ∇u = (Re(fz + fzb), Re(i(fz − fzb))), ∇v = (Im(fz + fzb), Im(i(fz − fzb))).
        let gu = ((fz + fzb).re, (c(0.0, 1.0) * (fz - fzb)).re);
        let gv = ((fz + fzb).im, (c(0.0, 1.0) * (fz - fzb)).im);
        let jag = Hodge.apply(matrix_of(mu).apply(gu));
        let scale = 1.0 + gu.0.abs() + gu.1.abs();
        prop_assert!((jag.0 - gv.0).abs() < 1e-9 * scale * k_of(mu));
        prop_assert!((jag.1 - gv.1).abs() < 1e-9 * scale * k_of(mu));
    }
}

#[test]
fn bump_gradient_matches_differences() {
    let b = Bump { center: c(0.1, -0.2), radius: 0.5 };
    let e = 1e-6;
    for z in [c(0.3, 0.0), c(-0.1, -0.4), c(0.1, -0.2)] {
        let (gx, gy) = b.gradient(z);
        let fx = (b.value(z + c(e, 0.0)) - b.value(z - c(e, 0.0))) / (2.0 * e);
        let fy = (b.value(z + c(0.0, e)) - b.value(z - c(0.0, e))) / (2.0 * e);
        assert!((gx - fx).abs() < 1e-8 && (gy - fy).abs() < 1e-8);
    }
    assert_eq!(b.value(c(0.7, -0.2)), 0.0);
}

#[test]
fn bumps_are_seeded_and_inside() {
    let d = DomainSpec::disk(Grid::new(1.5, 64).unwrap(), c(0.0, 0.0), 1.0, 256).unwrap();
    let a = random_bumps(&d, 10, 7).unwrap();
    assert_eq!(a, random_bumps(&d, 10, 7).unwrap());
    assert_ne!(a, random_bumps(&d, 10, 8).unwrap());
    for b in &a {
        assert!(b.radius >= 0.2 - 1e-3 && b.radius <= 0.6 + 1e-3);
        assert!(b.center.norm() + b.radius < 1.0);
    }
    let u = RealField::from_fn(*d.grid(), |z| z.re);
    let outside = [Bump { center: c(0.9, 0.0), radius: 0.3 }];
    assert!(weak_residual(&u, &ConductivityField::identity(*d.grid()), &d, &outside).is_err());
}

#[test]
fn weak_residual_of_linear_and_quadratic() {
    let d = DomainSpec::disk(Grid::new(1.5, 128).unwrap(), c(0.0, 0.0), 1.0, 256).unwrap();
    let bumps = random_bumps(&d, 10, 1).unwrap();
    let id = ConductivityField::identity(*d.grid());
    let u = RealField::from_fn(*d.grid(), |z| 2.0 * z.re - z.im + z.re * z.re - z.im * z.im);
    let h2 = d.grid().spacing().powi(2);
    let mass = |b: &Bump| -> f64 { d.grid().points().map(|z| b.value(z) * h2).sum() };
    for (r, b) in weak_residual(&u, &id, &d, &bumps).unwrap().iter().zip(&bumps) {
        assert!(r.abs() < 1e-2 * mass(b), "{r}");
    }
    // |z|² is not harmonic: ∫∇u·∇ψ = −∫Δu ψ = −4∫ψ.
    let u = RealField::from_fn(*d.grid(), |z| z.norm_sqr());
    let r = weak_residual(&u, &id, &d, &bumps[..1]).unwrap()[0];
    let mass = mass(&bumps[0]);
    assert!((r + 4.0 * mass).abs() < 1e-2 * mass, "{r} {mass}");
}

#[test]
fn constant_anisotropic_potential() {
    // For A = diag(1/k, k) the linear function x is A-harmonic.
    let k = 3.0;
    let d = DomainSpec::disk(Grid::new(2.0, 128).unwrap(), c(0.0, 0.0), 1.0, 256).unwrap();
    let a = ConductivityField::new(Field::filled(*d.grid(), Mat2::new(1.0 / k, 0.0, 0.0, k))).unwrap();
    let phi = BoundaryData::from_fn(&d, |z| z.re + 0.5 * z.im).unwrap();
    let sol = a_harmonic_solve_with(&d, &a, &phi, &DirichletOptions::default()).unwrap();
    let grid = d.grid();
    let mut err: f64 = 0.0;
    for idx in 0..grid.len() {
        if d.mask()[idx] {
            let (i, j) = grid.ij(idx);
            let z = grid.point(i, j);
            err = err.max((sol.u.values()[idx] - z.re - 0.5 * z.im).abs());
        }
    }
    assert!(err < 2e-2, "{err}");
    assert!((sol.mu.max_modulus() - 0.5).abs() < 1e-12);
    assert!((sol.k_integral - k * std::f64::consts::PI).abs() < 0.1);
    let (v, periods) = stream_function(&sol.u, &a, &d, c(0.0, 0.0)).unwrap();
    assert!(periods.is_empty());
    // ∇v = J A ∇u = J (1/k, k/2) = (−k/2, 1/k).
    let (i, j) = grid.ij(grid.index(80, 64));
    let z = grid.point(i, j);
    assert!((v.values()[grid.index(80, 64)] - (-k / 2.0 * z.re + z.im / k)).abs() < 5e-2);
    assert!(sol.to_report().render().contains("k_integral"));
}

#[test]
fn radial_stretch_potential_weak_residual_decreases() {
    let solve = |n: usize| {
        let grid = Grid::new(2.0, n).unwrap();
        let d = DomainSpec::disk(grid, c(0.0, 0.0), 1.0, 512).unwrap();
        let mu = MuField::from_fn(grid, |z| z / z.conj() / 3.0, |z| z.norm() < 1.0).unwrap();
        let a = mu_to_matrix(&mu);
        let phi = BoundaryData::from_fn(&d, |z| z.re / z.norm()).unwrap();
        let u = a_harmonic_solve(&d, &a, &phi, 1e-10).unwrap();
        let bumps = random_bumps(&d, 10, 3).unwrap();
        let r = weak_residual(&u, &a, &d, &bumps).unwrap();
        r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let (r1, r2) = (solve(128), solve(256));
    assert!(r1 > 1.5 * r2, "{r1} {r2}");
}
