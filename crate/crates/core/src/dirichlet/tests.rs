use super::*;
use crate::beltrami::invert_on;
use crate::field::Grid;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit_disk(n: usize) -> DomainSpec {
    DomainSpec::disk(Grid::new(2.0, n).unwrap(), c(0.0, 0.0), 1.0, 512).unwrap()
}

fn max_over_mask(d: &DomainSpec, f: impl Fn(usize, Complex64) -> f64) -> f64 {
    let grid = d.grid();
    (0..grid.len())
        .filter(|&k| d.mask()[k])
        .map(|k| {
            let (i, j) = grid.ij(k);
            f(k, grid.point(i, j))
        })
        .fold(0.0, f64::max)
}

#[test]
fn constants_are_reproduced() {
    let d = unit_disk(64);
    let phi = BoundaryData::from_fn(&d, |_| 2.5).unwrap();
    let u = harmonic_dirichlet(&d, &phi, 1e-12).unwrap();
    assert!(max_over_mask(&d, |k, _| (u.values()[k] - 2.5).abs()) < 1e-12);
}

#[test]
fn linear_data_on_the_disk() {
    let d = unit_disk(512);
    let phi = BoundaryData::from_fn(&d, |z| z.re).unwrap();
    let u = harmonic_dirichlet(&d, &phi, 1e-11).unwrap();
    let err = max_over_mask(&d, |k, z| (u.values()[k] - z.re).abs());
    assert!(err < 1e-3, "{err}");
}

#[test]
fn maximum_principle() {
    let d = DomainSpec::from_components(
        Grid::new(2.0, 96).unwrap(),
        vec![Polyline::new(vec![c(-1.0, -0.8), c(1.2, -0.5), c(0.9, 1.1), c(-0.3, 0.4), c(-1.1, 0.9)]).unwrap()],
    )
    .unwrap();
    let phi = BoundaryData::from_fn(&d, |z| (3.0 * z.re).sin() + z.im * z.im).unwrap();
    let u = harmonic_dirichlet(&d, &phi, 1e-10).unwrap();
    for k in 0..d.grid().len() {
        if d.mask()[k] {
            assert!(u.values()[k] >= phi.min() - 1e-9 && u.values()[k] <= phi.max() + 1e-9);
        }
    }
}

#[test]
fn annulus_closed_form_on_the_grid() {
    let r0 = 1e-2;
    let d = DomainSpec::annulus(Grid::new(1.25, 1024).unwrap(), c(0.0, 0.0), r0, 1.0, 1024).unwrap();
    let phi = BoundaryData::constant_per_component(&d, &[1.0, 0.0]).unwrap();
    let u = harmonic_dirichlet(&d, &phi, 1e-10).unwrap();
    let err = max_over_mask(&d, |k, z| (u.values()[k] - (z.norm() / r0).ln() / (1.0 / r0).ln()).abs());
    assert!(err < 1e-2, "{err}");
    let (_, periods) = conjugate_with_periods(&u, &d, c(0.5, 0.0)).unwrap();
    let expected = 2.0 * PI / (1.0 / r0).ln();
    assert!((periods[0] - expected).abs() < 1e-2 * expected, "{periods:?} vs {expected}");
}

#[test]
fn degenerate_components_are_refused() {
    let grid = Grid::new(2.0, 64).unwrap();
    let d = DomainSpec::annulus(grid, c(0.0, 0.0), 0.02, 1.0, 64).unwrap();
    let phi = BoundaryData::constant_per_component(&d, &[1.0, 0.0]).unwrap();
    let err = harmonic_dirichlet(&d, &phi, 1e-8).unwrap_err();
    assert!(matches!(err, Error::DegenerateBoundary { component: 1, .. }));
    assert!(err.to_string().contains("punctured"));
}

#[test]
fn schwarz_examples() {
    let one = schwarz_disk(|_| 1.0, 64).unwrap();
    assert!((one.evaluate(c(0.3, -0.2)) - 1.0).norm() < 1e-14);
    let cubic = schwarz_disk(|z| (3.0 * z.arg()).cos(), 2048).unwrap();
    let sine = schwarz_disk(|z| z.arg().sin(), 2048).unwrap();
    let mut e3: f64 = 0.0;
    let mut e1: f64 = 0.0;
    for a in 0..32 {
        for r in [0.0, 0.1, 0.25, 0.4, 0.5] {
            let z = Complex64::from_polar(r, 2.0 * PI * a as f64 / 32.0);
            e3 = e3.max((cubic.evaluate(z) - z * z * z).norm());
            e1 = e1.max((sine.evaluate(z) - (-Complex64::i() * z)).norm());
        }
    }
    assert!(e3 < 1e-6 && e1 < 1e-6, "{e3} {e1}");
    assert!(cubic.evaluate(c(0.0, 0.0)).im.abs() < 1e-15);
    assert!(cubic.evaluate_checked(c(0.999, 0.0)).is_err());
}

#[test]
fn schwarz_from_polygon_data() {
    let d = unit_disk(64);
    let phi = BoundaryData::from_fn(&d, |z| z.re).unwrap();
    let rule = schwarz_disk_from_boundary(&phi, 1024).unwrap();
    assert!((rule.evaluate(c(0.2, 0.3)) - c(0.2, 0.3)).norm() < 1e-4);
}

#[test]
fn conjugate_of_linear_and_constant() {
    let d = unit_disk(128);
    let grid = *d.grid();
    let u = RealField::sample_function(grid, |z| z.re).unwrap();
    let base = c(0.01, 0.01);
    let (v, periods) = conjugate_with_periods(&u, &d, base).unwrap();
    assert!(periods.is_empty());
    let (bi, bj) = grid.cell_of(base).unwrap();
    let offset = v.get(bi, bj) - grid.point(bi, bj).im;
    assert!(max_over_mask(&d, |k, z| (v.values()[k] - z.im - offset).abs()) < 1e-12);
    let (w, _) = conjugate_with_periods(&RealField::filled(grid, 3.0), &d, base).unwrap();
    assert!(max_over_mask(&d, |k, _| w.values()[k].abs()) == 0.0);
    assert!(conjugate_with_periods(&u, &d, c(1.5, 0.0)).is_err());
}

#[test]
fn log_period_and_additivity() {
    let grid = Grid::new(2.0, 512).unwrap();
    let d = DomainSpec::annulus(grid, c(0.0, 0.0), 0.1, 1.0, 256).unwrap();
    let u = RealField::sample_function(grid, |z| z.norm().ln()).unwrap();
    let (_, periods) = conjugate_with_periods(&u, &d, c(0.5, 0.0)).unwrap();
    assert!((periods[0] - 2.0 * PI).abs() < 1e-2, "{periods:?}");

    let (a, b) = (c(-0.4, 0.0), c(0.4, 0.0));
    let two = DomainSpec::from_components(
        grid,
        vec![
            Polyline::circle(c(0.0, 0.0), 1.2, 256).unwrap(),
            Polyline::circle(a, 0.1, 128).unwrap(),
            Polyline::circle(b, 0.1, 128).unwrap(),
        ],
    )
    .unwrap();
    let u = RealField::sample_function(grid, |z| (z - a).norm().ln() + 2.0 * (z - b).norm().ln()).unwrap();
    let (_, periods) = conjugate_with_periods(&u, &two, c(0.0, 0.5)).unwrap();
    assert!((periods[0] - 2.0 * PI).abs() < 2e-2 && (periods[1] - 4.0 * PI).abs() < 4e-2, "{periods:?}");
    let union = period_around(&u, &two, &[1, 2], 40).unwrap();
    assert!((union - periods[0] - periods[1]).abs() < 2e-2, "{union}");
    assert!(period_around(&u, &two, &[0], 1).is_err());
}

#[test]
fn pushforward_identity_and_vertex_count() {
    let d = unit_disk(64);
    let phi = BoundaryData::from_fn(&d, |z| z.im).unwrap();
    let g = QCMap::identity(*d.grid());
    let (image, star) = pushforward_boundary(&g, &d, &phi).unwrap();
    assert_eq!(image.mask(), d.mask());
    for (a, b) in star.components()[0].iter().zip(&phi.components()[0]) {
        assert!((a.0 - b.0).norm() < 1e-14 && a.1 == b.1);
    }

    let grid = Grid::new(2.0, 128).unwrap();
    let square = DomainSpec::from_components(
        grid,
        vec![Polyline::rectangle(c(-0.6, -0.6), c(0.6, 0.6)).unwrap()],
    )
    .unwrap();
    let mu = MuField::from_fn(grid, |z| 0.3 * (-4.0 * z.norm_sqr()).exp() * c(1.0, 0.5), |z| z.norm() < 0.9).unwrap();
    let g = solve_normalized(&mu, 1e-10, 200).unwrap();
    let phi = BoundaryData::from_fn(&square, |z| z.re).unwrap();
    let (image, _) = pushforward_boundary(&g, &square, &phi).unwrap();
    assert_eq!(image.components()[0].len(), square.components()[0].len());
    assert_ne!(image.components()[0], square.components()[0]);
}

#[test]
fn pipeline_analytic_case_matches_schwarz() {
    let d = unit_disk(512);
    let phi = BoundaryData::from_fn(&d, |z| z.re + 0.5 * (z * z).im).unwrap();
    let p = BoundaryProblem::new(d.clone(), &MuField::zero(*d.grid()), phi).unwrap();
    let sol = solve_dirichlet(&p, &DirichletOptions::default()).unwrap();
    assert!(sol.boundary_error < 1e-3, "{}", sol.boundary_error);
    assert!(sol.periods.is_empty() && !sol.multi_valued);
    let rule = schwarz_disk(|z| z.re + 0.5 * (z * z).im, 2048).unwrap();
    let err = max_over_mask(&d, |k, z| {
        if z.norm() < 0.9 {
            (sol.f.values()[k].re - rule.evaluate(z).re).abs()
        } else {
            0.0
        }
    });
    assert!(err < 1e-3, "{err}");
    let grid = d.grid();
    let err = max_over_mask(&d, |k, z| {
        let (i, j) = grid.ij(k);
        (sol.f.values()[k].re - sol.u.interpolate(sol.g.f.get(i, j)).unwrap()).abs() + 0.0 * z.re
    });
    assert_eq!(err, 0.0);
}

#[test]
fn pipeline_radial_stretch() {
    let grid = Grid::new(2.0, 512).unwrap();
    let d = DomainSpec::disk(grid, c(0.0, 0.0), 1.0, 512).unwrap();
    let mu = MuField::from_fn(grid, |z| z / z.conj() / 3.0, |z| z.norm() < 1.0).unwrap();
    let phi = BoundaryData::from_fn(&d, |z| z.re / z.norm()).unwrap();
    let p = BoundaryProblem::new(d.clone(), &mu, phi).unwrap();
    let sol = solve_dirichlet(&p, &DirichletOptions::default()).unwrap();
    assert!(sol.boundary_error < 2e-2, "{}", sol.boundary_error);
    let err = max_over_mask(&d, |k, z| (sol.f.values()[k].re - z.re * z.norm()).abs());
    assert!(err < 2e-2, "{err}");
    let w = invert_on(&sol.g, &[c(0.25, 0.0)]);
    assert!((w[0].unwrap() - c(0.5, 0.0)).norm() < 1e-2);
}

#[test]
fn pipeline_annulus_is_multi_valued() {
    let d = DomainSpec::annulus(Grid::new(2.0, 256).unwrap(), c(0.0, 0.0), 0.2, 1.0, 256).unwrap();
    let phi = BoundaryData::constant_per_component(&d, &[1.0, 0.0]).unwrap();
    let p = BoundaryProblem::new(d.clone(), &MuField::zero(*d.grid()), phi).unwrap();
    let sol = solve_dirichlet(&p, &DirichletOptions::default()).unwrap();
    assert!(sol.multi_valued);
    let expected = 2.0 * PI / 5f64.ln();
    assert!((sol.periods[0] - expected).abs() < 2e-2 * expected, "{:?}", sol.periods);
    let err = max_over_mask(&d, |k, z| (sol.f.values()[k].re - (z.norm() / 0.2).ln() / 5f64.ln()).abs());
    assert!(err < 2e-2, "{err}");
    assert!(sol.to_report().render().contains("multi_valued: true"));
}

#[test]
fn log_polar_annulus() {
    for r0 in [1e-2, 1e-3, 1e-4] {
        let sol = annulus_dirichlet(c(0.0, 0.0), r0, 1.0, |_| 0.0, |_| 1.0, 64, 16).unwrap();
        let u = sol.evaluate(c(0.5, 0.0)).unwrap();
        let exact = (0.5 / r0).ln() / (1.0 / r0).ln();
        assert!((u - exact).abs() < 1e-12, "{u} {exact}");
    }
    // u = (r − r0²/r)/(1 − r0²) · cos θ has data 0 inside and cos θ outside.
    let r0 = 0.1f64;
    let sol = annulus_dirichlet(c(0.0, 0.0), r0, 1.0, |_| 0.0, |t| t.cos(), 512, 256).unwrap();
    for z in [c(0.5, 0.0), c(0.0, 0.3), c(-0.2, -0.6)] {
        let r = z.norm();
        let exact = (r - r0 * r0 / r) / (1.0 - r0 * r0) * z.arg().cos();
        assert!((sol.evaluate(z).unwrap() - exact).abs() < 1e-3);
    }
    assert!(sol.evaluate(c(2.0, 0.0)).is_none());
    assert!(annulus_dirichlet(c(0.0, 0.0), 1.0, 0.5, |_| 0.0, |_| 1.0, 8, 8).is_err());
}
