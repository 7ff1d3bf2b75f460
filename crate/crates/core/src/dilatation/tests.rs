use super::*;
use crate::field::DomainSpec;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn radial(grid: Grid, k: f64) -> MuField {
    MuField::from_fn(grid, move |z| k * z / z.conj(), |z| z.norm() < 1.0).unwrap()
}

#[test]
fn quotient_values() {
    assert_eq!(dilatation_quotient(c(0.0, 0.0)), 1.0);
    assert!((dilatation_quotient(c(0.0, 1.0 / 3.0)) - 2.0).abs() < 1e-15);
    let grid = Grid::new(2.0, 64).unwrap();
    let k = k_mu(&radial(grid, 1.0 / 3.0));
    let mu = radial(grid, 1.0 / 3.0);
    for (i, v) in k.values().iter().enumerate() {
        let expected = if mu.support()[i] { 2.0 } else { 1.0 };
        assert!((v - expected).abs() < 1e-12);
    }
    assert!(k_mu(&MuField::zero(grid)).values().iter().all(|&v| v == 1.0));
}

#[test]
fn tangent_saturates_bounds() {
    let grid = Grid::new(2.0, 64).unwrap();
    for k in [0.2, 0.5, 0.9] {
        let lower = k_t_mu(&radial(grid, k), c(0.0, 0.0));
        let upper = k_t_mu(&radial(grid, -k), c(0.0, 0.0));
        let mu = radial(grid, k);
        for i in 0..grid.len() {
            if mu.support()[i] {
                assert!((lower.values()[i] - (1.0 - k) / (1.0 + k)).abs() < 1e-12);
                assert!((upper.values()[i] - (1.0 + k) / (1.0 - k)).abs() < 1e-12);
            } else {
                assert_eq!(lower.values()[i], 1.0);
            }
        }
    }
}

#[test]
fn circle_means_of_tangent_dilatation() {
    let grid = Grid::new(2.0, 128).unwrap();
    assert!((circle_mean_kt(&MuField::zero(grid), c(0.0, 0.0), 0.5).unwrap() - 1.0).abs() < 1e-14);
    let mu = radial(grid, 0.5);
    for r in [0.1, 0.4, 0.8] {
        let m = circle_mean_kt(&mu, c(0.0, 0.0), r).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 1e-12, "{m}");
    }
    assert!((circle_mean_kt(&mu, c(0.0, 0.0), 1.5).unwrap() - 1.0).abs() < 1e-14);
    assert!(circle_mean_kt(&mu, c(1.5, 0.0), 0.9).is_err());
    assert!(circle_mean_kt(&mu, c(0.0, 0.0), grid.spacing() / 2.0).is_err());
}

#[test]
fn lehto_separates_log_powers() {
    let eps0 = 0.5;
    let constant = lehto_integral_rule(|_| 2.0, 1e-8, eps0).unwrap();
    assert!((constant.value - 0.5 * (eps0 / 1e-8f64).ln()).abs() < 1e-9);
    assert!(constant.divergent);
    let log1 = lehto_integral_rule(|r| (std::f64::consts::E / r).ln(), 1e-12, eps0).unwrap();
    let exact = (1.0 - 1e-12f64.ln()).ln() - (1.0 - eps0.ln()).ln();
    assert!((log1.value - exact).abs() < 1e-6);
    assert!(log1.divergent);
    let log2 = lehto_integral_rule(|r| (std::f64::consts::E / r).ln().powi(2), 1e-12, eps0).unwrap();
    let exact = 1.0 / (1.0 - eps0.ln()) - 1.0 / (1.0 - 1e-12f64.ln());
    assert!((log2.value - exact).abs() < 1e-6);
    assert!(!log2.divergent);
}

#[test]
fn lehto_on_grid() {
    let grid = Grid::new(2.0, 256).unwrap();
    let h = grid.spacing();
    let r = lehto_integral(&radial(grid, 1.0 / 3.0), c(0.0, 0.0), 2.0 * h, 0.9).unwrap();
    assert!((r.value - 2.0 * (0.9 / (2.0 * h)).ln()).abs() < 1e-2, "{}", r.value);
    assert!(r.divergent);
    assert!(matches!(
        lehto_integral(&MuField::zero(grid), c(0.0, 0.0), h, 0.5),
        Err(Error::Resolution(_))
    ));
}

#[test]
fn oscillation_of_log_and_power() {
    let grid = Grid::new(2.0, 512).unwrap();
    let ladder = trend::geometric_ladder(0.5, 2.0 * grid.spacing(), 7);
    let constant = RealField::filled(grid, 3.0);
    let est = fmo_estimate(&constant, c(0.0, 0.0), &ladder).unwrap();
    assert!(est.oscillations.iter().all(|&o| o.abs() < 1e-14));
    assert!(est.passed);
    let log = RealField::sample_function(grid, |z| (1.0 / z.norm()).ln()).unwrap();
    let est = fmo_estimate(&log, c(0.0, 0.0), &ladder).unwrap();
    assert!(est.passed, "{:?}", est.oscillations);
    let power = RealField::sample_function(grid, |z| 1.0 / z.norm()).unwrap();
    let est = fmo_estimate(&power, c(0.0, 0.0), &ladder).unwrap();
    assert!(!est.passed, "{:?}", est.oscillations);
    let shifted = log.map(|v| v + 7.0);
    assert!((mean_oscillation(&log, c(0.1, 0.0), 0.3).unwrap() - mean_oscillation(&shifted, c(0.1, 0.0), 0.3).unwrap()).abs() < 1e-12);
}

#[test]
fn bmo_norm_behaviour() {
    let grid = Grid::new(2.0, 256).unwrap();
    assert_eq!(bmo_norm(&RealField::filled(grid, 2.0), 8), 0.0);
    let log = RealField::sample_function(grid, |z| (1.0 / z.norm()).ln()).unwrap();
    let shifted = log.map(|v| v - 4.0);
    let a = bmo_norm(&log, 8);
    assert!((a - bmo_norm(&shifted, 8)).abs() < 1e-9);
    let b = bmo_norm(&log, 16);
    assert!(a.is_finite() && b.is_finite());
    assert!((a - b).abs() < 0.25 * a.max(b), "{a} {b}");
}

#[test]
fn log_kernel_ratios() {
    let eps0 = 0.05;
    let eps: Vec<f64> = trend::geometric_ladder(eps0, 1e-12, 12)[1..].to_vec();
    let zero = fmo_log_bound_rule(|_| 0.0, c(0.0, 0.0), &eps, eps0).unwrap();
    assert!(zero.ratios.iter().all(|&r| r == 0.0));
    let one = fmo_log_bound_rule(|_| 1.0, c(0.0, 0.0), &eps, eps0).unwrap();
    // ∫ 2π r dr / (r log(1/r))² = 2π (1/log(1/ε₀) − 1/log(1/ε)) on the ring.
    for (e, i) in eps.iter().zip(&one.integrals) {
        let exact = 2.0 * PI * (1.0 / (1.0 / eps0).ln() - 1.0 / (1.0 / e).ln());
        assert!((i - exact).abs() < 1e-6 * exact.max(1.0));
    }
    assert!(one.bounded);
    let log = fmo_log_bound_rule(|z| (1.0 / z.norm()).ln(), c(0.0, 0.0), &eps, eps0).unwrap();
    assert!(log.bounded, "{}", log.exponent);
    assert!(log.ratios.windows(2).all(|w| w[1] < 2.0 * w[0]));
    assert!(fmo_log_bound_rule(|_| 1.0, c(0.0, 0.0), &eps, 0.1).is_err());

    let grid = Grid::new(0.25, 256).unwrap();
    let field = RealField::filled(grid, 1.0);
    let g = fmo_log_bound_check(&field, c(0.0, 0.0), &[0.02, 0.01, 0.005], eps0).unwrap();
    for (e, i) in [0.02, 0.01, 0.005].iter().zip(&g.integrals) {
        let exact = 2.0 * PI * (1.0 / (1.0 / eps0).ln() - 1.0 / (1.0f64 / e).ln());
        assert!((i - exact).abs() < 0.05 * exact, "{i} {exact}");
    }
}

#[test]
fn phi_examples() {
    let exp = PhiSpec::from_log(|t| t, 1.0).unwrap();
    assert!(phi_condition(&exp).divergent);
    let p = PhiSpec::new(|t: f64| t.powi(2), 1.0).unwrap();
    assert!(!phi_condition(&p).divergent);
    let slow = PhiSpec::from_log(|t: f64| if t > std::f64::consts::E { t / t.ln() } else { t / 1.0 }, 1.0).unwrap();
    assert!(phi_condition(&slow).divergent);
    let zero = PhiSpec::new(|_| 0.0, 1.0).unwrap();
    let v = phi_condition(&zero);
    assert!(!v.divergent && v.note.is_some());
}

#[test]
fn inverse_conventions() {
    let id = PhiSpec::new(|t| t, 1.0).unwrap();
    assert_eq!(inverse_nondecreasing(&id, 3.0), 3.0);
    assert_eq!(inverse_nondecreasing(&id, 1e20), f64::INFINITY);
    let plateau = PhiSpec::new(
        |t: f64| {
            if t < 1.0 {
                5.0 * t
            } else if t <= 2.0 {
                5.0
            } else {
                5.0 + (t - 2.0)
            }
        },
        1.0,
    )
    .unwrap();
    assert_eq!(inverse_nondecreasing(&plateau, 5.0), 1.0);
    assert!(inverse_nondecreasing(&plateau, plateau.phi(1.5)) <= 1.5);
    for &t in plateau.samples().iter().step_by(97) {
        assert!(inverse_nondecreasing(&plateau, plateau.phi(t)) <= t);
    }
    assert!(PhiSpec::new(|t: f64| -t, 1.0).is_err());
}

#[test]
fn ring_means() {
    let grid = Grid::new(2.0, 512).unwrap();
    let o = c(0.0, 0.0);
    assert!(ring_mean_divergence(&RealField::filled(grid, 1.0), o).unwrap());
    let log1 = RealField::sample_function(grid, |z| (std::f64::consts::E / z.norm()).ln().max(0.0)).unwrap();
    assert!(ring_mean_divergence(&log1, o).unwrap());
    let log2 = log1.map(|v| v * v);
    assert!(!ring_mean_divergence(&log2, o).unwrap());
    assert!(ring_mean_divergence(&log1.map(|v| -v - 1.0), o).is_err());
}

#[test]
fn exp_integrable_q_has_divergent_rings() {
    let grid = Grid::new(2.0, 256).unwrap();
    // exp(Q) = e/|z| is integrable near 0.
    let q = RealField::sample_function(grid, |z| 1.0 + (1.0 / z.norm()).ln().max(0.0)).unwrap();
    assert!(ring_mean_divergence(&q, c(0.0, 0.0)).unwrap());
}

fn disk_domain(grid: Grid) -> DomainSpec {
    DomainSpec::disk(grid, c(0.0, 0.0), 1.0, 128).unwrap()
}

#[test]
fn solvability_trivial_and_radial() {
    let grid = Grid::new(2.0, 128).unwrap();
    let d = disk_domain(grid);
    let probes = default_probes(&d);
    assert!(probes.len() > 64);
    let opts = SolvabilityOptions::default();
    let zero = solvability_report(&MuField::zero(grid), &d, &probes, &opts).unwrap();
    assert!(zero.k_in_l1);
    for v in &zero.verdicts {
        assert!(v.aggregate, "{:?} {:?}", v.criterion, v.results.iter().filter(|r| !r.passed).collect::<Vec<_>>());
    }
    assert!(zero.aggregate);
    let stretch = solvability_report(&radial(grid, 1.0 / 3.0), &d, &probes, &opts).unwrap();
    for v in &stretch.verdicts {
        assert!(v.aggregate, "{:?} {:?}", v.criterion, v.results.iter().filter(|r| !r.passed).collect::<Vec<_>>());
    }
    assert!(stretch.aggregate);
    let text = stretch.to_report().render();
    assert!(text.contains("aggregate: true"));
    assert!(solvability_report(&MuField::zero(grid), &d, &[], &opts).is_err());
}

#[test]
fn solvability_rejects_log_squared_center() {
    let grid = Grid::new(2.0, 256).unwrap();
    let d = disk_domain(grid);
    let mu = MuField::from_fn(
        grid,
        |z| {
            let k = (std::f64::consts::E / z.norm()).ln().powi(2);
            -(k - 1.0) / (k + 1.0) * z / z.conj()
        },
        |z| z.norm() < 1.0,
    )
    .unwrap();
    let report = solvability_report(&mu, &d, &[c(0.0, 0.0)], &SolvabilityOptions::default()).unwrap();
    let lehto = report.verdict(Criterion::LehtoDivergent).unwrap();
    assert!(!lehto.results[0].passed, "{}", lehto.results[0].value);
    let exp = report.verdict(Criterion::ExpIntegral).unwrap();
    assert!(!exp.results[0].passed, "{}", exp.results[0].value);
    assert!(report.passed_under[0].is_empty(), "{:?}", report.verdicts);
    assert!(!report.aggregate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn tangent_between_bounds(m in 0.0f64..0.999, arg in 0.0f64..6.3, x in -1.0f64..1.0, y in -1.0f64..1.0, x0 in -1.0f64..1.0, y0 in -1.0f64..1.0) {
        let mu = Complex64::from_polar(m, arg);
        let k = dilatation_quotient(mu);
        let kt = tangent_dilatation(mu, c(x, y), c(x0, y0));
        prop_assert!(kt <= k * (1.0 + 1e-12));
        prop_assert!(kt >= (1.0 / k) * (1.0 - 1e-12));
    }

    #[test]
    fn oscillation_shift_invariant(shift in -10.0f64..10.0, x in -0.3f64..0.3) {
        let grid = Grid::new(1.0, 32).unwrap();
        let f = RealField::sample_function(grid, |z| z.re * z.im + z.norm()).unwrap();
        let g = f.map(|v| v + shift);
        let a = mean_oscillation(&f, c(x, 0.0), 0.2).unwrap();
        let b = mean_oscillation(&g, c(x, 0.0), 0.2).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }
}
