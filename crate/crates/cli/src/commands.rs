use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use beltrami_core::beltrami::solve_normalized_with;
use beltrami_core::conductivity::{
    a_harmonic_solve_with, matrix_to_mu, mu_to_matrix, random_bumps, stream_function, weak_residual,
};
use beltrami_core::dilatation::{default_probes, solvability_report, SolvabilityOptions};
use beltrami_core::dirichlet::{self, annulus_dirichlet, DirichletOptions, RegularSolution};
use beltrami_core::field::io::{
    load_boundary_csv, load_domain, load_field, load_probes_csv, save_field, write_plot_csv, FieldData, FieldFile,
};
use beltrami_core::report::Report;
use beltrami_core::transforms::{DirectQuadrature, SingularIntegrals};
use beltrami_core::{
    BoundaryData, BoundaryProblem, Complex64, ConductivityField, DomainSpec, Grid, MuField, RealField, TransformPlan,
};

use crate::config::RunConfig;

fn load_mu(path: &Path) -> Result<MuField> {
    load_field(path)
        .and_then(|f| f.into_mu())
        .with_context(|| format!("reading {}", path.display()))
}

fn load_conductivity(path: &Path) -> Result<ConductivityField> {
    load_field(path)
        .and_then(|f| f.into_matrix())
        .and_then(ConductivityField::new)
        .with_context(|| format!("reading {}", path.display()))
}

fn load_problem_domain(path: &Path, phi: &Path) -> Result<(DomainSpec, BoundaryData)> {
    let d = load_domain(path).with_context(|| format!("reading {}", path.display()))?;
    let phi = load_boundary_csv(phi).with_context(|| format!("reading {}", phi.display()))?;
    Ok((d, phi))
}

fn emit_report(report: &Report, path: Option<&Path>) -> Result<()> {
    let text = report.render();
    match path {
        Some(p) => fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn out_dir(config: &RunConfig) -> Result<&Path> {
    let out = config.out.as_deref().context("missing output directory")?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out)
}

fn save(out: &Path, name: &str, file: &FieldFile) -> Result<()> {
    let path = out.join(name);
    save_field(&path, file).with_context(|| format!("writing {}", path.display()))
}

fn save_plot(out: &Path, name: &str, field: &RealField) -> Result<()> {
    let path = out.join(name);
    let w = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    write_plot_csv(std::io::BufWriter::new(w), field)?;
    Ok(())
}

fn finish(out: &Path, report: &Report) -> Result<()> {
    fs::write(out.join("report.txt"), report.render()).context("writing report.txt")?;
    print!("{}", report.render());
    Ok(())
}

pub fn solve_beltrami(mu: &Path, direct: bool, config: &RunConfig) -> Result<()> {
    config.validate()?;
    let mu = load_mu(mu)?;
    config.check_grid(mu.grid())?;
    let kernels: Box<dyn SingularIntegrals> = if direct {
        Box::new(DirectQuadrature::new(*mu.grid()))
    } else {
        Box::new(TransformPlan::new(*mu.grid()))
    };
    let map = solve_normalized_with(&mu, config.tol, config.max_iter, kernels.as_ref())?;
    let out = out_dir(config)?;
    save(out, "f.field", &FieldFile::new(FieldData::Complex(map.f.clone())))?;
    save(out, "fz.field", &FieldFile::new(FieldData::Complex(map.fz.clone())))?;
    save(out, "fzbar.field", &FieldFile::new(FieldData::Complex(map.fzbar.clone())))?;
    let mut report = map.to_report();
    report.text("transforms", if direct { "direct" } else { "fft" });
    finish(out, &report)
}

fn dirichlet_options(config: &RunConfig) -> DirichletOptions {
    let mut options = DirichletOptions {
        beltrami_tol: config.tol,
        beltrami_max_iter: config.max_iter,
        ..DirichletOptions::default()
    };
    options.harmonic.tol = config.tol;
    options
}

/// `|Re f − φ|` at each boundary vertex, through the image domain.
fn boundary_profile(solution: &RegularSolution, phi: &BoundaryData) -> Vec<(usize, Complex64, f64)> {
    let mut rows = Vec::new();
    for (c, (image, data)) in solution.image_boundary.components().iter().zip(phi.components()).enumerate() {
        for (&(w, _), &(z, target)) in image.iter().zip(data) {
            let err = solution.u.interpolate(w).map_or(f64::NAN, |u| (u - target).abs());
            rows.push((c, z, err));
        }
    }
    rows
}

fn write_dirichlet_plots(out: &Path, d: &DomainSpec, solution: &RegularSolution, phi: &BoundaryData) -> Result<()> {
    let masked = |values: Vec<f64>| -> Result<RealField> {
        let v = values
            .into_iter()
            .zip(d.mask())
            .map(|(v, &m)| if m { v } else { f64::NAN })
            .collect();
        Ok(RealField::from_values(*d.grid(), v)?)
    };
    let f = solution.f.values();
    save_plot(out, "u.csv", &masked(f.iter().map(|v| v.re).collect())?)?;
    save_plot(out, "v.csv", &masked(f.iter().map(|v| v.im).collect())?)?;
    save_plot(out, "abs_f.csv", &masked(f.iter().map(|v| v.norm()).collect())?)?;
    let mut text = String::from("component,x,y,error\n");
    for (c, z, e) in boundary_profile(solution, phi) {
        text.push_str(&format!("{c},{:e},{:e},{e:e}\n", z.re, z.im));
    }
    fs::write(out.join("boundary_error.csv"), text).context("writing boundary_error.csv")?;
    Ok(())
}

fn check_boundary(solution: &RegularSolution, config: &RunConfig) {
    if solution.boundary_error > config.boundary_tol {
        log::warn!(
            "boundary error {:.3e} exceeds {:.3e}",
            solution.boundary_error,
            config.boundary_tol
        );
    }
}

pub fn solve_dirichlet(
    mu: Option<&Path>,
    domain: &Path,
    phi: &Path,
    plots: bool,
    config: &RunConfig,
) -> Result<()> {
    config.validate()?;
    let (d, phi) = load_problem_domain(domain, phi)?;
    config.check_grid(d.grid())?;
    let mu = match mu {
        Some(p) => load_mu(p)?,
        None => MuField::zero(*d.grid()),
    };
    let problem = BoundaryProblem::new(d.clone(), &mu, phi.clone())?;
    let solution = solve_dirichlet_checked(&problem, config)?;
    let out = out_dir(config)?;
    save(
        out,
        "f.field",
        &FieldFile {
            data: FieldData::Complex(solution.f.clone()),
            mask: Some(d.mask().to_vec()),
        },
    )?;
    save(out, "g.field", &FieldFile::new(FieldData::Complex(solution.g.f.clone())))?;
    save(
        out,
        "h_real.field",
        &FieldFile {
            data: FieldData::Real(solution.u.clone()),
            mask: Some(solution.image_domain.mask().to_vec()),
        },
    )?;
    if plots {
        write_dirichlet_plots(out, &d, &solution, &phi)?;
    }
    finish(out, &solution.to_report())
}

fn solve_dirichlet_checked(problem: &BoundaryProblem, config: &RunConfig) -> Result<RegularSolution> {
    let solution = dirichlet::solve_dirichlet(problem, &dirichlet_options(config))?;
    check_boundary(&solution, config);
    Ok(solution)
}

pub fn solve_potential(a: &Path, domain: &Path, phi: &Path, plots: bool, config: &RunConfig) -> Result<()> {
    config.validate()?;
    let a = load_conductivity(a)?;
    let (d, phi) = load_problem_domain(domain, phi)?;
    config.check_grid(d.grid())?;
    let potential = a_harmonic_solve_with(&d, &a, &phi, &dirichlet_options(config))?;
    check_boundary(&potential.solution, config);
    let (ci, cj) = d.central_sample();
    let (v, periods) = stream_function(&potential.u, &a, &d, d.grid().point(ci, cj))?;
    let out = out_dir(config)?;
    let with_mask = |f: &RealField| FieldFile {
        data: FieldData::Real(f.clone()),
        mask: Some(d.mask().to_vec()),
    };
    save(out, "u.field", &with_mask(&potential.u))?;
    save(out, "v.field", &with_mask(&v))?;
    if plots {
        write_dirichlet_plots(out, &d, &potential.solution, &phi)?;
        save_plot(out, "stream.csv", &v)?;
    }
    let mut report = potential.to_report();
    report.floats("stream.periods", &periods);
    finish(out, &report)
}

pub fn diagnose(mu: &Path, domain: &Path, config: &RunConfig) -> Result<()> {
    config.validate()?;
    let mu = load_mu(mu)?;
    let d = load_domain(domain).with_context(|| format!("reading {}", domain.display()))?;
    let probes = match &config.probes {
        Some(p) => load_probes_csv(p).with_context(|| format!("reading {}", p.display()))?,
        None => default_probes(&d),
    };
    let options = SolvabilityOptions {
        alpha: config.alpha,
        rings: config.rings,
        ..SolvabilityOptions::default()
    };
    let report = solvability_report(&mu, &d, &probes, &options)?;
    emit_report(&report.to_report(), config.report.as_deref())
}

pub fn convert_mu_a(input: &Path, to_matrix: bool, out: &Path) -> Result<()> {
    let file = if to_matrix {
        let a = mu_to_matrix(&load_mu(input)?);
        FieldFile::new(FieldData::Matrix(a.into_matrices()))
    } else {
        FieldFile::from_mu(&matrix_to_mu(&load_conductivity(input)?)?)
    };
    save_field(out, &file).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

pub fn verify(u: &Path, a: &Path, domain: &Path, count: usize, config: &RunConfig) -> Result<()> {
    let u = load_field(u)
        .and_then(|f| f.into_real())
        .with_context(|| format!("reading {}", u.display()))?;
    let a = load_conductivity(a)?;
    let d = load_domain(domain).with_context(|| format!("reading {}", domain.display()))?;
    let bumps = random_bumps(&d, count, config.seed)?;
    let residuals = weak_residual(&u, &a, &d, &bumps)?;
    let mut report = Report::new("weak_residual");
    report
        .int("bumps", bumps.len() as i128)
        .int("seed", config.seed as i128)
        .float("max_abs", residuals.iter().fold(0.0, |m, r| m.max(r.abs())));
    for (k, (b, r)) in bumps.iter().zip(&residuals).enumerate() {
        report
            .floats(&format!("bump.{k}.center"), &[b.center.re, b.center.im])
            .float(&format!("bump.{k}.radius"), b.radius)
            .float(&format!("bump.{k}.residual"), *r);
    }
    emit_report(&report, config.report.as_deref())
}

pub fn demo_punctured_disk(radii: &[f64], radial: usize, angular: usize, n: usize, report: Option<&Path>) -> Result<()> {
    let grid = Grid::new(1.25, n)?;
    let mut r = Report::new("punctured_disk");
    r.text("problem", "u = 0 on |z| = r0, u = 1 on |z| = 1")
        .int("radial", radial as i128)
        .int("angular", angular as i128)
        .float("grid.h", grid.spacing());
    let mut values = Vec::with_capacity(radii.len());
    for (k, &r0) in radii.iter().enumerate() {
        let sol = annulus_dirichlet(Complex64::new(0.0, 0.0), r0, 1.0, |_| 0.0, |_| 1.0, radial, angular)?;
        let u = sol
            .evaluate(Complex64::new(0.5, 0.0))
            .context("z = 0.5 lies outside the annulus")?;
        let exact = (0.5 / r0).ln() / (1.0 / r0).ln();
        let resolvable = DomainSpec::annulus(grid, Complex64::new(0.0, 0.0), r0, 1.0, 256)
            .and_then(|d| d.check_resolved())
            .is_ok();
        r.float(&format!("case.{k}.r0"), r0)
            .float(&format!("case.{k}.u_half"), u)
            .float(&format!("case.{k}.exact"), exact)
            .float(&format!("case.{k}.error"), (u - exact).abs())
            .flag(&format!("case.{k}.grid_resolvable"), resolvable);
        values.push(u);
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    r.flag("u_half_increasing", increasing).text(
        "limit",
        "u(0.5) -> 1 as r0 -> 0; the value 0 at the puncture is not attained in the limit",
    );
    emit_report(&r, report)
}
