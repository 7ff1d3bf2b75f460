//! Numerical solvers for Dirichlet problems of (possibly degenerate) Beltrami
//! equations `f_z̄ = μ f_z` and the associated conductivity equations
//! `div(A ∇u) = 0`.
//!
//! Solutions are assembled as a composition `f = h ∘ g`: `g` is the
//! hydrodynamically normalized solution of the Beltrami equation in the plane
//! (`g(z) = z + o(1)` at infinity), and `h` is a holomorphic (possibly
//! multi-valued) function on the image domain `g(D)` whose real part carries
//! the boundary data. Alongside the solvers, [`dilatation`] evaluates the
//! classical sufficient conditions for solvability (mean-bounded, Lehto, FMO,
//! BMO, logarithmic order and integral conditions on the dilatation quotients)
//! as numerical verdicts.
//!
//! Module map:
//!
//! * [`field`]: grids, sampled fields, domains, boundary data, file formats.
//! * [`transforms`]: FFT-based Cauchy and Beurling transforms.
//! * [`beltrami`]: normalized Beltrami solves, truncation ladder, inversion.
//! * [`dilatation`]: `K_μ`, `K^T_μ`, mean oscillation and solvability criteria.
//! * [`dirichlet`]: harmonic solves, conjugates with periods, the Schwarz
//!   formula and the composition pipeline.
//! * [`conductivity`]: the μ ↔ A dictionary, stream functions, A-harmonic
//!   solves and weak-form residuals.
//! * [`report`]: the line-oriented `key: value` report format.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beltrami;
pub mod conductivity;
pub mod dilatation;
pub mod dirichlet;
mod error;
pub mod field;
pub mod report;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use beltrami::{solve_normalized, LadderReport, QCMap};
pub use conductivity::{ConductivityField, Mat2};
pub use dilatation::{CriterionVerdict, PhiSpec, SolvabilityReport};
pub use dirichlet::{BoundaryProblem, RegularSolution};
pub use field::{BoundaryData, ComplexField, DomainSpec, Field, Grid, MuField, Polyline, RealField};
pub use transforms::TransformPlan;
