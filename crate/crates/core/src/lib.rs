//! Timelike constant mean curvature surfaces in Lorentz–Minkowski space,
//! built from loop-group potentials by Birkhoff factorization.
//!
//! The crate is organised bottom-up:
//!
//! * [`loopalg`]: truncated matrix Laurent series (the twisted loop group).
//! * [`birkhoff`]: left-normalized Birkhoff factorization and small-cell detection.
//! * [`potentials`]: potential pairs, singular potentials and their config format.
//! * [`frame`]: loop ODE integration, the d'Alembert and singular pipelines, Sym formula.
//! * [`geometry`]: Minkowski vector algebra, normals and frontal singularity classification.
//! * [`cauchy`]: builders solving the singular geometric Cauchy problem.
//! * [`export`] and [`cli`]: mesh/report output and the command-line driver.

pub mod birkhoff;
pub mod cauchy;
pub mod cli;
pub mod export;
pub mod frame;
pub mod geometry;
pub mod loopalg;
pub mod potentials;
pub mod tolerances;

pub use loopalg::{LoopMatrix, LoopVectorField, Mat2, C64};
