//! Sparse trigonometric approximation on the d-torus.
//!
//! The crate builds and checks explicit m-term approximants of
//! multivariate trigonometric polynomials:
//!
//! - [`trigpoly`]: sparse spectra, evaluation, exact and grid-based `L_q` norms.
//! - [`approx`]: greedy thresholding and Stechkin tail bounds.
//! - [`vdp`]: the modified de la Vallée Poussin multiplier and the sharpened
//!   Nikol'skij inequality it yields.
//! - [`probbounds`]: Bernstein tail bounds, tails-to-moments, Monte Carlo checks.
//! - [`sparsify`]: the randomized 4m-term sparsifier in `L_q` and `L_inf`.
//! - [`besov`]: dyadic blocks, mixed-smoothness Besov quasi-norms and bounds.
//! - [`harness`]: experiment configuration, orchestration and CSV output.

pub mod approx;
pub mod besov;
pub mod constants;
pub mod error;
pub mod harness;
pub mod probbounds;
pub mod rng;
pub mod sparsify;
pub mod trigpoly;
pub mod vdp;

pub use error::{Error, Result};
pub use trigpoly::{Cuboid, Frequency, NormMethod, NormResult, RankedCoefficients, SparseSpectrum};
