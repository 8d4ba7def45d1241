//! Gaussian process regression on large sparse random graphs with random
//! walk kernels.
//!
//! The crate covers the full pipeline:
//!
//! - [`graph`]: random regular, Erdos-Renyi and power-law generalised random
//!   graph ensembles with reproducible seeding;
//! - [`kernel`]: the p-step lazy random walk kernel with raw, global or local
//!   normalisation, plus its analytic form on d-regular trees;
//! - [`gp`]: exact GP regression, Bayes error, Monte-Carlo learning curves
//!   (matched and mismatched) and posterior-variance diagnostics;
//! - [`eigcurve`]: the kernel-eigenvalue learning-curve approximation, its
//!   d-regular-tree spectral form and the large-p master curve;
//! - [`cavity`]: belief-propagation / cavity learning-curve predictions on
//!   single graphs and by population dynamics over degree ensembles, for both
//!   normalisations;
//! - [`linalg`], [`quad`], [`rng`], [`hist`]: the numerical substrate.

pub mod cavity;
pub mod eigcurve;
pub mod gp;
pub mod graph;
pub mod hist;
pub mod kernel;
pub mod linalg;
pub mod quad;
pub mod rng;
