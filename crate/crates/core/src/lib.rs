//! Score estimation from pairwise comparisons under the Bradley-Terry-Luce
//! model, with an emphasis on comparison graphs that exhibit locality
//! (1D/2D grids where only nearby items are ever compared).
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: comparison graphs, grid and special-topology generators,
//!   node partitions and super-graphs for divide-and-conquer.
//! - [`laplacian`]: weighted Laplacians, solves on the complement of the
//!   all-ones vector, effective resistances.
//! - [`model`]: sigmoid helpers, ground-truth scores, Bernoulli sampling and
//!   the Hessian-weighted Laplacian `L_z`.
//! - [`estimators`]: the MLE objective with GD / CD / preconditioned GD
//!   solvers, the existence check, the line-graph closed form and the
//!   spectral method.
//! - [`dc`]: DC-overlap, DC-community and projected gradient descent with
//!   re-parameterization.
//! - [`metrics`]: pairwise error metrics and the bound quantities
//!   `B`, `Q`, `V` plus the locality bounds.
//! - [`experiments`] and [`cli`]: seeded Monte-Carlo experiments and the
//!   `btl` command-line front end.
//!
//! ```
//! use btl_core::graph::{generate_grid, GridSpec, SamplePolicy};
//! use btl_core::model::{make_scores, sample_comparisons, ScoreKind};
//! use btl_core::estimators::{solve_mle, MleProblem, SolverConfig};
//! use btl_core::rng::seeded;
//!
//! let spec = GridSpec::grid1d(60, 5, 1.0).unwrap();
//! let graph = generate_grid(&spec, &SamplePolicy::Constant(50), &mut seeded(1)).unwrap();
//! let truth = make_scores(&ScoreKind::Linear, 60, 5).unwrap();
//! let data = sample_comparisons(&graph, &truth, &mut seeded(2)).unwrap();
//! let problem = MleProblem::new(&graph, &data).unwrap();
//! let (theta, trace) = solve_mle(&problem, &SolverConfig::precond_gd(&problem), None).unwrap();
//! assert!(trace.converged);
//! assert_eq!(theta.len(), 60);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dc;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod laplacian;
pub mod metrics;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
