//! Telegrapher's equations on power networks.
//!
//! Voltage and current on each line obey a linear hyperbolic balance law; lines
//! meet at generator nodes (prescribed voltage) and load nodes (prescribed net
//! current). The crate provides
//!
//! - [`network`]: graph, line parameters and validation,
//! - [`analytic`]: the exact time-periodic solution from the hyperbolic admittance matrix,
//!   plus apparent power and the powerflow sums,
//! - [`solver`]: a Strang-split, flux-limited Lax-Wendroff finite-volume scheme in
//!   characteristic variables,
//! - [`coupling`]: ghost cells at nodes,
//! - [`diagnostics`]: Lyapunov function, total variation, errors and convergence orders,
//! - [`io`] and [`runs`]: network/run files, CSV export and the run drivers behind the CLI.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the drivers use.
//!
//! ```
//! use telenet::{Network, Node, NodeKind, Edge, LineParams, Complex};
//! use telenet::analytic::solve_node_phasors;
//!
//! let net = Network::new(
//!     vec![
//!         Node::new("start", NodeKind::Generator(Complex::new(5.0, 3.0))),
//!         Node::new("end", NodeKind::Load(Complex::new(2.0, 5.0))),
//!     ],
//!     vec![Edge::new("start", "end", LineParams::new(4.0, 6.0, 2.0, 1.0, 1.0))],
//!     4.0,
//! )?;
//! let sol = solve_node_phasors(&net, 1)?;
//! assert!(sol.residual < 1e-12);
//! # Ok::<(), telenet::Error>(())
//! ```

// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod network;
pub mod runs;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Scalar;

pub type LineParams = network::LineParams<f64>;
pub type DerivedLineConstants = network::DerivedLineConstants<f64>;
pub type NodeKind = network::NodeKind<f64>;
pub type Node = network::Node<f64>;
pub type Edge = network::Edge<f64>;
pub type Network = network::Network<f64>;
pub type PhasorSolution = analytic::PhasorSolution<f64>;
pub type AdmittanceMatrix = analytic::AdmittanceMatrix<f64>;
pub type EdgeGrid = solver::EdgeGrid<f64>;
pub type SchemeConfig = solver::SchemeConfig<f64>;
pub type Simulation = solver::Simulation<f64>;
pub type DiagnosticsTrace = diagnostics::DiagnosticsTrace<f64>;
pub type ConvergenceStudy = diagnostics::ConvergenceStudy<f64>;

pub type LineParams32 = network::LineParams<f32>;
pub type Network32 = network::Network<f32>;
pub type Simulation32 = solver::Simulation<f32>;

pub use solver::Limiter;
