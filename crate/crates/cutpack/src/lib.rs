//! Multiway cut packing, solved end to end with exact rational arithmetic.
//!
//! A *multiway cut* for a commodity — a set of terminal vertices — is an
//! edge set whose removal disconnects every pair of its terminals. Given
//! many commodities on one capacitated graph, the *cut packing* problem
//! asks for one multiway cut per commodity while keeping every edge's load
//! (the number of cuts using it) small relative to its capacity.
//!
//! The pipeline lower-bounds the optimum with a linear relaxation, turns
//! the fractional solution into a laminar family of vertex cuts, and rounds
//! that family into integral cuts. With `c_hat_e = max(1, ceil(lambda *
//! c_e))` for the LP optimum `lambda`, the integral loads stay within
//! `8 * c_hat_e + 4` in general and `c_hat_e + 2` when all commodities
//! share a common sink.
//!
//! Everything is computed in exact rational arithmetic ([`ratio::Q`]); no
//! feasibility or bound check carries a tolerance.
//!
//! # Solving an instance
//!
//! ```
//! use cutpack::instance::{Graph, Instance};
//! use cutpack::pipeline::solve;
//! use cutpack::ratio::q;
//!
//! // a triangle with one three-terminal commodity
//! let graph = Graph::new(3, vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)])?;
//! let instance = Instance::new(graph, vec![vec![0, 1, 2]], None)?;
//!
//! let outcome = solve(&instance, None, None)?;
//! assert!(outcome.violations.is_empty());
//! assert_eq!(outcome.assignment.assignment.len(), 3); // one cut per terminal
//! for (load, cap) in outcome.report.loads.iter().zip(&outcome.integralized_capacities) {
//!     assert!(*load <= 8 * cap + 4);
//! }
//! assert!(outcome.metric.lambda <= q(1));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! # Checking against the exact optimum
//!
//! Small instances can be cross-checked against a brute-force oracle:
//!
//! ```
//! use cutpack::instance::{Graph, Instance};
//! use cutpack::oracle::brute_force_opt;
//! use cutpack::ratio::q;
//!
//! let graph = Graph::new(2, vec![(0, 1, 1)])?;
//! let instance = Instance::new(graph, vec![vec![0, 1]], None)?;
//! let result = brute_force_opt(&instance, 10_000)?;
//! assert_eq!(result.optimal_max_relative_load, q(1));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod gen;
pub mod instance;
pub mod io;
pub mod laminar;
pub mod lp;
pub mod oracle;
pub mod pipeline;
pub mod rounding;
pub mod ratio;
pub mod set;
