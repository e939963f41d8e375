//! Computational mechanics of stochastic processes and input-output transducers.
//!
//! Processes are edge-emitting stochastic finite-state machines given by one
//! substochastic matrix per symbol. Transducers carry one matrix per
//! `(output | input)` pair. Driving a transducer with a process yields a joint
//! machine whose output marginal can be minimized and compared with a target
//! process. On top of that sit the memory measures: statistical complexity
//! (Shannon entropy of the stationary memory distribution) and quantum
//! complexity (von Neumann entropy of the weighted Gram matrix of quantum
//! causal states), plus the bounds needed to compare the cost of a
//! transformation with the cost of its reverse.
//!
//! ```
//! use cmech_core::{zoo, complexity};
//!
//! let a = zoo::process_a();
//! let pi = a.stationary_distribution().unwrap();
//! assert!((pi.probs()[0] - 1.0 / 3.0).abs() < 1e-12);
//!
//! let clocks = zoo::clocks();
//! let c = complexity::classical_complexity(&clocks.forward, &clocks.alternating).unwrap();
//! assert!((c - 1.0).abs() < 1e-12);
//! ```

#![allow(clippy::needless_range_loop)]

pub mod alphabet;
pub mod analysis;
pub mod complexity;
pub mod compose;
pub mod error;
pub mod json;
pub mod linalg;
pub mod machine;
pub mod minimize;
pub mod zoo;

pub use alphabet::Alphabet;
pub use analysis::shannon_entropy;
pub use compose::{drive, transducer_stationary, JointMachine};
pub use error::{Error, Result};
pub use json::Machine;
pub use linalg::Matrix;
pub use machine::{ProcessMachine, StateDistribution, Transducer, ValidationReport, Violation};
pub use minimize::{machines_isomorphic, minimize, processes_equal, Partition};
