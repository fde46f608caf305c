//! Command-line pipeline for graphical hybrid automata: translation to the
//! ODE-extended SMT-LIB2 dialect, solver driving, simulation and
//! counterexample validation. The numeric and symbolic work lives in
//! `ghasmt-core`.

pub mod error;
pub mod inputs;
pub mod pipeline;
pub mod report;
pub mod search;
pub mod solver;

pub use error::{CliError, Stage};

/// Exit code for usage and model errors.
pub const EXIT_USAGE: i32 = 4;
