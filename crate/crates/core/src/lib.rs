//! Graphical hybrid automata (Stateflow charts whose states embed Simulink
//! block diagrams) compiled to SMT-LIB2 with ODE flow declarations.
//!
//! The crate is `no_std` and only needs `alloc`. The pipeline is:
//!
//! 1. [`parse::parse_model`] and [`validate::validate_model`]
//! 2. [`flatten::flatten_gha`] removes `Subsystem` blocks
//! 3. [`fr::derive_fr`] computes one [`fr::FlowSystem`] per state
//! 4. [`unroll::unroll`] builds the k-step [`unroll::ConstraintSystem`]
//! 5. [`props::compile_property`] and [`props::negate_for_bmc`]
//! 6. [`smt::emit_smt`] renders the solver document
//! 7. [`verdict`] classifies solver output, [`sim`] and [`oracle`] replay and
//!    cross-check everything numerically.
#![no_std]

extern crate alloc;

pub mod diagram;
pub mod expr;
pub mod flatten;
pub mod fr;
pub mod model;
pub mod oracle;
pub mod parse;
pub mod print;
pub mod props;
pub mod sim;
pub mod smt;
pub mod unroll;
pub mod validate;
pub mod verdict;

pub use expr::{BinaryOp, BoolOp, CmpOp, Expr, UnaryOp};
pub use model::{Block, BlockKind, Gha, Line, Param, ParamValue, PortRef, SlState, Transition};
