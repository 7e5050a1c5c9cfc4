//! Explicit-state model checking of simple alternating-time temporal logic
//! over asynchronous compositions of variable-labeled modules, with an
//! assume-guarantee rule for single-agent abilities.

pub mod agrule;
pub mod approx;
pub mod assume;
pub mod bench;
pub mod compose;
pub mod graph;
pub mod kernel;
pub mod logic;
pub mod mdl;
pub mod strategy;
