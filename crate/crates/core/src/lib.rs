//! Quantum-repeater hardware requirements by simulation and genetic search.
//!
//! The crate couples a discrete-event simulator of a SWAP-ASAP repeater
//! chain with a genetic algorithm that looks for the cheapest hardware
//! improvements meeting end-to-end fidelity and rate targets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod cost;
pub mod ga;
pub mod model;
pub mod orchestrator;
pub mod quantum;
pub mod seed;
pub mod sim;
pub mod werner;
