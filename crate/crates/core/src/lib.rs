//! Optimal contracts between a demand-response aggregator and strategic
//! customers who choose a hidden effort and may misreport their realized
//! load reduction.
//!
//! - [`model`]: scenario, contract and strategy types with closed-form
//!   expected utilities.
//! - [`customer`]: best-response reports and efforts.
//! - [`dra`]: the aggregator's optimal contracts and feasibility bounds.
//! - [`verify`]: derivative-free oracles and IC/IR/Nash checks.
//! - [`montecarlo`]: seeded simulation and figure sweeps.
//! - [`config`] and [`cli`]: the `phantomdr` command.
//!
//! Each capability has a runnable program under `examples/`, for instance
//! `cargo run --example specified_nash`.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod customer;
pub mod dra;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod verify;

pub use error::{Error, Result};
