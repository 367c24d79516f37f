#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Batch driver for the `qp-spectra` library: configuration, CSV/JSON
//! output, the experiment subcommands and the self-test suites.

pub mod commands;
pub mod config;
pub mod output;
pub mod suites;
