//! Experiment harness and command-line front end for the time-crystal
//! network model.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::large_enum_variant)]

pub mod cli;
pub mod error;
pub mod figures;
pub mod io;
pub mod plan;
pub mod sweep;
