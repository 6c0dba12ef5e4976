#![no_std]
#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments
)]
extern crate alloc;

pub mod ensemble;
pub mod fft;
pub mod liouvillian;
pub mod meanfield;
pub mod ode;
pub mod spin;
pub mod stats;
pub mod sync;
