#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analytic;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod montecarlo;
pub mod output;
pub mod precoding;
pub mod randlin;
pub mod specialfn;
