//! Parameter sweeps, table output and the command-line front end for
//! `ribotide-core`.

// `!(x > 0.0)` style comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod run;
pub mod table;

pub use config::{parse_config, RunConfig};
pub use error::RunError;
pub use run::run;
