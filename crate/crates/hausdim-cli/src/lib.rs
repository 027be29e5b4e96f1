//! Command-line front end for certified Hausdorff dimension brackets.
//!
//! The binary exposes one subcommand per problem family plus a
//! reproduction mode that re-runs embedded reference rows and reports a
//! pass/fail comparison. All numeric output is rendered with 17
//! significant digits so records round-trip losslessly.

// Validation guards are written as negated comparisons so that NaN fails
// them together with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Frozen reference rows keep every printed digit of their source.
#![allow(clippy::excessive_precision)]

pub mod commands;
pub mod config;
pub mod golden;
pub mod record;
