//! File formats, reports and command-line driver for `pivotcost-core`.

pub mod commands;
pub mod config;
pub mod formats;
pub mod io;
