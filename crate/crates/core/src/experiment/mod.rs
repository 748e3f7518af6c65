//! Configuration, runs, output files and resolution sweeps.

pub mod config;
pub mod io;
pub mod run;
pub mod sweep;
