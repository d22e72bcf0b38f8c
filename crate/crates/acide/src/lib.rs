//! Experiment drivers, file formats and the `acide` command line tool, built
//! on the `no_std` solver in `acide-core`.

pub mod cli;
pub mod experiments;
pub mod formats;

pub use acide_core as core;
