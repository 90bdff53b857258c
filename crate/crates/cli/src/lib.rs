//! Command-line front end: instance generation, solver runs, spectral scans,
//! CSV traces and SVG plots.

pub mod args;
pub mod plot;
pub mod run;
pub mod trace_csv;
