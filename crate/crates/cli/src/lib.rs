//! Command-line front end for `hemo-core`: file formats, configuration,
//! experiment recipes and run manifests.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod model;
pub mod plot;
pub mod recipes;
pub mod table;
