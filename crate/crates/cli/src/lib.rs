//! Library surface of the command-line front end: the scenario-config
//! schema and the figure presets, shared between the binary and the
//! integration tests.

pub mod config;
pub mod presets;
