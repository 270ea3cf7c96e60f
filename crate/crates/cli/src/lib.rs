//! Configuration-driven front end for `casimir-core`.
//!
//! Each command reads a config file (grammar in `docs/config.md`), runs one
//! scenario, and writes a CSV or JSON table plus a JSON run manifest.

pub mod app;
pub mod config;
pub mod inputs;
pub mod manifest;
pub mod scenarios;
pub mod table;
