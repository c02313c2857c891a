//! Library surface of the `qedft` binary: configuration parsing, command
//! execution, and artifact writers, shared with the integration tests.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
