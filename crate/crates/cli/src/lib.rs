//! Experiment runner for the `kinfront` command.

pub mod commands;
pub mod config;
pub mod criteria;
pub mod output;
pub mod table;
