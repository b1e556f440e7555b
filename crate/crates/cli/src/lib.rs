//! Command-line pipeline and labeling service.

pub mod commands;
pub mod config;
pub mod imageio;
pub mod server;
