//! Command-line driver.

pub mod config;
pub mod pipeline;
pub mod run;

pub use config::{Auto, JumpChoice, PartialConfig, RunConfig, SurfaceKind};
pub use run::{exit_code, main_with_args, run_command, CommandKind};
