//! Orchestration behind the `desksim` binary: configuration, the four
//! subcommands and the files they read and write.

pub mod artifacts;
pub mod backends;
pub mod config;
pub mod evaluate;
pub mod failure;
pub mod manifest;
pub mod pool;
pub mod replay;
pub mod simulate;
pub mod validate;

pub use failure::{Completion, Failure};

/// Source of environment variables; credentials are read through this only.
pub type Env<'a> = &'a (dyn Fn(&str) -> Option<String> + Sync);

pub fn process_env(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|v| !v.is_empty())
}
