//! Evaluation, reward and cascade-routing toolkit for short-form text rewriting.

pub mod bench;
pub mod cascade;
pub mod config;
pub mod datagen;
pub mod error;
pub mod metrics;
pub mod modelio;
pub mod reward;
pub mod textcore;

pub use error::{Error, Result};
pub use reward::RewriteTask;
