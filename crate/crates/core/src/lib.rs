//! Penalized least-squares model selection under Rademacher noise, with Monte
//! Carlo and exact checks of the concentration inequalities behind it.

pub mod cli;
pub mod concentration;
pub mod config;
pub mod error;
pub mod experiments;
pub mod functional;
pub mod linear;
pub mod randomness;
pub mod selection;
pub mod talagrand;

pub use error::{Error, Result};
