//! Missing-data imputation for survey tables.
//!
//! The crate provides per-variable random-forest imputation, an
//! autoassociative network searched by a genetic algorithm, two hybrids of
//! the two, random and mean baselines, and a battery that measures how
//! imputation changes summary statistics, a classifier and a logistic
//! regression decision model.

pub mod assessment;
pub mod autoencoder;
pub mod dataset;
pub mod error;
pub mod forest;
pub mod imputation;
pub mod optimizer;
pub mod pipeline;
pub mod seeding;

pub use error::{Error, Result};
