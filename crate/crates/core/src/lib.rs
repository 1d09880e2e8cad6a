//! Extreme value index and extreme quantile estimation for randomly
//! right-censored samples.
//!
//! Observations are pairs `(Z, δ)` with `Z = min(X, Y)` and `δ = 1{X ≤ Y}`,
//! where `X` is the lifetime of interest and `Y` an independent censoring
//! time. Classical tail estimators applied to the top `k` values of `Z`
//! estimate the index `γ` of `Z`; dividing by the fraction `p̂` of
//! uncensored observations among them recovers the index `γ₁` of `X`.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod commands;
pub mod error;
pub mod estimators;
pub mod families;
pub mod gpd;
pub mod montecarlo;
pub mod quantile;
pub mod rng;
pub mod sample;

pub use error::{Error, Result};
pub use estimators::{EstimatorKind, PPolicy};
pub use families::{Family, FamilyPair, TruthValues};
pub use sample::{CensoredObservation, CensoredSample, SortedCensoredSample};
