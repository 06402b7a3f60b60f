//! Pairwise player chemistry for soccer squads.
//!
//! The crate turns on-the-ball action values and lineups into joint offensive
//! and defensive impact metrics per player pair, learns a regressor that
//! predicts those metrics for pairs that never played together, and selects
//! maximum-chemistry elevens under formation constraints.

pub mod datamodel;
pub mod jdi;
pub mod joi;
pub mod metrics;
pub mod predict;
pub mod synth;
pub mod teambuilder;
