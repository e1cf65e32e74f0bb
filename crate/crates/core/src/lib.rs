//! Rain-rule target revision for limited-overs cricket.
//!
//! The pipeline reads ball-by-ball match files ([`ball_log`]), summarizes
//! innings totals with a fitted normal curve ([`score_stats`]), builds
//! average scoring curves conditioned on wickets lost and fits a
//! zero-intercept cubic or quadratic to them ([`run_curves`]), and revises
//! targets for interrupted chases by the ratio of areas under that curve
//! ([`target_engine`]). An exponential resource model in the style of
//! Duckworth-Lewis is fitted from the same data as a baseline
//! ([`dl_reference`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ball_log;
pub mod cli;
pub mod dl_reference;
pub mod error;
pub mod fixtures;
mod lm;
pub mod run_curves;
pub mod score_stats;
pub mod target_engine;

pub use ball_log::{
    load_corpus, parse_match, trajectory, Corpus, DeliveryEvent, ExtrasKind, InningsRecord,
    InningsTrajectory, MatchFormat, MatchRecord,
};
pub use dl_reference::{fit_dl_family, resource_table, DlCurve, DlFamily, ResourceTable};
pub use error::{Error, Result};
pub use run_curves::{fit_poly, wicket_curve, Degree, PolyFit, WicketCurve};
pub use score_stats::{build_histogram, fit_normal, totals, Histogram, NormalFit};
pub use target_engine::{
    area_full, area_interrupted, resource_ratio, revise_target, InterruptionScenario,
    RevisedTarget,
};
