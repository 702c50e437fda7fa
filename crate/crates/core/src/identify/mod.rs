//! Noise-coefficient identification from Allan deviation curves.
//!
//! The pipeline is: [`fit_slope_segments`] finds straight log-log runs and
//! snaps their slopes to the canonical values, [`extract_coefficients`] reads
//! each coefficient off its segment, and [`fit_composite_wls`] refines the
//! result against the full analytic curve. [`build_error_budget`] runs the
//! whole chain for every channel of a recording.

mod budget;
mod extract;
mod segments;
mod wls;

pub use budget::{
    analyze_channel, analyze_recording, build_error_budget, compare_coefficients, identify_curve,
    roundtrip_tolerance, BudgetOptions, ChannelAnalysis, ChannelBudget, CoefficientCheck,
    CurveIdentification, ErrorBudget, WARN_CONSTANT_CHANNEL,
};
pub use extract::{extract_coefficients, CoefficientStatus, Estimate, Status};
pub use segments::{
    fit_slope_segments, snap_slope, SlopeSegment, MAX_SLOPE_STDERR, MIN_SEGMENT_POINTS,
    MIN_USABLE_POINTS, SNAP_TOLERANCE,
};
pub use wls::{
    fit_composite_wls, out_of_span_terms, prune_terms, term_significance, weighted_objective,
    weighted_objective_within, WlsFit, WlsOptions, SIGNIFICANCE_THRESHOLD,
};
