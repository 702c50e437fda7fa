//! Allan variance analysis and stochastic error modelling for inertial and
//! magnetic sensors.
//!
//! * [`timeseries`]: uniformly sampled channels and CSV ingestion
//! * [`allan`]: overlapping / non-overlapping Allan variance with confidence bounds
//! * [`noise_model`]: error-process simulators and the analytic Allan curves
//! * [`identify`]: slope segmentation, coefficient readout and composite fitting
//! * [`validation`]: empirical-versus-model overlays
//! * [`scenario`]: multi-channel simulation recipes
//!
//! Numeric routines are generic over [`Real`] (`f32` or `f64`); the aliases
//! below name the common instantiations.

pub mod allan;
pub mod error;
pub mod identify;
pub mod noise_model;
pub mod scalar;
pub mod scenario;
pub mod timeseries;
pub mod validation;

pub use allan::{
    avar_overlapping, avar_standard, confidence_bounds, tau_grid_log, AllanCurve, AllanPoint,
    Estimator, TauGrid,
};
pub use error::{Error, Result};
pub use identify::{
    build_error_budget, extract_coefficients, fit_composite_wls, fit_slope_segments, ErrorBudget,
    SlopeSegment,
};
pub use noise_model::{theoretical_adev, NoiseParams, Process, SimSpec};
pub use scalar::Real;
pub use timeseries::{
    detrend_mean, infer_rate, load_recording, save_recording, Recording, SampleSeries, Unit,
};

pub type SampleSeriesF64 = SampleSeries<f64>;
pub type SampleSeriesF32 = SampleSeries<f32>;
pub type RecordingF64 = Recording<f64>;
pub type RecordingF32 = Recording<f32>;
pub type TauGridF64 = TauGrid<f64>;
pub type TauGridF32 = TauGrid<f32>;
pub type AllanCurveF64 = AllanCurve<f64>;
pub type AllanCurveF32 = AllanCurve<f32>;
pub type NoiseParamsF64 = NoiseParams<f64>;
pub type NoiseParamsF32 = NoiseParams<f32>;
pub type SimSpecF64 = SimSpec<f64>;
pub type SimSpecF32 = SimSpec<f32>;
pub type ErrorBudgetF64 = ErrorBudget<f64>;
