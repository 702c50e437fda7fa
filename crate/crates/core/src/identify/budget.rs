use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::extract::{extract_coefficients, CoefficientStatus, Estimate, Status};
use super::segments::{fit_slope_segments, SlopeSegment};
use super::wls::{
    fit_composite_wls, out_of_span_terms, prune_terms, weighted_objective_within, WlsFit,
    WlsOptions, SIGNIFICANCE_THRESHOLD,
};
use crate::allan::{allan_curve, tau_grid_log, AllanCurve, Estimator, DEFAULT_POINTS_PER_DECADE};
use crate::error::{Error, Result};
use crate::noise_model::{Coefficient, NoiseParams};
use crate::scalar::Real;
use crate::timeseries::{detrend_mean, Recording, SampleSeries, Unit};

pub const WARN_CONSTANT_CHANNEL: &str = "constant_channel";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetOptions {
    pub estimator: Estimator,
    pub points_per_decade: usize,
    /// `b` is kept at its flat-floor readout unless `wls.refine_bias_instability` is set.
    pub wls: WlsOptions,
    /// Objective increase a term must buy to stay in the budget.
    pub significance: f64,
}

impl Default for BudgetOptions {
    fn default() -> Self {
        Self {
            estimator: Estimator::Overlapping,
            points_per_decade: DEFAULT_POINTS_PER_DECADE,
            wls: WlsOptions {
                refine_bias_instability: false,
                ..WlsOptions::default()
            },
            significance: SIGNIFICANCE_THRESHOLD,
        }
    }
}

/// One column of the error budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBudget<T> {
    pub label: String,
    pub unit: Unit,
    pub params: NoiseParams<T>,
    pub status: CoefficientStatus,
    pub warnings: Vec<String>,
}

impl<T: Real> ChannelBudget<T> {
    pub fn new(
        label: impl Into<String>,
        unit: Unit,
        params: NoiseParams<T>,
        status: CoefficientStatus,
    ) -> Self {
        Self {
            label: label.into(),
            unit,
            params,
            status,
            warnings: Vec::new(),
        }
    }

    /// Column with each non-zero coefficient marked detected.
    pub fn from_values(label: impl Into<String>, unit: Unit, params: NoiseParams<T>) -> Self {
        let mut status = CoefficientStatus::default();
        for c in Coefficient::ALL {
            if params.get(c) > T::zero() {
                status.set(c, Status::Detected);
            }
        }
        Self::new(label, unit, params, status)
    }

    fn unreliable(series: &SampleSeries<T>, err: &Error) -> Self {
        let mut b = Self::new(
            series.axis_label(),
            series.unit(),
            NoiseParams::default(),
            CoefficientStatus::all(Status::Unreliable),
        );
        b.warnings.push(format!("{}: {}", err.code(), err));
        b
    }

    pub fn to_json(&self) -> Value {
        let v = |c: Coefficient| self.params.get(c).to_f64_lossy();
        json!({
            "q": v(Coefficient::Q),
            "n": v(Coefficient::N),
            "b": v(Coefficient::B),
            "k": v(Coefficient::K),
            "r": v(Coefficient::R),
            "flags": serde_json::to_value(self.status).expect("status serializes"),
            "units": self.unit.as_str(),
            "warnings": self.warnings,
        })
    }
}

/// Identified coefficients for every channel of a recording, in channel order.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBudget<T> {
    pub estimator: Estimator,
    pub channels: Vec<ChannelBudget<T>>,
}

impl<T: Real> ErrorBudget<T> {
    pub fn channel(&self, label: &str) -> Option<&ChannelBudget<T>> {
        self.channels.iter().find(|c| c.label == label)
    }

    /// JSON document `{ "channels": { label: {...} }, "estimator": ... }`.
    pub fn to_json(&self) -> Value {
        let channels: serde_json::Map<String, Value> = self
            .channels
            .iter()
            .map(|c| (c.label.clone(), c.to_json()))
            .collect();
        json!({ "channels": channels, "estimator": self.estimator.as_str() })
    }

    /// Table with one row per error type and one column per channel.
    pub fn write_table_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut header = vec!["error_type".to_string()];
        header.extend(self.channels.iter().map(|c| c.label.clone()));
        w.write_record(&header).map_err(io)?;
        let mut units = vec!["units".to_string()];
        units.extend(self.channels.iter().map(|c| c.unit.as_str().to_string()));
        w.write_record(&units).map_err(io)?;
        for coef in Coefficient::ALL {
            let mut row = vec![coef.description().to_string()];
            row.extend(self.channels.iter().map(|c| c.params.get(coef).to_string()));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Everything computed for one channel on the way to its budget column.
#[derive(Debug, Clone)]
pub struct ChannelAnalysis<T> {
    pub budget: ChannelBudget<T>,
    pub curve: Option<AllanCurve<T>>,
    pub segments: Vec<SlopeSegment>,
    pub slope_estimate: Option<Estimate<T>>,
    pub fit: Option<WlsFit<T>>,
}

fn is_constant<T: Real>(series: &SampleSeries<T>) -> bool {
    let first = series.values()[0];
    series.values().iter().all(|&v| v == first)
}

/// detrend -> Allan curve -> slope segments -> slope readout -> WLS refinement.
pub fn analyze_channel<T: Real>(
    series: &SampleSeries<T>,
    opts: &BudgetOptions,
) -> ChannelAnalysis<T> {
    let detrended = detrend_mean(series);
    let curve = match tau_grid_log(series.dt(), series.len(), opts.points_per_decade)
        .and_then(|g| allan_curve(&detrended, &g, opts.estimator))
    {
        Ok(c) => c,
        Err(e) => {
            return ChannelAnalysis {
                budget: ChannelBudget::unreliable(series, &e),
                curve: None,
                segments: Vec::new(),
                slope_estimate: None,
                fit: None,
            }
        }
    };

    if is_constant(series) || curve.points.iter().all(|p| p.avar == T::zero()) {
        let mut budget = ChannelBudget::new(
            series.axis_label(),
            series.unit(),
            NoiseParams::default(),
            CoefficientStatus::default(),
        );
        budget.warnings.push(WARN_CONSTANT_CHANNEL.to_string());
        return ChannelAnalysis {
            budget,
            curve: Some(curve),
            segments: Vec::new(),
            slope_estimate: None,
            fit: None,
        };
    }

    match identify_curve(&curve, opts) {
        Ok(id) => {
            let budget = ChannelBudget {
                label: series.axis_label().to_string(),
                unit: series.unit(),
                params: id.params,
                status: id.status,
                warnings: id.warnings,
            };
            ChannelAnalysis {
                budget,
                curve: Some(curve),
                segments: id.segments,
                slope_estimate: Some(id.slope_estimate),
                fit: Some(id.fit),
            }
        }
        Err(e) => ChannelAnalysis {
            budget: ChannelBudget::unreliable(series, &e),
            curve: Some(curve),
            segments: Vec::new(),
            slope_estimate: None,
            fit: None,
        },
    }
}

/// Result of identifying noise coefficients on one Allan curve.
#[derive(Debug, Clone)]
pub struct CurveIdentification<T> {
    pub segments: Vec<SlopeSegment>,
    pub slope_estimate: Estimate<T>,
    pub fit: WlsFit<T>,
    pub params: NoiseParams<T>,
    pub status: CoefficientStatus,
    pub warnings: Vec<String>,
}

/// slope segments -> slope readout -> WLS refinement -> pruning.
pub fn identify_curve<T: Real>(
    curve: &AllanCurve<T>,
    opts: &BudgetOptions,
) -> Result<CurveIdentification<T>> {
    let segments = fit_slope_segments(curve)?;
    let estimate = extract_coefficients(curve, &segments);
    let mut fit = fit_composite_wls(curve, &estimate.params, &opts.wls);
    if let (Some((lo, hi)), false) = (estimate.floor_span, opts.wls.refine_bias_instability) {
        // a flat stretch can also be the crossover of a falling and a rising term
        let without = fit_composite_wls(
            curve,
            &estimate.params.with(Coefficient::B, T::zero()),
            &opts.wls,
        );
        let gain = weighted_objective_within(curve, &without.params, lo, hi)
            - weighted_objective_within(curve, &fit.params, lo, hi);
        if without.converged && gain < opts.significance {
            fit = WlsFit {
                objective_init: fit.objective_init,
                ..without
            };
        }
    }
    let fit = prune_terms(curve, &fit, &opts.wls, opts.significance);

    // terms whose own slope region lies outside the measured span are not reported
    let outside = out_of_span_terms(curve, &fit.params);
    let mut params = fit.params;
    let mut status = CoefficientStatus::default();
    let mut warnings = Vec::new();
    for c in Coefficient::ALL {
        if params.get(c) == T::zero() {
            continue;
        }
        if outside.contains(&c) {
            params.set(c, T::zero());
        } else {
            status.set(
                c,
                if fit.converged {
                    Status::Detected
                } else {
                    Status::Unreliable
                },
            );
        }
    }
    if !fit.converged {
        warnings.push("fit_not_converged".to_string());
    }
    if segments.iter().any(|s| !s.is_snapped()) {
        warnings.push("free_slope_segment".to_string());
    }
    Ok(CurveIdentification {
        segments,
        slope_estimate: estimate,
        fit,
        params,
        status,
        warnings,
    })
}

/// Analyses every channel independently; failures become unreliable columns.
pub fn analyze_recording<T: Real>(
    recording: &Recording<T>,
    opts: &BudgetOptions,
) -> Vec<ChannelAnalysis<T>> {
    recording
        .channels()
        .par_iter()
        .map(|ch| analyze_channel(ch, opts))
        .collect()
}

pub fn build_error_budget<T: Real>(
    recording: &Recording<T>,
    opts: &BudgetOptions,
) -> ErrorBudget<T> {
    ErrorBudget {
        estimator: opts.estimator,
        channels: analyze_recording(recording, opts)
            .into_iter()
            .map(|a| a.budget)
            .collect(),
    }
}

/// Relative tolerance for recovering a coefficient from simulated data.
pub fn roundtrip_tolerance(c: Coefficient) -> f64 {
    match c {
        Coefficient::B => 0.30,
        _ => 0.15,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub coefficient: Coefficient,
    pub truth: f64,
    pub recovered: f64,
    pub status: Status,
    /// `recovered/truth - 1`; absent when the truth is zero.
    pub rel_error: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares recovered coefficients against the generating ones. Coefficients
/// whose truth is zero pass when they are not detected.
pub fn compare_coefficients<T: Real>(
    truth: &NoiseParams<T>,
    budget: &ChannelBudget<T>,
) -> Vec<CoefficientCheck> {
    Coefficient::ALL
        .into_iter()
        .map(|c| {
            let t = truth.get(c).to_f64_lossy();
            let got = budget.params.get(c).to_f64_lossy();
            let status = budget.status.get(c);
            let tolerance = roundtrip_tolerance(c);
            let (rel_error, pass) = if t > 0.0 {
                let rel = got / t - 1.0;
                (Some(rel), rel.abs() <= tolerance)
            } else {
                (None, status != Status::Detected)
            };
            CoefficientCheck {
                coefficient: c,
                truth: t,
                recovered: got,
                status,
                rel_error,
                tolerance,
                pass,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::RecordingMeta;

    #[test]
    fn zero_recording_gives_zero_budget() {
        let ch = |l: &str| SampleSeries::labelled(vec![0.0f64; 500], 0.1, l).unwrap();
        let rec =
            Recording::new(vec![ch("gyro.x"), ch("gyro.y")], RecordingMeta::default()).unwrap();
        let budget = build_error_budget(&rec, &BudgetOptions::default());
        for c in &budget.channels {
            assert_eq!(c.params, NoiseParams::default());
            assert_eq!(c.status, CoefficientStatus::default());
            assert_eq!(c.warnings, vec![WARN_CONSTANT_CHANNEL.to_string()]);
        }
    }

    #[test]
    fn short_channel_is_unreliable_not_fatal() {
        let rec = Recording::new(
            vec![SampleSeries::labelled(vec![1.0f64, 2.0], 1.0, "a").unwrap()],
            RecordingMeta::default(),
        )
        .unwrap();
        let budget = build_error_budget(&rec, &BudgetOptions::default());
        assert_eq!(
            budget.channels[0].status,
            CoefficientStatus::all(Status::Unreliable)
        );
        assert!(budget.channels[0].warnings[0].starts_with("series_too_short"));
    }

    #[test]
    fn direct_construction_serializes_values_verbatim() {
        let p = NoiseParams {
            n: 0.0019,
            b: 0.0010,
            k: 6.7203,
            ..Default::default()
        };
        let budget = ErrorBudget {
            estimator: Estimator::Overlapping,
            channels: vec![ChannelBudget::from_values("accel.x", Unit::MilliG, p)],
        };
        let json = serde_json::to_string(&budget.to_json()).unwrap();
        for s in ["0.0019", "0.001", "6.7203", "\"mg\""] {
            assert!(json.contains(s), "{json}");
        }
        let mut csv = Vec::new();
        budget.write_table_csv(&mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert!(csv.contains("Angle/velocity random walk,0.0019"));
        assert!(csv.contains("Rate random walk,6.7203"));
        assert!(csv.contains("Quantization noise,0\n"));
    }

    #[test]
    fn comparison_rules() {
        let truth = NoiseParams {
            n: 1.0,
            b: 1.0,
            ..Default::default()
        };
        let got = ChannelBudget::from_values(
            "x",
            Unit::Unitless,
            NoiseParams {
                n: 1.1,
                b: 0.75,
                k: 0.1,
                ..Default::default()
            },
        );
        let checks = compare_coefficients(&truth, &got);
        let by = |c| checks.iter().find(|x| x.coefficient == c).unwrap();
        assert!(by(Coefficient::N).pass);
        assert!(by(Coefficient::B).pass);
        assert!(!by(Coefficient::K).pass);
        assert!(by(Coefficient::Q).pass);
    }
}
