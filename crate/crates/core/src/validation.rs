//! Empirical-versus-model overlays.

use serde::{Deserialize, Serialize};

use crate::allan::CurveRecord;
use crate::error::{Error, Result};
use crate::noise_model::{theoretical_avar, NoiseParams};

/// Width of the acceptance band in units of `rel_ci`.
pub const BAND_SIGMAS: f64 = 3.0;

/// True when `model` lies within `sigmas * rel_ci` (relative) of `empirical`.
pub fn within_band(empirical: f64, model: f64, rel_ci: f64, sigmas: f64) -> bool {
    (empirical - model).abs() <= sigmas * rel_ci * empirical
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub tau: f64,
    pub adev_empirical: f64,
    pub rel_ci: Option<f64>,
    pub adev_model: f64,
    pub within_3ci: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlaySummary {
    pub points: usize,
    pub within: usize,
    pub in_bound_fraction: f64,
}

/// Pairs empirical points with model deviations on the same grid.
pub fn overlay(
    empirical: &[CurveRecord],
    model_tau: &[f64],
    model_adev: &[f64],
) -> Result<Vec<OverlayRow>> {
    if empirical.len() != model_tau.len() || model_tau.len() != model_adev.len() {
        return Err(Error::GridMismatch(format!(
            "{} empirical points vs {} model points",
            empirical.len(),
            model_tau.len()
        )));
    }
    empirical
        .iter()
        .zip(model_tau.iter().zip(model_adev))
        .map(|(e, (&t, &m))| {
            if (e.tau - t).abs() > 1e-9 * e.tau.abs() {
                return Err(Error::GridMismatch(format!(
                    "tau {} does not match model tau {}",
                    e.tau, t
                )));
            }
            let within = e
                .rel_ci
                .is_some_and(|r| within_band(e.adev, m, r, BAND_SIGMAS));
            Ok(OverlayRow {
                tau: e.tau,
                adev_empirical: e.adev,
                rel_ci: e.rel_ci,
                adev_model: m,
                within_3ci: within,
            })
        })
        .collect()
}

/// Overlay against the analytic model evaluated at the empirical cluster times.
pub fn model_overlay(empirical: &[CurveRecord], params: &NoiseParams<f64>) -> Vec<OverlayRow> {
    let taus: Vec<f64> = empirical.iter().map(|e| e.tau).collect();
    let adev: Vec<f64> = taus
        .iter()
        .map(|&t| theoretical_avar(params, t).sqrt())
        .collect();
    overlay(empirical, &taus, &adev).expect("grids agree by construction")
}

/// Summary over rows whose tau lies in `[tau_lo, tau_hi]`.
pub fn summarize(rows: &[OverlayRow], tau_lo: f64, tau_hi: f64) -> OverlaySummary {
    let sel: Vec<&OverlayRow> = rows
        .iter()
        .filter(|r| r.tau >= tau_lo && r.tau <= tau_hi)
        .collect();
    let within = sel.iter().filter(|r| r.within_3ci).count();
    let fraction = if sel.is_empty() {
        0.0
    } else {
        within as f64 / sel.len() as f64
    };
    OverlaySummary {
        points: sel.len(),
        within,
        in_bound_fraction: fraction,
    }
}

pub fn summarize_all(rows: &[OverlayRow]) -> OverlaySummary {
    summarize(rows, f64::NEG_INFINITY, f64::INFINITY)
}

/// The `decades`-wide tau window centred (in log space) on the span of `taus`.
pub fn central_window(taus: &[f64], decades: f64) -> (f64, f64) {
    let lo = taus.first().copied().unwrap_or(1.0).log10();
    let hi = taus.last().copied().unwrap_or(1.0).log10();
    let mid = 0.5 * (lo + hi);
    (
        10f64.powf(mid - decades / 2.0),
        10f64.powf(mid + decades / 2.0),
    )
}
