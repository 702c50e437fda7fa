use serde::{Deserialize, Serialize};

use super::segments::SlopeSegment;
use crate::allan::AllanCurve;
use crate::noise_model::{Coefficient, NoiseParams, BI_FACTOR};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Detected,
    #[default]
    NotDetected,
    Unreliable,
}

/// Per-coefficient detection flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct CoefficientStatus {
    pub q: Status,
    pub n: Status,
    pub b: Status,
    pub k: Status,
    pub r: Status,
}

impl CoefficientStatus {
    pub fn all(status: Status) -> Self {
        Self {
            q: status,
            n: status,
            b: status,
            k: status,
            r: status,
        }
    }

    pub fn get(&self, c: Coefficient) -> Status {
        match c {
            Coefficient::Q => self.q,
            Coefficient::N => self.n,
            Coefficient::B => self.b,
            Coefficient::K => self.k,
            Coefficient::R => self.r,
        }
    }

    pub fn set(&mut self, c: Coefficient, s: Status) {
        match c {
            Coefficient::Q => self.q = s,
            Coefficient::N => self.n = s,
            Coefficient::B => self.b = s,
            Coefficient::K => self.k = s,
            Coefficient::R => self.r = s,
        }
    }

    pub fn detected(&self) -> impl Iterator<Item = Coefficient> + '_ {
        Coefficient::ALL
            .into_iter()
            .filter(|&c| self.get(c) == Status::Detected)
    }
}

/// Coefficients together with how each was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub params: NoiseParams<T>,
    pub status: CoefficientStatus,
    /// Tau span of the flat segment `b` was read from.
    pub floor_span: Option<(f64, f64)>,
}

impl<T: Real> Estimate<T> {
    pub fn not_detected() -> Self {
        Self {
            params: NoiseParams::default(),
            status: CoefficientStatus::default(),
            floor_span: None,
        }
    }
}

/// Cluster time at which each slope's line is read.
fn readout_tau(c: Coefficient) -> f64 {
    match c {
        Coefficient::Q => 3f64.sqrt(),
        Coefficient::N => 1.0,
        Coefficient::B => f64::NAN,
        Coefficient::K => 3.0,
        Coefficient::R => 2f64.sqrt(),
    }
}

/// Reads the five coefficients off snapped segments.
///
/// `q`, `n`, `k` and `r` come from the segment's fitted line evaluated (or
/// extrapolated) at tau = sqrt(3), 1, 3 and sqrt(2) s. `b` is the smallest
/// deviation inside the flat segment divided by 0.664. When a slope occurs in
/// several segments the longest one is used. Missing slopes yield zero with
/// [`Status::NotDetected`].
pub fn extract_coefficients<T: Real>(
    curve: &AllanCurve<T>,
    segments: &[SlopeSegment],
) -> Estimate<T> {
    let mut est = Estimate::not_detected();
    for c in Coefficient::ALL {
        let best = segments
            .iter()
            .filter(|s| s.canonical == Some(c))
            .max_by(|a, b| {
                a.n_points
                    .cmp(&b.n_points)
                    .then(b.rms_residual.total_cmp(&a.rms_residual))
            });
        let Some(seg) = best else { continue };
        let value = match c {
            Coefficient::B => {
                let floor = curve.points[seg.first..=seg.last]
                    .iter()
                    .filter(|p| p.usable && p.avar > T::zero())
                    .map(|p| p.adev.to_f64_lossy())
                    .fold(f64::INFINITY, f64::min);
                floor / BI_FACTOR
            }
            _ => seg.adev_at(readout_tau(c)),
        };
        if value.is_finite() && value > 0.0 {
            est.params.set(c, T::of(value));
            est.status.set(c, Status::Detected);
            if c == Coefficient::B {
                est.floor_span = Some((seg.tau_lo, seg.tau_hi));
            }
        }
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allan::tau_grid_log;
    use crate::identify::fit_slope_segments;
    use crate::noise_model::theoretical_adev;

    #[test]
    fn white_only_inverts_exactly() {
        let g = tau_grid_log(0.01, 1_000_000, 10).unwrap();
        let c = theoretical_adev(
            &NoiseParams {
                n: 1.0,
                ..Default::default()
            },
            &g,
        );
        let est: Estimate<f64> = extract_coefficients(&c, &fit_slope_segments(&c).unwrap());
        assert!((est.params.n - 1.0).abs() < 0.01);
        assert_eq!(est.status.n, Status::Detected);
        for other in [
            Coefficient::Q,
            Coefficient::B,
            Coefficient::K,
            Coefficient::R,
        ] {
            assert_eq!(est.status.get(other), Status::NotDetected);
            assert_eq!(est.params.get(other), 0.0);
        }
    }

    #[test]
    fn no_segments_means_nothing_detected() {
        let g = tau_grid_log(1.0, 100, 10).unwrap();
        let c = theoretical_adev(&NoiseParams::<f64>::default(), &g);
        let est = extract_coefficients(&c, &[]);
        assert_eq!(est, Estimate::not_detected());
    }
}
