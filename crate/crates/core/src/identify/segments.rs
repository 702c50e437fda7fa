//! Piecewise-linear segmentation of an Allan deviation curve in log-log space.

use serde::{Deserialize, Serialize};

use crate::allan::AllanCurve;
use crate::error::{Error, Result};
use crate::noise_model::Coefficient;
use crate::scalar::Real;

/// Slopes within this distance of a canonical slope are snapped onto it.
pub const SNAP_TOLERANCE: f64 = 0.15;
/// Minimum number of usable curve points needed for segmentation.
pub const MIN_USABLE_POINTS: usize = 10;
/// Minimum grid points per segment.
pub const MIN_SEGMENT_POINTS: usize = 3;
/// Largest slope standard error for which a segment may be snapped.
pub const MAX_SLOPE_STDERR: f64 = SNAP_TOLERANCE;
/// Half-width, in decades of tau, of the window used for local slopes.
const LOCAL_WINDOW_DECADES: f64 = 0.2;

/// A straight run of the curve in `log10(adev)` vs `log10(tau)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeSegment {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub slope: f64,
    /// Standard error of the free slope implied by the points' `rel_ci`.
    pub slope_stderr: f64,
    /// `log10(adev)` of the fitted line at tau = 1 s.
    pub intercept: f64,
    pub rms_residual: f64,
    /// Indices into the curve's point list, inclusive.
    pub first: usize,
    pub last: usize,
    /// Usable points the line was fitted to.
    pub n_points: usize,
    /// Canonical noise term the slope was snapped to; `None` flags a free slope.
    pub canonical: Option<Coefficient>,
}

impl SlopeSegment {
    /// Fitted line evaluated at `tau`.
    pub fn adev_at(&self, tau: f64) -> f64 {
        10f64.powf(self.intercept + self.slope * tau.log10())
    }

    pub fn is_snapped(&self) -> bool {
        self.canonical.is_some()
    }
}

/// Nearest canonical slope within [`SNAP_TOLERANCE`].
pub fn snap_slope(slope: f64) -> Option<Coefficient> {
    Coefficient::ALL
        .into_iter()
        .map(|c| (c, (slope - c.slope()).abs()))
        .filter(|&(_, d)| d <= SNAP_TOLERANCE)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, _)| c)
}

#[derive(Debug, Clone, Copy)]
struct LogPoint {
    index: usize,
    x: f64,
    y: f64,
    w: f64,
}

struct LineFit {
    slope: f64,
    intercept: f64,
    rms: f64,
    stderr: f64,
}

fn weighted_line(points: &[LogPoint]) -> LineFit {
    let sw: f64 = points.iter().map(|p| p.w).sum();
    let xm = points.iter().map(|p| p.w * p.x).sum::<f64>() / sw;
    let ym = points.iter().map(|p| p.w * p.y).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.w * (p.x - xm) * (p.x - xm)).sum();
    let sxy: f64 = points.iter().map(|p| p.w * (p.x - xm) * (p.y - ym)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    // w = 1/rel^2 and sd(log10 adev) = rel / ln 10
    let stderr = if sxx > 0.0 {
        1.0 / (std::f64::consts::LN_10 * sxx.sqrt())
    } else {
        f64::INFINITY
    };
    LineFit {
        stderr,
        ..line_with_slope(points, slope)
    }
}

fn line_with_slope(points: &[LogPoint], slope: f64) -> LineFit {
    let sw: f64 = points.iter().map(|p| p.w).sum();
    let intercept = points
        .iter()
        .map(|p| p.w * (p.y - slope * p.x))
        .sum::<f64>()
        / sw;
    let ss: f64 = points
        .iter()
        .map(|p| (p.y - intercept - slope * p.x).powi(2))
        .sum();
    LineFit {
        slope,
        intercept,
        rms: (ss / points.len() as f64).sqrt(),
        stderr: f64::INFINITY,
    }
}

fn log_points<T: Real>(curve: &AllanCurve<T>) -> Vec<LogPoint> {
    curve
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.usable && p.avar > T::zero() && p.rel_ci.is_finite())
        .map(|(index, p)| {
            let rel = p.rel_ci.to_f64_lossy().max(f64::MIN_POSITIVE);
            LogPoint {
                index,
                x: p.tau.to_f64_lossy().log10(),
                y: p.adev.to_f64_lossy().log10(),
                w: 1.0 / (rel * rel),
            }
        })
        .collect()
}

fn local_slopes(points: &[LogPoint]) -> Vec<f64> {
    (0..points.len())
        .map(|i| {
            let x0 = points[i].x;
            let mut lo = i;
            while lo > 0 && x0 - points[lo - 1].x <= LOCAL_WINDOW_DECADES + 1e-12 {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < points.len() && points[hi + 1].x - x0 <= LOCAL_WINDOW_DECADES + 1e-12 {
                hi += 1;
            }
            // always include at least one neighbour on each available side
            lo = lo.min(i.saturating_sub(1));
            hi = hi.max((i + 1).min(points.len() - 1));
            weighted_line(&points[lo..=hi]).slope
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Run {
    start: usize,
    end: usize,
    label: Option<Coefficient>,
}

impl Run {
    fn len(&self) -> usize {
        self.end - self.start + 1
    }
}

fn label_distance(a: Option<Coefficient>, mean_slope: f64) -> f64 {
    match a {
        Some(c) => (c.slope() - mean_slope).abs(),
        None => SNAP_TOLERANCE,
    }
}

fn merge_short_runs(mut runs: Vec<Run>, slopes: &[f64]) -> Vec<Run> {
    while runs.len() > 1 {
        let Some((i, _)) = runs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.len() < MIN_SEGMENT_POINTS)
            .min_by_key(|(_, r)| r.len())
        else {
            break;
        };
        let mean = slopes[runs[i].start..=runs[i].end].iter().sum::<f64>() / runs[i].len() as f64;
        let target = match (i.checked_sub(1), (i + 1 < runs.len()).then_some(i + 1)) {
            (Some(l), Some(r)) => {
                if label_distance(runs[l].label, mean) <= label_distance(runs[r].label, mean) {
                    l
                } else {
                    r
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => unreachable!(),
        };
        let run = runs.remove(i);
        let t = if target > i { target - 1 } else { target };
        runs[t].start = runs[t].start.min(run.start);
        runs[t].end = runs[t].end.max(run.end);
        // merging may have joined two runs with the same label
        let mut j = 0;
        while j + 1 < runs.len() {
            if runs[j].label == runs[j + 1].label {
                runs[j].end = runs[j + 1].end;
                runs.remove(j + 1);
            } else {
                j += 1;
            }
        }
    }
    runs
}

fn build_segment(points: &[LogPoint], start: usize, end: usize) -> SlopeSegment {
    let pts = &points[start..=end];
    let free = weighted_line(pts);
    let canonical = if free.stderr <= MAX_SLOPE_STDERR {
        snap_slope(free.slope)
    } else {
        None
    };
    let stderr = free.stderr;
    let fit = match canonical {
        Some(c) => line_with_slope(pts, c.slope()),
        None => free,
    };
    SlopeSegment {
        tau_lo: 10f64.powf(pts[0].x),
        tau_hi: 10f64.powf(pts[pts.len() - 1].x),
        slope: fit.slope,
        slope_stderr: stderr,
        intercept: fit.intercept,
        rms_residual: fit.rms,
        first: pts[0].index,
        last: pts[pts.len() - 1].index,
        n_points: pts.len(),
        canonical,
    }
}

/// Splits the curve into straight log-log segments ordered by tau.
///
/// Local slopes are estimated over a +-0.2 decade window and labelled with the
/// nearest canonical slope (-1, -1/2, 0, +1/2, +1) when within 0.15. Runs of
/// equal labels shorter than three points are merged into a neighbour, each
/// run gets a weighted least-squares line, and the line slope is snapped when
/// it lies within 0.15 of a canonical value and its standard error is at most
/// [`MAX_SLOPE_STDERR`]. Unsnapped segments keep their free slope and have
/// `canonical == None`.
pub fn fit_slope_segments<T: Real>(curve: &AllanCurve<T>) -> Result<Vec<SlopeSegment>> {
    let points = log_points(curve);
    if points.len() < MIN_USABLE_POINTS {
        return Err(Error::TooFewPoints {
            usable: points.len(),
            required: MIN_USABLE_POINTS,
        });
    }
    let slopes = local_slopes(&points);

    let mut runs: Vec<Run> = Vec::new();
    for (i, &s) in slopes.iter().enumerate() {
        let label = snap_slope(s);
        match runs.last_mut() {
            Some(r) if r.label == label => r.end = i,
            _ => runs.push(Run {
                start: i,
                end: i,
                label,
            }),
        }
    }
    let runs = merge_short_runs(runs, &slopes);

    let mut segments: Vec<(usize, usize, SlopeSegment)> = runs
        .iter()
        .map(|r| (r.start, r.end, build_segment(&points, r.start, r.end)))
        .collect();

    // neighbours that snap to the same term describe one regime
    let mut i = 0;
    while i + 1 < segments.len() {
        let same = segments[i].2.canonical.is_some()
            && segments[i].2.canonical == segments[i + 1].2.canonical;
        if same {
            let (start, end) = (segments[i].0, segments[i + 1].1);
            let merged = build_segment(&points, start, end);
            if merged.canonical == segments[i].2.canonical {
                segments[i] = (start, end, merged);
                segments.remove(i + 1);
                continue;
            }
        }
        i += 1;
    }
    Ok(segments.into_iter().map(|(_, _, s)| s).collect())
}
