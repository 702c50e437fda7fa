//! Allan variance and deviation over log-spaced cluster times.
//!
//! Two estimators are provided. The non-overlapping ([`avar_standard`]) form
//! averages disjoint clusters; the overlapping form ([`avar_overlapping`])
//! slides the cluster window one sample at a time and is evaluated from
//! prefix sums in O(N) per cluster time.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{compensated_mean, CompensatedSum, Real};
use crate::timeseries::SampleSeries;

pub const DEFAULT_POINTS_PER_DECADE: usize = 10;

/// Largest cluster size that still leaves two cluster differences.
pub fn max_cluster_size(n_samples: usize) -> usize {
    n_samples.saturating_sub(1) / 2
}

/// Cluster-time grid. Every `taus[i]` equals `m_values[i] * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauGrid<T> {
    dt: T,
    n_samples: usize,
    m_values: Vec<usize>,
    taus: Vec<T>,
}

impl<T: Real> TauGrid<T> {
    /// Grid from explicit cluster sizes; they must be strictly increasing and
    /// within `1..=floor((n_samples-1)/2)`.
    pub fn from_cluster_sizes(dt: T, n_samples: usize, m_values: Vec<usize>) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::field("dt", "must be positive"));
        }
        let cap = max_cluster_size(n_samples);
        if cap == 0 {
            return Err(Error::SeriesTooShort { n_samples });
        }
        if m_values.is_empty() {
            return Err(Error::field("m_values", "grid is empty"));
        }
        if m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::field(
                "m_values",
                "cluster sizes must be strictly increasing",
            ));
        }
        if m_values[0] == 0 || m_values[m_values.len() - 1] > cap {
            return Err(Error::field(
                "m_values",
                format!("cluster sizes must lie in 1..={cap}"),
            ));
        }
        let taus = m_values.iter().map(|&m| T::of_usize(m) * dt).collect();
        Ok(Self {
            dt,
            n_samples,
            m_values,
            taus,
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn m_values(&self) -> &[usize] {
        &self.m_values
    }

    pub fn taus(&self) -> &[T] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.m_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_values.is_empty()
    }

    fn check_series(&self, series: &SampleSeries<T>) -> Result<()> {
        if series.len() != self.n_samples {
            return Err(Error::GridMismatch(format!(
                "grid built for {} samples, series `{}` has {}",
                self.n_samples,
                series.axis_label(),
                series.len()
            )));
        }
        if series.dt() != self.dt {
            return Err(Error::GridMismatch(format!(
                "grid dt {} differs from series dt {}",
                self.dt,
                series.dt()
            )));
        }
        Ok(())
    }
}

/// Log-spaced grid: cluster sizes `round(10^(j/ppd))`, deduplicated and capped
/// at `floor((n_samples-1)/2)`.
pub fn tau_grid_log<T: Real>(
    dt: T,
    n_samples: usize,
    points_per_decade: usize,
) -> Result<TauGrid<T>> {
    if points_per_decade == 0 {
        return Err(Error::field("points_per_decade", "must be at least 1"));
    }
    let cap = max_cluster_size(n_samples);
    if cap == 0 {
        return Err(Error::SeriesTooShort { n_samples });
    }
    let mut ms: Vec<usize> = Vec::new();
    for j in 0.. {
        let m = 10f64.powf(j as f64 / points_per_decade as f64).round() as usize;
        if m > cap {
            break;
        }
        if ms.last() != Some(&m) {
            ms.push(m);
        }
    }
    TauGrid::from_cluster_sizes(dt, n_samples, ms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Standard,
    #[default]
    Overlapping,
    /// Analytic curve evaluated from a noise model; not an estimate.
    Model,
}

impl Estimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Standard => "standard",
            Estimator::Overlapping => "overlapping",
            Estimator::Model => "model",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Estimator::Standard),
            "overlapping" => Ok(Estimator::Overlapping),
            "model" => Ok(Estimator::Model),
            other => Err(Error::field(
                "estimator",
                format!("unknown estimator `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllanPoint<T> {
    pub tau: T,
    pub m: usize,
    pub avar: T,
    pub adev: T,
    /// 1-sigma relative uncertainty of `adev`.
    pub rel_ci: T,
    /// False when fewer than two independent clusters back the point.
    pub usable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllanCurve<T> {
    pub points: Vec<AllanPoint<T>>,
    pub estimator: Estimator,
    pub source_len: usize,
    pub dt: T,
}

impl<T: Real> AllanCurve<T> {
    /// Builds a curve from per-point variances and attaches confidence bounds.
    pub fn from_avar(grid: &TauGrid<T>, avar: Vec<T>, estimator: Estimator) -> Self {
        let points = grid
            .m_values()
            .iter()
            .zip(grid.taus())
            .zip(avar)
            .map(|((&m, &tau), avar)| AllanPoint {
                tau,
                m,
                avar,
                adev: avar.sqrt(),
                rel_ci: T::zero(),
                usable: true,
            })
            .collect();
        confidence_bounds(&AllanCurve {
            points,
            estimator,
            source_len: grid.n_samples(),
            dt: grid.dt(),
        })
    }

    pub fn taus(&self) -> Vec<T> {
        self.points.iter().map(|p| p.tau).collect()
    }

    pub fn adevs(&self) -> Vec<T> {
        self.points.iter().map(|p| p.adev).collect()
    }

    pub fn usable_points(&self) -> impl Iterator<Item = &AllanPoint<T>> {
        self.points.iter().filter(|p| p.usable)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The grid the curve was evaluated on.
    pub fn grid(&self) -> Result<TauGrid<T>> {
        TauGrid::from_cluster_sizes(
            self.dt,
            self.source_len,
            self.points.iter().map(|p| p.m).collect(),
        )
    }
}

/// Number of independent clusters backing a cluster size.
pub fn independent_clusters(n_samples: usize, m: usize) -> usize {
    n_samples / m.max(1)
}

/// 1-sigma relative confidence of an Allan deviation backed by `k` clusters,
/// `1/sqrt(2(K-1))`. `None` when `k <= 1`.
pub fn relative_confidence(k: usize) -> Option<f64> {
    (k > 1).then(|| 1.0 / (2.0 * (k as f64 - 1.0)).sqrt())
}

/// Recomputes `rel_ci` and `usable` for every point from `source_len` and `m`.
///
/// Both estimators use `K = floor(N/m)` clusters; points with `K <= 1` get an
/// infinite bound and are flagged unusable.
pub fn confidence_bounds<T: Real>(curve: &AllanCurve<T>) -> AllanCurve<T> {
    let points = curve
        .points
        .iter()
        .map(|p| {
            let k = independent_clusters(curve.source_len, p.m);
            match relative_confidence(k) {
                Some(rel) => AllanPoint {
                    rel_ci: T::of(rel),
                    usable: true,
                    ..*p
                },
                None => AllanPoint {
                    rel_ci: T::infinity(),
                    usable: false,
                    ..*p
                },
            }
        })
        .collect();
    AllanCurve {
        points,
        ..curve.clone()
    }
}

/// Non-overlapping Allan variance:
/// `AVAR = 1/(2(M-1)) * sum (ybar[k+1] - ybar[k])^2` over `M = floor(N/m)`
/// disjoint cluster means.
pub fn avar_standard<T: Real>(
    series: &SampleSeries<T>,
    grid: &TauGrid<T>,
) -> Result<AllanCurve<T>> {
    grid.check_series(series)?;
    let mean = compensated_mean(series.values());
    let centered: Vec<T> = series.values().iter().map(|&v| v - mean).collect();
    let avar = grid
        .m_values()
        .par_iter()
        .map(|&m| {
            let mf = T::of_usize(m);
            let means: Vec<T> = centered
                .chunks_exact(m)
                .map(|c| {
                    let mut acc = CompensatedSum::new();
                    c.iter().for_each(|&v| acc.add(v));
                    acc.value() / mf
                })
                .collect();
            let mut acc = CompensatedSum::new();
            for w in means.windows(2) {
                let d = w[1] - w[0];
                acc.add(d * d);
            }
            acc.value() / (T::of(2.0) * T::of_usize(means.len() - 1))
        })
        .collect();
    Ok(AllanCurve::from_avar(grid, avar, Estimator::Standard))
}

#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn two_diff<T: Real>(a: T, b: T) -> (T, T) {
    let s = a - b;
    let bb = a - s;
    let err = (a - (s + bb)) + (bb - b);
    (s, err)
}

/// Prefix sums kept as unevaluated `hi + lo` pairs.
struct PrefixSums<T> {
    hi: Vec<T>,
    lo: Vec<T>,
}

impl<T: Real> PrefixSums<T> {
    fn new(values: &[T]) -> Self {
        let mut hi = Vec::with_capacity(values.len() + 1);
        let mut lo = Vec::with_capacity(values.len() + 1);
        hi.push(T::zero());
        lo.push(T::zero());
        let (mut h, mut l) = (T::zero(), T::zero());
        for &v in values {
            let (s, e) = two_sum(h, v);
            h = s;
            l = l + e;
            hi.push(h);
            lo.push(l);
        }
        Self { hi, lo }
    }

    /// `S[a] - S[b]` as an unevaluated pair.
    #[inline]
    fn span(&self, a: usize, b: usize) -> (T, T) {
        let (s, e) = two_diff(self.hi[a], self.hi[b]);
        (s, e + (self.lo[a] - self.lo[b]))
    }
}

/// Overlapping Allan variance,
/// `AVAR = 1/(2 m^2 (N-2m+1)) * sum_i (S[i+2m] - 2 S[i+m] + S[i])^2`,
/// with `S` the prefix sums of the mean-removed series.
pub fn avar_overlapping<T: Real>(
    series: &SampleSeries<T>,
    grid: &TauGrid<T>,
) -> Result<AllanCurve<T>> {
    grid.check_series(series)?;
    let mean = compensated_mean(series.values());
    let centered: Vec<T> = series.values().iter().map(|&v| v - mean).collect();
    let prefix = PrefixSums::new(&centered);
    let n = centered.len();
    let avar = grid
        .m_values()
        .par_iter()
        .map(|&m| {
            let terms = n - 2 * m + 1;
            let mut acc = CompensatedSum::new();
            for i in 0..terms {
                let (a_hi, a_lo) = prefix.span(i + 2 * m, i + m);
                let (b_hi, b_lo) = prefix.span(i + m, i);
                let d = (a_hi - b_hi) + (a_lo - b_lo);
                acc.add(d * d);
            }
            let mf = T::of_usize(m);
            acc.value() / (T::of(2.0) * mf * mf * T::of_usize(terms))
        })
        .collect();
    Ok(AllanCurve::from_avar(grid, avar, Estimator::Overlapping))
}

/// Dispatches on the estimator. `Estimator::Model` is not a data estimator and
/// is rejected.
pub fn allan_curve<T: Real>(
    series: &SampleSeries<T>,
    grid: &TauGrid<T>,
    estimator: Estimator,
) -> Result<AllanCurve<T>> {
    match estimator {
        Estimator::Standard => avar_standard(series, grid),
        Estimator::Overlapping => avar_overlapping(series, grid),
        Estimator::Model => Err(Error::field(
            "estimator",
            "`model` cannot be computed from data",
        )),
    }
}

/// One exported curve row, as written to CSV and JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub tau: f64,
    pub avar: f64,
    pub adev: f64,
    pub rel_ci: Option<f64>,
}

impl<T: Real> From<&AllanPoint<T>> for CurveRecord {
    fn from(p: &AllanPoint<T>) -> Self {
        let rel = p.rel_ci.to_f64_lossy();
        CurveRecord {
            tau: p.tau.to_f64_lossy(),
            avar: p.avar.to_f64_lossy(),
            adev: p.adev.to_f64_lossy(),
            rel_ci: rel.is_finite().then_some(rel),
        }
    }
}

pub fn curve_records<T: Real>(curve: &AllanCurve<T>) -> Vec<CurveRecord> {
    curve.points.iter().map(CurveRecord::from).collect()
}

/// Writes `tau,avar,adev,rel_ci` rows. Unusable bounds are left empty.
pub fn write_curve_csv<T: Real, W: Write>(curve: &AllanCurve<T>, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["tau", "avar", "adev", "rel_ci"])
        .map_err(csv_io)?;
    for r in curve_records(curve) {
        let rel = r.rel_ci.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            r.tau.to_string(),
            r.avar.to_string(),
            r.adev.to_string(),
            rel,
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(source: R) -> Result<Vec<CurveRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<CurveRecord>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(i as u64 + 2, |p| p.line()),
            message: e.to_string(),
        })?;
        out.push(row);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    if out.windows(2).any(|w| w[0].tau >= w[1].tau) {
        return Err(Error::field(
            "tau",
            "cluster times must be strictly increasing",
        ));
    }
    Ok(out)
}

/// JSON array of point objects.
pub fn curve_to_json<T: Real>(curve: &AllanCurve<T>) -> serde_json::Value {
    serde_json::to_value(curve_records(curve)).expect("curve records serialize")
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
