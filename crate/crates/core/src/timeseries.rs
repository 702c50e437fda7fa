//! Uniformly sampled sensor streams and their CSV interchange format.
//!
//! A [`Recording`] is a set of equally long channels sharing one sample
//! interval. On disk it is a UTF-8 CSV file with a header row
//! `t,<chan>,<chan>,...`, a time column in seconds and one column per channel.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{compensated_mean, Real};

/// Default relative tolerance on sample-interval jitter.
pub const DEFAULT_RATE_TOLERANCE: f64 = 0.01;

/// Physical unit of a channel. Values are never converted between units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Unit {
    #[serde(rename = "mg")]
    MilliG,
    /// Gyroscope rate in the sensor's native unit.
    #[serde(rename = "gyro_units")]
    GyroUnits,
    #[serde(rename = "uT")]
    MicroTesla,
    #[default]
    #[serde(rename = "unitless")]
    Unitless,
}

impl Unit {
    /// Guess the unit from a channel identifier such as `gyro.x` or `accel.z`.
    pub fn from_label(label: &str) -> Unit {
        let prefix = label
            .split(['.', '_'])
            .next()
            .unwrap_or("")
            .to_ascii_lowercase();
        match prefix.as_str() {
            "acc" | "accel" | "accelerometer" => Unit::MilliG,
            "gyr" | "gyro" | "gyroscope" => Unit::GyroUnits,
            "mag" | "magnetometer" => Unit::MicroTesla,
            _ => Unit::Unitless,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Unit::MilliG => "mg",
            Unit::GyroUnits => "gyro_units",
            Unit::MicroTesla => "uT",
            Unit::Unitless => "unitless",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A uniformly sampled scalar stream for one sensor axis.
///
/// Construction guarantees a positive sample interval and a non-empty,
/// all-finite value sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries<T> {
    values: Vec<T>,
    dt: T,
    unit: Unit,
    axis_label: String,
}

impl<T: Real> SampleSeries<T> {
    pub fn new(values: Vec<T>, dt: T, unit: Unit, axis_label: impl Into<String>) -> Result<Self> {
        let axis_label = axis_label.into();
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::field(
                "dt",
                format!("sample interval must be positive, got {dt}"),
            ));
        }
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                channel: axis_label,
                index,
            });
        }
        Ok(Self {
            values,
            dt,
            unit,
            axis_label,
        })
    }

    /// Series labelled `label` with the unit inferred from the label.
    pub fn labelled(values: Vec<T>, dt: T, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let unit = Unit::from_label(&label);
        Self::new(values, dt, unit, label)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn axis_label(&self) -> &str {
        &self.axis_label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> T {
        self.dt * T::of_usize(self.values.len())
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Same metadata, new values. Values must keep the series invariants.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(values, self.dt, self.unit, self.axis_label.clone())
    }

    /// Copy with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| v * factor).collect())
    }
}

/// Removes the sample mean (the deterministic constant part) from a series.
pub fn detrend_mean<T: Real>(series: &SampleSeries<T>) -> SampleSeries<T> {
    let mean = compensated_mean(series.values());
    SampleSeries {
        values: series.values.iter().map(|&v| v - mean).collect(),
        dt: series.dt,
        unit: series.unit,
        axis_label: series.axis_label.clone(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub source: String,
    /// Seconds since the Unix epoch of the first sample, when known.
    pub start_epoch: Option<f64>,
}

/// Multi-channel recording; every channel shares `dt` and length.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording<T> {
    channels: Vec<SampleSeries<T>>,
    meta: RecordingMeta,
}

impl<T: Real> Recording<T> {
    pub fn new(channels: Vec<SampleSeries<T>>, meta: RecordingMeta) -> Result<Self> {
        let first = channels.first().ok_or(Error::EmptyInput)?;
        let (dt, len) = (first.dt(), first.len());
        for (i, ch) in channels.iter().enumerate() {
            if ch.dt() != dt {
                return Err(Error::Sampling(format!(
                    "channel `{}` has dt {} but `{}` has {}",
                    ch.axis_label(),
                    ch.dt(),
                    first.axis_label(),
                    dt
                )));
            }
            if ch.len() != len {
                return Err(Error::Sampling(format!(
                    "channel `{}` has {} samples, expected {}",
                    ch.axis_label(),
                    ch.len(),
                    len
                )));
            }
            if channels[..i]
                .iter()
                .any(|c| c.axis_label() == ch.axis_label())
            {
                return Err(Error::field(
                    "channels",
                    format!("duplicate channel `{}`", ch.axis_label()),
                ));
            }
        }
        Ok(Self { channels, meta })
    }

    pub fn channels(&self) -> &[SampleSeries<T>] {
        &self.channels
    }

    pub fn channel(&self, label: &str) -> Option<&SampleSeries<T>> {
        self.channels.iter().find(|c| c.axis_label() == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|c| c.axis_label())
    }

    pub fn meta(&self) -> &RecordingMeta {
        &self.meta
    }

    pub fn dt(&self) -> T {
        self.channels[0].dt()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Meaning of the first CSV column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeColumn {
    /// Timestamps in seconds; the interval is inferred.
    Seconds,
    /// Consecutive integer sample indices with a known interval.
    SampleIndex { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvFormat {
    pub time_column: TimeColumn,
    /// Relative tolerance on interval jitter.
    pub tolerance: f64,
}

impl Default for CsvFormat {
    fn default() -> Self {
        Self {
            time_column: TimeColumn::Seconds,
            tolerance: DEFAULT_RATE_TOLERANCE,
        }
    }
}

/// Sample interval of a timestamp sequence: the median successive difference.
///
/// Fails when timestamps are not strictly increasing or when any interval
/// deviates from the median by more than `tolerance` (relative).
pub fn infer_rate(timestamps: &[f64], tolerance: f64) -> Result<f64> {
    if timestamps.len() < 2 {
        return Err(Error::Sampling(format!(
            "need at least 2 timestamps, got {}",
            timestamps.len()
        )));
    }
    let mut diffs = Vec::with_capacity(timestamps.len() - 1);
    for (i, w) in timestamps.windows(2).enumerate() {
        let d = w[1] - w[0];
        if !(d > 0.0) {
            return Err(Error::Sampling(format!(
                "timestamps not strictly increasing at sample {}: {} -> {}",
                i + 1,
                w[0],
                w[1]
            )));
        }
        diffs.push(d);
    }
    let mut sorted = diffs.clone();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    if let Some((i, d)) = diffs
        .iter()
        .enumerate()
        .find(|(_, &d)| ((d - median) / median).abs() > tolerance)
    {
        return Err(Error::Sampling(format!(
            "interval {} at sample {} deviates from median {} by more than {:.3}%",
            d,
            i + 1,
            median,
            tolerance * 100.0
        )));
    }
    Ok(median)
}

// Timestamps are written as decimals, so the true interval is almost always a
// short decimal; rounding the median to 15 significant digits recovers it
// bit-exactly from accumulated representation error.
fn snap_interval(dt: f64) -> f64 {
    format!("{dt:.14e}").parse().unwrap_or(dt)
}

// Files produced by `write_recording` hold `t[i] = i * dt` exactly.
fn exact_grid_interval(times: &[f64]) -> Option<f64> {
    let dt = *times.get(1)?;
    let exact = times[0] == 0.0 && times.iter().enumerate().all(|(i, &t)| t == i as f64 * dt);
    exact.then_some(dt)
}

/// Reads a recording from any CSV source.
pub fn read_recording<T: Real, R: Read>(source: R, format: &CsvFormat) -> Result<Recording<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(str::to_owned)
        .collect::<Vec<_>>();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    if headers.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "header must name a time column and at least one channel".into(),
        });
    }
    let labels = &headers[1..];

    let mut times = Vec::new();
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); labels.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let t: f64 = record[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid time value `{}`", &record[0]),
        })?;
        times.push(t);
        for (col, field) in columns.iter_mut().zip(record.iter().skip(1)) {
            let v: T = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid number `{field}`"),
            })?;
            col.push(v);
        }
    }
    if times.is_empty() {
        return Err(Error::EmptyInput);
    }

    let dt = match format.time_column {
        TimeColumn::Seconds => {
            let median = infer_rate(&times, format.tolerance)?;
            exact_grid_interval(&times).unwrap_or_else(|| snap_interval(median))
        }
        TimeColumn::SampleIndex { dt } => {
            if let Some(i) = times.windows(2).position(|w| w[1] - w[0] != 1.0) {
                return Err(Error::Sampling(format!(
                    "sample index jumps at row {}",
                    i + 2
                )));
            }
            dt
        }
    };

    let dt = T::of(dt);
    let channels = labels
        .iter()
        .zip(columns)
        .map(|(label, values)| SampleSeries::labelled(values, dt, label.clone()))
        .collect::<Result<Vec<_>>>()?;
    Recording::new(channels, RecordingMeta::default())
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Loads a recording from a CSV file.
pub fn load_recording<T: Real>(path: impl AsRef<Path>, format: &CsvFormat) -> Result<Recording<T>> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let mut rec = read_recording(BufReader::new(file), format)?;
    rec.meta.source = path.display().to_string();
    Ok(rec)
}

/// Writes a recording as CSV. Numbers use the shortest representation that
/// parses back to the identical value, so a save/load cycle is lossless.
pub fn write_recording<T: Real, W: Write>(recording: &Recording<T>, sink: W) -> Result<()> {
    let mut out = BufWriter::new(sink);
    write!(out, "t")?;
    for label in recording.labels() {
        write!(out, ",{label}")?;
    }
    writeln!(out)?;
    let dt = recording.dt().to_f64_lossy();
    for i in 0..recording.len() {
        write!(out, "{}", i as f64 * dt)?;
        for ch in recording.channels() {
            write!(out, ",{}", ch.values()[i])?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_recording<T: Real>(recording: &Recording<T>, path: impl AsRef<Path>) -> Result<()> {
    write_recording(recording, File::create(path)?)
}
