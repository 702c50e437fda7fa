//! Multi-channel simulation recipes and the reference parameter sets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise_model::{simulate_composite, NoiseParams, Process, SimSpec};
use crate::scalar::Real;
use crate::timeseries::{Recording, RecordingMeta, SampleSeries, Unit};

/// Bias-instability resampling period used by the reference sets, seconds.
pub const REFERENCE_BI_PERIOD: f64 = 100.0;

/// Process set and coefficients for one simulated channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ChannelSpec<T> {
    pub params: NoiseParams<T>,
    pub enabled: BTreeSet<Process>,
}

/// Recipe for a whole recording. Channel order follows `channels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct RecordingSpec<T> {
    pub dt: T,
    pub n_samples: usize,
    pub seed: u64,
    pub channels: Vec<NamedChannel<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct NamedChannel<T> {
    pub name: String,
    #[serde(flatten)]
    pub spec: ChannelSpec<T>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for channel `index` of a recording seeded with `seed`.
pub fn channel_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

impl<T: Real> RecordingSpec<T> {
    pub fn channel_sim_spec(&self, index: usize) -> SimSpec<T> {
        let ch = &self.channels[index].spec;
        SimSpec {
            params: ch.params,
            dt: self.dt,
            n_samples: self.n_samples,
            seed: channel_seed(self.seed, index),
            enabled: ch.enabled.clone(),
        }
    }

    /// Wraps a single-stream spec as a one-channel recording named `name`.
    /// The channel keeps the spec's own seed.
    pub fn from_sim_spec(spec: &SimSpec<T>, name: impl Into<String>) -> Self {
        Self {
            dt: spec.dt,
            n_samples: spec.n_samples,
            seed: spec.seed,
            channels: vec![NamedChannel {
                name: name.into(),
                spec: ChannelSpec {
                    params: spec.params,
                    enabled: spec.enabled.clone(),
                },
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::field("channels", "at least one channel is required"));
        }
        // recording-level fields, checked without a channel prefix
        SimSpec::new(NoiseParams::default(), self.dt, self.n_samples, self.seed).validate()?;
        for (i, ch) in self.channels.iter().enumerate() {
            if ch.name.is_empty() || ch.name.contains(',') {
                return Err(Error::field(
                    format!("channels[{i}].name"),
                    "must be non-empty without commas",
                ));
            }
            if self.channels[..i].iter().any(|c| c.name == ch.name) {
                return Err(Error::field(
                    format!("channels[{i}].name"),
                    format!("duplicate channel `{}`", ch.name),
                ));
            }
            self.channel_sim_spec(i)
                .validate()
                .map_err(|e| prefix_field(e, &format!("channels[{i}].")))?;
        }
        Ok(())
    }
}

fn prefix_field(e: Error, prefix: &str) -> Error {
    match e {
        Error::InvalidField { field, message } => Error::InvalidField {
            field: format!("{prefix}{field}"),
            message,
        },
        other => other,
    }
}

/// Simulates every channel of `spec`.
pub fn simulate_recording<T: Real>(spec: &RecordingSpec<T>) -> Result<Recording<T>> {
    spec.validate()?;
    let channels = (0..spec.channels.len())
        .map(|i| {
            let series = simulate_composite(&spec.channel_sim_spec(i))?;
            let name = &spec.channels[i].name;
            SampleSeries::new(
                series.into_values(),
                spec.dt,
                Unit::from_label(name),
                name.clone(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Recording::new(
        channels,
        RecordingMeta {
            source: "simulation".into(),
            start_epoch: None,
        },
    )
}

/// Processes implied by the non-zero coefficients of `params`.
pub fn processes_for<T: Real>(params: &NoiseParams<T>) -> BTreeSet<Process> {
    let mut set = BTreeSet::new();
    let pairs = [
        (params.q, Process::Quantization),
        (params.n, Process::White),
        (params.b, Process::BiasInstability),
        (params.k, Process::RandomWalk),
        (params.r, Process::Drift),
        (params.gm_sigma, Process::GaussMarkov),
    ];
    for (v, p) in pairs {
        if v > T::zero() {
            set.insert(p);
        }
    }
    set
}

/// Reference error budget: nine axes as `(channel, [q, n, b, k, r])`.
pub const REFERENCE_TABLE: [(&str, [f64; 5]); 9] = [
    ("accel.x", [0.0, 0.0019, 0.0010, 6.7203, 0.0]),
    ("accel.y", [0.0, 0.0019, 0.0011, 5.2829, 0.0]),
    ("accel.z", [0.0, 0.0032, 0.0012, 2.4941, 0.0]),
    ("gyro.x", [0.0002, 0.006, 0.0034, 6.1290, 0.0]),
    ("gyro.y", [0.0, 0.086, 0.0034, 1.3782, 3.6565]),
    ("gyro.z", [0.0004, 0.0092, 0.0034, 5.4810, 4.0463]),
    ("mag.x", [0.0204, 1.1184, 0.0749, 0.0029, 0.0]),
    ("mag.y", [0.0, 1.1370, 0.1194, 0.0021, 1.0277]),
    ("mag.z", [0.0093, 1.0896, 0.1325, 0.0027, 5.7807]),
];

/// Parameters of one reference axis.
pub fn reference_params(channel: &str) -> Option<NoiseParams<f64>> {
    REFERENCE_TABLE
        .iter()
        .find(|(name, _)| *name == channel)
        .map(|(_, [q, n, b, k, r])| NoiseParams {
            q: *q,
            n: *n,
            b: *b,
            k: *k,
            r: *r,
            bi_period: REFERENCE_BI_PERIOD,
            ..Default::default()
        })
}

/// Nine-channel recipe built from the reference table.
pub fn reference_recording_spec(dt: f64, n_samples: usize, seed: u64) -> RecordingSpec<f64> {
    let channels = REFERENCE_TABLE
        .iter()
        .map(|(name, _)| {
            let params = reference_params(name).expect("table entry");
            NamedChannel {
                name: name.to_string(),
                spec: ChannelSpec {
                    enabled: processes_for(&params),
                    params,
                },
            }
        })
        .collect();
    RecordingSpec {
        dt,
        n_samples,
        seed,
        channels,
    }
}
