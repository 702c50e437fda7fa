use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-axis error-model coefficients.
///
/// Readout conventions on the Allan deviation curve: `n` is the deviation at
/// tau = 1 s, `q` satisfies `ADEV = q*sqrt(3)/tau`, `k` satisfies
/// `ADEV = k*sqrt(tau/3)`, `r` satisfies `ADEV = r*tau/sqrt(2)` and `b` is
/// the flat-region deviation divided by 0.664.
/// Omitted fields deserialize as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    default,
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct NoiseParams<T> {
    pub q: T,
    pub n: T,
    pub b: T,
    pub k: T,
    pub r: T,
    pub gm_sigma: T,
    pub gm_tc: T,
    pub bi_period: T,
    pub rc_mu: T,
    pub rc_sigma: T,
}

impl<T: Real> Default for NoiseParams<T> {
    fn default() -> Self {
        let z = T::zero();
        Self {
            q: z,
            n: z,
            b: z,
            k: z,
            r: z,
            gm_sigma: z,
            gm_tc: z,
            bi_period: z,
            rc_mu: z,
            rc_sigma: z,
        }
    }
}

/// The five coefficients read off an Allan deviation curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    Q,
    N,
    B,
    K,
    R,
}

impl Coefficient {
    pub const ALL: [Coefficient; 5] = [
        Coefficient::Q,
        Coefficient::N,
        Coefficient::B,
        Coefficient::K,
        Coefficient::R,
    ];

    /// Log-log slope of the Allan deviation where this term dominates.
    pub fn slope(self) -> f64 {
        match self {
            Coefficient::Q => -1.0,
            Coefficient::N => -0.5,
            Coefficient::B => 0.0,
            Coefficient::K => 0.5,
            Coefficient::R => 1.0,
        }
    }

    pub fn from_slope(slope: f64) -> Option<Coefficient> {
        Coefficient::ALL.into_iter().find(|c| c.slope() == slope)
    }

    pub fn key(self) -> &'static str {
        match self {
            Coefficient::Q => "q",
            Coefficient::N => "n",
            Coefficient::B => "b",
            Coefficient::K => "k",
            Coefficient::R => "r",
        }
    }

    /// Row label in the tabular error budget.
    pub fn description(self) -> &'static str {
        match self {
            Coefficient::Q => "Quantization noise",
            Coefficient::N => "Angle/velocity random walk",
            Coefficient::B => "Bias instability",
            Coefficient::K => "Rate random walk",
            Coefficient::R => "Linear drift",
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl<T: Real> NoiseParams<T> {
    pub fn get(&self, c: Coefficient) -> T {
        match c {
            Coefficient::Q => self.q,
            Coefficient::N => self.n,
            Coefficient::B => self.b,
            Coefficient::K => self.k,
            Coefficient::R => self.r,
        }
    }

    pub fn set(&mut self, c: Coefficient, v: T) {
        match c {
            Coefficient::Q => self.q = v,
            Coefficient::N => self.n = v,
            Coefficient::B => self.b = v,
            Coefficient::K => self.k = v,
            Coefficient::R => self.r = v,
        }
    }

    pub fn with(mut self, c: Coefficient, v: T) -> Self {
        self.set(c, v);
        self
    }

    /// Checks the sign and companion-parameter invariants.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("q", self.q),
            ("n", self.n),
            ("b", self.b),
            ("k", self.k),
            ("r", self.r),
            ("gm_sigma", self.gm_sigma),
            ("gm_tc", self.gm_tc),
            ("bi_period", self.bi_period),
            ("rc_sigma", self.rc_sigma),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::field(
                    format!("params.{name}"),
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if !self.rc_mu.is_finite() {
            return Err(Error::field("params.rc_mu", "must be finite"));
        }
        if self.gm_sigma > T::zero() && !(self.gm_tc > T::zero()) {
            return Err(Error::field(
                "params.gm_tc",
                "must be > 0 when gm_sigma > 0",
            ));
        }
        if self.b > T::zero() && !(self.bi_period > T::zero()) {
            return Err(Error::field("params.bi_period", "must be > 0 when b > 0"));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: T) -> Self {
        let f = factor.abs();
        Self {
            q: self.q * f,
            n: self.n * f,
            b: self.b * f,
            k: self.k * f,
            r: self.r * f,
            gm_sigma: self.gm_sigma * f,
            rc_mu: self.rc_mu * factor,
            rc_sigma: self.rc_sigma * f,
            ..*self
        }
    }
}

/// Error processes a simulation can switch on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    White,
    Quantization,
    RandomConstant,
    GaussMarkov,
    RandomWalk,
    BiasInstability,
    Drift,
}

impl Process {
    pub const ALL: [Process; 7] = [
        Process::White,
        Process::Quantization,
        Process::RandomConstant,
        Process::GaussMarkov,
        Process::RandomWalk,
        Process::BiasInstability,
        Process::Drift,
    ];

    /// RNG stream reserved for the process; `None` for deterministic terms.
    pub(crate) fn stream(self) -> Option<u64> {
        match self {
            Process::White => Some(1),
            Process::Quantization => Some(2),
            Process::RandomConstant => Some(3),
            Process::GaussMarkov => Some(4),
            Process::RandomWalk => Some(5),
            Process::BiasInstability => Some(6),
            Process::Drift => None,
        }
    }
}

/// Recipe for one synthetic stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SimSpec<T> {
    pub params: NoiseParams<T>,
    pub dt: T,
    pub n_samples: usize,
    pub seed: u64,
    pub enabled: BTreeSet<Process>,
}

impl<T: Real> SimSpec<T> {
    pub fn new(params: NoiseParams<T>, dt: T, n_samples: usize, seed: u64) -> Self {
        Self {
            params,
            dt,
            n_samples,
            seed,
            enabled: BTreeSet::new(),
        }
    }

    pub fn enable(mut self, process: Process) -> Self {
        self.enabled.insert(process);
        self
    }

    pub fn with_processes(mut self, processes: impl IntoIterator<Item = Process>) -> Self {
        self.enabled.extend(processes);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_enabled(&self, process: Process) -> bool {
        self.enabled.contains(&process)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::field("n_samples", "must be at least 1"));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::field(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        self.params.validate()?;
        if self.params.b > T::zero() && self.params.bi_period < self.dt {
            return Err(Error::field("params.bi_period", "must be at least dt"));
        }
        Ok(())
    }
}
