//! Time-domain generators for each error process.
//!
//! Every stochastic process draws from its own ChaCha stream derived from the
//! spec seed, so toggling one process never changes another's realization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::params::{Process, SimSpec};
use crate::error::Result;
use crate::scalar::Real;
use crate::timeseries::{SampleSeries, Unit};

const LABEL: &str = "sim";

fn rng_for(seed: u64, process: Process) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(process.stream().expect("stochastic process"));
    rng
}

#[inline]
fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn finish<T: Real>(spec: &SimSpec<T>, values: Vec<T>) -> Result<SampleSeries<T>> {
    SampleSeries::new(values, spec.dt, Unit::Unitless, LABEL)
}

fn zeros<T: Real>(spec: &SimSpec<T>) -> Vec<T> {
    vec![T::zero(); spec.n_samples]
}

/// White noise with per-sample std `n/sqrt(dt)`, so that `ADEV(tau) = n/sqrt(tau)`.
pub fn simulate_white<T: Real>(spec: &SimSpec<T>) -> Result<SampleSeries<T>> {
    spec.validate()?;
    let n = spec.params.n.to_f64_lossy();
    if n == 0.0 {
        return finish(spec, zeros(spec));
    }
    let sigma = n / spec.dt.to_f64_lossy().sqrt();
    let mut rng = rng_for(spec.seed, Process::White);
    let values = (0..spec.n_samples)
        .map(|_| T::of(sigma * normal(&mut rng)))
        .collect();
    finish(spec, values)
}

/// Differenced white noise `q*(w[i+1] - w[i])/dt`; `ADEV(tau) = q*sqrt(3)/tau`.
pub fn simulate_quantization<T: Real>(spec: &SimSpec<T>) -> Result<SampleSeries<T>> {
    spec.validate()?;
    let q = spec.params.q.to_f64_lossy();
    if q == 0.0 {
        return finish(spec, zeros(spec));
    }
    let scale = q / spec.dt.to_f64_lossy();
    let mut rng = rng_for(spec.seed, Process::Quantization);
    let mut prev = normal(&mut rng);
    let values = (0..spec.n_samples)
        .map(|_| {
            let next = normal(&mut rng);
            let x = scale * (next - prev);
            prev = next;
            T::of(x)
        })
        .collect();
    finish(spec, values)
}

/// One constant drawn from `N(rc_mu, rc_sigma^2)`.
pub fn simulate_random_constant<T: Real>(spec: &SimSpec<T>) -> Result<SampleSeries<T>> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, Process::RandomConstant);
    let c =
        spec.params.rc_mu.to_f64_lossy() + spec.params.rc_sigma.to_f64_lossy() * normal(&mut rng);
    finish(spec, vec![T::of(c); spec.n_samples])
}

/// First-order Gauss-Markov process, exactly discretized:
/// `B[i+1] = exp(-dt/Tc) B[i] + w[i]`, `w ~ N(0, sigma^2 (1 - exp(-2 dt/Tc)))`,
/// `B[0] = 0`. `gm_sigma` is the stationary standard deviation.
pub fn simulate_gauss_markov<T: Real>(spec: &SimSpec<T>) -> Result<SampleSeries<T>> {
    spec.validate()?;
    let sigma = spec.params.gm_sigma.to_f64_lossy();
    if sigma == 0.0 {
        return finish(spec, zeros(spec));
    }
    let ratio = spec.dt.to_f64_lossy() / spec.params.gm_tc.to_f64_lossy();
    let phi = (-ratio).exp();
    let drive = sigma * (-(-2.0 * ratio).exp_m1()).sqrt();
    let mut rng = rng_for(spec.seed, Process::GaussMarkov);
    let mut state = 0.0;
    let values = (0..spec.n_samples)
        .map(|_| {
            let out = state;
            state = phi * state + drive * normal(&mut rng);
            T::of(out)
        })
        .collect();
    finish(spec, values)
}

/// Random walk of the rate with increments `N(0, k^2 dt)`, starting at zero.
///
/// Each output sample is the average of the underlying continuous walk over
/// its sample interval (what an integrating sensor reports), which makes the
/// sampled Allan variance equal `k^2 tau / 3` exactly at every `tau = m dt`.
/// Given the walk value `B[i]` at the start of the interval and the increment
/// `dB`, the interval average is `B[i] + dB/2 + e` with an independent
/// `e ~ N(0, k^2 dt / 12)`.
pub fn simulate_random_walk<T: Real>(spec: &SimSpec<T>) -> Result<SampleSeries<T>> {
    spec.validate()?;
    let k = spec.params.k.to_f64_lossy();
    if k == 0.0 {
        return finish(spec, zeros(spec));
    }
    let dt = spec.dt.to_f64_lossy();
    let step = k * dt.sqrt();
    let bridge = step / 12f64.sqrt();
    let mut rng = rng_for(spec.seed, Process::RandomWalk);
    let mut level = 0.0;
    let values = (0..spec.n_samples)
        .map(|_| {
            let inc = step * normal(&mut rng);
            let avg = level + 0.5 * inc + bridge * normal(&mut rng);
            level += inc;
            T::of(avg)
        })
        .collect();
    finish(spec, values)
}

/// Bias instability: a value `b * w` held constant over each window of
/// `bi_period` seconds and redrawn at every window boundary.
pub fn simulate_bias_instability<T: Real>(spec: &SimSpec<T>) -> Result<SampleSeries<T>> {
    spec.validate()?;
    let b = spec.params.b.to_f64_lossy();
    if b == 0.0 {
        return finish(spec, zeros(spec));
    }
    let window = ((spec.params.bi_period / spec.dt).to_f64_lossy().round() as usize).max(1);
    let mut rng = rng_for(spec.seed, Process::BiasInstability);
    let mut current = 0.0;
    let values = (0..spec.n_samples)
        .map(|i| {
            if i % window == 0 {
                current = b * normal(&mut rng);
            }
            T::of(current)
        })
        .collect();
    finish(spec, values)
}

/// Deterministic ramp `r * t` with `t = i * dt`.
pub fn simulate_drift<T: Real>(spec: &SimSpec<T>) -> Result<SampleSeries<T>> {
    spec.validate()?;
    let r = spec.params.r;
    let values = (0..spec.n_samples)
        .map(|i| r * (T::of_usize(i) * spec.dt))
        .collect();
    finish(spec, values)
}

fn simulate_process<T: Real>(spec: &SimSpec<T>, process: Process) -> Result<SampleSeries<T>> {
    match process {
        Process::White => simulate_white(spec),
        Process::Quantization => simulate_quantization(spec),
        Process::RandomConstant => simulate_random_constant(spec),
        Process::GaussMarkov => simulate_gauss_markov(spec),
        Process::RandomWalk => simulate_random_walk(spec),
        Process::BiasInstability => simulate_bias_instability(spec),
        Process::Drift => simulate_drift(spec),
    }
}

/// Elementwise sum of every enabled process.
pub fn simulate_composite<T: Real>(spec: &SimSpec<T>) -> Result<SampleSeries<T>> {
    spec.validate()?;
    let mut total = zeros(spec);
    for &process in &spec.enabled {
        let part = simulate_process(spec, process)?;
        for (acc, &v) in total.iter_mut().zip(part.values()) {
            *acc = *acc + v;
        }
    }
    finish(spec, total)
}
