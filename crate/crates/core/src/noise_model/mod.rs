//! Stochastic sensor error model.
//!
//! A measurement is modelled as the sum of independent error processes on top
//! of the true signal. Misalignment and scale factor are taken as identity, so
//! the simulated stream is the error itself:
//!
//! * white noise (angle / velocity random walk, coefficient `n`)
//! * quantization noise (`q`)
//! * a random constant drawn once per run (`rc_mu`, `rc_sigma`)
//! * a first-order Gauss-Markov process (`gm_sigma`, `gm_tc`)
//! * a random walk of the rate (rate random walk, `k`)
//! * a piecewise-constant bias instability resampled every `bi_period` (`b`)
//! * a deterministic linear drift (`r`)
//!
//! [`simulate`] holds the time-domain generators and [`theory`] the matching
//! closed-form Allan variance of each term.

mod params;
pub mod simulate;
pub mod theory;

pub use params::{Coefficient, NoiseParams, Process, SimSpec};
pub use simulate::{
    simulate_bias_instability, simulate_composite, simulate_drift, simulate_gauss_markov,
    simulate_quantization, simulate_random_constant, simulate_random_walk, simulate_white,
};
pub use theory::{component_avar, theoretical_adev, theoretical_avar, ComponentAvar, BI_FACTOR};
