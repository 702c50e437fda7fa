//! Closed-form Allan variance of the error model.
//!
//! ```text
//! AVAR(tau) = 3 q^2 / tau^2 + n^2 / tau + (0.664 b)^2 + k^2 tau / 3 + r^2 tau^2 / 2
//!           + (qc Tc)^2 / tau * [1 - Tc/(2 tau) (3 - 4 e^(-tau/Tc) + e^(-2 tau/Tc))]
//! ```
//!
//! with `qc^2 = 2 gm_sigma^2 / Tc` the Gauss-Markov driving noise density.

use super::params::NoiseParams;
use crate::allan::{AllanCurve, Estimator, TauGrid};
use crate::scalar::Real;

/// Ratio of the flat Allan deviation floor to the bias instability coefficient.
pub const BI_FACTOR: f64 = 0.664;

/// Allan variance contribution of every term at one cluster time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComponentAvar<T> {
    pub quantization: T,
    pub white: T,
    pub bias_instability: T,
    pub rate_random_walk: T,
    pub ramp: T,
    pub gauss_markov: T,
}

impl<T: Real> ComponentAvar<T> {
    pub fn total(&self) -> T {
        self.quantization
            + self.white
            + self.bias_instability
            + self.rate_random_walk
            + self.ramp
            + self.gauss_markov
    }
}

/// `1 - (3 - 4 e^-x + e^-2x) / (2x)` for `x = tau/Tc`, with a series branch
/// for small `x` where the direct form cancels catastrophically.
pub(crate) fn gm_shape<T: Real>(x: T) -> T {
    if x < T::of(0.1) {
        // x^2/3 - x^3/4 + 7x^4/60 - x^5/24 + 31x^6/2520
        let c = [1.0 / 3.0, -0.25, 7.0 / 60.0, -1.0 / 24.0, 31.0 / 2520.0];
        let poly = c
            .iter()
            .rev()
            .fold(T::zero(), |acc, &ci| acc * x + T::of(ci));
        poly * x * x
    } else {
        let e1 = (-x).exp_m1();
        let e2 = (-(x + x)).exp_m1();
        // 3 - 4e^-x + e^-2x written in expm1 terms: -4 expm1(-x) + expm1(-2x)
        let num = e2 - T::of(4.0) * e1;
        T::one() - num / (T::of(2.0) * x)
    }
}

pub fn component_avar<T: Real>(params: &NoiseParams<T>, tau: T) -> ComponentAvar<T> {
    let three = T::of(3.0);
    let two = T::of(2.0);
    let bi = T::of(BI_FACTOR) * params.b;
    let gauss_markov = if params.gm_sigma > T::zero() && params.gm_tc > T::zero() {
        let tc = params.gm_tc;
        // (qc Tc)^2 = 2 sigma^2 Tc
        let amp = two * params.gm_sigma * params.gm_sigma * tc;
        amp / tau * gm_shape(tau / tc)
    } else {
        T::zero()
    };
    ComponentAvar {
        quantization: three * params.q * params.q / (tau * tau),
        white: params.n * params.n / tau,
        bias_instability: bi * bi,
        rate_random_walk: params.k * params.k * tau / three,
        ramp: params.r * params.r * tau * tau / two,
        gauss_markov,
    }
}

pub fn theoretical_avar<T: Real>(params: &NoiseParams<T>, tau: T) -> T {
    component_avar(params, tau).total()
}

/// Model curve on `grid`; `rel_ci` is what an estimate from a series of the
/// grid's length would carry.
pub fn theoretical_adev<T: Real>(params: &NoiseParams<T>, grid: &TauGrid<T>) -> AllanCurve<T> {
    let avar = grid
        .taus()
        .iter()
        .map(|&tau| theoretical_avar(params, tau))
        .collect();
    AllanCurve::from_avar(grid, avar, Estimator::Model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TauGrid<f64> {
        TauGrid::from_cluster_sizes(1.0, 100, vec![1, 3, 4, 10]).unwrap()
    }

    #[test]
    fn zero_params_give_zero_curve() {
        let c = theoretical_adev(&NoiseParams::default(), &grid());
        assert!(c.points.iter().all(|p| p.avar == 0.0));
        assert_eq!(c.estimator, Estimator::Model);
    }

    #[test]
    fn white_and_rate_walk_readouts() {
        let c = theoretical_adev(
            &NoiseParams {
                n: 1.0,
                ..Default::default()
            },
            &grid(),
        );
        assert!((c.points[0].adev - 1.0).abs() < 1e-15);
        assert!((c.points[2].adev - 0.5).abs() < 1e-15);
        let c = theoretical_adev(
            &NoiseParams {
                k: 1.0,
                ..Default::default()
            },
            &grid(),
        );
        assert!((c.points[1].adev - 1.0).abs() < 1e-15);
    }

    #[test]
    fn remaining_readouts() {
        let p = NoiseParams {
            q: 2.0,
            ..Default::default()
        };
        assert!((theoretical_avar(&p, 3f64.sqrt()).sqrt() - 2.0).abs() < 1e-12);
        let p = NoiseParams {
            r: 2.0,
            ..Default::default()
        };
        assert!((theoretical_avar(&p, 2f64.sqrt()).sqrt() - 2.0).abs() < 1e-12);
        let p: NoiseParams<f64> = NoiseParams {
            b: 2.0,
            bi_period: 1.0,
            ..Default::default()
        };
        assert!((theoretical_avar(&p, 123.0).sqrt() - 2.0 * 0.664).abs() < 1e-12);
    }

    #[test]
    fn gm_shape_branches_meet() {
        // direct evaluation in extended form well away from cancellation
        let direct = |x: f64| 1.0 - (3.0 - 4.0 * (-x).exp() + (-2.0 * x).exp()) / (2.0 * x);
        for x in [0.0999, 0.1, 0.1001, 0.5, 2.0, 50.0] {
            assert!((gm_shape(x) / direct(x) - 1.0).abs() < 1e-7, "x={x}");
        }
        assert!((gm_shape(1e-9f64) / (1e-18 / 3.0) - 1.0).abs() < 1e-8);
    }
}
