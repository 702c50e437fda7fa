//! Non-negative weighted least-squares refinement of the composite model.
//!
//! The residual of point `i` is `(ln ADEV_model - ln ADEV_i) / rel_ci_i`, so the
//! objective weights log-space misfit by `1/rel_ci^2`. Each amplitude enters
//! the model linearly through its squared coefficient and is kept
//! non-negative by a projected Levenberg-Marquardt iteration.
//! [`prune_terms`] then drops terms the data does not support.

use crate::allan::AllanCurve;
use crate::noise_model::theory::gm_shape;
use crate::noise_model::{Coefficient, NoiseParams, BI_FACTOR};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlsOptions {
    /// Also refine the Gauss-Markov pair when `init` carries one.
    pub fit_gauss_markov: bool,
    /// When false, `b` stays at its value in `init`.
    pub refine_bias_instability: bool,
    pub max_iterations: usize,
}

impl Default for WlsOptions {
    fn default() -> Self {
        Self {
            fit_gauss_markov: false,
            refine_bias_instability: true,
            max_iterations: 500,
        }
    }
}

/// Minimum objective increase for a term to survive [`prune_terms`].
pub const SIGNIFICANCE_THRESHOLD: f64 = 9.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WlsFit<T> {
    pub params: NoiseParams<T>,
    pub converged: bool,
    pub iterations: usize,
    pub objective_init: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy)]
struct Obs {
    tau: f64,
    ln_adev: f64,
    rel: f64,
}

fn observations<T: Real>(curve: &AllanCurve<T>) -> Vec<Obs> {
    curve
        .points
        .iter()
        .filter(|p| p.usable && p.avar > T::zero() && p.rel_ci.is_finite() && p.rel_ci > T::zero())
        .map(|p| Obs {
            tau: p.tau.to_f64_lossy(),
            ln_adev: p.adev.to_f64_lossy().ln(),
            rel: p.rel_ci.to_f64_lossy(),
        })
        .collect()
}

/// AVAR per unit squared coefficient.
fn basis(c: Coefficient, tau: f64) -> f64 {
    match c {
        Coefficient::Q => 3.0 / (tau * tau),
        Coefficient::N => 1.0 / tau,
        Coefficient::B => BI_FACTOR * BI_FACTOR,
        Coefficient::K => tau / 3.0,
        Coefficient::R => tau * tau / 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    Coef(Coefficient),
    GmAmplitude,
    GmLogTc,
}

/// Model in scaled variables: amplitudes are `scale * u` with `u >= 0`,
/// the GM correlation time is `tc0 * exp(v)`.
struct Model {
    vars: Vec<Var>,
    scales: Vec<f64>,
    fixed: NoiseParams<f64>,
    tc0: f64,
}

/// Largest squared amplitude of `c` that stays below every observation.
fn data_scale(obs: &[Obs], c: Coefficient) -> f64 {
    obs.iter()
        .map(|o| (2.0 * o.ln_adev).exp() / basis(c, o.tau))
        .fold(f64::INFINITY, f64::min)
}

impl Model {
    fn new(
        init: &NoiseParams<f64>,
        obs: &[Obs],
        opts: &WlsOptions,
        excluded: &[Coefficient],
    ) -> (Self, Vec<f64>) {
        let mut vars = Vec::new();
        let mut scales = Vec::new();
        let mut x0 = Vec::new();
        for c in Coefficient::ALL {
            if excluded.contains(&c) || (c == Coefficient::B && !opts.refine_bias_instability) {
                continue;
            }
            let v = init.get(c);
            let (scale, start) = if v > 0.0 {
                (v * v, 1.0)
            } else {
                (data_scale(obs, c), 0.0)
            };
            if scale.is_finite() && scale > 0.0 {
                vars.push(Var::Coef(c));
                scales.push(scale);
                x0.push(start);
            }
        }
        let tc0 = init.gm_tc;
        if opts.fit_gauss_markov && init.gm_sigma > 0.0 && tc0 > 0.0 {
            vars.push(Var::GmAmplitude);
            scales.push(2.0 * init.gm_sigma * init.gm_sigma * tc0);
            vars.push(Var::GmLogTc);
            scales.push(1.0);
            x0.extend([1.0, 0.0]);
        }
        let mut fixed = *init;
        for c in excluded {
            fixed.set(*c, 0.0);
        }
        for v in &vars {
            if let Var::Coef(c) = v {
                fixed.set(*c, 0.0);
            }
        }
        if vars.contains(&Var::GmAmplitude) {
            fixed.gm_sigma = 0.0;
        }
        (
            Self {
                vars,
                scales,
                fixed,
                tc0,
            },
            x0,
        )
    }

    fn params(&self, x: &[f64]) -> NoiseParams<f64> {
        let mut p = self.fixed;
        let mut amp = None;
        let mut ln_tc = 0.0;
        for ((v, &s), &xi) in self.vars.iter().zip(&self.scales).zip(x) {
            match v {
                Var::Coef(c) => p.set(*c, (s * xi).max(0.0).sqrt()),
                Var::GmAmplitude => amp = Some((s * xi).max(0.0)),
                Var::GmLogTc => ln_tc = xi,
            }
        }
        if let Some(a) = amp {
            let tc = self.tc0 * ln_tc.exp();
            p.gm_tc = tc;
            p.gm_sigma = (a / (2.0 * tc)).sqrt();
        }
        p
    }

    fn is_bounded(&self, j: usize) -> bool {
        self.vars[j] != Var::GmLogTc
    }
}

fn model_avar(p: &NoiseParams<f64>, tau: f64) -> f64 {
    crate::noise_model::theoretical_avar(p, tau)
}

fn residuals(obs: &[Obs], p: &NoiseParams<f64>) -> Vec<f64> {
    obs.iter()
        .map(|o| (0.5 * model_avar(p, o.tau).ln() - o.ln_adev) / o.rel)
        .collect()
}

fn objective_of(obs: &[Obs], p: &NoiseParams<f64>) -> f64 {
    let f: f64 = residuals(obs, p).iter().map(|r| r * r).sum();
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

/// Weighted log-space objective of `params` against `curve`.
pub fn weighted_objective<T: Real>(curve: &AllanCurve<T>, params: &NoiseParams<T>) -> f64 {
    objective_of(&observations(curve), &to_f64(params))
}

/// [`weighted_objective`] restricted to points with `tau_lo <= tau <= tau_hi`.
pub fn weighted_objective_within<T: Real>(
    curve: &AllanCurve<T>,
    params: &NoiseParams<T>,
    tau_lo: f64,
    tau_hi: f64,
) -> f64 {
    let obs: Vec<Obs> = observations(curve)
        .into_iter()
        .filter(|o| o.tau >= tau_lo && o.tau <= tau_hi)
        .collect();
    objective_of(&obs, &to_f64(params))
}

fn jacobian(model: &Model, obs: &[Obs], x: &[f64]) -> Vec<Vec<f64>> {
    let p = model.params(x);
    let totals: Vec<f64> = obs.iter().map(|o| model_avar(&p, o.tau)).collect();
    let mut cols = Vec::with_capacity(x.len());
    for (j, v) in model.vars.iter().enumerate() {
        let col: Vec<f64> = match v {
            Var::Coef(c) => obs
                .iter()
                .zip(&totals)
                .map(|(o, &m)| model.scales[j] * basis(*c, o.tau) / (2.0 * o.rel * m))
                .collect(),
            Var::GmAmplitude => obs
                .iter()
                .zip(&totals)
                .map(|(o, &m)| {
                    model.scales[j] * gm_shape(o.tau / p.gm_tc) / o.tau / (2.0 * o.rel * m)
                })
                .collect(),
            Var::GmLogTc => {
                let h = 1e-6;
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                let (pp, pm) = (model.params(&xp), model.params(&xm));
                obs.iter()
                    .map(|o| {
                        (model_avar(&pp, o.tau).ln() - model_avar(&pm, o.tau).ln())
                            / (2.0 * h)
                            / (2.0 * o.rel)
                    })
                    .collect()
            }
        };
        cols.push(col);
    }
    cols
}

/// Solves `a x = b` for a small dense system; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn to_f64<T: Real>(p: &NoiseParams<T>) -> NoiseParams<f64> {
    NoiseParams {
        q: p.q.to_f64_lossy(),
        n: p.n.to_f64_lossy(),
        b: p.b.to_f64_lossy(),
        k: p.k.to_f64_lossy(),
        r: p.r.to_f64_lossy(),
        gm_sigma: p.gm_sigma.to_f64_lossy(),
        gm_tc: p.gm_tc.to_f64_lossy(),
        bi_period: p.bi_period.to_f64_lossy(),
        rc_mu: p.rc_mu.to_f64_lossy(),
        rc_sigma: p.rc_sigma.to_f64_lossy(),
    }
}

fn from_f64<T: Real>(p: &NoiseParams<f64>) -> NoiseParams<T> {
    NoiseParams {
        q: T::of(p.q),
        n: T::of(p.n),
        b: T::of(p.b),
        k: T::of(p.k),
        r: T::of(p.r),
        gm_sigma: T::of(p.gm_sigma),
        gm_tc: T::of(p.gm_tc),
        bi_period: T::of(p.bi_period),
        rc_mu: T::of(p.rc_mu),
        rc_sigma: T::of(p.rc_sigma),
    }
}

/// Refines `init` by minimising the weighted log-space misfit to `curve`.
///
/// Every amplitude is free and bounded below by zero; coefficients absent from
/// `init` start at zero. The objective never ends above its value at `init`.
/// If the iteration cap is reached before convergence, `init` is returned
/// with `converged == false`.
pub fn fit_composite_wls<T: Real>(
    curve: &AllanCurve<T>,
    init: &NoiseParams<T>,
    opts: &WlsOptions,
) -> WlsFit<T> {
    let obs = observations(curve);
    if obs.is_empty() {
        let mut p = *init;
        for c in Coefficient::ALL {
            p.set(c, T::zero());
        }
        return WlsFit {
            params: p,
            converged: true,
            iterations: 0,
            objective_init: 0.0,
            objective: 0.0,
        };
    }
    let fit = fit_excluding(&obs, &to_f64(init), opts, &[]);
    if !fit.converged {
        return WlsFit {
            params: *init,
            ..fit.cast()
        };
    }
    fit.cast()
}

impl WlsFit<f64> {
    fn cast<T: Real>(&self) -> WlsFit<T> {
        WlsFit {
            params: from_f64(&self.params),
            converged: self.converged,
            iterations: self.iterations,
            objective_init: self.objective_init,
            objective: self.objective,
        }
    }
}

fn fit_excluding(
    obs: &[Obs],
    init: &NoiseParams<f64>,
    opts: &WlsOptions,
    excluded: &[Coefficient],
) -> WlsFit<f64> {
    let mut start = *init;
    for c in excluded {
        start.set(*c, 0.0);
    }
    let objective_init = objective_of(obs, init);
    let (model, mut x) = Model::new(&start, obs, opts, excluded);
    let f_start = objective_of(obs, &model.params(&x));
    let unchanged = |converged, iterations| WlsFit {
        params: start,
        converged,
        iterations,
        objective_init,
        objective: f_start,
    };
    if x.is_empty() || !f_start.is_finite() {
        return unchanged(true, 0);
    }

    let mut f = f_start;
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let p = model.params(&x);
        let r = residuals(obs, &p);
        let cols = jacobian(&model, obs, &x);
        let grad: Vec<f64> = cols
            .iter()
            .map(|c| c.iter().zip(&r).map(|(a, b)| a * b).sum())
            .collect();
        // variables pinned at their bound with the gradient pushing outward stay fixed
        let free: Vec<usize> = (0..x.len())
            .filter(|&j| !(model.is_bounded(j) && x[j] <= 0.0 && grad[j] >= 0.0))
            .collect();
        if free.is_empty() {
            converged = true;
            break;
        }
        let normal: Vec<Vec<f64>> = free
            .iter()
            .map(|&a| {
                free.iter()
                    .map(|&b| cols[a].iter().zip(&cols[b]).map(|(u, v)| u * v).sum())
                    .collect()
            })
            .collect();
        let rhs: Vec<f64> = free.iter().map(|&j| -grad[j]).collect();

        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = normal.clone();
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * normal[i][i].max(1e-30);
            }
            if let Some(step) = solve(damped, rhs.clone()) {
                let mut trial = x.clone();
                for (&j, s) in free.iter().zip(&step) {
                    trial[j] += s;
                    if model.is_bounded(j) && trial[j] < 0.0 {
                        trial[j] = 0.0;
                    }
                }
                let f_trial = objective_of(obs, &model.params(&trial));
                if f_trial < f {
                    let decrease = f - f_trial;
                    let max_step = free
                        .iter()
                        .map(|&j| (trial[j] - x[j]).abs())
                        .fold(0.0, f64::max);
                    x = trial;
                    f = f_trial;
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    if decrease <= 1e-15 * f || max_step < 1e-13 || f < 1e-28 {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no descent left at any damping: stationary point
            converged = true;
        }
        if converged {
            break;
        }
    }

    if !converged {
        return unchanged(false, iterations);
    }
    let params = model.params(&x);
    if f > objective_init && excluded.is_empty() {
        // a start below the init is always available, so this only guards rounding
        return WlsFit {
            params: *init,
            converged,
            iterations,
            objective_init,
            objective: objective_init,
        };
    }
    WlsFit {
        params,
        converged,
        iterations,
        objective_init,
        objective: f,
    }
}

/// Backward elimination of unsupported terms.
///
/// Starting from `fit`, the non-zero coefficient whose removal raises the
/// objective least is dropped and the rest refitted, for as long as that
/// increase stays below `threshold`. A pinned `b` is never dropped.
pub fn prune_terms<T: Real>(
    curve: &AllanCurve<T>,
    fit: &WlsFit<T>,
    opts: &WlsOptions,
    threshold: f64,
) -> WlsFit<T> {
    let obs = observations(curve);
    if obs.is_empty() || !fit.converged {
        return fit.clone();
    }
    let mut current = WlsFit {
        params: to_f64(&fit.params),
        converged: fit.converged,
        iterations: fit.iterations,
        objective_init: fit.objective_init,
        objective: objective_of(&obs, &to_f64(&fit.params)),
    };
    let pinned = |c: Coefficient| c == Coefficient::B && !opts.refine_bias_instability;
    let mut excluded: Vec<Coefficient> = Coefficient::ALL
        .into_iter()
        .filter(|&c| current.params.get(c) == 0.0)
        .collect();
    loop {
        let candidates: Vec<(Coefficient, WlsFit<f64>)> = Coefficient::ALL
            .into_iter()
            .filter(|&c| !excluded.contains(&c) && !pinned(c))
            .filter_map(|c| {
                let mut ex = excluded.clone();
                ex.push(c);
                let f = fit_excluding(&obs, &current.params, opts, &ex);
                f.converged.then_some((c, f))
            })
            .collect();
        let Some((c, best)) = candidates
            .into_iter()
            .min_by(|a, b| a.1.objective.total_cmp(&b.1.objective))
        else {
            break;
        };
        if best.objective - current.objective >= threshold {
            break;
        }
        excluded.push(c);
        current = WlsFit {
            objective_init: fit.objective_init,
            iterations: current.iterations + best.iterations,
            ..best
        };
    }
    current.cast()
}

/// Objective increase caused by removing each non-zero coefficient of
/// `params` and refitting the others. A pinned `b` is reported as infinite.
pub fn term_significance<T: Real>(
    curve: &AllanCurve<T>,
    params: &NoiseParams<T>,
    opts: &WlsOptions,
) -> Vec<(Coefficient, f64)> {
    let obs = observations(curve);
    let p = to_f64(params);
    let base = objective_of(&obs, &p);
    let zero: Vec<Coefficient> = Coefficient::ALL
        .into_iter()
        .filter(|&c| p.get(c) == 0.0)
        .collect();
    Coefficient::ALL
        .into_iter()
        .filter(|c| !zero.contains(c))
        .map(|c| {
            if c == Coefficient::B && !opts.refine_bias_instability {
                return (c, f64::INFINITY);
            }
            let mut ex = zero.clone();
            ex.push(c);
            let f = fit_excluding(&obs, &p, opts, &ex);
            (
                c,
                if f.converged {
                    f.objective - base
                } else {
                    f64::NAN
                },
            )
        })
        .collect()
}

/// Coefficients whose term is the largest model component only at cluster
/// times outside the usable span of `curve`.
///
/// A term that dominates nowhere, being masked by its neighbours, is not
/// listed.
pub fn out_of_span_terms<T: Real>(
    curve: &AllanCurve<T>,
    params: &NoiseParams<T>,
) -> Vec<Coefficient> {
    let obs = observations(curve);
    let (Some(first), Some(last)) = (obs.first(), obs.last()) else {
        return Vec::new();
    };
    let (lo, hi) = (first.tau.log10(), last.tau.log10());
    let p = to_f64(params);
    let dominant_at = |log_tau: f64| {
        let tau = 10f64.powf(log_tau);
        Coefficient::ALL
            .into_iter()
            .map(|c| (c, p.get(c) * p.get(c) * basis(c, tau)))
            .filter(|&(_, v)| v > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
    };
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    // 20 points per decade over +-30 decades around the span
    let steps = ((hi - lo + 60.0) * 20.0).ceil() as usize;
    for i in 0..=steps {
        let x = lo - 30.0 + i as f64 * (hi - lo + 60.0) / steps as f64;
        if let Some(c) = dominant_at(x) {
            let bucket = if x >= lo && x <= hi {
                &mut inside
            } else {
                &mut outside
            };
            if !bucket.contains(&c) {
                bucket.push(c);
            }
        }
    }
    for o in &obs {
        if let Some(c) = dominant_at(o.tau.log10()) {
            if !inside.contains(&c) {
                inside.push(c);
            }
        }
    }
    outside
        .into_iter()
        .filter(|c| !inside.contains(c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allan::tau_grid_log;
    use crate::noise_model::theoretical_adev;

    #[test]
    fn exact_curve_is_a_fixed_point() {
        let truth: NoiseParams<f64> = NoiseParams {
            q: 0.002,
            n: 0.01,
            b: 0.0015,
            k: 2e-5,
            r: 0.0,
            ..Default::default()
        };
        let g = tau_grid_log(0.01, 1_000_000, 10).unwrap();
        let curve = theoretical_adev(&truth, &g);
        let init = NoiseParams {
            q: 0.0025,
            n: 0.008,
            b: 0.002,
            k: 3e-5,
            ..Default::default()
        };
        let fit = fit_composite_wls(&curve, &init, &WlsOptions::default());
        assert!(fit.converged);
        for c in [
            Coefficient::Q,
            Coefficient::N,
            Coefficient::B,
            Coefficient::K,
        ] {
            let rel = (fit.params.get(c) / truth.get(c) - 1.0).abs();
            assert!(rel < 1e-6, "{c}: {rel}");
        }
        assert!(fit.objective <= fit.objective_init);
    }

    #[test]
    fn zero_curve_gives_zero_params() {
        let g = tau_grid_log(1.0, 1000, 10).unwrap();
        let curve = theoretical_adev(&NoiseParams::<f64>::default(), &g);
        let fit = fit_composite_wls(&curve, &NoiseParams::default(), &WlsOptions::default());
        assert_eq!(fit.params, NoiseParams::default());
    }

    #[test]
    fn iteration_cap_returns_init() {
        let truth = NoiseParams {
            n: 0.01,
            k: 1e-4,
            ..Default::default()
        };
        let g = tau_grid_log(0.01, 1_000_000, 10).unwrap();
        let curve = theoretical_adev(&truth, &g);
        let init = NoiseParams {
            n: 0.05,
            k: 1e-3,
            ..Default::default()
        };
        let fit = fit_composite_wls(
            &curve,
            &init,
            &WlsOptions {
                max_iterations: 1,
                ..Default::default()
            },
        );
        assert!(!fit.converged);
        assert_eq!(fit.params, init);
    }

    #[test]
    fn gauss_markov_pair_is_refined() {
        let truth: NoiseParams<f64> = NoiseParams {
            n: 0.01,
            gm_sigma: 0.02,
            gm_tc: 5.0,
            ..Default::default()
        };
        let g = tau_grid_log(0.01, 1_000_000, 10).unwrap();
        let curve = theoretical_adev(&truth, &g);
        let init = NoiseParams {
            n: 0.012,
            gm_sigma: 0.03,
            gm_tc: 2.0,
            ..Default::default()
        };
        let opts = WlsOptions {
            fit_gauss_markov: true,
            ..Default::default()
        };
        let fit = fit_composite_wls(&curve, &init, &opts);
        assert!(fit.converged);
        assert!(
            (fit.params.gm_tc / 5.0 - 1.0).abs() < 1e-4,
            "{:?}",
            fit.params
        );
        assert!((fit.params.gm_sigma / 0.02 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn missing_term_is_recovered_from_zero() {
        let truth: NoiseParams<f64> = NoiseParams {
            q: 0.003,
            n: 0.01,
            ..Default::default()
        };
        let g = tau_grid_log(0.01, 1_000_000, 10).unwrap();
        let curve = theoretical_adev(&truth, &g);
        let fit = fit_composite_wls(
            &curve,
            &NoiseParams {
                n: 0.02,
                ..Default::default()
            },
            &WlsOptions::default(),
        );
        assert!(
            (fit.params.q / 0.003 - 1.0).abs() < 1e-6,
            "{:?}",
            fit.params
        );
        assert!((fit.params.n / 0.01 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pinned_bias_instability_is_kept() {
        let truth: NoiseParams<f64> = NoiseParams {
            n: 0.01,
            b: 0.001,
            ..Default::default()
        };
        let g = tau_grid_log(0.01, 1_000_000, 10).unwrap();
        let curve = theoretical_adev(&truth, &g);
        let opts = WlsOptions {
            refine_bias_instability: false,
            ..Default::default()
        };
        let init = NoiseParams {
            n: 0.012,
            b: 0.0011,
            ..Default::default()
        };
        let fit = fit_composite_wls(&curve, &init, &opts);
        assert_eq!(fit.params.b, 0.0011);
    }

    #[test]
    fn pruning_drops_negligible_terms() {
        let g = tau_grid_log(0.01, 1_000_000, 10).unwrap();
        let curve = theoretical_adev(
            &NoiseParams {
                n: 0.01,
                ..Default::default()
            },
            &g,
        );
        let noisy = NoiseParams {
            n: 0.01,
            r: 1e-9,
            ..Default::default()
        };
        let fit = WlsFit {
            params: noisy,
            converged: true,
            iterations: 0,
            objective_init: 0.0,
            objective: 0.0,
        };
        let pruned = prune_terms(&curve, &fit, &WlsOptions::default(), SIGNIFICANCE_THRESHOLD);
        assert_eq!(pruned.params.r, 0.0);
        assert!((pruned.params.n - 0.01f64).abs() < 1e-12);
    }

    #[test]
    fn significance_separates_real_and_negligible_terms() {
        let g = tau_grid_log(0.01, 1_000_000, 10).unwrap();
        let curve = theoretical_adev(
            &NoiseParams {
                n: 0.01,
                k: 1e-3,
                ..Default::default()
            },
            &g,
        );
        let p = NoiseParams {
            n: 0.01,
            k: 1e-3,
            r: 1e-9,
            b: 1e-4,
            ..Default::default()
        };
        let sig = term_significance(
            &curve,
            &p,
            &WlsOptions {
                refine_bias_instability: false,
                ..Default::default()
            },
        );
        let get = |c| sig.iter().find(|(x, _)| *x == c).unwrap().1;
        assert_eq!(sig.len(), 4, "{sig:?}");
        assert!(get(Coefficient::N) > 1e3);
        assert!(get(Coefficient::K) > 100.0);
        assert!(get(Coefficient::R) < SIGNIFICANCE_THRESHOLD);
        assert_eq!(get(Coefficient::B), f64::INFINITY);
    }
}
