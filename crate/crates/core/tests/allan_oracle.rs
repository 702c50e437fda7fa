use avarkit::allan::{avar_overlapping, avar_standard, relative_confidence, tau_grid_log, TauGrid};
use avarkit::noise_model::{simulate_white, NoiseParams, SimSpec};
use avarkit::SampleSeries;
use proptest::prelude::*;

/// Samples are `k / 2^SHIFT` for integers `k`, so cluster sums are exact in
/// integer arithmetic and the oracle carries no rounding until the final
/// division.
const SHIFT: i32 = 12;

fn to_f64(ints: &[i64]) -> Vec<f64> {
    ints.iter().map(|&k| k as f64 / 2f64.powi(SHIFT)).collect()
}

fn cluster_sum(ints: &[i64], start: usize, m: usize) -> i128 {
    let mut s = 0i128;
    for v in &ints[start..start + m] {
        s += *v as i128;
    }
    s
}

fn finish(sum_sq: i128, m: usize, terms: usize) -> f64 {
    let unit = 2f64.powi(-2 * SHIFT);
    sum_sq as f64 * unit / (2.0 * (m * m) as f64 * terms as f64)
}

fn brute_overlapping(ints: &[i64], m: usize) -> f64 {
    let n = ints.len();
    let mut acc = 0i128;
    for i in 0..=n - 2 * m {
        let d = cluster_sum(ints, i + m, m) - cluster_sum(ints, i, m);
        acc += d * d;
    }
    finish(acc, m, n - 2 * m + 1)
}

fn brute_standard(ints: &[i64], m: usize) -> f64 {
    let clusters = ints.len() / m;
    let mut acc = 0i128;
    for j in 0..clusters - 1 {
        let d = cluster_sum(ints, (j + 1) * m, m) - cluster_sum(ints, j * m, m);
        acc += d * d;
    }
    finish(acc, m, clusters - 1)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if b == 0.0 {
        a.abs() <= tol
    } else {
        ((a - b) / b).abs() <= tol
    }
}

fn series_strategy(max_len: usize) -> impl Strategy<Value = Vec<i64>> {
    (
        9usize..max_len,
        -(1i64 << 26)..(1i64 << 26),
        1i64..(1 << 20),
        any::<bool>(),
    )
        .prop_flat_map(|(n, offset, amp, walk)| {
            proptest::collection::vec(-amp..=amp, n).prop_map(move |steps| {
                let mut level = offset;
                steps
                    .into_iter()
                    .map(|s| {
                        if walk {
                            level += s / 64;
                            level + s
                        } else {
                            offset + s
                        }
                    })
                    .collect()
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn both_estimators_match_exact_oracle(ints in series_strategy(1500)) {
        let values = to_f64(&ints);
        let series = SampleSeries::labelled(values, 1.0, "x").unwrap();
        let grid = tau_grid_log(1.0, ints.len(), 10).unwrap();
        let ov = avar_overlapping(&series, &grid).unwrap();
        let st = avar_standard(&series, &grid).unwrap();
        for (i, &m) in grid.m_values().iter().enumerate() {
            let want = brute_overlapping(&ints, m);
            prop_assert!(rel_close(ov.points[i].avar, want, 1e-12), "overlapping m={} got {} want {}", m, ov.points[i].avar, want);
            let want = brute_standard(&ints, m);
            prop_assert!(rel_close(st.points[i].avar, want, 1e-12), "standard m={} got {} want {}", m, st.points[i].avar, want);
        }
    }

    #[test]
    fn scaling_scales_variance_by_square(ints in series_strategy(600), k in -63i64..=63, shift in 0i32..5) {
        prop_assume!(k != 0);
        // k / 2^shift times a lattice sample is exact in f64
        let c = k as f64 / 2f64.powi(shift);
        let values = to_f64(&ints);
        let a = SampleSeries::labelled(values.clone(), 0.5, "x").unwrap();
        let b = a.scaled(c).unwrap();
        let grid = tau_grid_log(0.5, values.len(), 10).unwrap();
        let ca = avar_overlapping(&a, &grid).unwrap();
        let cb = avar_overlapping(&b, &grid).unwrap();
        for (pa, pb) in ca.points.iter().zip(&cb.points) {
            prop_assert!(rel_close(pb.avar, c * c * pa.avar, 1e-12));
            prop_assert!(rel_close(pb.adev, c.abs() * pa.adev, 1e-12));
        }
    }

    #[test]
    fn constant_offset_leaves_variance_unchanged(ints in series_strategy(600), j in -(1i64 << 26)..(1i64 << 26)) {
        // a lattice offset keeps every shifted sample exact
        let offset = j as f64 / 2f64.powi(SHIFT);
        let values = to_f64(&ints);
        let shifted: Vec<f64> = values.iter().map(|v| v + offset).collect();
        let grid = tau_grid_log(1.0, values.len(), 10).unwrap();
        let a = avar_overlapping(&SampleSeries::labelled(values, 1.0, "x").unwrap(), &grid).unwrap();
        let b = avar_overlapping(&SampleSeries::labelled(shifted, 1.0, "x").unwrap(), &grid).unwrap();
        for (pa, pb) in a.points.iter().zip(&b.points) {
            prop_assert!(rel_close(pb.avar, pa.avar, 1e-12), "{} vs {}", pb.avar, pa.avar);
        }
    }

    #[test]
    fn grid_respects_cap_and_is_strictly_increasing(n in 3usize..200_000, ppd in 1usize..30, dt in 1e-3f64..10.0) {
        let grid = tau_grid_log(dt, n, ppd).unwrap();
        let m = grid.m_values();
        prop_assert!(m.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(m[0] >= 1 && *m.last().unwrap() <= (n - 1) / 2);
        for (&mi, &tau) in m.iter().zip(grid.taus()) {
            prop_assert_eq!(tau, mi as f64 * dt);
        }
    }
}

#[test]
fn ramp_inputs_agree_across_estimators() {
    let values: Vec<f64> = (0..5000).map(|i| 0.25 * i as f64 - 3.0).collect();
    let series = SampleSeries::labelled(values, 0.01, "ramp").unwrap();
    let grid = tau_grid_log(0.01, 5000, 10).unwrap();
    let ov = avar_overlapping(&series, &grid).unwrap();
    let st = avar_standard(&series, &grid).unwrap();
    for (a, b) in ov.points.iter().zip(&st.points) {
        assert!(
            rel_close(a.avar, b.avar, 1e-12),
            "tau {}: {} vs {}",
            a.tau,
            a.avar,
            b.avar
        );
    }
}

#[test]
fn large_offset_does_not_cancel_white_noise() {
    let spec: SimSpec<f64> = SimSpec::new(
        NoiseParams {
            n: 1e-3,
            ..Default::default()
        },
        0.01,
        200_000,
        5,
    );
    let raw = simulate_white(&spec).unwrap();
    // on a 2^-32 lattice the lift by 1e6 is exact, so both inputs hold the same data
    let q = 2f64.powi(32);
    let white = raw
        .with_values(raw.values().iter().map(|v| (v * q).round() / q).collect())
        .unwrap();
    let lifted = white
        .with_values(white.values().iter().map(|v| v + 1e6).collect())
        .unwrap();
    assert!(white
        .values()
        .iter()
        .zip(lifted.values())
        .all(|(w, l)| l - 1e6 == *w));
    let grid = tau_grid_log(0.01, white.len(), 10).unwrap();
    let a = avar_overlapping(&white, &grid).unwrap();
    let b = avar_overlapping(&lifted, &grid).unwrap();
    for (pa, pb) in a.points.iter().zip(&b.points) {
        assert!(
            rel_close(pb.avar, pa.avar, 1e-9),
            "tau {}: {} vs {}",
            pa.tau,
            pb.avar,
            pa.avar
        );
    }
}

#[test]
fn estimators_agree_within_confidence_on_white_noise() {
    let spec: SimSpec<f64> = SimSpec::new(
        NoiseParams {
            n: 1.0,
            ..Default::default()
        },
        1.0,
        100_000,
        11,
    );
    let white = simulate_white(&spec).unwrap();
    let grid = tau_grid_log(1.0, white.len(), 10).unwrap();
    let ov = avar_overlapping(&white, &grid).unwrap();
    let st = avar_standard(&white, &grid).unwrap();
    for (a, b) in ov.points.iter().zip(&st.points) {
        let combined = (a.rel_ci * a.rel_ci + b.rel_ci * b.rel_ci).sqrt();
        assert!(
            (a.adev - b.adev).abs() <= 3.0 * combined * b.adev,
            "tau {}: {} vs {} (ci {})",
            a.tau,
            a.adev,
            b.adev,
            combined
        );
    }
}

#[test]
fn million_sample_grid_covers_five_decades() {
    let grid = tau_grid_log(0.01, 1_000_000, 10).unwrap();
    // independent enumeration of the log grid
    let cap = (1_000_000 - 1) / 2;
    let mut want: Vec<usize> = (0..)
        .map(|j| 10f64.powf(j as f64 / 10.0).round() as usize)
        .take_while(|&m| m <= cap)
        .collect();
    want.dedup();
    assert_eq!(grid.m_values(), want.as_slice());
    assert!((45..=60).contains(&grid.len()), "{}", grid.len());
    assert_eq!(grid.taus()[0], 0.01);
    let last = *grid.taus().last().unwrap();
    assert!(last > 3000.0 && last <= 5000.0, "{last}");
}

#[test]
fn doubling_length_shrinks_confidence_by_sqrt2() {
    for m in [1usize, 10, 100] {
        let a = relative_confidence(20_000 / m).unwrap();
        let b = relative_confidence(40_000 / m).unwrap();
        assert!((a / b / 2f64.sqrt() - 1.0).abs() < 0.01, "m={m}");
    }
    let grid = TauGrid::from_cluster_sizes(1.0, 1000, vec![1, 499]).unwrap();
    let s = SampleSeries::labelled((0..1000).map(|i| (i % 7) as f64).collect(), 1.0, "x").unwrap();
    let c = avar_standard(&s, &grid).unwrap();
    assert!((c.points[0].rel_ci - 0.02237).abs() < 1e-5);
    assert!((c.points[1].rel_ci - 0.7071).abs() < 1e-4);
}
