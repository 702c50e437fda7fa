use avarkit::noise_model::{simulate_gauss_markov, NoiseParams, SimSpec};
use avarkit::scenario::{reference_recording_spec, simulate_recording};
use avarkit::timeseries::{read_recording, write_recording, CsvFormat, TimeColumn};
use avarkit::{
    detrend_mean, infer_rate, load_recording, save_recording, Error, Recording, SampleSeries,
};
use proptest::prelude::*;

fn read(text: &str) -> avarkit::Result<Recording<f64>> {
    read_recording(text.as_bytes(), &CsvFormat::default())
}

proptest! {
    #[test]
    fn infer_rate_ignores_time_origin(dt in 1e-4f64..10.0, n in 2usize..400, shift in -1e3f64..1e3) {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let shifted: Vec<f64> = times.iter().map(|t| t + shift).collect();
        let a = infer_rate(&times, 0.01).unwrap();
        let b = infer_rate(&shifted, 0.01).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * dt.max(shift.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn detrend_is_idempotent(values in proptest::collection::vec(-1e6f64..1e6, 1..300)) {
        let s = SampleSeries::labelled(values, 0.1, "x").unwrap();
        let once = detrend_mean(&s);
        let twice = detrend_mean(&once);
        let scale = s.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for (a, b) in once.values().iter().zip(twice.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
        prop_assert_eq!(once.len(), s.len());
        prop_assert_eq!(once.dt(), s.dt());
    }

    #[test]
    fn save_load_is_identity(
        cols in proptest::collection::vec(proptest::collection::vec(-1e9f64..1e9, 40), 1..4),
        dt in 1e-4f64..5.0,
    ) {
        let channels = cols
            .into_iter()
            .enumerate()
            .map(|(i, v)| SampleSeries::labelled(v, dt, format!("ch{i}")).unwrap())
            .collect();
        let rec = Recording::new(channels, Default::default()).unwrap();
        let mut buf = Vec::new();
        write_recording(&rec, &mut buf).unwrap();
        let back: Recording<f64> = read_recording(buf.as_slice(), &CsvFormat::default()).unwrap();
        prop_assert_eq!(back.dt(), dt);
        prop_assert_eq!(back.channels(), rec.channels());
    }
}

#[test]
fn nine_channel_file_round_trips_bit_exactly() {
    let spec = reference_recording_spec(0.01, 10_000, 2024);
    let rec = simulate_recording(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.csv");
    save_recording(&rec, &path).unwrap();
    let back: Recording<f64> = load_recording(&path, &CsvFormat::default()).unwrap();
    assert_eq!(back.len(), 10_000);
    assert_eq!(back.dt(), rec.dt());
    assert_eq!(
        back.labels().collect::<Vec<_>>(),
        rec.labels().collect::<Vec<_>>()
    );
    for (a, b) in rec.channels().iter().zip(back.channels()) {
        assert!(a
            .values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(a.unit(), b.unit());
    }
}

#[test]
fn gauss_markov_stream_detrends_to_zero_mean() {
    let p: NoiseParams<f64> = NoiseParams {
        gm_sigma: 2.0,
        gm_tc: 50.0,
        ..Default::default()
    };
    let s = simulate_gauss_markov(&SimSpec::new(p, 0.1, 200_000, 9)).unwrap();
    let d = detrend_mean(&s);
    let max_in = s.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mean = d.values().iter().sum::<f64>() / d.len() as f64;
    assert!(mean.abs() < 1e-12 * max_in, "{mean}");
}

#[test]
fn malformed_row_reports_its_line() {
    match read("t,a\n0,1\n0.1,2\n0.2,oops\n").unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 4),
        e => panic!("{e}"),
    }
    match read("t,a,b\n0,1,2\n0.1,2\n").unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 3),
        e => panic!("{e}"),
    }
}

#[test]
fn nan_reports_channel_and_index() {
    match read("t,a,b\n0,1,2\n0.1,2,NaN\n0.2,3,4\n").unwrap_err() {
        Error::NonFinite { channel, index } => {
            assert_eq!(channel, "b");
            assert_eq!(index, 1);
        }
        e => panic!("{e}"),
    }
}

#[test]
fn jittered_timestamps_are_rejected() {
    assert!(matches!(
        read("t,a\n0.0,1\n0.01,2\n0.05,3\n").unwrap_err(),
        Error::Sampling(_)
    ));
    assert!(matches!(
        read("t,a\n0.0,1\n0.02,2\n0.01,3\n").unwrap_err(),
        Error::Sampling(_)
    ));
}

#[test]
fn empty_input_is_distinguished() {
    assert!(matches!(read("").unwrap_err(), Error::EmptyInput));
    assert!(matches!(read("t,a\n").unwrap_err(), Error::EmptyInput));
}

#[test]
fn sample_index_column() {
    let fmt = CsvFormat {
        time_column: TimeColumn::SampleIndex { dt: 0.5 },
        ..Default::default()
    };
    let rec: Recording<f64> = read_recording("i,x\n0,1\n1,2\n2,3\n".as_bytes(), &fmt).unwrap();
    assert_eq!(rec.dt(), 0.5);
    assert!(read_recording::<f64, _>("i,x\n0,1\n2,2\n".as_bytes(), &fmt).is_err());
}

#[test]
fn single_precision_recording() {
    let rec: Recording<f32> = read_recording(
        "t,gyro.z\n0,0.5\n0.25,1.5\n".as_bytes(),
        &CsvFormat::default(),
    )
    .unwrap();
    assert_eq!(rec.dt(), 0.25f32);
    assert_eq!(rec.channel("gyro.z").unwrap().values(), &[0.5f32, 1.5]);
}
