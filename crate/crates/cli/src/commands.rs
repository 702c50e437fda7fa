//! One function per subcommand.

use std::fs;
use std::path::Path;

use avarkit::allan::{read_curve_csv, write_curve_csv, CurveRecord};
use avarkit::identify::{
    analyze_recording, compare_coefficients, BudgetOptions, ChannelAnalysis, ErrorBudget,
};
use avarkit::noise_model::{component_avar, theoretical_avar, Coefficient, NoiseParams, SimSpec};
use avarkit::scenario::{simulate_recording, RecordingSpec};
use avarkit::timeseries::CsvFormat;
use avarkit::validation::{
    central_window, model_overlay, overlay, summarize, summarize_all, OverlayRow, OverlaySummary,
};
use avarkit::{load_recording, save_recording, Recording};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::output::{channel_file, create_dir, create_file, write_json, write_table};
use crate::{
    AnalyzeArgs, CliError, GridArgs, PlotdataArgs, RoundtripArgs, SimulateArgs, ValidateArgs,
};

/// Channel name given to a single-stream spec.
pub const SINGLE_CHANNEL_NAME: &str = "signal";

/// Width of the central window reported by `validate`, decades.
pub const CENTRAL_DECADES: f64 = 2.0;

fn budget_options(grid: &GridArgs) -> Result<BudgetOptions, CliError> {
    if grid.ppd == 0 {
        return Err(CliError::field("ppd", "must be at least 1"));
    }
    Ok(BudgetOptions {
        estimator: grid.estimator.into(),
        points_per_decade: grid.ppd,
        ..BudgetOptions::default()
    })
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new("json_error", format!("{}: {e}", path.display())))
}

fn from_value<T: DeserializeOwned>(v: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            String::from("<root>")
        } else {
            path
        };
        CliError::field(field, e.into_inner().to_string())
    })
}

/// Reads a recording spec, or a single-stream spec wrapped as one channel.
pub fn load_spec(path: &Path, seed: Option<u64>) -> Result<RecordingSpec<f64>, CliError> {
    let v = read_json(path)?;
    let mut spec = if v.get("channels").is_some() {
        from_value::<RecordingSpec<f64>>(v)?
    } else {
        RecordingSpec::from_sim_spec(&from_value::<SimSpec<f64>>(v)?, SINGLE_CHANNEL_NAME)
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate()?;
    Ok(spec)
}

fn params_json(p: &NoiseParams<f64>) -> Value {
    json!({ "q": p.q, "n": p.n, "b": p.b, "k": p.k, "r": p.r })
}

fn channel_json(a: &ChannelAnalysis<f64>) -> Value {
    let mut v = a.budget.to_json();
    v["segments"] = a
        .segments
        .iter()
        .map(|s| {
            json!({
                "tau_lo": s.tau_lo,
                "tau_hi": s.tau_hi,
                "slope": s.slope,
                "slope_stderr": s.slope_stderr,
                "canonical": s.canonical.map(Coefficient::key),
                "n_points": s.n_points,
            })
        })
        .collect();
    v
}

fn budget_json(
    rec: &Recording<f64>,
    analyses: &[ChannelAnalysis<f64>],
    opts: &BudgetOptions,
) -> Value {
    let budget = ErrorBudget {
        estimator: opts.estimator,
        channels: analyses.iter().map(|a| a.budget.clone()).collect(),
    };
    let mut v = budget.to_json();
    for a in analyses {
        v["channels"][&a.budget.label] = channel_json(a);
    }
    v["channel_order"] = json!(rec.labels().collect::<Vec<_>>());
    v["dt"] = json!(rec.dt());
    v["n_samples"] = json!(rec.len());
    v["points_per_decade"] = json!(opts.points_per_decade);
    v
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let opts = budget_options(&a.grid)?;
    let rec: Recording<f64> = load_recording(&a.input, &CsvFormat::default())?;
    let analyses = analyze_recording(&rec, &opts);
    let curves = a.output_dir.join("curves");
    create_dir(&curves)?;
    for an in &analyses {
        if let Some(curve) = &an.curve {
            write_curve_csv(
                curve,
                create_file(&channel_file(&curves, &an.budget.label, "csv"))?,
            )?;
        }
    }
    write_json(
        &a.output_dir.join("budget.json"),
        &budget_json(&rec, &analyses, &opts),
    )?;
    let budget = ErrorBudget {
        estimator: opts.estimator,
        channels: analyses.into_iter().map(|a| a.budget).collect(),
    };
    budget.write_table_csv(create_file(&a.output_dir.join("budget.csv"))?)?;
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let spec = load_spec(&a.spec, a.seed)?;
    let rec = simulate_recording(&spec)?;
    create_dir(&a.output_dir)?;
    save_recording(&rec, a.output_dir.join("recording.csv"))?;
    let spec_json =
        serde_json::to_value(&spec).map_err(|e| CliError::new("json_error", e.to_string()))?;
    write_json(&a.output_dir.join("spec.json"), &spec_json)
}

pub fn roundtrip(a: &RoundtripArgs) -> Result<(), CliError> {
    let opts = budget_options(&a.grid)?;
    let spec = load_spec(&a.spec, a.seed)?;
    let rec = simulate_recording(&spec)?;
    let analyses = analyze_recording(&rec, &opts);
    let mut channels = serde_json::Map::new();
    let mut all_pass = true;
    for (ch, an) in spec.channels.iter().zip(&analyses) {
        let checks = compare_coefficients(&ch.spec.params, &an.budget);
        let pass = checks.iter().all(|c| c.pass);
        all_pass &= pass;
        let by_coef: serde_json::Map<String, Value> = checks
            .iter()
            .map(|c| {
                let v = json!({
                    "truth": c.truth,
                    "recovered": c.recovered,
                    "rel_error": c.rel_error,
                    "tolerance": c.tolerance,
                    "status": c.status,
                    "pass": c.pass,
                });
                (c.coefficient.key().to_string(), v)
            })
            .collect();
        channels.insert(
            ch.name.clone(),
            json!({ "checks": by_coef, "pass": pass, "warnings": an.budget.warnings }),
        );
    }
    let report = json!({
        "channels": channels,
        "pass": all_pass,
        "seed": spec.seed,
        "dt": spec.dt,
        "n_samples": spec.n_samples,
        "estimator": opts.estimator.as_str(),
        "points_per_decade": opts.points_per_decade,
    });
    create_dir(&a.output_dir)?;
    write_json(&a.output_dir.join("roundtrip.json"), &report)
}

/// Noise parameters from a params object or from one channel of a budget document.
pub fn load_params(path: &Path, channel: Option<&str>) -> Result<NoiseParams<f64>, CliError> {
    let v = read_json(path)?;
    let Some(channels) = v.get("channels").and_then(Value::as_object) else {
        return from_value(v);
    };
    let label = match channel {
        Some(c) => c.to_string(),
        None if channels.len() == 1 => channels.keys().next().cloned().unwrap_or_default(),
        None => {
            return Err(CliError::field(
                "channel",
                "budget has several channels; pass --channel",
            ))
        }
    };
    let col = channels
        .get(&label)
        .ok_or_else(|| CliError::field("channel", format!("no channel `{label}` in budget")))?;
    let mut p = NoiseParams::default();
    for c in Coefficient::ALL {
        let x = col.get(c.key()).and_then(Value::as_f64).ok_or_else(|| {
            CliError::field(format!("channels.{label}.{}", c.key()), "missing number")
        })?;
        p.set(c, x);
    }
    p.validate()?;
    Ok(p)
}

fn summary_json(s: &OverlaySummary) -> Value {
    json!({ "points": s.points, "within": s.within, "in_bound_fraction": s.in_bound_fraction })
}

pub fn validate(a: &ValidateArgs) -> Result<(), CliError> {
    let open = |p: &Path| fs::File::open(p).map_err(|e| CliError::io(p, e));
    let empirical: Vec<CurveRecord> = read_curve_csv(open(&a.input)?)?;
    let (rows, model) = match (&a.params, &a.model) {
        (Some(p), _) => {
            let params = load_params(p, a.channel.as_deref())?;
            (
                model_overlay(&empirical, &params),
                json!({ "params": params_json(&params), "source": "params" }),
            )
        }
        (None, Some(m)) => {
            let model = read_curve_csv(open(m)?)?;
            let taus: Vec<f64> = model.iter().map(|r| r.tau).collect();
            let adev: Vec<f64> = model.iter().map(|r| r.adev).collect();
            (
                overlay(&empirical, &taus, &adev)?,
                json!({ "source": "curve" }),
            )
        }
        (None, None) => return Err(CliError::usage("one of --params or --model is required")),
    };
    let taus: Vec<f64> = empirical.iter().map(|r| r.tau).collect();
    let (lo, hi) = central_window(&taus, CENTRAL_DECADES);
    let mut central = summary_json(&summarize(&rows, lo, hi));
    central["tau_lo"] = json!(lo);
    central["tau_hi"] = json!(hi);
    let report =
        json!({ "all": summary_json(&summarize_all(&rows)), "central": central, "model": model });
    create_dir(&a.output_dir)?;
    write_overlay(&a.output_dir.join("overlay.csv"), &rows)?;
    write_json(&a.output_dir.join("validate.json"), &report)
}

fn write_overlay(path: &Path, rows: &[OverlayRow]) -> Result<(), CliError> {
    let table: Vec<Vec<Option<f64>>> = rows
        .iter()
        .map(|r| {
            vec![
                Some(r.tau),
                Some(r.adev_empirical),
                r.rel_ci,
                Some(r.adev_model),
                Some(if r.within_3ci { 1.0 } else { 0.0 }),
            ]
        })
        .collect();
    write_table(
        path,
        &[
            "tau",
            "adev_empirical",
            "rel_ci",
            "adev_model",
            "within_3ci",
        ],
        &table,
    )
}

pub fn plotdata(a: &PlotdataArgs) -> Result<(), CliError> {
    let opts = budget_options(&a.grid)?;
    let rec: Recording<f64> = load_recording(&a.input, &CsvFormat::default())?;
    let dir = a.output_dir.join("plot");
    create_dir(&dir)?;
    for an in analyze_recording(&rec, &opts) {
        let Some(curve) = &an.curve else { continue };
        let p = an.budget.params;
        let rows: Vec<Vec<Option<f64>>> = curve
            .points
            .iter()
            .map(|pt| {
                let rel = pt.rel_ci.is_finite().then_some(pt.rel_ci);
                let c = component_avar(&p, pt.tau);
                vec![
                    Some(pt.tau),
                    Some(pt.adev),
                    rel.map(|r| pt.adev * (1.0 - r).max(0.0)),
                    rel.map(|r| pt.adev * (1.0 + r)),
                    Some(theoretical_avar(&p, pt.tau).sqrt()),
                    Some(c.quantization.sqrt()),
                    Some(c.white.sqrt()),
                    Some(c.bias_instability.sqrt()),
                    Some(c.rate_random_walk.sqrt()),
                    Some(c.ramp.sqrt()),
                ]
            })
            .collect();
        let header = [
            "tau",
            "adev",
            "adev_lower",
            "adev_upper",
            "adev_model",
            "quantization",
            "white",
            "bias_instability",
            "rate_random_walk",
            "ramp",
        ];
        write_table(&channel_file(&dir, &an.budget.label, "csv"), &header, &rows)?;
    }
    Ok(())
}
