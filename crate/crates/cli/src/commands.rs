use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use solimbt::io::{format_f64, read_bundle, write_bundle};
use solimbt::matfun::{FrequencyBand, TimeWindow};
use solimbt::pipeline::{compare_trajectories, frequency_error_report, prepare, ErrorReport, FrequencySweep, FrequencyUnit};
use solimbt::system::{self, ChainParams, SecondOrderSystem, Signal, TimeGrid, Trajectory};

use crate::config::JobConfig;
use crate::{AnalyzeArgs, ChainArgs, CliError, SignalKind, SimulateArgs};

/// Only the first values of a spectrum go into reports.
const REPORTED_SIGMA: usize = 50;

/// JSON number, or `"inf"`, `"-inf"`, `"nan"` for values JSON cannot hold.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format_f64(x))
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    write_file(path, &(serde_json::to_string_pretty(value).expect("json values serialize") + "\n"))
}

fn summary_path(out: &Path, summary: &Option<PathBuf>) -> PathBuf {
    summary.clone().unwrap_or_else(|| out.with_extension("json"))
}

fn cell(x: Option<f64>) -> String {
    format_f64(x.unwrap_or(f64::NAN))
}

pub fn generate_chain(args: &ChainArgs) -> Result<(), CliError> {
    let params = ChainParams {
        mass: args.mass,
        coupling_stiffness: args.coupling_stiffness,
        coupling_damping: args.coupling_damping,
        ground_stiffness_end: args.ground_stiffness_end,
        ground_stiffness_interior: args.ground_stiffness_interior,
        ground_damping_end: args.ground_damping_end,
        ground_damping_interior: args.ground_damping_interior,
    };
    let sys = system::generate_chain(args.masses, &params)?;
    let meta = json!({"kind": "chain", "masses": args.masses, "params": params});
    write_bundle(&args.out, &sys, "chain", meta)?;
    Ok(())
}

pub fn reduce(config_path: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let job = JobConfig::load(config_path)?;
    let config = job.reduction()?;
    let (sys, _) = read_bundle(&job.input_dir)?;
    let read_s = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let prepared = prepare(&sys, &config)?;
    let gramians_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let red = prepared.reduce(config.formula, &config.order)?;
    let reduce_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let name = job.name();
    let provenance = serde_json::to_value(&red.rom.provenance).expect("provenance serializes");
    write_bundle(&job.output_dir, &red.rom.system, &name, json!({ "provenance": provenance }))?;
    let head = |s: &[f64]| -> Vec<Value> { s.iter().take(REPORTED_SIGMA).map(|&x| num(x)).collect() };
    let mut report = json!({
        "name": name,
        "method": config.method,
        "formula": config.formula,
        "full_order": sys.order(),
        "prereduced_order": prepared.prereduced_order,
        "rom_order": red.rom.system.order(),
        "stable": red.stable,
        "sigma_kind": red.balancing.sigma.kind,
        "sigma": head(&red.balancing.sigma.sigma),
        "truncated_sum": num(red.balancing.truncated_sum),
        "alpha": config.alpha,
        "realization": prepared.realization,
        "solver": prepared.solver,
    });
    if let Some(v) = &red.balancing.sigma_velocity {
        report["sigma_velocity"] = Value::Array(head(&v.sigma));
    }
    let write_s = t.elapsed().as_secs_f64();
    report["timings"] = json!({
        "read_s": read_s,
        "gramians_s": gramians_s,
        "reduce_s": reduce_s,
        "write_s": write_s,
        "total_s": start.elapsed().as_secs_f64(),
    });
    write_json(&job.output_dir.join("report.json"), &report)?;
    if !red.stable {
        eprintln!("warning: reduced model is not asymptotically stable");
    }
    Ok(())
}

fn parse_range(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::config(format!("{what} '{text}' is not of the form lo:hi"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn maxima(rep: &ErrorReport) -> Value {
    json!({
        "global_max_abs": num(rep.global_max_abs),
        "global_max_rel": num(rep.global_max_rel),
        "local_max_abs": num(rep.local_max_abs),
        "local_max_rel": num(rep.local_max_rel),
    })
}

fn check_maxima(rep: &ErrorReport) -> Result<(), CliError> {
    if rep.local_max_abs > rep.global_max_abs || rep.local_max_rel > rep.global_max_rel {
        return Err(CliError::numerical("local error maxima exceed the global ones"));
    }
    Ok(())
}

fn merge(into: &mut Value, extra: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, extra) {
        a.extend(b);
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let unit: FrequencyUnit = args.unit.into();
    let sweep = FrequencySweep::new(unit.to_rad_s(args.wmin), unit.to_rad_s(args.wmax), args.points)
        .map_err(|e| CliError::config(e.to_string()))?;
    let band = if args.bands.is_empty() {
        None
    } else {
        let mut intervals = Vec::new();
        for b in &args.bands {
            let (lo, hi) = parse_range(b, "band")?;
            intervals.push((unit.to_rad_s(lo), unit.to_rad_s(hi)));
        }
        Some(FrequencyBand::new(intervals).map_err(|e| CliError::config(e.to_string()))?)
    };
    let (orig, _) = read_bundle(&args.orig)?;
    let (rom, _) = read_bundle(&args.rom)?;
    let rep = frequency_error_report(&orig, &rom, &sweep, band.as_ref())?;
    check_maxima(&rep)?;

    let mut csv = String::from("omega_rad_s,orig_norm,abs_err,rel_err\n");
    for i in 0..rep.grid.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            format_f64(rep.grid[i]),
            cell(rep.reference_norm[i]),
            cell(rep.pointwise_abs[i]),
            cell(rep.pointwise_rel[i])
        );
    }
    write_file(&args.out, &csv)?;

    let mut summary = json!({
        "unit": unit,
        "wmin_rad_s": sweep.wmin,
        "wmax_rad_s": sweep.wmax,
        "points": sweep.points,
        "band_rad_s": band.as_ref().map(|b| b.intervals().to_vec()),
        "skipped_points": rep.pointwise_abs.iter().filter(|x| x.is_none()).count(),
        "rom_order": rep.rom_order,
        "rom_stable": rep.rom_stable,
    });
    merge(&mut summary, maxima(&rep));
    write_json(&summary_path(&args.out, &args.summary), &summary)
}

fn signal_of(args: &SimulateArgs) -> Result<Signal, CliError> {
    if let Some(path) = &args.signal_file {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())));
    }
    Ok(match args.signal {
        SignalKind::Zero => Signal::Zero,
        SignalKind::Step => Signal::Step {
            amplitude: args.amplitude,
            onset: args.onset,
        },
        SignalKind::Sin => Signal::Sin {
            amplitude: args.amplitude,
            omega: args.omega,
            onset: args.onset,
            offset: args.offset,
        },
    })
}

fn diverged(summary_file: &Path, base: Value, which: &str, time: f64) -> CliError {
    let mut summary = base;
    merge(
        &mut summary,
        json!({
            "diverged": which,
            "diverged_at": time,
            "max_output_norm": "inf",
            "global_max_abs": "inf",
            "global_max_rel": "inf",
            "local_max_abs": "inf",
            "local_max_rel": "inf",
        }),
    );
    if let Err(e) = write_json(summary_file, &summary) {
        return e;
    }
    CliError::numerical(format!("{which} simulation diverged at t = {time}"))
}

fn run_model(
    sys: &SecondOrderSystem,
    signal: &Signal,
    grid: &TimeGrid,
    summary_file: &Path,
    base: &Value,
    which: &str,
) -> Result<Trajectory, CliError> {
    match system::simulate(sys, signal, grid) {
        Ok(y) => Ok(y),
        Err(solimbt::Error::NonFiniteState { time }) => Err(diverged(summary_file, base.clone(), which, time)),
        Err(e) => Err(e.into()),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let signal = signal_of(args)?;
    let grid = TimeGrid::new(args.t0, args.tf, args.dt).map_err(|e| CliError::config(e.to_string()))?;
    let window = args
        .window
        .as_deref()
        .map(|w| {
            let (a, b) = parse_range(w, "window")?;
            TimeWindow::new(a, b).map_err(|e| CliError::config(e.to_string()))
        })
        .transpose()?;
    let (model, _) = read_bundle(&args.model)?;
    let reference = args.reference.as_deref().map(read_bundle).transpose()?.map(|(s, _)| s);
    if let Some(r) = &reference {
        if (r.inputs(), r.outputs()) != (model.inputs(), model.outputs()) {
            return Err(CliError::io("model and reference differ in inputs or outputs"));
        }
    }
    let summary_file = summary_path(&args.out, &args.summary);
    let base = json!({
        "signal": signal,
        "t0": grid.t0,
        "tf": grid.tf,
        "dt": grid.dt,
        "window": window,
        "model_order": model.order(),
    });

    let y = run_model(&model, &signal, &grid, &summary_file, &base, "model")?;
    let report = match &reference {
        Some(r) => {
            let yr = run_model(r, &signal, &grid, &summary_file, &base, "reference")?;
            let rep = compare_trajectories(&yr, &y, window.as_ref(), &model)?;
            check_maxima(&rep)?;
            Some(rep)
        }
        None => None,
    };

    let p = model.outputs();
    let mut csv = String::from("t_s");
    for k in 1..=p {
        let _ = write!(csv, ",y_{k}");
    }
    csv.push_str(if report.is_some() { ",abs_err,rel_err\n" } else { "\n" });
    for (i, (t, out)) in y.times.iter().zip(&y.outputs).enumerate() {
        csv.push_str(&format_f64(*t));
        for v in out.iter() {
            csv.push(',');
            csv.push_str(&format_f64(*v));
        }
        if let Some(rep) = &report {
            let _ = write!(csv, ",{},{}", cell(rep.pointwise_abs[i]), cell(rep.pointwise_rel[i]));
        }
        csv.push('\n');
    }
    write_file(&args.out, &csv)?;

    let norms: Vec<f64> = y.outputs.iter().map(|v| v.norm()).collect();
    let local_peak = y
        .times
        .iter()
        .zip(&norms)
        .filter(|(t, _)| window.is_none_or(|w| w.contains(**t)))
        .map(|(_, n)| *n)
        .fold(0.0, f64::max);
    let mut summary = base;
    merge(
        &mut summary,
        json!({
            "steps": y.times.len() - 1,
            "outputs": p,
            "max_output_norm": num(norms.iter().copied().fold(0.0, f64::max)),
            "local_max_output_norm": num(local_peak),
        }),
    );
    if let Some(rep) = &report {
        merge(&mut summary, maxima(rep));
        merge(&mut summary, json!({"model_stable": rep.rom_stable}));
    }
    write_json(&summary_file, &summary)
}
