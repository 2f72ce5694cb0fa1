use qfc_core::csv::{format_sig12, Table};
use qfc_core::langevin::{
    integrate_sfg, run_montecarlo, synthesize_epr_streams, vacuum_calibration, Combination,
    SimConfig,
};
use qfc_core::sweep::{self, PumpFamily, SweepAxis, SweepSpec};
use qfc_core::verify::{run_batteries, VerifyOptions, DEFAULT_SEED};
use qfc_core::{s_min, to_decibel, SqueezeFactor};
use serde_json::{json, Value};

use crate::args::{Family, GridArgs, MonteCarloArgs, PumpSweepArgs, SpectrumArgs, VerifyArgs};
use crate::config::Resolved;
use crate::error::CliError;
use crate::output::Sink;

fn spec(axis: SweepAxis, grid: &GridArgs, params: &Resolved) -> SweepSpec {
    SweepSpec {
        axis,
        start: grid.start,
        stop: grid.stop,
        step: grid.step,
        fixed: params.fixed,
    }
}

fn grid_options(grid: &GridArgs) -> Value {
    json!({ "start": grid.start, "stop": grid.stop, "step": grid.step })
}

pub fn point(params: &Resolved, sink: &mut Sink, as_json: bool) -> Result<Value, CliError> {
    let res = s_min(&params.fixed.operating_point()?);
    if let Some(path) = sink.out().map(|p| p.to_path_buf()) {
        let mut t = Table::new(
            [
                "s_min",
                "s_min_db",
                "g_opt",
                "theta_opt",
                "eta",
                "duan_sum",
                "inseparable",
            ]
            .map(String::from)
            .to_vec(),
        );
        t.push(vec![
            res.s_min,
            res.s_min_db,
            res.g_opt,
            res.theta_opt.radians(),
            res.eta,
            res.duan_sum,
            f64::from(u8::from(res.inseparable())),
        ]);
        sink.table_to(&path, &t)?;
    }
    if as_json {
        let mut v = serde_json::to_value(res).map_err(std::io::Error::other)?;
        v["inseparable"] = json!(res.inseparable());
        println!(
            "{}",
            serde_json::to_string_pretty(&v).map_err(std::io::Error::other)?
        );
    } else {
        println!("s_min       {}", format_sig12(res.s_min));
        println!("s_min_db    {}", format_sig12(res.s_min_db));
        println!("g_opt       {}", format_sig12(res.g_opt));
        println!(
            "theta_opt   {} rad ({} deg)",
            format_sig12(res.theta_opt.radians()),
            format_sig12(res.theta_opt.degrees())
        );
        println!("eta         {}", format_sig12(res.eta));
        println!("duan_sum    {}", format_sig12(res.duan_sum));
        println!("inseparable {}", res.inseparable());
        if res.degenerate {
            println!("note        pump is off; phase undefined, reported as 0");
        }
    }
    Ok(json!({}))
}

pub fn spectrum(
    args: &SpectrumArgs,
    params: &Resolved,
    sink: &mut Sink,
) -> Result<Value, CliError> {
    let t = sweep::spectrum(&spec(SweepAxis::Omega, &args.grid, params), &args.rs)?;
    sink.primary_table(&t)?;
    Ok(json!({ "grid": grid_options(&args.grid), "rs": args.rs }))
}

pub fn pump_sweep(
    args: &PumpSweepArgs,
    params: &Resolved,
    sink: &mut Sink,
    as_json: bool,
) -> Result<Value, CliError> {
    let family = match (args.family, args.values.clone()) {
        (Family::Gamma3, v) => PumpFamily::Gamma3(v.unwrap_or_else(|| vec![0.6, 1.0, 1.4])),
        (Family::R, v) => PumpFamily::Squeeze(v.unwrap_or_else(|| vec![0.6, 1.0, 2.0])),
    };
    let (t, summary) = sweep::pump_sweep(&spec(SweepAxis::Pump, &args.grid, params), &family)?;
    sink.primary_table(&t)?;
    let report = |line: String| {
        // Keep stdout pure CSV when the table went there.
        if sink.out().is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    };
    if as_json {
        report(serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?);
    } else {
        report("curve,argmin,min,argmin_refined,min_refined,unimodal".into());
        for s in &summary {
            report(format!(
                "{},{},{},{},{},{}",
                s.column,
                format_sig12(s.argmin),
                format_sig12(s.min),
                format_sig12(s.argmin_refined),
                format_sig12(s.min_refined),
                s.unimodal
            ));
        }
    }
    Ok(json!({ "grid": grid_options(&args.grid), "family": family }))
}

pub fn squeeze_sweep(
    grid: &GridArgs,
    params: &Resolved,
    sink: &mut Sink,
    as_json: bool,
) -> Result<Value, CliError> {
    let (t, summary) = sweep::squeeze_sweep(&spec(SweepAxis::Squeeze, grid, params))?;
    sink.primary_table(&t)?;
    let line = if as_json {
        serde_json::to_string(&summary).map_err(std::io::Error::other)?
    } else {
        format!(
            "eta {} asymptote {} strictly_decreasing {}",
            format_sig12(summary.eta),
            format_sig12(summary.asymptote),
            summary.strictly_decreasing
        )
    };
    if sink.out().is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(json!({ "grid": grid_options(grid) }))
}

pub fn verify(
    args: &VerifyArgs,
    params: &Resolved,
    sink: &mut Sink,
    as_json: bool,
) -> Result<Value, CliError> {
    let seed = params.seed.unwrap_or(DEFAULT_SEED);
    let opts = VerifyOptions {
        draws: args.draws,
        seed,
        inject_fault: args.inject_fault,
    };
    let results = run_batteries(&opts)?;
    let pass = results.iter().all(|b| b.pass);
    let options = json!({ "draws": args.draws, "inject_fault": args.inject_fault });

    if let Some(path) = sink.out().map(|p| p.to_path_buf()) {
        let manifest = sink.manifest("verify", params, options.clone(), Some(seed));
        let verdict = json!({ "pass": pass, "batteries": results, "manifest": manifest });
        sink.json_to(&path, &verdict)?;
    }
    if as_json {
        let verdict = json!({ "pass": pass, "batteries": results });
        println!(
            "{}",
            serde_json::to_string_pretty(&verdict).map_err(std::io::Error::other)?
        );
    } else {
        for b in &results {
            println!(
                "{:<18} max_error {:<12.3e} tolerance {:<8.0e} {}",
                b.battery,
                b.max_error,
                b.tolerance,
                if b.pass { "pass" } else { "FAIL" }
            );
        }
    }
    if !pass {
        let mut msg = String::from("verification failed");
        for b in results.iter().filter(|b| !b.pass) {
            msg.push_str(&format!("\n  {}: max error {:e}", b.battery, b.max_error));
            if let Some(d) = &b.worst {
                msg.push_str(&format!(
                    " at draw {} (gamma3 {}, rho1 {}, rho3 {}, pump {}, omega_tau {}, r {}, g {}, theta {})",
                    d.index, d.gamma3, d.rho1, d.rho3, d.pump, d.omega_tau, d.r, d.g, d.theta
                ));
            }
        }
        return Err(CliError::Verification(msg));
    }
    Ok(options)
}

pub fn montecarlo(
    args: &MonteCarloArgs,
    params: &Resolved,
    sink: &mut Sink,
    as_json: bool,
) -> Result<Value, CliError> {
    let d = SimConfig::default();
    let cfg = SimConfig {
        dt: args.dt.unwrap_or(d.dt),
        duration: args.duration.unwrap_or(d.duration),
        seed: params.seed.unwrap_or(d.seed),
        welch_segment: args.segment.unwrap_or(d.welch_segment),
        welch_overlap: args.overlap.unwrap_or(d.welch_overlap),
    };
    let p = params.fixed.operating_point()?.params;
    let r = SqueezeFactor::new(params.fixed.r)?;
    let report = run_montecarlo(&p, r, &cfg, &args.omegas, Combination::Sideband)?;

    let mut t = Table::new(
        ["omega", "analytic", "simulated", "stderr", "z", "pass"]
            .map(String::from)
            .to_vec(),
    );
    for row in &report.rows {
        t.push(vec![
            row.omega,
            row.analytic,
            row.simulated,
            row.stderr,
            row.z,
            f64::from(u8::from(row.pass)),
        ]);
    }
    sink.primary_table(&t)?;

    let calibration = if args.skip_calibration {
        None
    } else {
        let cal = vacuum_calibration(&p, &cfg)?;
        if let Some(path) = sink.sibling("calibration.csv") {
            let mut ct = Table::new(["omega", "psd", "stderr"].map(String::from).to_vec());
            for &(w, v, e) in &cal.bins {
                ct.push(vec![w, v, e]);
            }
            sink.table_to(&path, &ct)?;
        }
        Some(cal)
    };

    if let Some(path) = &args.trace {
        let n = args.trace_len.max(2);
        let inputs = synthesize_epr_streams(r, n, cfg.dt, cfg.seed)?;
        let trace = integrate_sfg(&p, &inputs, cfg.seed)?;
        sink.table_to(path, &trace.to_table())?;
    }

    let pass = report.pass() && calibration.as_ref().map_or(true, |c| c.pass);
    let summary = json!({
        "pass": pass,
        "steps": report.steps,
        "trajectories": report.trajectories,
        "segments": report.segments,
        "rows": report.rows,
        "calibration": calibration.as_ref().map(|c| json!({
            "mean_level": c.mean_level,
            "max_deviation": c.max_deviation,
            "pass": c.pass,
        })),
    });
    let line = if as_json {
        serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?
    } else {
        let mut s = format!(
            "{} steps, {} trajectories, {} segments each; verdict {}",
            report.steps,
            report.trajectories,
            report.segments,
            if pass { "pass" } else { "FAIL" }
        );
        if let Some(c) = &calibration {
            s.push_str(&format!(
                "\ncalibration mean {} max deviation {} (level in dB {})",
                format_sig12(c.mean_level),
                format_sig12(c.max_deviation),
                format_sig12(to_decibel(c.mean_level)?)
            ));
        }
        s
    };
    if sink.out().is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }

    let options = json!({
        "dt": cfg.dt,
        "duration": cfg.duration,
        "segment": cfg.welch_segment,
        "overlap": cfg.welch_overlap,
        "omegas": args.omegas,
        "skip_calibration": args.skip_calibration,
        "trace": args.trace,
        "trace_len": args.trace_len,
    });
    if !pass {
        return Err(CliError::Verification(format!(
            "simulated spectrum disagrees with the closed form; {}",
            serde_json::to_string(&summary).map_err(std::io::Error::other)?
        )));
    }
    Ok(options)
}
