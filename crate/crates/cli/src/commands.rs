//! Implementations of the CLI verbs. Each one builds a canonical
//! [`RunConfig`], executes, persists its outputs and returns the finished
//! [`RunRecord`] plus the overall pass flag.

use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::Path;

use degregorio::coefficients::{self, CoeffRecord};
use degregorio::io::{fmt_f64, fmt_f64_17, fourier_field_csv, tilde_series_csv};
use degregorio::linear::{self, InitialData, LinearRunConfig};
use degregorio::nonlinear::{
    self, InstabilityOptions, NonlinearState, PseudoSpectral, SolverConfig,
};
use degregorio::rational::to_f64;

use crate::plots::{emit_table_panels, emit_trajectory_panels};
use crate::run::{RunConfig, RunRecord, RunWriter};
use crate::{crosscheck, UsageError};

/// A finished command: its record and whether every verdict passed.
pub struct CommandOutput {
    pub record: RunRecord,
    pub pass: bool,
    /// Human-readable payload already printed to stdout.
    pub printed: bool,
}

fn read_initial_data(path: &Path) -> Result<InitialData> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading initial-data spec {}", path.display()))?;
    let spec: InitialData = serde_json::from_str(&text).map_err(|e| {
        UsageError(format!(
            "{}: expected {{\"kind\": \"...\", \"amplitudes\": {{\"1\": 1.0}}}}: {e}",
            path.display()
        ))
    })?;
    Ok(spec)
}

fn read_solver_config(path: Option<&Path>) -> Result<SolverConfig> {
    let cfg = match path {
        None => SolverConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading solver config {}", p.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| UsageError(format!("{}: bad solver config: {e}", p.display())))?
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// `coeffs --k <k>`: one exact record, printed as JSON.
pub fn coeffs_single(k: u32, json_out: bool) -> Result<CommandOutput> {
    if k == 0 {
        return Err(UsageError("--k must be >= 1".into()).into());
    }
    let rec = CoeffRecord::new(k);
    let det = to_f64(&coefficients::form_matrix(k).det());
    let det_err = (rec.lam1_k * rec.lam2_k - det).abs() / det.abs().max(1e-300);

    let mut writer = RunWriter::new(
        RunConfig::new("coeffs", 0, None).param("k", k),
    )?;
    writer.verdict("det_identity", det_err <= 1e-12, det_err, 1e-12);
    if !json_out {
        println!("{}", serde_json::to_string_pretty(&rec)?);
    }
    let record = writer.finish()?;
    let pass = record.all_pass();
    Ok(CommandOutput {
        record,
        pass,
        printed: !json_out,
    })
}

/// `coeffs --table --kmax <K> --out <path.csv>`: the coefficient table plus
/// the five plot panels next to it.
pub fn coeffs_table(kmax: u32, out: &Path) -> Result<CommandOutput> {
    if kmax == 0 {
        return Err(UsageError("--kmax must be >= 1".into()).into());
    }
    let parent = out.parent().map(|p| p.to_path_buf()).filter(|p| !p.as_os_str().is_empty());
    let table_name = out
        .file_name()
        .ok_or_else(|| UsageError("--out must name a file".into()))?
        .to_string_lossy()
        .into_owned();

    let mut csv = String::from("k,d_k,diff_k,a_k,eps_k,lam1,lam2\n");
    for k in 1..=kmax {
        let rec = CoeffRecord::new(k);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            k,
            fmt_f64_17(to_f64(&rec.d_k)),
            fmt_f64_17(to_f64(&rec.diff_k)),
            fmt_f64_17(to_f64(&rec.a_k)),
            fmt_f64_17(to_f64(&rec.eps_k)),
            fmt_f64_17(rec.lam1_k),
            fmt_f64_17(rec.lam2_k),
        );
    }

    let mut writer = RunWriter::new(
        RunConfig::new("coeffs", 0, parent.as_deref())
            .param("table", true)
            .param("kmax", kmax)
            .param("out", out.display().to_string()),
    )?;
    writer.write(&table_name, &csv)?;
    emit_table_panels(&mut writer, out)?;
    let record = writer.finish()?;
    println!("wrote {} and 5 plot panels", out.display());
    Ok(CommandOutput {
        record,
        pass: true,
        printed: true,
    })
}

/// `verify-bounds --kmax <K>`: exact certification, nonzero exit on failure.
pub fn verify_bounds(kmax: u32, out: Option<&Path>, json_out: bool) -> Result<CommandOutput> {
    if kmax == 0 {
        return Err(UsageError("--kmax must be >= 1".into()).into());
    }
    let cert = coefficients::certify_bounds(kmax);
    let mut writer = RunWriter::new(
        RunConfig::new("verify-bounds", 0, out).param("kmax", kmax),
    )?;
    writer.verdict(
        "bounds_certified",
        cert.verified,
        cert.failures.len() as f64,
        0.0,
    );
    let cert_json = serde_json::to_string_pretty(&cert)?;
    if writer.out_dir().is_some() {
        writer.write("certificate.json", &cert_json)?;
    }
    if !json_out {
        println!("{cert_json}");
    }
    let record = writer.finish()?;
    let pass = record.all_pass();
    Ok(CommandOutput {
        record,
        pass,
        printed: !json_out,
    })
}

fn trajectory_csv(traj: &linear::Trajectory) -> String {
    let mut csv = String::from("time,energy,rayleigh,j1,j2,tail_flux\n");
    for i in 0..traj.times.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_f64(traj.times[i]),
            fmt_f64(traj.energy[i]),
            fmt_f64(traj.rayleigh[i]),
            fmt_f64(traj.j1[i]),
            fmt_f64(traj.j2[i]),
            fmt_f64(traj.tail_flux[i]),
        );
    }
    csv
}

/// `evolve-linear --init <spec.json> --T --dt --N --out <dir>`.
pub fn evolve_linear(
    init_path: &Path,
    t_final: f64,
    dt: f64,
    n: usize,
    snap_every: usize,
    out: &Path,
) -> Result<CommandOutput> {
    let spec = read_initial_data(init_path)?;
    let eta0 = linear::build_initial_data(&spec)?;
    let config = LinearRunConfig {
        t_final,
        dt,
        n,
        snapshot_every: snap_every,
    };
    let mut writer = RunWriter::new(
        RunConfig::new("evolve-linear", 0, Some(out))
            .param("init", serde_json::to_value(&spec)?)
            .param("T", t_final)
            .param("dt", dt)
            .param("N", n)
            .param("snap_every", snap_every),
    )?;

    match linear::evolve_linear(&eta0, &config) {
        Err(degregorio::Error::BlowupGuard { t, value, .. }) => {
            writer.verdict("guard_clear", false, value, 1e12);
            let record = writer.finish()?;
            eprintln!("blow-up guard tripped at t = {t}: energy = {value:.3e}");
            Ok(CommandOutput {
                record,
                pass: false,
                printed: true,
            })
        }
        Err(e) => Err(e.into()),
        Ok(traj) => {
            writer.write("trajectory.csv", &trajectory_csv(&traj))?;
            for (i, (_step, state)) in traj.snapshots.iter().enumerate() {
                writer.write(&format!("states/{i:04}.csv"), &tilde_series_csv(state))?;
            }
            emit_trajectory_panels(&mut writer, "trajectory.csv")?;

            writer.verdict("guard_clear", true, 0.0, 1e12);
            let rayleigh0 = traj.rayleigh[0];
            if rayleigh0 >= 0.0 {
                // comparison sandwich applies: strict at every positive time
                let mut min_margin = f64::INFINITY;
                for i in 1..traj.times.len() {
                    min_margin = min_margin
                        .min(traj.energy[i] - traj.j1[i])
                        .min(traj.j2[i] - traj.energy[i]);
                }
                writer.verdict("j_sandwich", min_margin > 0.0, min_margin, 0.0);
            }
            let record = writer.finish()?;
            println!(
                "evolved to t = {}: energy {} -> {}",
                t_final,
                fmt_f64(traj.energy[0]),
                fmt_f64(*traj.energy.last().unwrap())
            );
            let pass = record.all_pass();
            Ok(CommandOutput {
                record,
                pass,
                printed: true,
            })
        }
    }
}

fn nonlinear_trajectory_csv(run: &nonlinear::NonlinearRun) -> String {
    let mut csv =
        String::from("time,hdw_norm,hdw_residual,l2_norm,sup_norm,parity_leak,tail_mass\n");
    for (t, d) in run.times.iter().zip(&run.diagnostics) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(d.hdw_norm),
            fmt_f64(d.hdw_residual),
            fmt_f64(d.l2_norm),
            fmt_f64(d.sup_norm),
            fmt_f64(d.parity_leak),
            fmt_f64(d.tail_mass),
        );
    }
    csv
}

/// `evolve-nonlinear --config <cfg.json> --init <spec.json> --T --out <dir>`.
pub fn evolve_nonlinear(
    config_path: Option<&Path>,
    init_path: &Path,
    t_final: f64,
    formulation: &str,
    snap_every: usize,
    out: &Path,
) -> Result<CommandOutput> {
    let cfg = read_solver_config(config_path)?;
    let spec = read_initial_data(init_path)?;
    let eta0 = linear::build_initial_data(&spec)?;
    if eta0.len() > cfg.tilde_truncation() {
        return Err(UsageError(format!(
            "initial data needs {} tilde modes, solver retains {}",
            eta0.len(),
            cfg.tilde_truncation()
        ))
        .into());
    }

    let state0 = match formulation {
        "perturbation" => NonlinearState::perturbation(eta0.resized(cfg.tilde_truncation())),
        "vorticity" => {
            let mut omega = nonlinear::field_from_tilde(&eta0, cfg.modes)?;
            omega.sin[1] -= 1.0;
            NonlinearState::vorticity(omega)
        }
        other => {
            return Err(UsageError(format!(
                "--formulation must be perturbation or vorticity, got {other}"
            ))
            .into())
        }
    };

    let mut writer = RunWriter::new(
        RunConfig::new("evolve-nonlinear", 0, Some(out))
            .param("config", serde_json::to_value(&cfg)?)
            .param("init", serde_json::to_value(&spec)?)
            .param("T", t_final)
            .param("formulation", formulation)
            .param("snap_every", snap_every),
    )?;

    let solver = PseudoSpectral::new(cfg.clone())?;
    let run = solver.evolve(state0, t_final, snap_every)?;

    writer.write("trajectory.csv", &nonlinear_trajectory_csv(&run))?;
    for (i, (_, field)) in run.snapshots.iter().enumerate() {
        writer.write(&format!("states/{i:04}.csv"), &fourier_field_csv(field))?;
    }
    emit_trajectory_panels(&mut writer, "trajectory.csv")?;

    let report = nonlinear::ExperimentReport {
        label: format!("evolve-nonlinear ({formulation})"),
        solver: cfg,
        params: serde_json::json!({ "init": spec, "t_final": t_final }),
        series: vec![nonlinear::SampledSeries {
            name: "hdw_norm".into(),
            times: run.times.clone(),
            values: run.diagnostics.iter().map(|d| d.hdw_norm).collect(),
        }],
        fit: None,
        verdicts: Default::default(),
        guard: run.guard,
    };
    writer.write("report.json", &serde_json::to_string_pretty(&report)?)?;
    writer.verdict(
        "guard_clear",
        run.guard.is_none(),
        run.guard.map(|g| g.sup).unwrap_or(0.0),
        nonlinear::GUARD_SUP,
    );

    let record = writer.finish()?;
    println!(
        "evolved to t = {}: final perturbation norm {}",
        run.times.last().unwrap(),
        fmt_f64(run.diagnostics.last().unwrap().hdw_norm)
    );
    let pass = record.all_pass();
    Ok(CommandOutput {
        record,
        pass,
        printed: true,
    })
}

fn write_report_outputs(
    writer: &mut RunWriter,
    report: &nonlinear::ExperimentReport,
) -> Result<()> {
    writer.write("report.json", &serde_json::to_string_pretty(report)?)?;
    for s in &report.series {
        let rel = format!("plot_data/{}.csv", s.name);
        writer.write(&rel, &crate::run::two_column_csv("time", &s.name, &s.times, &s.values))?;
    }
    Ok(())
}

/// `experiment stability ...`
pub fn experiment_stability(
    amplitude: f64,
    mode_set: &[u32],
    t_final: f64,
    cfg: &SolverConfig,
    out: &Path,
) -> Result<CommandOutput> {
    let report = nonlinear::stability_experiment(amplitude, mode_set, t_final, cfg)?;
    let mut writer = RunWriter::new(
        RunConfig::new("experiment", 0, Some(out))
            .param("kind", "stability")
            .param("amplitude", amplitude)
            .param("modes", mode_set)
            .param("T", t_final)
            .param("config", serde_json::to_value(cfg)?),
    )?;

    // trajectory.csv: time,hdw_norm,parity_leak,tail_mass (sampled)
    let mut csv = String::from("time,hdw_norm,parity_leak,tail_mass\n");
    let times = &report.series[0].times;
    for i in 0..times.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_f64(times[i]),
            fmt_f64(report.series[0].values[i]),
            fmt_f64(report.series[1].values[i]),
            fmt_f64(report.series[2].values[i]),
        );
    }
    writer.write("trajectory.csv", &csv)?;
    write_report_outputs(&mut writer, &report)?;
    for (name, v) in &report.verdicts {
        writer.verdict(name, v.pass, v.value, v.tolerance);
    }
    let record = writer.finish()?;
    let fit = report.fit.as_ref();
    println!(
        "stability: fitted rate {} (window [{}, {}]), verdicts {}",
        fit.map(|f| fmt_f64(f.rate)).unwrap_or_else(|| "n/a".into()),
        fit.map(|f| f.t_begin).unwrap_or(f64::NAN),
        fit.map(|f| f.t_end).unwrap_or(f64::NAN),
        if report.all_pass() { "pass" } else { "FAIL" }
    );
    let pass = record.all_pass();
    Ok(CommandOutput {
        record,
        pass,
        printed: true,
    })
}

/// `experiment instability ...`
#[allow(clippy::too_many_arguments)]
pub fn experiment_instability(
    init: &InitialData,
    opts: &InstabilityOptions,
    cfg: &SolverConfig,
    out: &Path,
) -> Result<CommandOutput> {
    let report = nonlinear::instability_experiment(init, opts, cfg)?;
    let mut writer = RunWriter::new(
        RunConfig::new("experiment", 0, Some(out))
            .param("kind", "instability")
            .param("init", serde_json::to_value(init)?)
            .param("options", serde_json::to_value(opts)?)
            .param("config", serde_json::to_value(cfg)?),
    )?;

    // trajectory.csv in long format: one block per scaling factor
    let mut csv = String::from("eps,time,ratio\n");
    for (s, &eps) in report.series.iter().zip(
        opts.epsilons
            .iter()
            .chain(opts.linear_check.iter()),
    ) {
        for (t, r) in s.times.iter().zip(&s.values) {
            let _ = writeln!(csv, "{},{},{}", fmt_f64(eps), fmt_f64(*t), fmt_f64(*r));
        }
    }
    writer.write("trajectory.csv", &csv)?;
    write_report_outputs(&mut writer, &report)?;
    for (name, v) in &report.verdicts {
        writer.verdict(name, v.pass, v.value, v.tolerance);
    }
    let record = writer.finish()?;
    println!(
        "instability: {} scaling factors, verdicts {}",
        opts.epsilons.len(),
        if report.all_pass() { "pass" } else { "FAIL" }
    );
    let pass = record.all_pass();
    Ok(CommandOutput {
        record,
        pass,
        printed: true,
    })
}

/// `verify --cross-check`
pub fn verify_cross_check(seed: u64, out: Option<&Path>) -> Result<CommandOutput> {
    let checks = crosscheck::cross_check(seed)?;
    let mut writer = RunWriter::new(
        RunConfig::new("verify", seed, out).param("cross_check", true),
    )?;
    for (name, v) in &checks.verdicts {
        writer.verdict(name, v.pass, v.value, v.tolerance);
        println!(
            "{name}: {} (value {:.3e}, tolerance {:.3e})",
            if v.pass { "pass" } else { "FAIL" },
            v.value,
            v.tolerance
        );
    }
    if writer.out_dir().is_some() {
        let json = serde_json::to_string_pretty(&checks.verdicts)?;
        writer.write("cross_check.json", &json)?;
    }
    let record = writer.finish()?;
    let pass = record.all_pass();
    Ok(CommandOutput {
        record,
        pass,
        printed: true,
    })
}

/// `verify --compare <a> <b>`
pub fn verify_compare(a: &Path, b: &Path) -> Result<CommandOutput> {
    let report = crate::compare::compare_runs(a, b)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    let writer = RunWriter::new(
        RunConfig::new("verify", 0, None)
            .param("compare_a", a.display().to_string())
            .param("compare_b", b.display().to_string()),
    )?;
    let record = writer.finish()?;
    Ok(CommandOutput {
        record,
        pass: true,
        printed: true,
    })
}
