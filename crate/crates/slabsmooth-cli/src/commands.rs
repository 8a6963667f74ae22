//! The five pipelines behind the command-line interface.

use std::path::{Path, PathBuf};

use slabsmooth::{
    build_global, fit_curve_parallel, fit_global, generate, limiting_null_density,
    limiting_null_mean_curve, load_csv, prior_gamma_curve, Dataset, LocalConfig, MeanFunction,
    NullLimitInput, SmootherKind, SyntheticSpec,
};

use crate::config::{Command, RunConfig};
use crate::emit;
use crate::CliError;

pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl RunOutput {
    fn new() -> Self {
        RunOutput {
            files: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn write(&mut self, path: PathBuf, content: &str) -> Result<(), CliError> {
        emit::write_atomic(&path, content)?;
        self.files.push(path);
        Ok(())
    }
}

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutput, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", out_dir.display())))?;
    let mut output = RunOutput::new();
    let tag = cfg.tag();
    match cfg.command {
        Command::FitGlobal => fit_global_cmd(cfg, out_dir, &tag, &mut output)?,
        Command::FitLocal => fit_local_cmd(cfg, out_dir, &tag, false, &mut output)?,
        Command::DofCurve => fit_local_cmd(cfg, out_dir, &tag, true, &mut output)?,
        Command::TheoryDensity => theory_cmd(cfg, out_dir, &tag, &mut output)?,
        Command::Simulate => simulate_cmd(cfg, out_dir, &tag, &mut output)?,
    }
    // The manifest lands only once the run has produced its outputs, so
    // failed runs leave no stray record behind.
    let manifest_path = out_dir.join(format!("{}_{tag}_manifest.txt", cfg.command.name()));
    emit::write_atomic(&manifest_path, &cfg.manifest())?;
    output.files.push(manifest_path);
    Ok(output)
}

/// Mean function from the resolved synthetic keys.
fn parse_mean(cfg: &RunConfig) -> Result<MeanFunction, CliError> {
    let kind = cfg.require("mean")?;
    match kind {
        "sine" => Ok(MeanFunction::Sine {
            amplitude: cfg.require_f64("amplitude")?,
            frequency: cfg.require_f64("frequency")?,
            phase: cfg.get_f64("phase")?.unwrap_or(0.0),
        }),
        "piecewise-flat" => Ok(MeanFunction::PiecewiseFlat {
            levels: cfg.f64_list("levels")?,
        }),
        "polynomial" => Ok(MeanFunction::Polynomial {
            coeffs: cfg.f64_list("coeffs")?,
        }),
        "flat-then-sine" => Ok(MeanFunction::FlatThenSine {
            split: cfg.require_f64("split")?,
            level: cfg.get_f64("level")?.unwrap_or(0.0),
            amplitude: cfg.require_f64("amplitude")?,
            frequency: cfg.require_f64("frequency")?,
        }),
        other => Err(CliError::usage(format!(
            "unknown mean function '{other}' (expected sine, piecewise-flat, polynomial, or flat-then-sine)"
        ))),
    }
}

fn synthetic_spec(cfg: &RunConfig) -> Result<SyntheticSpec, CliError> {
    Ok(SyntheticSpec {
        mean: parse_mean(cfg)?,
        noise_sd: cfg.require_f64("noise-sd")?,
        n: cfg.require_usize("n")?,
        x_range: (cfg.require_f64("x-min")?, cfg.require_f64("x-max")?),
        seed: cfg.get_u64("seed")?.unwrap_or(0),
    })
}

fn load_or_generate(cfg: &RunConfig) -> Result<Dataset, CliError> {
    match (cfg.get("input"), cfg.get("mean")) {
        (Some(path), None) => Ok(load_csv(path)?),
        (None, Some(_)) => Ok(generate(&synthetic_spec(cfg)?)?),
        (Some(_), Some(_)) => Err(CliError::usage(
            "--input and --mean are mutually exclusive".to_string(),
        )),
        (None, None) => Err(CliError::usage(format!(
            "{} needs data: give --input <csv> or a synthetic --mean",
            cfg.command.name()
        ))),
    }
}

fn fit_global_cmd(
    cfg: &RunConfig,
    out: &Path,
    tag: &str,
    output: &mut RunOutput,
) -> Result<(), CliError> {
    let data = load_or_generate(cfg)?;
    let degree = cfg.require_usize("degree")?;
    let prior = cfg.prior()?;
    let mcmc = cfg.mcmc()?;
    let kernel_index = cfg.get_usize("kernel-index")?;
    for (label, subset) in data.split_groups()? {
        let fit = fit_global(&subset, degree, &prior, &mcmc)?;
        output.notes.push(format!(
            "fit-global{}: n={} d={degree} dof={:.3} (ols {})",
            group_note(&label),
            subset.len(),
            fit.dof,
            fit.ols_dof
        ));
        output.write(
            emit::artifact_path(out, cfg.command.name(), tag, "curve", &label),
            &emit::global_curve_csv(&subset, &fit),
        )?;
        if let Some(i) = kernel_index {
            let ols = slabsmooth::effective_kernel(&fit, i, SmootherKind::Ols)?;
            let adaptive = slabsmooth::effective_kernel(&fit, i, SmootherKind::SpikeSlab)?;
            output.write(
                emit::artifact_path(out, cfg.command.name(), tag, "kernel_ols", &label),
                &emit::kernel_csv(subset.x(), &ols.weights),
            )?;
            output.write(
                emit::artifact_path(out, cfg.command.name(), tag, "kernel_spike_slab", &label),
                &emit::kernel_csv(subset.x(), &adaptive.weights),
            )?;
        }
    }
    Ok(())
}

fn local_config(cfg: &RunConfig) -> Result<LocalConfig, CliError> {
    let d = cfg.require_usize("degree")?;
    let mut local = LocalConfig::new(cfg.require_f64("bandwidth")?, d);
    local.prior = cfg.prior()?;
    local.mcmc = cfg.mcmc()?;
    if let Some(m) = cfg.get_usize("min-neighbors")? {
        local.min_neighbors = m;
    }
    Ok(local)
}

fn fit_local_cmd(
    cfg: &RunConfig,
    out: &Path,
    tag: &str,
    dof_only: bool,
    output: &mut RunOutput,
) -> Result<(), CliError> {
    let data = load_or_generate(cfg)?;
    let local = local_config(cfg)?;
    let jobs = cfg.get_usize("jobs")?.unwrap_or(1).max(1);
    for (label, subset) in data.split_groups()? {
        let curve = fit_curve_parallel(&subset, &local, jobs)?;
        let mean_dof =
            curve.dof_curve.points.iter().map(|p| p.1).sum::<f64>() / subset.len() as f64;
        output.notes.push(format!(
            "{}{}: n={} h={} d={} mean dof={mean_dof:.3}{}",
            cfg.command.name(),
            group_note(&label),
            subset.len(),
            local.h,
            local.d,
            if curve.failures.is_empty() {
                String::new()
            } else {
                format!(
                    " ({} points fell back to window means)",
                    curve.failures.len()
                )
            }
        ));
        if dof_only {
            output.write(
                emit::artifact_path(out, cfg.command.name(), tag, "dof", &label),
                &emit::dof_curve_csv(&curve),
            )?;
        } else {
            output.write(
                emit::artifact_path(out, cfg.command.name(), tag, "curve", &label),
                &emit::local_curve_csv(&subset, &curve),
            )?;
            output.write(
                emit::artifact_path(out, cfg.command.name(), tag, "dof", &label),
                &emit::dof_curve_csv(&curve),
            )?;
            output.write(
                emit::artifact_path(out, cfg.command.name(), tag, "diagnostics", &label),
                &emit::local_diagnostics_csv(&subset, &curve, local.d),
            )?;
        }
    }
    Ok(())
}

fn theory_cmd(
    cfg: &RunConfig,
    out: &Path,
    tag: &str,
    output: &mut RunOutput,
) -> Result<(), CliError> {
    let prior = cfg.prior()?;
    let w = cfg.require_f64("w")?;
    let z_sqs = cfg.f64_list("z-sq")?;
    let grid_points = cfg.require_usize("grid-points")?.max(16);
    let quad_points = cfg.require_usize("quad-points")?;

    // Hypervariance prior: log-spaced grid spanning both branches' mass.
    let lo = (prior.v0 * prior.a2 / (prior.a1 + 1.0)) / 50.0;
    let hi = (prior.a2 / (prior.a1 - 1.0)) * 50.0;
    let u_grid: Vec<f64> = (0..grid_points)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (grid_points - 1) as f64).exp())
        .collect();
    let prior_curve = prior_gamma_curve(&prior, w, &u_grid)?;
    output.write(
        emit::artifact_path(out, cfg.command.name(), tag, "prior_gamma", ""),
        &emit::density_csv(&[(
            format!("a1={} a2={} v0={} w={w}", prior.a1, prior.a2, prior.v0),
            &prior_curve,
        )]),
    )?;

    // Limiting null densities of ν, one block per Z² value.
    let nu_grid: Vec<f64> = (1..=grid_points)
        .map(|i| i as f64 / (grid_points + 1) as f64)
        .collect();
    let density_curves: Vec<_> = z_sqs
        .iter()
        .map(|&z_sq| {
            limiting_null_density(&NullLimitInput { w, z_sq, prior }, &nu_grid)
                .map(|curve| (format!("w={w} z_sq={z_sq}"), curve))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let blocks: Vec<(String, &slabsmooth::DensityCurve)> = density_curves
        .iter()
        .map(|(meta, curve)| (meta.clone(), curve))
        .collect();
    output.write(
        emit::artifact_path(out, cfg.command.name(), tag, "nu_density", ""),
        &emit::density_csv(&blocks),
    )?;

    // Limiting posterior mean of ν as a function of Z².
    let z_grid: Vec<f64> = (0..=64).map(|i| 10.0 * i as f64 / 64.0).collect();
    let mean_curve = limiting_null_mean_curve(&prior, w, &z_grid, quad_points)?;
    output.write(
        emit::artifact_path(out, cfg.command.name(), tag, "nu_mean", ""),
        &emit::density_csv(&[(format!("w={w} quad_points={quad_points}"), &mean_curve)]),
    )?;
    output.notes.push(format!(
        "theory-density: w={w}, {} z_sq values",
        z_sqs.len()
    ));
    Ok(())
}

/// Evenly spread `count` signal positions among d coordinates.
pub fn signal_positions(d: usize, count: usize) -> Vec<usize> {
    (0..count).map(|j| j * d / count).collect()
}

fn simulate_cmd(
    cfg: &RunConfig,
    out: &Path,
    tag: &str,
    output: &mut RunOutput,
) -> Result<(), CliError> {
    match cfg.require("scenario")? {
        "sparse-signal" => sparse_signal_scenario(cfg, out, tag, output),
        "overparam" => overparam_scenario(cfg, out, tag, output),
        "curve" => curve_scenario(cfg, out, tag, output),
        other => Err(CliError::usage(format!(
            "unknown scenario '{other}' (expected sparse-signal, overparam, or curve)"
        ))),
    }
}

/// Sparse truth in basis coordinates: a handful of strong coefficients,
/// the rest exactly zero; reports per-coordinate shrinkage.
fn sparse_signal_scenario(
    cfg: &RunConfig,
    out: &Path,
    tag: &str,
    output: &mut RunOutput,
) -> Result<(), CliError> {
    let n = cfg.require_usize("n")?;
    let d = cfg.require_usize("degree")?;
    let n_signals = cfg.require_usize("n-signals")?;
    let strength = cfg.require_f64("signal-strength")?;
    let noise_sd = cfg.require_f64("noise-sd")?;
    let seed = cfg.get_u64("seed")?.unwrap_or(0);
    if n_signals > d {
        return Err(CliError::usage(format!(
            "n-signals ({n_signals}) cannot exceed degree ({d})"
        )));
    }

    let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let basis = build_global(&x, d)?;
    let mut beta_true = vec![0.0; d];
    for k in signal_positions(d, n_signals) {
        beta_true[k] = strength * noise_sd;
    }
    let truth = basis.linear_combination(&beta_true);
    let noise = generate(&SyntheticSpec {
        mean: MeanFunction::Polynomial { coeffs: vec![] },
        noise_sd,
        n,
        x_range: (0.0, 1.0),
        seed,
    })?;
    let data = Dataset::new(
        x.iter()
            .zip(truth.iter().zip(noise.y()))
            .map(|(&x, (&f, &e))| (x, f + e))
            .collect(),
    )?;

    let fit = fit_global(&data, d, &cfg.prior()?, &cfg.mcmc()?)?;
    output.notes.push(format!(
        "simulate sparse-signal: n={n} d={d} signals={n_signals} dof={:.3}",
        fit.dof
    ));
    output.write(
        emit::artifact_path(out, cfg.command.name(), tag, "truth_fit", ""),
        &emit::truth_fit_csv(&data, &truth, &fit),
    )?;
    output.write(
        emit::artifact_path(out, cfg.command.name(), tag, "summary", ""),
        &emit::coefficient_summary_csv(&beta_true, &fit),
    )?;
    Ok(())
}

fn max_abs_error(fitted: &[f64], truth: &[f64]) -> f64 {
    fitted
        .iter()
        .zip(truth)
        .map(|(&f, &t)| (f - t).abs())
        .fold(0.0, f64::max)
}

/// The same sine truth fit at two basis dimensions, reporting worst-case
/// errors of the adaptive and projection predictors side by side.
fn overparam_scenario(
    cfg: &RunConfig,
    out: &Path,
    tag: &str,
    output: &mut RunOutput,
) -> Result<(), CliError> {
    let spec = synthetic_spec(cfg)?;
    let data = generate(&spec)?;
    let truth: Vec<f64> = data
        .x()
        .iter()
        .map(|&x| spec.mean.eval(x, spec.x_range))
        .collect();
    let prior = cfg.prior()?;
    let mcmc = cfg.mcmc()?;
    let degrees = [
        cfg.require_usize("degree")?,
        cfg.require_usize("degree-alt")?,
    ];
    let mut summary = String::from("d,max_abs_err_spike_slab,max_abs_err_ols\n");
    for d in degrees {
        let fit = fit_global(&data, d, &prior, &mcmc)?;
        summary.push_str(&format!(
            "{d},{},{}\n",
            max_abs_error(&fit.fitted, &truth),
            max_abs_error(&fit.ols_fitted, &truth)
        ));
        output.write(
            emit::artifact_path(out, cfg.command.name(), tag, &format!("curve_d{d}"), ""),
            &emit::truth_fit_csv(&data, &truth, &fit),
        )?;
        output.notes.push(format!(
            "simulate overparam d={d}: dof={:.3} max_err ss={:.4} ols={:.4}",
            fit.dof,
            max_abs_error(&fit.fitted, &truth),
            max_abs_error(&fit.ols_fitted, &truth)
        ));
    }
    output.write(
        emit::artifact_path(out, cfg.command.name(), tag, "error_summary", ""),
        &summary,
    )?;
    Ok(())
}

/// Generic synthetic-curve run through either fitting pipeline.
#[allow(clippy::needless_range_loop)] // rows drawn from parallel arrays
fn curve_scenario(
    cfg: &RunConfig,
    out: &Path,
    tag: &str,
    output: &mut RunOutput,
) -> Result<(), CliError> {
    let spec = synthetic_spec(cfg)?;
    let data = generate(&spec)?;
    let truth: Vec<f64> = data
        .x()
        .iter()
        .map(|&x| spec.mean.eval(x, spec.x_range))
        .collect();
    match cfg.get("fit").unwrap_or("global") {
        "global" => {
            let fit = fit_global(
                &data,
                cfg.require_usize("degree")?,
                &cfg.prior()?,
                &cfg.mcmc()?,
            )?;
            output.notes.push(format!(
                "simulate curve (global): dof={:.3} max_err={:.4}",
                fit.dof,
                max_abs_error(&fit.fitted, &truth)
            ));
            output.write(
                emit::artifact_path(out, cfg.command.name(), tag, "truth_fit", ""),
                &emit::truth_fit_csv(&data, &truth, &fit),
            )?;
        }
        "local" => {
            let local = local_config(cfg)?;
            let jobs = cfg.get_usize("jobs")?.unwrap_or(1).max(1);
            let curve = fit_curve_parallel(&data, &local, jobs)?;
            let mut s = String::from("x,y,f_true,f_hat,dof\n");
            for i in 0..data.len() {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    data.x()[i],
                    data.y()[i],
                    truth[i],
                    curve.fitted[i],
                    curve.fits[i].dof
                ));
            }
            output.notes.push(format!(
                "simulate curve (local): max_err={:.4}",
                max_abs_error(&curve.fitted, &truth)
            ));
            output.write(
                emit::artifact_path(out, cfg.command.name(), tag, "truth_fit", ""),
                &s,
            )?;
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown fit '{other}' (expected global or local)"
            )));
        }
    }
    Ok(())
}

fn group_note(label: &str) -> String {
    if label.is_empty() {
        String::new()
    } else {
        format!(" [{label}]")
    }
}
