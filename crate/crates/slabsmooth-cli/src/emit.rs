//! Output-file writing: deterministic CSV formatting and atomic writes.

use std::path::{Path, PathBuf};

use slabsmooth::{CurveFit, Dataset, DensityCurve, GlobalFit};

use crate::CliError;

/// Write a file atomically: full content to a temp sibling, then rename,
/// so no output file is ever left partially written.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(format!("tmp-{}", std::process::id()));
    std::fs::write(&tmp, content).map_err(|e| CliError::data(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// File name `<command>_<tag>_<artifact>[_<group>].csv` inside `out`.
pub fn artifact_path(out: &Path, command: &str, tag: &str, artifact: &str, group: &str) -> PathBuf {
    let group_part = if group.is_empty() {
        String::new()
    } else {
        let safe: String = group
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        format!("_{safe}")
    };
    out.join(format!("{command}_{tag}_{artifact}{group_part}.csv"))
}

pub fn global_curve_csv(data: &Dataset, fit: &GlobalFit) -> String {
    let mut s = String::from("x,y,fitted_spike_slab,fitted_ols\n");
    for i in 0..data.len() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            data.x()[i],
            data.y()[i],
            fit.fitted[i],
            fit.ols_fitted[i]
        ));
    }
    s
}

pub fn kernel_csv(x: &[f64], weights: &[f64]) -> String {
    let mut s = String::from("x_j,weight\n");
    for (xj, w) in x.iter().zip(weights) {
        s.push_str(&format!("{xj},{w}\n"));
    }
    s
}

pub fn local_curve_csv(data: &Dataset, curve: &CurveFit) -> String {
    let mut s = String::from("x,y,f_hat,dof\n");
    for i in 0..data.len() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            data.x()[i],
            data.y()[i],
            curve.fitted[i],
            curve.fits[i].dof
        ));
    }
    s
}

pub fn dof_curve_csv(curve: &CurveFit) -> String {
    let mut s = String::from("x,dof\n");
    for &(x, d) in &curve.dof_curve.points {
        s.push_str(&format!("{x},{d}\n"));
    }
    s
}

pub fn local_diagnostics_csv(data: &Dataset, curve: &CurveFit, d: usize) -> String {
    let mut s = String::from("x,n_i,sigma_i,dof");
    for k in 1..=d {
        s.push_str(&format!(",V_{k}"));
    }
    s.push('\n');
    for fit in &curve.fits {
        s.push_str(&format!(
            "{},{},{},{}",
            data.x()[fit.index],
            fit.n_i,
            fit.sigma_i,
            fit.dof
        ));
        for k in 0..d {
            let v = fit.shrinkage.get(k).copied().unwrap_or(0.0);
            s.push_str(&format!(",{v}"));
        }
        s.push('\n');
    }
    s
}

/// Stack one or more density curves as grid,value,kind blocks with '#'
/// metadata lines carrying the parameters each block was computed at.
pub fn density_csv(blocks: &[(String, &DensityCurve)]) -> String {
    let mut s = String::from("grid,value,kind\n");
    for (meta, curve) in blocks {
        s.push_str(&format!("# {meta}\n"));
        for (g, v) in curve.grid.iter().zip(&curve.values) {
            s.push_str(&format!("{g},{v},{}\n", curve.kind.label()));
        }
    }
    s
}

/// Truth-vs-fit table for simulated global fits.
#[allow(clippy::needless_range_loop)] // rows drawn from parallel arrays
pub fn truth_fit_csv(data: &Dataset, truth: &[f64], fit: &GlobalFit) -> String {
    let mut s = String::from("x,y,f_true,fitted_spike_slab,fitted_ols\n");
    for i in 0..data.len() {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            data.x()[i],
            data.y()[i],
            truth[i],
            fit.fitted[i],
            fit.ols_fitted[i]
        ));
    }
    s
}

/// Per-coordinate shrinkage summary for simulated fits.
pub fn coefficient_summary_csv(beta_true: &[f64], fit: &GlobalFit) -> String {
    let shrinkage = fit.shrinkage();
    let beta_hat = fit
        .summary
        .as_ref()
        .map(|s| s.beta_hat.clone())
        .unwrap_or_else(|| vec![0.0; beta_true.len()]);
    let mut s = String::from("k,beta_true,beta_ols,beta_hat,v,abs_error\n");
    for k in 0..beta_true.len() {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            k + 1,
            beta_true[k],
            fit.beta_ols[k],
            beta_hat[k],
            shrinkage[k],
            (beta_hat[k] - beta_true[k]).abs()
        ));
    }
    s
}
