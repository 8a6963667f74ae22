//! Global orthogonal-polynomial smoothing.
//!
//! Responses are centered by their mean (the basis carries no constant
//! column), rescaled, and fit by the spike-and-slab sampler. Both the
//! least-squares smoother S = n⁻¹ Σ_k x_(k) x_(k)' and the adaptive
//! smoother S* = n⁻¹ Σ_k V_k x_(k) x_(k)' are rank-d sums of symmetric
//! outer products, so fitted values, kernels, and traces never need the
//! n×n matrix itself.

use crate::basis::{build_global, OrthoBasis};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gibbs::{
    back_transform, gibbs_fit_scores, rescale_response, McmcConfig, PosteriorSummary, PriorConfig,
};

/// Which smoother matrix a query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmootherKind {
    Ols,
    SpikeSlab,
}

/// A fitted global smooth.
#[derive(Debug, Clone)]
pub struct GlobalFit {
    pub basis: OrthoBasis,
    /// Abscissae the basis was built on (sorted).
    pub x: Vec<f64>,
    /// Original responses in the same order.
    pub y: Vec<f64>,
    /// Centering constant added back to every prediction.
    pub y_mean: f64,
    /// Posterior summary; `None` when constant responses short-circuited
    /// the fit (zero-signal guard).
    pub summary: Option<PosteriorSummary>,
    /// Least-squares coefficients of the centered responses.
    pub beta_ols: Vec<f64>,
    /// Spike-and-slab predictions y_mean + B V β̂_OLS.
    pub fitted: Vec<f64>,
    /// Least-squares predictions y_mean + B β̂_OLS.
    pub ols_fitted: Vec<f64>,
    /// Σ_k V_k.
    pub dof: f64,
    /// Trace of the projection smoother; always exactly d.
    pub ols_dof: f64,
}

impl GlobalFit {
    /// Shrinkage weights, or zeros for a short-circuited constant fit
    /// (whose adaptive smoother is the zero matrix).
    pub fn shrinkage(&self) -> Vec<f64> {
        match &self.summary {
            Some(s) => s.shrinkage.clone(),
            None => vec![0.0; self.basis.degree()],
        }
    }
}

/// One row of a smoother matrix: the weights each observation
/// contributes to the fitted value at the target point.
#[derive(Debug, Clone)]
pub struct EffectiveKernel {
    pub target_index: usize,
    pub weights: Vec<f64>,
    /// The diagonal entry s_{i,i}, equal to `weights[target_index]`.
    pub self_weight: f64,
}

/// Fit the global smoother.
///
/// Group labels, if any, are ignored here; split the dataset first and
/// fit each group separately.
///
/// Exactly constant responses short-circuit to the mean with zero
/// degrees of freedom rather than tripping the degenerate rescaling
/// error; responses that are non-constant but lie exactly in the basis
/// span still surface [`Error::DegenerateFit`].
pub fn fit_global(
    data: &Dataset,
    d: usize,
    prior: &PriorConfig,
    mcmc: &McmcConfig,
) -> Result<GlobalFit> {
    prior.validate()?;
    mcmc.validate()?;
    let n = data.len();
    let y = data.y().to_vec();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let basis = build_global(data.x(), d)?;

    let spread = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - y.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread == 0.0 {
        let flat = vec![y_mean; n];
        return Ok(GlobalFit {
            basis,
            x: data.x().to_vec(),
            y,
            y_mean,
            summary: None,
            beta_ols: vec![0.0; d],
            fitted: flat.clone(),
            ols_fitted: flat,
            dof: 0.0,
            ols_dof: d as f64,
        });
    }

    let y_c: Vec<f64> = y.iter().map(|&v| v - y_mean).collect();
    let rescaled = rescale_response(&y_c, &basis)?;
    let scale = (n as f64).sqrt() / rescaled.sigma_hat;
    // Scores fed to the chain are the scaled least-squares coefficients;
    // algebraically n⁻¹B'y*, but keeping one dot product per coordinate
    // makes β̂_k = V_k β̂_OLS,k exact instead of rounding-limited.
    let z: Vec<f64> = rescaled.beta_ols.iter().map(|&b| scale * b).collect();
    let chain = gibbs_fit_scores(&z, prior, mcmc)?;
    let summary = back_transform(chain, rescaled.sigma_hat, n);

    let mut fitted = basis.linear_combination(&summary.beta_hat);
    fitted.iter_mut().for_each(|v| *v += y_mean);
    let mut ols_fitted = basis.linear_combination(&rescaled.beta_ols);
    ols_fitted.iter_mut().for_each(|v| *v += y_mean);

    Ok(GlobalFit {
        basis,
        x: data.x().to_vec(),
        y,
        y_mean,
        dof: summary.dof,
        ols_dof: d as f64,
        beta_ols: rescaled.beta_ols.clone(),
        summary: Some(summary),
        fitted,
        ols_fitted,
    })
}

/// Row i of the chosen smoother matrix.
pub fn effective_kernel(fit: &GlobalFit, i: usize, which: SmootherKind) -> Result<EffectiveKernel> {
    let n = fit.basis.n_points();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let shrinkage = fit.shrinkage();
    let weights = smoother_row(&fit.basis, i, scaling(which, &shrinkage));
    let self_weight = weights[i];
    Ok(EffectiveKernel {
        target_index: i,
        weights,
        self_weight,
    })
}

/// Effective degrees of freedom: the trace of the chosen smoother,
/// computed without materializing it — exactly d for the projection,
/// Σ_k V_k for the adaptive smoother.
pub fn dof(fit: &GlobalFit, which: SmootherKind) -> f64 {
    match which {
        SmootherKind::Ols => fit.ols_dof,
        SmootherKind::SpikeSlab => fit.dof,
    }
}

fn scaling(which: SmootherKind, shrinkage: &[f64]) -> Option<&[f64]> {
    match which {
        SmootherKind::Ols => None,
        SmootherKind::SpikeSlab => Some(shrinkage),
    }
}

/// Row i of n⁻¹ B diag(v) B' (v = 1 when `shrinkage` is None).
pub(crate) fn smoother_row(basis: &OrthoBasis, i: usize, shrinkage: Option<&[f64]>) -> Vec<f64> {
    let n = basis.n_points();
    let nf = n as f64;
    let mut row = vec![0.0; n];
    for k in 0..basis.degree() {
        let col = basis.column(k);
        let v = shrinkage.map_or(1.0, |s| s[k]);
        let c = v * col[i] / nf;
        if c != 0.0 {
            for (r, &b) in row.iter_mut().zip(col) {
                *r += c * b;
            }
        }
    }
    row
}

/// Apply n⁻¹ B diag(v) B' to a vector without forming the matrix.
pub fn apply_smoother(basis: &OrthoBasis, shrinkage: Option<&[f64]>, target: &[f64]) -> Vec<f64> {
    let mut scores = basis.project_scores(target);
    if let Some(s) = shrinkage {
        for (z, &v) in scores.iter_mut().zip(s) {
            *z *= v;
        }
    }
    basis.linear_combination(&scores)
}
