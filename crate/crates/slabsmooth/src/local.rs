//! Local regression with the rescaled spike-and-slab hierarchy.
//!
//! Every target point gets its own fit: a nearest-neighbour window (the
//! indicator kernel keeps local weights at exactly 1, so the local basis
//! stays exactly orthogonal), a Rice difference-based variance estimate,
//! and a small Gibbs run on the locally rescaled responses. The sum of
//! the local shrinkage weights is the trace of the local smoother, and
//! plotting it against x registers where the curve carries curvature.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::basis::{build_local, OrthoBasis};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gibbs::{gibbs_fit_scores, McmcConfig, PriorConfig};

/// Configuration of a local fit.
#[derive(Debug, Clone)]
pub struct LocalConfig {
    /// Bandwidth in units of x; the window at x_i is {j : |x_j − x_i| < h}.
    pub h: f64,
    /// Local polynomial degree.
    pub d: usize,
    pub prior: PriorConfig,
    /// Chain settings; the per-point seed is derived from `mcmc.seed`
    /// and the point index, so results do not depend on evaluation order.
    pub mcmc: McmcConfig,
    /// Windows smaller than this expand to the nearest points.
    pub min_neighbors: usize,
}

impl LocalConfig {
    pub fn new(h: f64, d: usize) -> Self {
        LocalConfig {
            h,
            d,
            prior: PriorConfig::default(),
            mcmc: McmcConfig::local_default(),
            min_neighbors: d + 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Error::require(
            self.h > 0.0 && self.h.is_finite(),
            "bandwidth must be positive",
        )?;
        Error::require(self.d >= 1, "local degree must be at least 1")?;
        Error::require(
            self.min_neighbors >= self.d + 2,
            "min_neighbors must be at least d + 2",
        )?;
        self.prior.validate()?;
        self.mcmc.validate()
    }
}

/// Result of fitting a single target point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    /// Target index into the dataset.
    pub index: usize,
    /// Contiguous index window used for the fit (sorted x).
    pub neighborhood: Range<usize>,
    pub n_i: usize,
    /// Square root of the Rice variance estimate on the window.
    pub sigma_i: f64,
    /// Local response mean; the unpenalized intercept.
    pub y_bar: f64,
    /// Local shrinkage weights V_{i,k}; empty for degenerate windows.
    pub shrinkage: Vec<f64>,
    /// Fitted value at the target point.
    pub f_hat: f64,
    /// Σ_k V_{i,k}; zero for degenerate windows.
    pub dof: f64,
    /// Set when the window was locally constant (σ̂_i = 0) and the fit
    /// fell back to the local mean.
    pub degenerate: bool,
}

/// Effective-degrees-of-freedom registration curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DofCurve {
    /// (x_i, dof_i), one entry per data point, ordered by x.
    pub points: Vec<(f64, f64)>,
}

/// A full local-regression pass over the dataset.
#[derive(Debug, Clone)]
pub struct CurveFit {
    /// Fitted value at every data point.
    pub fitted: Vec<f64>,
    pub dof_curve: DofCurve,
    pub fits: Vec<LocalFit>,
    /// Points whose fit errored; each fell back to its window mean and
    /// is listed here as (index, message).
    pub failures: Vec<(usize, String)>,
}

/// Indices within strict distance h of x_i: {j : |x_j − x_i| < h}.
///
/// Sortedness makes the window contiguous, found by binary search.
/// Never empty since the target itself always qualifies.
pub fn neighborhood(data: &Dataset, i: usize, h: f64) -> Range<usize> {
    let x = data.x();
    assert!(i < x.len(), "index {i} out of range for {} points", x.len());
    let center = x[i];
    let lo = x.partition_point(|&v| v <= center - h);
    let hi = x.partition_point(|&v| v < center + h);
    lo..hi
}

/// Rice variance estimate on a window: half the mean squared successive
/// difference of the x-ordered responses. Returns the square root; zero
/// signals a locally constant window.
pub fn rice_sigma(data: &Dataset, window: Range<usize>) -> f64 {
    let y = &data.y()[window];
    assert!(y.len() >= 2, "Rice estimator needs at least two points");
    let ss: f64 = y.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    (ss / (2.0 * (y.len() - 1) as f64)).sqrt()
}

/// Expand a window to the `target` nearest points by |x_j − x_i|,
/// breaking ties toward smaller indices.
fn widen(x: &[f64], i: usize, window: Range<usize>, target: usize) -> Range<usize> {
    let (mut lo, mut hi) = (window.start, window.end);
    while hi - lo < target {
        let left = lo > 0;
        let right = hi < x.len();
        if !left && !right {
            break;
        }
        let take_left = if left && right {
            x[i] - x[lo - 1] <= x[hi] - x[i]
        } else {
            left
        };
        if take_left {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    lo..hi
}

/// Mix the base seed with the point index (splitmix64 finalizer) so each
/// point's chain is decorrelated and independent of evaluation order.
fn point_seed(base: u64, i: usize) -> u64 {
    let mut z = (i as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    base ^ (z ^ (z >> 31))
}

/// Fitted value at `pos` from the local smoother n⁻¹ B diag(V) B' plus
/// the unpenalized local mean.
fn local_predictor(
    basis: &OrthoBasis,
    shrinkage: &[f64],
    beta_ols: &[f64],
    pos: usize,
    y_bar: f64,
) -> f64 {
    let mut acc = y_bar;
    for k in 0..basis.degree() {
        acc += shrinkage[k] * beta_ols[k] * basis.column(k)[pos];
    }
    acc
}

/// Fit one target point. The window is widened to `min_neighbors` when
/// the bandwidth captures too few points; a zero Rice estimate
/// degenerates to the window mean instead of erroring.
pub fn fit_point(data: &Dataset, i: usize, cfg: &LocalConfig) -> Result<LocalFit> {
    cfg.validate()?;
    let n = data.len();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    if n < cfg.min_neighbors {
        return Err(Error::InvalidConfig(format!(
            "dataset has {n} points but min_neighbors is {}",
            cfg.min_neighbors
        )));
    }
    let window = widen(data.x(), i, neighborhood(data, i, cfg.h), cfg.min_neighbors);
    let n_i = window.len();
    let x_w = &data.x()[window.clone()];
    let y_w = &data.y()[window.clone()];
    let y_bar = y_w.iter().sum::<f64>() / n_i as f64;
    let sigma_i = rice_sigma(data, window.clone());

    if sigma_i == 0.0 {
        return Ok(LocalFit {
            index: i,
            neighborhood: window,
            n_i,
            sigma_i,
            y_bar,
            shrinkage: Vec::new(),
            f_hat: y_bar,
            dof: 0.0,
            degenerate: true,
        });
    }

    let basis = build_local(x_w, data.x()[i], cfg.d).map_err(|e| match e {
        Error::RankDeficient {
            distinct, degree, ..
        } => Error::RankDeficient {
            distinct,
            degree,
            point: Some(i),
        },
        other => other,
    })?;
    let y_c: Vec<f64> = y_w.iter().map(|&v| v - y_bar).collect();
    let beta_ols = basis.project_scores(&y_c);
    let scale = (n_i as f64).sqrt() / sigma_i;
    let z: Vec<f64> = beta_ols.iter().map(|&b| scale * b).collect();
    let mcmc = cfg.mcmc.with_seed(point_seed(cfg.mcmc.seed, i));
    let chain = gibbs_fit_scores(&z, &cfg.prior, &mcmc)?;

    let pos = i - window.start;
    let f_hat = local_predictor(&basis, &chain.shrinkage, &beta_ols, pos, y_bar);
    Ok(LocalFit {
        index: i,
        neighborhood: window,
        n_i,
        sigma_i,
        y_bar,
        f_hat,
        dof: chain.dof,
        shrinkage: chain.shrinkage,
        degenerate: false,
    })
}

/// Fit every point sequentially. See [`fit_curve_parallel`].
pub fn fit_curve(data: &Dataset, cfg: &LocalConfig) -> Result<CurveFit> {
    fit_curve_parallel(data, cfg, 1)
}

/// Fit every point, fanning work across `jobs` worker threads.
///
/// Per-point seeding makes the result identical for any job count. A
/// failed point falls back to its window mean (flagged in `failures`);
/// the whole pass aborts only when more than 10% of points fail.
pub fn fit_curve_parallel(data: &Dataset, cfg: &LocalConfig, jobs: usize) -> Result<CurveFit> {
    cfg.validate()?;
    Error::require(jobs >= 1, "jobs must be at least 1")?;
    let n = data.len();
    if n < cfg.min_neighbors {
        return Err(Error::InvalidConfig(format!(
            "dataset has {n} points but min_neighbors is {}",
            cfg.min_neighbors
        )));
    }

    let slots: Mutex<Vec<Option<LocalFit>>> = Mutex::new(vec![None; n]);
    let failures: Mutex<Vec<(usize, String)>> = Mutex::new(Vec::new());
    let next = AtomicUsize::new(0);
    let workers = jobs.min(n);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                match fit_point(data, i, cfg) {
                    Ok(fit) => slots.lock().unwrap()[i] = Some(fit),
                    Err(err) => {
                        let window =
                            widen(data.x(), i, neighborhood(data, i, cfg.h), cfg.min_neighbors);
                        let y_w = &data.y()[window.clone()];
                        let y_bar = y_w.iter().sum::<f64>() / y_w.len() as f64;
                        failures.lock().unwrap().push((i, err.to_string()));
                        slots.lock().unwrap()[i] = Some(LocalFit {
                            index: i,
                            n_i: window.len(),
                            neighborhood: window,
                            sigma_i: 0.0,
                            y_bar,
                            shrinkage: Vec::new(),
                            f_hat: y_bar,
                            dof: 0.0,
                            degenerate: true,
                        });
                    }
                }
            });
        }
    });

    let mut failures = failures.into_inner().unwrap();
    failures.sort_by_key(|&(i, _)| i);
    if failures.len() * 10 > n {
        let (first_index, first_message) = failures[0].clone();
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total: n,
            first_index,
            first_message,
        });
    }
    let fits: Vec<LocalFit> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|f| f.expect("every slot filled"))
        .collect();
    let fitted = fits.iter().map(|f| f.f_hat).collect();
    let dof_curve = DofCurve {
        points: fits.iter().map(|f| (data.x()[f.index], f.dof)).collect(),
    };
    Ok(CurveFit {
        fitted,
        dof_curve,
        fits,
        failures,
    })
}
