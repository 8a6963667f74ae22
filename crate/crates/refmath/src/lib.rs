//! Reference numerics for test oracles.
//!
//! Everything here is implemented from first principles (Lanczos series,
//! Lentz continued fractions, recursive Simpson) so tests can cross-check
//! the main library without sharing any of its code paths.

/// Natural log of the gamma function, Lanczos approximation (g = 7, n = 9).
///
/// Accurate to ~1e-13 relative for x > 0.
#[allow(clippy::excessive_precision)]
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i as f64) + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
///
/// Series expansion for x < a + 1, Lentz continued fraction otherwise.
pub fn reg_inc_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // Series: P(a,x) = x^a e^-x / Γ(a) * Σ x^n / (a(a+1)...(a+n))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        sum * (a * x.ln() - x - ln_gamma(a)).exp()
    } else {
        // Continued fraction for Q(a,x), then P = 1 − Q.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let q = (a * x.ln() - x - ln_gamma(a)).exp() * h;
        1.0 - q
    }
}

/// CDF of Gamma(shape, rate) at x.
pub fn gamma_cdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        reg_inc_gamma(shape, rate * x)
    }
}

/// Regularized incomplete beta I_x(a, b), Lentz continued fraction.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&x));
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    // Use the symmetry that keeps the continued fraction convergent.
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h
}

/// CDF of Beta(a, b) at x.
pub fn beta_cdf(x: f64, a: f64, b: f64) -> f64 {
    reg_inc_beta(a, b, x.clamp(0.0, 1.0))
}

/// Error function via the incomplete gamma relation erf(x) = P(1/2, x²).
pub fn erf(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * reg_inc_gamma(0.5, x * x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64, mean: f64, sd: f64) -> f64 {
    0.5 * (1.0 + erf((z - mean) / (sd * std::f64::consts::SQRT_2)))
}

/// Chi-square CDF with `df` degrees of freedom.
pub fn chi_square_cdf(x: f64, df: f64) -> f64 {
    gamma_cdf(x, df / 2.0, 0.5)
}

/// Chi-square quantile by bisection on the CDF.
pub fn chi_square_quantile(p: f64, df: f64) -> f64 {
    assert!((0.0..1.0).contains(&p));
    let (mut lo, mut hi) = (0.0, df + 100.0 * (df.sqrt() + 1.0));
    while chi_square_cdf(hi, df) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_square_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(&f, a, fa, b, fb);
    recurse(&f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// ∫₀^∞ f(u) du, split as `[0,1]` plus a 1/u-transformed tail.
///
/// Requires f(1/s)/s² to be well behaved as s → 0 (integrand decaying
/// faster than 1/u² at infinity).
pub fn integrate_zero_to_inf<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let head = adaptive_simpson(&f, 1e-12, 1.0, tol / 2.0);
    let tail = adaptive_simpson(|s| f(1.0 / s) / (s * s), 1e-12, 1.0, tol / 2.0);
    head + tail
}

/// Monte Carlo standard error of the mean of a correlated chain, batch means.
pub fn batch_means_se(chain: &[f64], n_batches: usize) -> f64 {
    assert!(n_batches >= 2 && chain.len() >= 2 * n_batches);
    let batch_len = chain.len() / n_batches;
    let means: Vec<f64> = (0..n_batches)
        .map(|b| {
            let s = &chain[b * batch_len..(b + 1) * batch_len];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    let grand = means.iter().sum::<f64>() / n_batches as f64;
    let var =
        means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (n_batches as f64 - 1.0);
    (var / n_batches as f64).sqrt()
}

/// Chi-square goodness-of-fit statistic against expected bin probabilities.
///
/// Bins with expected count below 5 are merged into their left neighbour.
/// Returns (statistic, degrees of freedom).
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64], total: u64) -> (f64, f64) {
    assert_eq!(observed.len(), expected_probs.len());
    let mut merged: Vec<(f64, f64)> = Vec::new(); // (obs, expected)
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * total as f64;
        match merged.last_mut() {
            Some(last) if last.1 < 5.0 => {
                last.0 += o as f64;
                last.1 += e;
            }
            _ => merged.push((o as f64, e)),
        }
    }
    // A trailing underfilled bin merges backwards.
    while merged.len() > 1 && merged.last().unwrap().1 < 5.0 {
        let (o, e) = merged.pop().unwrap();
        let last = merged.last_mut().unwrap();
        last.0 += o;
        last.1 += e;
    }
    let stat: f64 = merged.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    (stat, merged.len() as f64 - 1.0)
}
