//! Discrete orthogonal polynomial design matrices.
//!
//! Columns are degree-1..d polynomials evaluated on the data grid,
//! centered against the constant and scaled so that B'B = nI exactly
//! (up to roundoff). Construction uses the Stieltjes three-term
//! recurrence on the empirical measure with one reorthogonalization
//! pass, which stays well conditioned at degrees where naive
//! Gram-Schmidt on Vandermonde columns breaks down. No constant column
//! is ever included; intercepts are handled by response centering in
//! the fitting layers.

use crate::error::{Error, Result};

/// n×d design matrix of orthogonal polynomial values, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoBasis {
    values: Vec<f64>,
    n: usize,
    d: usize,
    centered: bool,
}

impl OrthoBasis {
    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Number of basis columns (the polynomial degree of the last one).
    pub fn degree(&self) -> usize {
        self.d
    }

    /// Columns carry no constant component.
    pub fn centered(&self) -> bool {
        self.centered
    }

    /// Basis column k (0-based); its polynomial degree is k + 1.
    pub fn column(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    /// Orthogonal-projection scores z = n⁻¹ B'y; under B'B = nI these
    /// are the least-squares coefficients of y on the basis.
    pub fn project_scores(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n);
        (0..self.d)
            .map(|k| dot(self.column(k), y) / self.n as f64)
            .collect()
    }

    /// B · coeffs.
    pub fn linear_combination(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.d);
        let mut out = vec![0.0; self.n];
        for (k, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                for (o, &b) in out.iter_mut().zip(self.column(k)) {
                    *o += c * b;
                }
            }
        }
        out
    }

    /// Largest absolute entry of B'B − nI, by direct multiplication.
    pub fn orthogonality_deviation(&self) -> f64 {
        let nf = self.n as f64;
        let mut worst = 0.0f64;
        for j in 0..self.d {
            for k in j..self.d {
                let g = dot(self.column(j), self.column(k));
                let target = if j == k { nf } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Largest absolute column sum (deviation from centering).
    pub fn centering_deviation(&self) -> f64 {
        (0..self.d)
            .map(|k| self.column(k).iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Assemble a basis from raw column data, bypassing construction.
    /// Only for tests that need a deliberately broken matrix.
    #[cfg(test)]
    pub(crate) fn from_raw_parts(values: Vec<f64>, n: usize, d: usize) -> Self {
        assert_eq!(values.len(), n * d);
        OrthoBasis {
            values,
            n,
            d,
            centered: false,
        }
    }

    /// Fail unless B'B is within `tol_per_n · n` of nI entrywise.
    pub fn check_orthogonal(&self, tol_per_n: f64) -> Result<()> {
        let limit = tol_per_n * self.n as f64;
        let dev = self.orthogonality_deviation();
        if dev > limit {
            Err(Error::NonOrthogonalBasis {
                max_dev: dev,
                limit,
            })
        } else {
            Ok(())
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn count_distinct(x: &[f64]) -> usize {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    1 + sorted.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Build the global basis on the full x vector.
pub fn build_global(x: &[f64], d: usize) -> Result<OrthoBasis> {
    if d < 1 {
        return Err(Error::InvalidConfig(
            "basis degree must be at least 1".to_string(),
        ));
    }
    let n = x.len();
    if n <= d {
        return Err(Error::SizeError {
            context: "global basis",
            n,
            bound: d,
        });
    }
    build(x, d, None)
}

/// Build a local basis on a neighborhood, shifted to its target point.
pub fn build_local(x_neighborhood: &[f64], center: f64, d: usize) -> Result<OrthoBasis> {
    if d < 1 {
        return Err(Error::InvalidConfig(
            "basis degree must be at least 1".to_string(),
        ));
    }
    let n = x_neighborhood.len();
    if n <= d + 1 {
        return Err(Error::SizeError {
            context: "local basis",
            n,
            bound: d + 1,
        });
    }
    let shifted: Vec<f64> = x_neighborhood.iter().map(|&x| x - center).collect();
    build(&shifted, d, None)
}

pub(crate) fn build(x: &[f64], d: usize, point: Option<usize>) -> Result<OrthoBasis> {
    let n = x.len();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("basis abscissae must be finite".to_string()));
    }
    let distinct = count_distinct(x);
    if distinct < d + 1 {
        return Err(Error::RankDeficient {
            distinct,
            degree: d,
            point,
        });
    }
    let nf = n as f64;

    // Work on centered, unit-scaled abscissae; the normalized columns
    // are invariant to this affine map (positive scale), so it only
    // buys conditioning.
    let mean = x.iter().sum::<f64>() / nf;
    let spread = x
        .iter()
        .map(|&v| (v - mean).abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let t: Vec<f64> = x.iter().map(|&v| (v - mean) / spread).collect();

    // Stieltjes recurrence on unit vectors: q_{k+1} ∝ t∘q_k − a q_k − b q_{k-1},
    // with one reorthogonalization sweep against all earlier columns.
    let mut qs: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    qs.push(vec![1.0 / nf.sqrt(); n]);
    let mut b_prev = 0.0;
    let mut values = Vec::with_capacity(n * d);
    for k in 0..d {
        let q_curr = &qs[k];
        let mut r: Vec<f64> = t.iter().zip(q_curr).map(|(&ti, &qi)| ti * qi).collect();
        let r_scale = norm(&r).max(f64::MIN_POSITIVE);
        let a = dot(q_curr, &r);
        for (ri, &qi) in r.iter_mut().zip(q_curr) {
            *ri -= a * qi;
        }
        if k > 0 {
            let q_prev = &qs[k - 1];
            for (ri, &qi) in r.iter_mut().zip(q_prev) {
                *ri -= b_prev * qi;
            }
        }
        for q in &qs {
            let c = dot(q, &r);
            for (ri, &qi) in r.iter_mut().zip(q) {
                *ri -= c * qi;
            }
        }
        let b = norm(&r);
        if b <= r_scale * 1e-12 {
            return Err(Error::RankDeficient {
                distinct,
                degree: d,
                point,
            });
        }
        for ri in r.iter_mut() {
            *ri /= b;
        }
        values.extend(r.iter().map(|&ri| ri * nf.sqrt()));
        qs.push(r);
        b_prev = b;
    }

    Ok(OrthoBasis {
        values,
        n,
        d,
        centered: true,
    })
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).abs() < tol, "index {i}: {x} vs {y}");
        }
    }

    #[test]
    fn linear_column_on_symmetric_grid() {
        // Hand Gram-Schmidt: already centered, scale so SSQ = 3.
        let basis = build_global(&[-1.0, 0.0, 1.0], 1).unwrap();
        let s = (1.5f64).sqrt();
        assert_close(basis.column(0), &[-s, 0.0, s], 1e-12);
    }

    #[test]
    fn linear_column_on_integer_grid() {
        // Centered x = (−1.5,−.5,.5,1.5) ∝ (−3,−1,1,3), rescaled to SSQ = 4.
        let basis = build_global(&[1.0, 2.0, 3.0, 4.0], 1).unwrap();
        let scale = (4.0f64 / 20.0).sqrt();
        assert_close(
            basis.column(0),
            &[-3.0 * scale, -scale, scale, 3.0 * scale],
            1e-12,
        );
        let ssq: f64 = basis.column(0).iter().map(|v| v * v).sum();
        assert!((ssq - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gram_matrix_is_n_times_identity() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.73).sin() * 3.0).collect();
        let basis = build_global(&x, 6).unwrap();
        assert!(basis.orthogonality_deviation() < 1e-8 * 40.0);
        assert!(basis.centering_deviation() < 1e-10 * 40.0);
    }

    #[test]
    fn high_degree_on_clustered_x_stays_orthogonal() {
        // Three tight clusters plus a sparse tail; d = 25 like the
        // overparameterized analyses.
        let mut x = Vec::new();
        for i in 0..70 {
            x.push(10.0 + 1e-3 * i as f64);
        }
        for i in 0..70 {
            x.push(20.0 + 1e-3 * i as f64);
        }
        for i in 0..60 {
            x.push(35.0 + 0.5 * i as f64);
        }
        let n = x.len() as f64;
        let basis = build_global(&x, 25).unwrap();
        assert!(
            basis.orthogonality_deviation() < 1e-8 * n,
            "deviation {}",
            basis.orthogonality_deviation()
        );
        assert!(basis.centering_deviation() < 1e-10 * n);
    }

    #[test]
    fn degree_nesting_is_exact() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64).powf(1.3)).collect();
        let full = build_global(&x, 8).unwrap();
        for k in 1..=8 {
            let partial = build_global(&x, k).unwrap();
            for j in 0..k {
                assert_eq!(partial.column(j), full.column(j), "degree {k} column {j}");
            }
        }
    }

    #[test]
    fn shift_invariance() {
        let x: Vec<f64> = (0..25).map(|i| 0.3 * i as f64 + (i as f64).cos()).collect();
        let shifted: Vec<f64> = x.iter().map(|&v| v + 1234.5).collect();
        let a = build_global(&x, 5).unwrap();
        let b = build_global(&shifted, 5).unwrap();
        for k in 0..5 {
            assert_close(a.column(k), b.column(k), 1e-9);
        }
    }

    #[test]
    fn rejects_rank_deficient_and_undersized_input() {
        assert!(matches!(
            build_global(&[1.0, 1.0, 1.0, 1.0], 2).unwrap_err(),
            Error::RankDeficient { distinct: 1, .. }
        ));
        assert!(matches!(
            build_global(&[1.0, 2.0], 2).unwrap_err(),
            Error::SizeError { .. }
        ));
        assert!(build_global(&[1.0, 2.0, 3.0], 0).is_err());
        assert!(matches!(
            build_global(&[1.0, f64::NAN, 3.0], 1).unwrap_err(),
            Error::Domain(_)
        ));
    }

    #[test]
    fn local_matches_global_after_shift() {
        let local = build_local(&[1.0, 2.0, 3.0], 2.0, 1).unwrap();
        let global = build_global(&[-1.0, 0.0, 1.0], 1).unwrap();
        assert_eq!(local.column(0), global.column(0));
    }

    #[test]
    fn local_rejects_constant_neighborhood() {
        assert!(matches!(
            build_local(&[5.0; 6], 5.0, 1).unwrap_err(),
            Error::RankDeficient { .. }
        ));
    }

    #[test]
    fn local_gram_matrix_random_neighborhood() {
        let x: Vec<f64> = (0..20)
            .map(|i| ((i * 37 % 20) as f64 * 0.21).exp())
            .collect();
        let basis = build_local(&x, x[10], 3).unwrap();
        assert!(basis.orthogonality_deviation() < 1e-8);
        // Column degree is exact: leading coefficient positive means the
        // column correlates positively with t^k on these points.
    }

    #[test]
    fn local_requires_more_than_d_plus_one_points() {
        assert!(matches!(
            build_local(&[1.0, 2.0, 3.0, 4.0], 2.0, 3).unwrap_err(),
            Error::SizeError { .. }
        ));
    }

    #[test]
    fn leading_coefficients_are_positive() {
        // Column k is orthogonal to degrees below k, so its inner
        // product with t^k equals (leading coefficient)·‖monic_k‖²;
        // positivity of that product is the sign convention.
        let x: Vec<f64> = (0..30)
            .map(|i| (i as f64 * 0.37).sin() * 2.0 + i as f64)
            .collect();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let basis = build_global(&x, 6).unwrap();
        for k in 0..6 {
            let power: Vec<f64> = x.iter().map(|&v| (v - mean).powi(k as i32 + 1)).collect();
            let proj = dot(basis.column(k), &power);
            assert!(proj > 0.0, "column {k} has negative leading coefficient");
        }
    }

    #[test]
    fn projection_recovers_coefficients() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let basis = build_global(&x, 4).unwrap();
        let coeffs = [0.5, -1.25, 0.0, 2.0];
        let y = basis.linear_combination(&coeffs);
        let z = basis.project_scores(&y);
        assert_close(&z, &coeffs, 1e-10);
    }
}
