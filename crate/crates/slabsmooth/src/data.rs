//! Dataset ingestion, synthetic data generation, and group handling.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Sorted (x, y) observations with optional per-point group labels.
///
/// Points are kept ascending in x; ties stay in their input order so that
/// successive-difference statistics remain well defined on repeated x.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
    groups: Option<Vec<String>>,
}

impl Dataset {
    /// Build a dataset from unordered points; sorts stably by x.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::build(points, None)
    }

    /// Build a grouped dataset; `groups` runs parallel to `points`.
    pub fn with_groups(points: Vec<(f64, f64)>, groups: Vec<String>) -> Result<Self> {
        if points.len() != groups.len() {
            return Err(Error::InvalidConfig(format!(
                "{} group labels for {} points",
                groups.len(),
                points.len()
            )));
        }
        Self::build(points, Some(groups))
    }

    fn build(points: Vec<(f64, f64)>, groups: Option<Vec<String>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints {
                got: points.len(),
                needed: 2,
            });
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Input {
                    row: i + 1,
                    column: if x.is_finite() { "y" } else { "x" }.to_string(),
                    message: "value is not a finite number".to_string(),
                });
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].0.partial_cmp(&points[b].0).unwrap());
        let xs = order.iter().map(|&i| points[i].0).collect();
        let ys = order.iter().map(|&i| points[i].1).collect();
        let groups = groups.map(|g| order.iter().map(|&i| g[i].clone()).collect());
        Ok(Dataset { xs, ys, groups })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.xs
    }

    pub fn y(&self) -> &[f64] {
        &self.ys
    }

    pub fn groups(&self) -> Option<&[String]> {
        self.groups.as_deref()
    }

    /// Split into per-group datasets, in order of first appearance.
    ///
    /// Without a group column the whole dataset comes back under the empty
    /// label. Each split keeps its x-sorted order. A group with fewer than
    /// two points is a data error.
    pub fn split_groups(&self) -> Result<Vec<(String, Dataset)>> {
        let Some(groups) = &self.groups else {
            return Ok(vec![(String::new(), self.clone())]);
        };
        let mut labels: Vec<&String> = Vec::new();
        for g in groups {
            if !labels.contains(&g) {
                labels.push(g);
            }
        }
        let mut out = Vec::with_capacity(labels.len());
        for label in labels {
            let points: Vec<(f64, f64)> = self
                .xs
                .iter()
                .zip(&self.ys)
                .zip(groups)
                .filter(|&(_, g)| g == label)
                .map(|((&x, &y), _)| (x, y))
                .collect();
            if points.len() < 2 {
                return Err(Error::TooFewPoints {
                    got: points.len(),
                    needed: 2,
                });
            }
            out.push((label.clone(), Dataset::new(points)?));
        }
        Ok(out)
    }
}

/// Mean functions available to the synthetic generator.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanFunction {
    /// amplitude * sin(frequency * x + phase)
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// Equal-width steps across the x range, one level per step.
    PiecewiseFlat { levels: Vec<f64> },
    /// `coeffs[0] + coeffs[1]·x + coeffs[2]·x² + …`; empty = zero function.
    Polynomial { coeffs: Vec<f64> },
    /// Constant `level` left of `split`, then a sine started at the split.
    FlatThenSine {
        split: f64,
        level: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl MeanFunction {
    /// Evaluate the mean function at x, given the generator's x range
    /// (needed to place the piecewise-flat steps).
    pub fn eval(&self, x: f64, x_range: (f64, f64)) -> f64 {
        match self {
            MeanFunction::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * x + phase).sin(),
            MeanFunction::PiecewiseFlat { levels } => {
                if levels.is_empty() {
                    return 0.0;
                }
                let (lo, hi) = x_range;
                let t = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
                let idx = ((t * levels.len() as f64) as usize).min(levels.len() - 1);
                levels[idx]
            }
            MeanFunction::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
            }
            MeanFunction::FlatThenSine {
                split,
                level,
                amplitude,
                frequency,
            } => {
                if x < *split {
                    *level
                } else {
                    level + amplitude * (frequency * (x - split)).sin()
                }
            }
        }
    }
}

/// Specification for a deterministic synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub mean: MeanFunction,
    pub noise_sd: f64,
    pub n: usize,
    pub x_range: (f64, f64),
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        Error::require(self.noise_sd > 0.0, "noise_sd must be positive")?;
        Error::require(self.n >= 2, "synthetic n must be at least 2")?;
        Error::require(
            self.x_range.0 < self.x_range.1
                && self.x_range.0.is_finite()
                && self.x_range.1.is_finite(),
            "x_range must be a finite nonempty interval",
        )
    }
}

/// Generate y_i = f(x_i) + ε_i with iid Gaussian noise on an equally
/// spaced grid. A pure function of the spec, including the seed.
pub fn generate(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let (lo, hi) = spec.x_range;
    let step = (hi - lo) / (spec.n - 1) as f64;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd)
        .map_err(|e| Error::InvalidConfig(format!("noise distribution: {e}")))?;
    let points = (0..spec.n)
        .map(|i| {
            let x = lo + i as f64 * step;
            (x, spec.mean.eval(x, spec.x_range) + noise.sample(&mut rng))
        })
        .collect();
    Dataset::new(points)
}

/// Load a dataset from a CSV file with header columns x, y, and
/// optionally group. Rows are sorted by x; finite values required.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let x_col = find("x").ok_or_else(|| Error::Input {
        row: 0,
        column: "x".to_string(),
        message: "header row must name an 'x' column".to_string(),
    })?;
    let y_col = find("y").ok_or_else(|| Error::Input {
        row: 0,
        column: "y".to_string(),
        message: "header row must name a 'y' column".to_string(),
    })?;
    let group_col = find("group");

    let mut points = Vec::new();
    let mut groups = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        let parse = |col: usize, name: &str| -> Result<f64> {
            let raw = record.get(col).ok_or_else(|| Error::Input {
                row,
                column: name.to_string(),
                message: "missing field".to_string(),
            })?;
            let value: f64 = raw.parse().map_err(|_| Error::Input {
                row,
                column: name.to_string(),
                message: format!("cannot parse '{raw}' as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Input {
                    row,
                    column: name.to_string(),
                    message: format!("'{raw}' is not a finite number"),
                });
            }
            Ok(value)
        };
        points.push((parse(x_col, "x")?, parse(y_col, "y")?));
        if let Some(gc) = group_col {
            let g = record.get(gc).ok_or_else(|| Error::Input {
                row,
                column: "group".to_string(),
                message: "missing field".to_string(),
            })?;
            groups.push(g.to_string());
        }
    }
    if group_col.is_some() {
        Dataset::with_groups(points, groups)
    } else {
        Dataset::new(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir();
        let path = dir.join(format!("slabsmooth_data_{}_{name}.csv", std::process::id()));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn load_csv_sorts_by_x() {
        let path = write_temp("sorts", "x,y\n2,4\n1,3\n");
        let d = load_csv(&path).unwrap();
        assert_eq!(d.x(), &[1.0, 2.0]);
        assert_eq!(d.y(), &[3.0, 4.0]);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn load_csv_rejects_nan() {
        let path = write_temp("nan", "x,y\n1,nan\n2,3\n");
        let err = load_csv(&path).unwrap_err();
        match err {
            Error::Input { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "y");
            }
            other => panic!("unexpected error: {other}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn load_csv_accepts_any_column_order() {
        let path = write_temp("order", "group,y,x\ng1,4,2\ng1,3,1\n");
        let d = load_csv(&path).unwrap();
        assert_eq!(d.x(), &[1.0, 2.0]);
        assert_eq!(d.y(), &[3.0, 4.0]);
        assert_eq!(d.groups().unwrap(), &["g1".to_string(), "g1".to_string()]);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn load_csv_requires_x_and_y_headers() {
        let path = write_temp("headers", "a,b\n1,2\n3,4\n");
        assert!(matches!(
            load_csv(&path).unwrap_err(),
            Error::Input { row: 0, .. }
        ));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn load_csv_rejects_single_row() {
        let path = write_temp("single", "x,y\n1,2\n");
        assert!(matches!(
            load_csv(&path).unwrap_err(),
            Error::TooFewPoints { got: 1, needed: 2 }
        ));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn grouped_file_splits_sorted() {
        // BMD-style fixture: interleaved groups, unsorted ages.
        let path = write_temp(
            "grouped",
            "x,y,group\n12.2,0.05,male\n10.1,0.10,female\n11.5,0.02,male\n9.9,0.08,female\n13.0,0.01,male\n10.5,0.09,female\n",
        );
        let d = load_csv(&path).unwrap();
        let split = d.split_groups().unwrap();
        assert_eq!(split.len(), 2);
        // First appearance in x-sorted order is "female" (x = 9.9).
        assert_eq!(split[0].0, "female");
        assert_eq!(split[0].1.x(), &[9.9, 10.1, 10.5]);
        assert_eq!(split[1].0, "male");
        assert_eq!(split[1].1.x(), &[11.5, 12.2, 13.0]);
        assert_eq!(split[1].1.y(), &[0.02, 0.05, 0.01]);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn ties_keep_stable_order() {
        let d = Dataset::new(vec![(1.0, 10.0), (0.5, 1.0), (1.0, 20.0), (1.0, 30.0)]).unwrap();
        assert_eq!(d.y(), &[1.0, 10.0, 20.0, 30.0]);
    }

    #[test]
    fn generate_is_deterministic() {
        let spec = SyntheticSpec {
            mean: MeanFunction::Sine {
                amplitude: 1.0,
                frequency: 2.0,
                phase: 0.0,
            },
            noise_sd: 0.1,
            n: 50,
            x_range: (0.0, 1.0),
            seed: 7,
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn generate_zero_mean_tiny_noise() {
        let spec = SyntheticSpec {
            mean: MeanFunction::Polynomial { coeffs: vec![] },
            noise_sd: 1e-12,
            n: 5,
            x_range: (0.0, 1.0),
            seed: 1,
        };
        let d = generate(&spec).unwrap();
        assert!(d.y().iter().all(|&y| y.abs() < 1e-10));
    }

    #[test]
    fn generate_noise_variance_matches_spec() {
        let spec = SyntheticSpec {
            mean: MeanFunction::Sine {
                amplitude: 1.0,
                frequency: 3.0,
                phase: 0.0,
            },
            noise_sd: 0.1,
            n: 1000,
            x_range: (0.0, 1.0),
            seed: 99,
        };
        let d = generate(&spec).unwrap();
        let resid: Vec<f64> = d
            .x()
            .iter()
            .zip(d.y())
            .map(|(&x, &y)| y - spec.mean.eval(x, spec.x_range))
            .collect();
        let mean = resid.iter().sum::<f64>() / resid.len() as f64;
        let var =
            resid.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (resid.len() - 1) as f64;
        assert!(
            (var - 0.01).abs() < 0.001,
            "sample noise variance {var} not within 10% of 0.01"
        );
    }

    #[test]
    fn generate_rejects_bad_specs() {
        let base = SyntheticSpec {
            mean: MeanFunction::Polynomial { coeffs: vec![] },
            noise_sd: 0.0,
            n: 5,
            x_range: (0.0, 1.0),
            seed: 1,
        };
        assert!(generate(&base).is_err());
        let bad_n = SyntheticSpec {
            noise_sd: 1.0,
            n: 1,
            ..base.clone()
        };
        assert!(generate(&bad_n).is_err());
    }

    #[test]
    fn piecewise_flat_steps() {
        let f = MeanFunction::PiecewiseFlat {
            levels: vec![1.0, 2.0],
        };
        assert_eq!(f.eval(0.1, (0.0, 1.0)), 1.0);
        assert_eq!(f.eval(0.9, (0.0, 1.0)), 2.0);
    }
}
