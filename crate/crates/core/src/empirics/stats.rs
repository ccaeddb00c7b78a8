//! Class statistics and small summary helpers.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};

/// Per-class means, within-class spread and between-class distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassStats {
    pub depth: usize,
    /// `C × d`; row `c` belongs to label `c + 1`.
    pub class_means: Array2<f64>,
    /// Average over classes and dimensions of the unbiased within-class variance.
    pub pooled_within_var: f64,
    /// Dimension-averaged unbiased variance per class (0 for a singleton class).
    pub class_within_var: Vec<f64>,
    /// `C × C` Euclidean distances between class means.
    pub pairwise_mean_dists: Array2<f64>,
}

impl ClassStats {
    /// Mean of the off-diagonal distances; for two classes the single gap.
    pub fn mean_distance(&self) -> f64 {
        let c = self.pairwise_mean_dists.nrows();
        if c < 2 {
            return 0.0;
        }
        let mut sum = 0.0;
        for i in 0..c {
            for j in i + 1..c {
                sum += self.pairwise_mean_dists[[i, j]];
            }
        }
        sum / (c * (c - 1) / 2) as f64
    }

    /// `‖m₂ − m₁‖ / (2 √pooled_var)`, the empirical z-score.
    pub fn empirical_z(&self) -> f64 {
        crate::theory::zscore(self.mean_distance(), self.pooled_within_var)
    }

    /// Dimension-averaged signed gap `mean(m₂ − m₁)` for two classes.
    pub fn signed_gap(&self) -> f64 {
        if self.class_means.nrows() < 2 {
            return 0.0;
        }
        (&self.class_means.row(1) - &self.class_means.row(0)).mean().unwrap_or(0.0)
    }
}

/// Class statistics of `h` under `labels` (values `1..=C`).
pub fn class_stats(h: &Array2<f64>, labels: &[usize], depth: usize) -> Result<ClassStats> {
    if labels.len() != h.nrows() {
        return Err(Error::InvalidParameter(format!(
            "{} labels for {} rows",
            labels.len(),
            h.nrows()
        )));
    }
    let c = labels.iter().copied().max().unwrap_or(0);
    let d = h.ncols();
    let mut counts = vec![0usize; c];
    let mut sums = Array2::<f64>::zeros((c, d));
    for (row, &l) in h.rows().into_iter().zip(labels) {
        counts[l - 1] += 1;
        let mut s = sums.row_mut(l - 1);
        s += &row;
    }
    if let Some(k) = counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass { class: k + 1 });
    }
    let mut means = sums;
    for (mut row, &n) in means.rows_mut().into_iter().zip(&counts) {
        row /= n as f64;
    }
    let mut ss = Array2::<f64>::zeros((c, d));
    for (row, &l) in h.rows().into_iter().zip(labels) {
        let m = means.row(l - 1);
        for k in 0..d {
            let e = row[k] - m[k];
            ss[[l - 1, k]] += e * e;
        }
    }
    let class_within_var: Vec<f64> = counts
        .iter()
        .enumerate()
        .map(|(k, &n)| if n > 1 { ss.row(k).sum() / ((n - 1) * d) as f64 } else { 0.0 })
        .collect();
    let pooled_within_var = class_within_var.iter().sum::<f64>() / c as f64;
    let mut dists = Array2::zeros((c, c));
    for i in 0..c {
        for j in i + 1..c {
            let diff = &means.row(i) - &means.row(j);
            let v = diff.dot(&diff).sqrt();
            dists[[i, j]] = v;
            dists[[j, i]] = v;
        }
    }
    Ok(ClassStats {
        depth,
        class_means: means,
        pooled_within_var,
        class_within_var,
        pairwise_mean_dists: dists,
    })
}

/// Sample mean and standard error of the mean (0 for fewer than two values).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
