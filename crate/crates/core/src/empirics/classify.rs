//! Train/val/test splits and the linear threshold classifier.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{trial_rng, Stream};

/// Split shares; must be positive and sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|&f| f.is_nan() || f <= 0.0) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "split fractions must be positive and sum to 1, got {all:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded random split of `0..n`. Sizes are rounded for train and val; test takes the rest.
pub fn random_split(n: usize, fractions: SplitFractions, seed: u64, trial_index: u64) -> Result<Split> {
    fractions.validate()?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut trial_rng(seed, trial_index, Stream::Split));
    let n_train = ((fractions.train * n as f64).round() as usize).min(n);
    let n_val = ((fractions.val * n as f64).round() as usize).min(n - n_train);
    let test = perm.split_off(n_train + n_val);
    let val = perm.split_off(n_train);
    Ok(Split { train: perm, val, test })
}

/// How the decision threshold is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DecisionRule {
    /// Project onto the train-split mean difference and cut at the projected midpoint.
    Fitted,
    /// Known-model rule: class 2 iff the feature average exceeds `midpoint`.
    Population { midpoint: f64 },
}

fn accuracy(pred: impl Fn(usize) -> usize, idx: &[usize], labels: &[usize]) -> f64 {
    let hits = idx.iter().filter(|&&i| pred(i) == labels[i]).count();
    hits as f64 / idx.len() as f64
}

/// `(train_acc, test_acc)` with the fitted mean-difference rule.
pub fn threshold_accuracy(h: &Array2<f64>, labels: &[usize], split: &Split) -> Result<(f64, f64)> {
    threshold_accuracy_with(h, labels, split, DecisionRule::Fitted)
}

pub fn threshold_accuracy_with(
    h: &Array2<f64>,
    labels: &[usize],
    split: &Split,
    rule: DecisionRule,
) -> Result<(f64, f64)> {
    if labels.len() != h.nrows() {
        return Err(Error::InvalidParameter("labels and rows differ in length".into()));
    }
    if labels.iter().any(|&l| l != 1 && l != 2) {
        return Err(Error::InvalidParameter("threshold rule needs labels in {1, 2}".into()));
    }
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::InvalidParameter("train and test splits must be nonempty".into()));
    }
    match rule {
        DecisionRule::Population { midpoint } => {
            let d = h.ncols() as f64;
            let pred = |i: usize| if h.row(i).sum() / d > midpoint { 2 } else { 1 };
            Ok((accuracy(pred, &split.train, labels), accuracy(pred, &split.test, labels)))
        }
        DecisionRule::Fitted => {
            let d = h.ncols();
            let mut means = [Array1::<f64>::zeros(d), Array1::<f64>::zeros(d)];
            let mut counts = [0usize; 2];
            for &i in &split.train {
                let c = labels[i] - 1;
                means[c] += &h.row(i);
                counts[c] += 1;
            }
            for (c, &n) in counts.iter().enumerate() {
                if n == 0 {
                    return Err(Error::EmptyClass { class: c + 1 });
                }
                means[c] /= n as f64;
            }
            let w = &means[1] - &means[0];
            let cut = 0.5 * (w.dot(&means[0]) + w.dot(&means[1]));
            let pred = |i: usize| if h.row(i).dot(&w) > cut { 2 } else { 1 };
            Ok((accuracy(pred, &split.train, labels), accuracy(pred, &split.test, labels)))
        }
    }
}
