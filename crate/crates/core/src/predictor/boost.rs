use rand::seq::index::sample as sample_indices;

use super::{BiLstmParams, PredictorError, WindowSample};
use crate::rng::{stream, stream_rng};
use crate::Real;

/// Depth-limited regression tree. Samples with `x[feature] <= threshold` go
/// left.
#[derive(Debug, Clone, PartialEq)]
pub enum RegressionTree<T> {
    Leaf(T),
    Split {
        feature: usize,
        threshold: T,
        left: Box<RegressionTree<T>>,
        right: Box<RegressionTree<T>>,
    },
}

impl<T: Real> RegressionTree<T> {
    pub fn eval(&self, x: &[T]) -> T {
        let mut node = self;
        loop {
            match node {
                RegressionTree::Leaf(v) => return *v,
                RegressionTree::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RegressionTree::Leaf(_) => 0,
            RegressionTree::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> Vec<T> {
        match self {
            RegressionTree::Leaf(v) => vec![*v],
            RegressionTree::Split { left, right, .. } => {
                let mut l = left.leaves();
                l.extend(right.leaves());
                l
            }
        }
    }

    /// Exact greedy least-squares fit; leaves hold `scale × mean(target)`.
    fn fit(x: &[Vec<T>], y: &[T], rows: &mut [usize], depth_left: usize, scale: T) -> Self {
        let n = T::from_usize(rows.len()).expect("row count fits");
        let sum = rows.iter().fold(T::zero(), |a, &i| a + y[i]);
        let leaf = RegressionTree::Leaf(scale * sum / n);
        if depth_left == 0 || rows.len() < 2 {
            return leaf;
        }

        // (gain, feature, threshold)
        let mut best: Option<(T, usize, T)> = None;
        let parent = sum * sum / n;
        for f in 0..x[rows[0]].len() {
            rows.sort_by(|&a, &b| x[a][f].total_cmp_real(x[b][f]).then(a.cmp(&b)));
            let mut left_sum = T::zero();
            for k in 0..rows.len() - 1 {
                left_sum = left_sum + y[rows[k]];
                let (lo, hi) = (x[rows[k]][f], x[rows[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let nl = T::from_usize(k + 1).expect("fits");
                let nr = n - nl;
                let right_sum = sum - left_sum;
                let gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
                if gain > T::zero() && best.is_none_or(|(g, _, _)| gain > g) {
                    let mid = lo + (hi - lo) / T::lit(2.0);
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((gain, f, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else { return leaf };
        rows.sort_by(|&a, &b| {
            (x[a][feature] > threshold).cmp(&(x[b][feature] > threshold)).then(a.cmp(&b))
        });
        let split = rows.iter().take_while(|&&i| x[i][feature] <= threshold).count();
        let (l, r) = rows.split_at_mut(split);
        RegressionTree::Split {
            feature,
            threshold,
            left: Box::new(Self::fit(x, y, l, depth_left - 1, scale)),
            right: Box::new(Self::fit(x, y, r, depth_left - 1, scale)),
        }
    }
}

trait TotalCmp {
    fn total_cmp_real(self, other: Self) -> std::cmp::Ordering;
}

impl<T: Real> TotalCmp for T {
    fn total_cmp_real(self, other: Self) -> std::cmp::Ordering {
        self.partial_cmp(&other).unwrap_or_else(|| self.is_nan().cmp(&other.is_nan()))
    }
}

/// Boosted trees over `[window…, raw BiLSTM output]`, all normalized. Leaf
/// values are already scaled by the shrinkage, so the correction is the
/// plain sum of tree outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEnsemble<T> {
    trees: Vec<RegressionTree<T>>,
    shrinkage: T,
    max_depth: usize,
}

impl<T: Real> ResidualEnsemble<T> {
    pub fn new(trees: Vec<RegressionTree<T>>, shrinkage: T, max_depth: usize) -> Result<Self, PredictorError> {
        if trees.iter().flat_map(|t| t.leaves()).any(|v| !v.is_finite()) {
            return Err(PredictorError::InvalidConfig("non-finite leaf value".into()));
        }
        if let Some(t) = trees.iter().find(|t| t.depth() > max_depth) {
            return Err(PredictorError::InvalidConfig(format!("tree depth {} exceeds {max_depth}", t.depth())));
        }
        Ok(Self { trees, shrinkage, max_depth })
    }

    pub fn empty() -> Self {
        Self { trees: Vec::new(), shrinkage: T::lit(0.1), max_depth: 3 }
    }

    pub fn trees(&self) -> &[RegressionTree<T>] {
        &self.trees
    }

    pub fn shrinkage(&self) -> T {
        self.shrinkage
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Correction in normalized units.
    pub fn correction(&self, features: &[T]) -> T {
        self.trees.iter().fold(T::zero(), |acc, t| acc + t.eval(features))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostConfig {
    pub trees: usize,
    pub shrinkage: f64,
    pub max_depth: usize,
    /// Fraction of rows each tree is fitted on; below 1 the per-tree
    /// training error is no longer guaranteed to fall.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self { trees: 50, shrinkage: 0.1, max_depth: 3, subsample: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualFit<T> {
    pub ensemble: ResidualEnsemble<T>,
    /// Training MSE (normalized) with 0, 1, …, M trees.
    pub stage_mse: Vec<T>,
}

pub(crate) fn features<T: Real>(history: &[T], raw: T) -> Vec<T> {
    let mut f = Vec::with_capacity(history.len() + 1);
    f.extend_from_slice(history);
    f.push(raw);
    f
}

/// Squared-loss gradient boosting on the BiLSTM's residuals.
pub fn fit_residual_ensemble<T: Real>(
    samples: &[WindowSample<T>],
    bilstm: &BiLstmParams<T>,
    config: &BoostConfig,
) -> Result<ResidualFit<T>, PredictorError> {
    if samples.is_empty() {
        return Err(PredictorError::EmptyDataset);
    }
    if !(config.shrinkage > 0.0 && config.shrinkage <= 1.0) {
        return Err(PredictorError::InvalidConfig(format!("shrinkage {} outside (0, 1]", config.shrinkage)));
    }
    if !(config.subsample > 0.0 && config.subsample <= 1.0) {
        return Err(PredictorError::InvalidConfig(format!("subsample {} outside (0, 1]", config.subsample)));
    }

    let mut x = Vec::with_capacity(samples.len());
    let mut pred = Vec::with_capacity(samples.len());
    for s in samples {
        let raw = bilstm.forward(&s.history)?;
        x.push(features(&s.history, raw));
        pred.push(raw);
    }
    let n = T::from_usize(samples.len()).expect("fits");
    let mse = |pred: &[T]| samples.iter().zip(pred).fold(T::zero(), |a, (s, p)| a + (s.target - *p).powi(2)) / n;

    let nu = T::lit(config.shrinkage);
    let mut rng = stream_rng(config.seed, stream::SUBSAMPLE);
    let take = ((samples.len() as f64 * config.subsample).ceil() as usize).clamp(1, samples.len());
    let mut trees = Vec::with_capacity(config.trees);
    let mut stage_mse = vec![mse(&pred)];
    for _ in 0..config.trees {
        let residual: Vec<T> = samples.iter().zip(&pred).map(|(s, p)| s.target - *p).collect();
        let mut rows: Vec<usize> = if take == samples.len() {
            (0..samples.len()).collect()
        } else {
            let mut r = sample_indices(&mut rng, samples.len(), take).into_vec();
            r.sort_unstable();
            r
        };
        let tree = RegressionTree::fit(&x, &residual, &mut rows, config.max_depth, nu);
        for (p, xi) in pred.iter_mut().zip(&x) {
            *p = *p + tree.eval(xi);
        }
        stage_mse.push(mse(&pred));
        trees.push(tree);
    }
    Ok(ResidualFit { ensemble: ResidualEnsemble::new(trees, nu, config.max_depth)?, stage_mse })
}
