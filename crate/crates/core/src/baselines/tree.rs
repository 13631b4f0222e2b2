//! CART classification trees (Gini) and bagged random forests.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{majority, FeatureSet};
use crate::seed::derive;
use crate::{Error, Result};

/// Minimum decrease in weighted Gini impurity for a split to count.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features tried per split; `None` tries all.
    pub max_features: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: 12, min_samples_leaf: 2, max_features: None }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf == 0 || self.max_features == Some(0) {
            return Err(Error::InvalidConfig("tree: min_samples_leaf and max_features must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        counts: Vec<u32>,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub dim: usize,
    pub n_classes: usize,
    /// Root first.
    pub nodes: Vec<Node>,
}

/// Gini impurity `1 − Σ p_k²` of a class histogram; 0 for an empty one.
pub fn gini(counts: &[u32]) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n) * (c as f64 / n)).sum::<f64>()
}

fn sum_sq_over_n(counts: &[u32], n: usize) -> f64 {
    counts.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / n as f64
}

struct Builder<'a> {
    set: &'a FeatureSet,
    n_classes: usize,
    cfg: TreeConfig,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn histogram(&self, rows: &[usize]) -> Vec<u32> {
        let mut h = vec![0u32; self.n_classes];
        for &r in rows {
            h[self.set.y[r]] += 1;
        }
        h
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.set.dim;
        match self.cfg.max_features {
            Some(m) if m < d => {
                let mut f = index::sample(&mut self.rng, d, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    /// Best split as (weighted impurity, feature, threshold). Earlier
    /// features and lower thresholds win ties.
    fn best_split(&mut self, rows: &[usize], hist: &[u32]) -> Option<(f64, usize, f64)> {
        let n = rows.len();
        let min_leaf = self.cfg.min_samples_leaf;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for f in self.candidate_features() {
            let x = |r: usize| self.set.x[r * self.set.dim + f];
            sorted.sort_unstable_by(|&a, &b| x(a).total_cmp(&x(b)).then(a.cmp(&b)));
            let mut left = vec![0u32; self.n_classes];
            for i in 0..n - 1 {
                left[self.set.y[sorted[i]]] += 1;
                let n_left = i + 1;
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let (lo, hi) = (x(sorted[i]), x(sorted[i + 1]));
                if lo >= hi {
                    continue;
                }
                let right: Vec<u32> = hist.iter().zip(&left).map(|(h, l)| h - l).collect();
                let impurity = 1.0 - (sum_sq_over_n(&left, n_left) + sum_sq_over_n(&right, n_right)) / n as f64;
                if best.is_none_or(|b| impurity < b.0) {
                    best = Some((impurity, f, lo));
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let hist = self.histogram(&rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: hist.clone() });
        let parent = gini(&hist);
        if depth >= self.cfg.max_depth || rows.len() < 2 * self.cfg.min_samples_leaf || parent == 0.0 {
            return id;
        }
        let Some((impurity, feature, threshold)) = self.best_split(&rows, &hist) else {
            return id;
        };
        if parent - impurity <= MIN_GAIN {
            return id;
        }
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&i| self.set.x[i * self.set.dim + feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
}

/// Grows a tree on `rows` of `set` (duplicates allowed, as in a bootstrap
/// sample). `rng` only matters when `max_features` subsamples.
pub fn dt_train_rows(
    set: &FeatureSet,
    rows: Vec<usize>,
    n_classes: usize,
    cfg: &TreeConfig,
    rng: ChaCha8Rng,
) -> Result<TreeModel> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(Error::Empty("tree training set is empty"));
    }
    if set.n_classes() > n_classes {
        return Err(Error::InvalidConfig(format!("labels exceed {n_classes} classes")));
    }
    let mut b = Builder { set, n_classes, cfg: *cfg, rng, nodes: Vec::new() };
    b.grow(rows, 0);
    Ok(TreeModel { dim: set.dim, n_classes, nodes: b.nodes })
}

pub fn dt_train(set: &FeatureSet, n_classes: usize, cfg: &TreeConfig, seed: u64) -> Result<TreeModel> {
    dt_train_rows(set, (0..set.len()).collect(), n_classes, cfg, ChaCha8Rng::seed_from_u64(seed))
}

impl TreeModel {
    pub fn leaf(&self, x: &[f64]) -> &[u32] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Majority class of the reached leaf; ties go to the smaller class.
    pub fn predict(&self, x: &[f64]) -> usize {
        majority(self.leaf(x))
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeConfig,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            bootstrap: true,
            tree: TreeConfig { max_features: Some(7), ..TreeConfig::default() },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_classes: usize,
    pub trees: Vec<TreeModel>,
}

/// Tree `t` of a forest; independent of every other tree, so trees can be
/// grown in any order.
pub fn rf_train_tree(set: &FeatureSet, n_classes: usize, cfg: &ForestConfig, t: usize) -> Result<TreeModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(cfg.seed, &[t as u64]));
    let n = set.len();
    let rows = if cfg.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
    dt_train_rows(set, rows, n_classes, &cfg.tree, rng)
}

pub fn rf_train(set: &FeatureSet, n_classes: usize, cfg: &ForestConfig) -> Result<ForestModel> {
    if cfg.n_trees == 0 {
        return Err(Error::InvalidConfig("forest needs at least one tree".into()));
    }
    let trees = (0..cfg.n_trees).map(|t| rf_train_tree(set, n_classes, cfg, t)).collect::<Result<Vec<_>>>()?;
    Ok(ForestModel { n_classes, trees })
}

impl ForestModel {
    pub fn votes(&self, x: &[f64]) -> Vec<u32> {
        let mut v = vec![0u32; self.n_classes];
        for t in &self.trees {
            v[t.predict(x)] += 1;
        }
        v
    }

    /// Majority vote; ties go to the smaller class.
    pub fn predict(&self, x: &[f64]) -> usize {
        majority(&self.votes(x))
    }
}
