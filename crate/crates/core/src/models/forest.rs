use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bins::ComplexityBin;
use super::regression::check_matrix;
use super::ModelError;

const N_CLASSES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    /// `None` means unlimited.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            features_per_split: None,
            max_depth: None,
            min_leaf: 1,
        }
    }
}

impl ForestParams {
    pub fn resolved_features_per_split(&self, d: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [u32; N_CLASSES],
    },
}

/// Nodes in creation order; index 0 is the root. `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

fn majority(counts: &[u32; N_CLASSES]) -> usize {
    // first maximum: ties go to the lower bin
    let mut best = 0;
    for k in 1..N_CLASSES {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    best
}

impl DecisionTree {
    pub fn leaf_counts(&self, x: &[f64]) -> &[u32; N_CLASSES] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> ComplexityBin {
        ComplexityBin::ALL[majority(self.leaf_counts(x))]
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub layout_version: String,
    pub n_features: usize,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub features_per_split: usize,
    pub min_leaf: usize,
    pub seed: u64,
    pub classes: Vec<ComplexityBin>,
    pub trees: Vec<DecisionTree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub bin: ComplexityBin,
    /// Vote share per bin, in bin order.
    pub probabilities: [f64; N_CLASSES],
}

fn gini(counts: &[u32; N_CLASSES], n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = f64::from(n);
    1.0 - counts
        .iter()
        .map(|&c| (f64::from(c) / n).powi(2))
        .sum::<f64>()
}

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    mtry: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
    n_left: usize,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> [u32; N_CLASSES] {
        let mut c = [0u32; N_CLASSES];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    /// Best weighted-Gini threshold on one feature, or `None` if it is constant here.
    fn scan(
        &self,
        idx: &mut [usize],
        feature: usize,
        total: &[u32; N_CLASSES],
    ) -> Option<(f64, f64, usize)> {
        let col = self.x.column(feature);
        idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        let n = idx.len();
        if col[idx[0]] == col[idx[n - 1]] {
            return None;
        }
        let mut left = [0u32; N_CLASSES];
        let mut best: Option<(f64, f64, usize)> = None;
        for k in 0..n - 1 {
            left[self.y[idx[k]]] += 1;
            let (v, next) = (col[idx[k]], col[idx[k + 1]]);
            if v == next {
                continue;
            }
            let n_left = k + 1;
            let n_right = n - n_left;
            if n_left < self.min_leaf || n_right < self.min_leaf {
                continue;
            }
            let mut right = *total;
            for c in 0..N_CLASSES {
                right[c] -= left[c];
            }
            let score = (n_left as f64 * gini(&left, n_left as u32)
                + n_right as f64 * gini(&right, n_right as u32))
                / n as f64;
            if best.is_none_or(|(s, _, _)| score < s) {
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                best = Some((score, threshold, n_left));
            }
        }
        best
    }

    fn build(&self, root: Vec<usize>, rng: &mut ChaCha8Rng) -> DecisionTree {
        let d = self.x.ncols();
        let mut nodes: Vec<Node> = Vec::new();
        // (node slot, sample indices, depth)
        let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, root, 0)];
        nodes.push(Node::Leaf {
            counts: [0; N_CLASSES],
        });
        let mut features: Vec<usize> = (0..d).collect();
        while let Some((slot, mut idx, depth)) = stack.pop() {
            let counts = self.counts(&idx);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_stop = self.max_depth.is_some_and(|m| depth >= m);
            if pure || depth_stop || idx.len() < 2 * self.min_leaf {
                nodes[slot] = Node::Leaf { counts };
                continue;
            }
            features.shuffle(rng);
            let mut best: Option<BestSplit> = None;
            let mut evaluated = 0;
            for &f in &features {
                if evaluated >= self.mtry {
                    break;
                }
                let Some((score, threshold, n_left)) = self.scan(&mut idx, f, &counts) else {
                    continue;
                };
                evaluated += 1;
                if best.as_ref().is_none_or(|b| score < b.score) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        score,
                        n_left,
                    });
                }
            }
            let Some(best) = best else {
                nodes[slot] = Node::Leaf { counts };
                continue;
            };
            let col = self.x.column(best.feature);
            let (l, r): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| col[i] <= best.threshold);
            debug_assert_eq!(l.len(), best.n_left);
            let left = nodes.len();
            nodes.push(Node::Leaf {
                counts: [0; N_CLASSES],
            });
            let right = nodes.len();
            nodes.push(Node::Leaf {
                counts: [0; N_CLASSES],
            });
            nodes[slot] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right,
            };
            stack.push((right, r, depth + 1));
            stack.push((left, l, depth + 1));
        }
        DecisionTree { nodes }
    }
}

/// RNG for one tree: the forest seed with the tree index as stream id.
fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

/// Bagged Gini trees. Each tree draws a bootstrap sample and, at every node,
/// evaluates up to `features_per_split` randomly ordered non-constant features.
pub fn train_forest(
    x: ArrayView2<f64>,
    y: &[ComplexityBin],
    params: &ForestParams,
    seed: u64,
    layout_version: &str,
) -> Result<ForestModel, ModelError> {
    check_matrix(x, y.len())?;
    if params.n_trees < 1 {
        return Err(ModelError::InvalidParams(
            "n_trees must be at least 1".into(),
        ));
    }
    if params.min_leaf < 1 {
        return Err(ModelError::InvalidParams(
            "min_leaf must be at least 1".into(),
        ));
    }
    let (n, d) = x.dim();
    if n == 0 {
        return Err(ModelError::TooFew {
            needed: 1,
            found: 0,
        });
    }
    let labels: Vec<usize> = y.iter().map(|b| b.index()).collect();
    let mut present = [false; N_CLASSES];
    for &c in &labels {
        present[c] = true;
    }
    if present.iter().filter(|p| **p).count() < 2 {
        log::warn!("training data contains a single complexity bin");
    }
    let mtry = params.resolved_features_per_split(d);
    let builder = Builder {
        x,
        y: &labels,
        mtry,
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
    };
    let trees: Vec<DecisionTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(seed, t);
            let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            builder.build(sample, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        layout_version: layout_version.to_string(),
        n_features: d,
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        features_per_split: mtry,
        min_leaf: params.min_leaf,
        seed,
        classes: ComplexityBin::ALL.to_vec(),
        trees,
    })
}

impl ForestModel {
    pub fn check_layout(&self, layout_version: &str, len: usize) -> Result<(), ModelError> {
        if layout_version != self.layout_version || len != self.n_features {
            return Err(ModelError::LayoutMismatch {
                expected: format!("{} ({} features)", self.layout_version, self.n_features),
                found: format!("{layout_version} ({len} features)"),
            });
        }
        Ok(())
    }

    /// Majority vote; ties go to the lower-complexity bin.
    pub fn classify(&self, layout_version: &str, x: &[f64]) -> Result<Classification, ModelError> {
        self.check_layout(layout_version, x.len())?;
        Ok(self.classify_unchecked(x))
    }

    pub(crate) fn classify_unchecked(&self, x: &[f64]) -> Classification {
        let mut votes = [0u32; N_CLASSES];
        for t in &self.trees {
            votes[majority(t.leaf_counts(x))] += 1;
        }
        let total = self.trees.len() as f64;
        let mut probabilities = [0.0; N_CLASSES];
        for k in 0..N_CLASSES {
            probabilities[k] = f64::from(votes[k]) / total;
        }
        Classification {
            bin: ComplexityBin::ALL[majority(&votes)],
            probabilities,
        }
    }

    pub fn classify_rows(
        &self,
        layout_version: &str,
        x: ArrayView2<f64>,
    ) -> Result<Vec<Classification>, ModelError> {
        self.check_layout(layout_version, x.ncols())?;
        Ok(x.rows()
            .into_iter()
            .map(|r| self.classify_unchecked(&r.to_vec()))
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }
}
