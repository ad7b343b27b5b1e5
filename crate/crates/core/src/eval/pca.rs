use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureLayout, GroupId};

use super::EvalError;

pub const PCA_TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit vector, sign fixed so the largest-magnitude entry is positive.
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn orthogonalize(v: &mut [f64], basis: &[Eigenpair]) {
    for b in basis {
        let dot: f64 = v.iter().zip(&b.vector).map(|(x, y)| x * y).sum();
        for (x, y) in v.iter_mut().zip(&b.vector) {
            *x -= dot * y;
        }
    }
}

fn fix_sign(v: &mut [f64]) {
    let lead = v
        .iter()
        .copied()
        .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    if lead < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Leading eigenpairs of a symmetric positive semi-definite `d x d` matrix by
/// power iteration with deflation and Gram-Schmidt re-orthogonalization.
pub fn leading_eigenpairs(matrix: &[f64], d: usize, k: usize, tol: f64) -> Vec<Eigenpair> {
    let mut a = matrix.to_vec();
    let mut found: Vec<Eigenpair> = Vec::new();
    for c in 0..k.min(d) {
        // deterministic start vector, not orthogonal to any axis
        let mut v: Vec<f64> = (0..d)
            .map(|i| 1.0 + ((i * 7 + c * 13) % 11) as f64 / 10.0)
            .collect();
        orthogonalize(&mut v, &found);
        if normalize(&mut v) == 0.0 {
            break;
        }
        let mut w = vec![0.0; d];
        let mut converged = false;
        let mut iterations = 0;
        let mut norm = 0.0;
        while iterations < MAX_ITERATIONS {
            iterations += 1;
            for i in 0..d {
                let row = &a[i * d..(i + 1) * d];
                w[i] = row.iter().zip(&v).map(|(x, y)| x * y).sum();
            }
            orthogonalize(&mut w, &found);
            norm = normalize(&mut w);
            if norm == 0.0 {
                break;
            }
            let diff = w
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            std::mem::swap(&mut v, &mut w);
            if diff < tol {
                converged = true;
                break;
            }
        }
        if norm == 0.0 {
            break;
        }
        fix_sign(&mut v);
        let value: f64 = (0..d)
            .map(|i| {
                v[i] * a[i * d..(i + 1) * d]
                    .iter()
                    .zip(&v)
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
            })
            .sum();
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] -= value * v[i] * v[j];
            }
        }
        found.push(Eigenpair {
            value,
            vector: v,
            iterations,
            converged,
        });
    }
    found
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub column: usize,
    pub name: String,
    pub loading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedComponent {
    pub rank: usize,
    pub eigenvalue: f64,
    pub explained: f64,
    pub converged: bool,
    pub top_loadings: Vec<Loading>,
    /// Groups of the top loadings, strongest first; `T` is reported once.
    pub groups: Vec<GroupId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub components: Vec<RankedComponent>,
    pub dropped_constant: usize,
}

impl FeatureRanking {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("rank\teigenvalue\texplained\tgroups\ttop_features\n");
        for c in &self.components {
            let groups: Vec<String> = c.groups.iter().map(|g| g.to_string()).collect();
            let feats: Vec<String> = c
                .top_loadings
                .iter()
                .map(|l| format!("{}:{:.3}", l.name, l.loading))
                .collect();
            out.push_str(&format!(
                "{}\t{:.6}\t{:.4}\t{}\t{}\n",
                c.rank,
                c.eigenvalue,
                c.explained,
                groups.join(","),
                feats.join(" ")
            ));
        }
        out
    }
}

/// Principal components of the standardized matrix, each summarized by its
/// strongest loadings and the feature groups they belong to.
pub fn rank_features(
    x: ArrayView2<f64>,
    layout: &FeatureLayout,
    n_components: usize,
    top_k: usize,
) -> Result<FeatureRanking, EvalError> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(EvalError::TooFew {
            needed: 2,
            found: n,
        });
    }
    if d != layout.len() {
        return Err(EvalError::LengthMismatch(layout.len(), d));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let active: Vec<usize> = (0..d)
        .filter(|&j| {
            let col = x.column(j);
            col.iter().any(|v| *v != col[0])
        })
        .collect();
    if active.is_empty() {
        return Err(EvalError::InvalidArgument(
            "every feature is constant".into(),
        ));
    }
    let p = active.len();
    let mut z = vec![0.0; n * p];
    for (k, &j) in active.iter().enumerate() {
        let col = x.column(j);
        let mean = col.sum() / n as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        for i in 0..n {
            z[i * p + k] = (col[i] - mean) / sd;
        }
    }
    let mut corr = vec![0.0; p * p];
    for i in 0..n {
        let row = &z[i * p..(i + 1) * p];
        for a in 0..p {
            let ra = row[a];
            if ra != 0.0 {
                for b in a..p {
                    corr[a * p + b] += ra * row[b];
                }
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = corr[a * p + b] / (n - 1) as f64;
            corr[a * p + b] = v;
            corr[b * p + a] = v;
        }
    }
    let total: f64 = (0..p).map(|a| corr[a * p + a]).sum();
    let pairs = leading_eigenpairs(&corr, p, n_components, PCA_TOLERANCE);
    let components = pairs
        .iter()
        .enumerate()
        .map(|(r, e)| {
            let mut order: Vec<usize> = (0..p).collect();
            order.sort_by(|&a, &b| {
                e.vector[b]
                    .abs()
                    .total_cmp(&e.vector[a].abs())
                    .then(a.cmp(&b))
            });
            let top_loadings: Vec<Loading> = order
                .iter()
                .take(top_k)
                .map(|&k| Loading {
                    column: active[k],
                    name: layout.names[active[k]].clone(),
                    loading: e.vector[k],
                })
                .collect();
            let mut seen = BTreeMap::new();
            let mut groups = Vec::new();
            for l in &top_loadings {
                let g = layout.group_of(l.column);
                if seen.insert(g, ()).is_none() {
                    groups.push(g);
                }
            }
            RankedComponent {
                rank: r + 1,
                eigenvalue: e.value,
                explained: e.value / total,
                converged: e.converged,
                top_loadings,
                groups,
            }
        })
        .collect();
    Ok(FeatureRanking {
        components,
        dropped_constant: d - p,
    })
}
