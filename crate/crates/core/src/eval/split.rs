use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.9,
            seed: 0,
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Groups indices by stratum key, in key order.
fn strata<K: Ord + Clone>(n: usize, keys: Option<&[K]>) -> Vec<Vec<usize>> {
    match keys {
        None => vec![(0..n).collect()],
        Some(keys) => {
            let mut m: BTreeMap<K, Vec<usize>> = BTreeMap::new();
            for (i, k) in keys.iter().enumerate() {
                m.entry(k.clone()).or_default().push(i);
            }
            m.into_values().collect()
        }
    }
}

/// Seeded shuffle-and-cut into (train, test) index lists. With `strata`,
/// each stratum is cut separately so proportions hold within one instance.
pub fn split<K: Ord + Clone>(
    n: usize,
    spec: &SplitSpec,
    strata_keys: Option<&[K]>,
) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if n < 10 {
        return Err(EvalError::TooFew {
            needed: 10,
            found: n,
        });
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(EvalError::InvalidArgument(format!(
            "train fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    if let Some(k) = strata_keys {
        if k.len() != n {
            return Err(EvalError::LengthMismatch(n, k.len()));
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (s, mut idx) in strata(n, strata_keys).into_iter().enumerate() {
        idx.shuffle(&mut rng(spec.seed, s as u64));
        let cut = (idx.len() as f64 * spec.train_fraction).round() as usize;
        test.extend_from_slice(&idx[cut..]);
        idx.truncate(cut);
        train.extend(idx);
    }
    Ok((train, test))
}

/// `k` disjoint test folds covering `0..n`. With `strata`, each stratum is
/// dealt round-robin so every fold gets its share.
pub fn kfold<K: Ord + Clone>(
    n: usize,
    k: usize,
    seed: u64,
    strata_keys: Option<&[K]>,
) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 || k > n {
        return Err(EvalError::InvalidArgument(format!(
            "cannot make {k} folds from {n} instances"
        )));
    }
    if let Some(keys) = strata_keys {
        if keys.len() != n {
            return Err(EvalError::LengthMismatch(n, keys.len()));
        }
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (s, mut idx) in strata(n, strata_keys).into_iter().enumerate() {
        idx.shuffle(&mut rng(seed, s as u64));
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Training indices for a fold: everything not in `test`.
pub fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in test {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}
