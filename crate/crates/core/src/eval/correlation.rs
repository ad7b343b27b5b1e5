use super::EvalError;

fn check_pair(a: &[f64], b: &[f64]) -> Result<(), EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(EvalError::TooFew {
            needed: 3,
            found: a.len(),
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Product-moment correlation; `None` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<Option<f64>, EvalError> {
    check_pair(a, b)?;
    Ok(pearson_unchecked(a, b))
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

pub(crate) fn pearson_unchecked(a: &[f64], b: &[f64]) -> Option<f64> {
    if is_constant(a) || is_constant(b) {
        return None;
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing the average of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean rank.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson over tie-averaged ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<Option<f64>, EvalError> {
    check_pair(a, b)?;
    Ok(pearson_unchecked(&average_ranks(a), &average_ranks(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Rank by counting: (#smaller) + (#equal + 1) / 2.
    fn counting_ranks(x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|v| {
                let less = x.iter().filter(|w| *w < v).count() as f64;
                let eq = x.iter().filter(|w| *w == v).count() as f64;
                less + (eq + 1.0) / 2.0
            })
            .collect()
    }

    #[test]
    fn pearson_examples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &a).unwrap().unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((pearson(&a, &neg).unwrap().unwrap() + 1.0).abs() < 1e-15);
        let r = pearson(&a, &[1.0, 3.0, 2.0, 4.0]).unwrap().unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn errors_and_undefined() {
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(EvalError::LengthMismatch(3, 2))
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0, 2.0]),
            Err(EvalError::TooFew { .. })
        ));
        assert_eq!(spearman(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), None);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap(), None);
    }

    #[test]
    fn spearman_eight_element_reference() {
        // scipy.stats.spearmanr on the same vectors.
        let a = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let b = [2.0, 7.0, 1.0, 8.0, 2.0, 8.0, 1.0, 8.0];
        let rho = spearman(&a, &b).unwrap().unwrap();
        assert!((rho - 0.19885368120992467).abs() < 1e-12);
        let oracle = pearson_unchecked(&counting_ranks(&a), &counting_ranks(&b)).unwrap();
        assert!((rho - oracle).abs() < 1e-12);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 10.0, 30.0]),
            vec![1.5, 3.0, 1.5, 4.0]
        );
    }

    proptest! {
        #[test]
        fn symmetric_and_transform_invariant(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            scale in 0.1f64..10.0,
            shift in -50.0f64..50.0,
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let p_ab = pearson(&a, &b).unwrap();
            let p_ba = pearson(&b, &a).unwrap();
            prop_assert_eq!(p_ab.is_some(), p_ba.is_some());
            if let (Some(x), Some(y)) = (p_ab, p_ba) {
                prop_assert!((x - y).abs() < 1e-12);
                let affine: Vec<f64> = a.iter().map(|v| v * scale + shift).collect();
                prop_assert!((pearson(&affine, &b).unwrap().unwrap() - x).abs() < 1e-9);
            }
            let s_ab = spearman(&a, &b).unwrap();
            let cubed: Vec<f64> = a.iter().map(|v| v * v * v + 3.0).collect();
            let s_t = spearman(&cubed, &b).unwrap();
            match (s_ab, s_t) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false, "definedness changed under a monotone transform"),
            }
        }

        #[test]
        fn monotone_transform_gives_one(a in prop::collection::vec(-1e3f64..1e3, 3..30)) {
            let mut dedup = a.clone();
            dedup.sort_by(f64::total_cmp);
            dedup.dedup();
            prop_assume!(dedup.len() == a.len());
            let t: Vec<f64> = a.iter().map(|v| v.atan() + 2.0 * v).collect();
            prop_assert!((spearman(&a, &t).unwrap().unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
