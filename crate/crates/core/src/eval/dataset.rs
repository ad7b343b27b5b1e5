use ndarray::{Array2, ArrayView2, Axis};

use crate::annotations::ReleasedEntry;
use crate::corpus::Genre;
use crate::features::{FeatureLayout, FeatureMatrix, Featurizer};
use crate::models::ComplexityBin;

use super::EvalError;

/// Feature rows with gold complexity and the metadata the experiment drivers group by.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub layout: FeatureLayout,
    pub ids: Vec<String>,
    pub genres: Vec<Genre>,
    pub is_mwe: Vec<bool>,
    pub x: Array2<f64>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(
        layout: FeatureLayout,
        ids: Vec<String>,
        genres: Vec<Genre>,
        is_mwe: Vec<bool>,
        x: Array2<f64>,
        y: Vec<f64>,
    ) -> Result<Self, EvalError> {
        let n = ids.len();
        if genres.len() != n || is_mwe.len() != n || x.nrows() != n || y.len() != n {
            return Err(EvalError::InvalidArgument(
                "dataset columns have different lengths".into(),
            ));
        }
        if x.ncols() != layout.len() {
            return Err(EvalError::LengthMismatch(layout.len(), x.ncols()));
        }
        if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(EvalError::InvalidArgument(
                "gold complexity outside [0, 1]".into(),
            ));
        }
        Ok(Dataset {
            layout,
            ids,
            genres,
            is_mwe,
            x,
            y,
        })
    }

    /// Featurizes released entries in order.
    pub fn from_released(
        entries: &[ReleasedEntry],
        featurizer: &Featurizer<'_>,
    ) -> Result<Self, EvalError> {
        let instances: Vec<_> = entries.iter().map(ReleasedEntry::to_instance).collect();
        let m = featurizer
            .featurize_all(&instances)
            .map_err(|e| EvalError::InvalidArgument(e.to_string()))?;
        Self::from_matrix(
            &m,
            entries.iter().map(|e| e.genre.clone()).collect(),
            entries.iter().map(|e| e.is_mwe).collect(),
            entries.iter().map(|e| e.complexity).collect(),
        )
    }

    pub fn from_matrix(
        m: &FeatureMatrix,
        genres: Vec<Genre>,
        is_mwe: Vec<bool>,
        y: Vec<f64>,
    ) -> Result<Self, EvalError> {
        let n = m.n_rows();
        let d = m.n_cols();
        let x = Array2::from_shape_vec((n, d), m.rows.concat())
            .map_err(|e| EvalError::InvalidArgument(e.to_string()))?;
        Self::new(m.layout.clone(), m.ids.clone(), genres, is_mwe, x, y)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn bins(&self) -> Vec<ComplexityBin> {
        self.y
            .iter()
            .map(|c| ComplexityBin::from_score(*c).expect("validated score"))
            .collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            layout: self.layout.clone(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            genres: idx.iter().map(|&i| self.genres[i].clone()).collect(),
            is_mwe: idx.iter().map(|&i| self.is_mwe[i]).collect(),
            x: self.x.select(Axis(0), idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> Dataset {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        self.subset(&idx)
    }

    pub fn x_view(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }
}
