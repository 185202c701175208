use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An affine map `x ↦ matrix·x + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineMapRepr", into = "AffineMapRepr")]
pub struct AffineMap {
    matrix: Array2<f64>,
    offset: Array1<f64>,
}

impl AffineMap {
    pub fn new(matrix: Array2<f64>, offset: Array1<f64>) -> Result<Self> {
        if matrix.nrows() != offset.len() {
            return Err(Error::Shape(format!(
                "affine map has {} rows but offset of length {}",
                matrix.nrows(),
                offset.len()
            )));
        }
        if matrix.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Value("affine map contains a non-finite entry".into()));
        }
        Ok(Self { matrix, offset })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: Array2::eye(dim),
            offset: Array1::zeros(dim),
        }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &Array1<f64> {
        &self.offset
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "affine map expects input of length {}, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(self.matrix.dot(&x) + &self.offset)
    }

    /// Returns `outer ∘ inner`, i.e. the map `x ↦ outer(inner(x))`.
    pub fn compose(outer: &AffineMap, inner: &AffineMap) -> Result<AffineMap> {
        if outer.input_dim() != inner.output_dim() {
            return Err(Error::Shape(format!(
                "cannot compose map expecting {} inputs with map producing {}",
                outer.input_dim(),
                inner.output_dim()
            )));
        }
        Ok(AffineMap {
            matrix: outer.matrix.dot(&inner.matrix),
            offset: outer.matrix.dot(&inner.offset) + &outer.offset,
        })
    }

    /// Row `i` as `(coefficients, constant)`.
    pub fn row(&self, i: usize) -> (ArrayView1<'_, f64>, f64) {
        (self.matrix.row(i), self.offset[i])
    }
}

#[derive(Serialize, Deserialize)]
struct AffineMapRepr {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl TryFrom<AffineMapRepr> for AffineMap {
    type Error = Error;

    fn try_from(repr: AffineMapRepr) -> Result<Self> {
        let cols = if repr.matrix.is_empty() {
            0
        } else {
            repr.matrix[0].len()
        };
        let matrix = crate::network::rows_to_matrix(&repr.matrix, cols)?;
        AffineMap::new(matrix, Array1::from(repr.offset))
    }
}

impl From<AffineMap> for AffineMapRepr {
    fn from(map: AffineMap) -> Self {
        AffineMapRepr {
            matrix: map.matrix.outer_iter().map(|r| r.to_vec()).collect(),
            offset: map.offset.to_vec(),
        }
    }
}
