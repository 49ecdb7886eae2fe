use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, QmatError};

/// Wire format for matrices: row-major real and imaginary parts plus
/// subsystem dims. Choi exports add `kind`, `in_dim` and `out_dims`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dims: Option<Vec<usize>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let re = (0..rows)
            .map(|i| (0..cols).map(|j| m.get(i, j).re).collect())
            .collect();
        let im = (0..rows)
            .map(|i| (0..cols).map(|j| m.get(i, j).im).collect())
            .collect();
        Self {
            kind: None,
            dims: m.dims().map_or_else(|| vec![rows], <[usize]>::to_vec),
            re,
            im: Some(im),
            in_dim: None,
            out_dims: None,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, QmatError> {
        let m = ComplexMatrix::from_parts(&self.re, self.im.as_deref())?;
        if !m.is_square() {
            return Err(QmatError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        m.set_dims(&self.dims)
    }
}

pub fn parse_matrix_json(text: &str) -> Result<ComplexMatrix, QmatError> {
    let parsed: MatrixJson =
        serde_json::from_str(text).map_err(|e| QmatError::Json(e.to_string()))?;
    parsed.to_matrix()
}

/// A JSON array of matrices, as used for POVMs.
pub fn parse_matrix_list_json(text: &str) -> Result<Vec<ComplexMatrix>, QmatError> {
    let parsed: Vec<MatrixJson> =
        serde_json::from_str(text).map_err(|e| QmatError::Json(e.to_string()))?;
    parsed.iter().map(MatrixJson::to_matrix).collect()
}
