//! JSON serialization for complex matrices: row-major, entries as [re, im]
//! pairs. Used for model import/export and the CLI's custom-matrix models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    /// Row-major [re, im] pairs.
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                data.push([v.re, v.im]);
            }
        }
        MatrixJson { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::ShapeMismatch {
                expected: self.rows * self.cols,
                got: self.data.len(),
            });
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            C64::new(re, im)
        }))
    }
}

pub fn save_matrix(m: &CMatrix, path: &std::path::Path) -> Result<()> {
    let json = serde_json::to_string(&MatrixJson::from_matrix(m))
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    std::fs::write(path, json).map_err(|e| Error::InvalidConfig(e.to_string()))
}

pub fn load_matrix(path: &std::path::Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let parsed: MatrixJson =
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    parsed.to_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_entries() {
        let m = crate::pfaffian::random_skew(6, 3);
        let json = MatrixJson::from_matrix(&m);
        let back = json.to_matrix().unwrap();
        assert_eq!(m, back);
        // row-major layout: entry (0, 1) is the second element
        assert_eq!(json.data[1], [m[(0, 1)].re, m[(0, 1)].im]);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let bad = MatrixJson { rows: 2, cols: 2, data: vec![[0.0, 0.0]; 3] };
        assert!(bad.to_matrix().is_err());
    }
}
