//! JSON encodings shared by every serialized type: complex numbers are
//! `[re, im]` pairs and matrices are row-major lists of rows.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMatrix, Complex};

pub type Pair = [f64; 2];

pub fn pair(c: Complex) -> Pair {
    [c.re, c.im]
}

pub fn from_pair(p: Pair) -> Complex {
    Complex::new(p[0], p[1])
}

pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| pair(m[(r, c)])).collect()).collect()
}

/// Rebuilds a matrix from rows; `None` if the rows are ragged.
pub fn rows_matrix(rows: &[Vec<Pair>]) -> Option<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(CMatrix::from_fn(nrows, ncols, |r, c| from_pair(rows[r][c])))
}

pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|&c| pair(c)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex>, D::Error> {
        Ok(Vec::<Pair>::deserialize(d)?.into_iter().map(from_pair).collect())
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<Pair>>::deserialize(d)?;
        rows_matrix(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }
}

pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        Vec::<Vec<Vec<Pair>>>::deserialize(d)?
            .iter()
            .map(|rows| rows_matrix(rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows")))
            .collect()
    }
}
