//! Column-compressed integer matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Column = Vec<(u32, i64)>;

/// Sparse integer matrix stored by columns. Each column is sorted by row and
/// holds no explicit zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<Column>,
}

/// Sorts entries by row, merges duplicates and drops zeros.
pub fn normalize_column(col: &mut Column) {
    col.sort_unstable_by_key(|e| e.0);
    let mut out = 0;
    for k in 0..col.len() {
        if out > 0 && col[out - 1].0 == col[k].0 {
            col[out - 1].1 += col[k].1;
        } else {
            col[out] = col[k];
            out += 1;
        }
    }
    col.truncate(out);
    col.retain(|e| e.1 != 0);
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn from_columns(rows: usize, mut columns: Vec<Column>) -> Result<Self> {
        for col in columns.iter_mut() {
            normalize_column(col);
            if let Some(&(r, _)) = col.last() {
                if r as usize >= rows {
                    return Err(Error::Validation(format!("row {r} out of range {rows}")));
                }
            }
        }
        Ok(SparseMatrix {
            rows,
            cols: columns.len(),
            columns,
        })
    }

    pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, i64)]) -> Result<Self> {
        let mut columns = vec![Vec::new(); cols];
        for &(r, c, v) in entries {
            if r >= rows || c >= cols {
                return Err(Error::Validation(format!("entry ({r}, {c}) outside {rows}x{cols}")));
            }
            columns[c].push((r as u32, v));
        }
        SparseMatrix::from_columns(rows, columns)
    }

    pub fn from_dense(rows: usize, cols: usize, data: &[Vec<i64>]) -> Self {
        let columns = (0..cols)
            .map(|c| {
                (0..rows)
                    .filter(|&r| data[r][c] != 0)
                    .map(|r| (r as u32, data[r][c]))
                    .collect()
            })
            .collect();
        SparseMatrix {
            rows,
            cols,
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, c: usize) -> &Column {
        &self.columns[c]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.columns[c]
            .binary_search_by_key(&(r as u32), |e| e.0)
            .map(|k| self.columns[c][k].1)
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0; self.cols]; self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                out[r as usize][c] = v;
            }
        }
        out
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r as usize, c, v)))
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut columns = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                columns[r as usize].push((c as u32, v));
            }
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            columns,
        }
    }

    /// `self · other`, with entries optionally reduced modulo `modulus`.
    pub fn mul(&self, other: &SparseMatrix, modulus: Option<i64>) -> Result<SparseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Validation(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = vec![0i128; self.rows];
        let mut touched = Vec::new();
        let columns = other
            .columns
            .iter()
            .map(|ocol| {
                for &(k, w) in ocol {
                    for &(r, v) in &self.columns[k as usize] {
                        if acc[r as usize] == 0 {
                            touched.push(r);
                        }
                        acc[r as usize] += v as i128 * w as i128;
                        if acc[r as usize] == 0 {
                            // keep the row in `touched`; zeros are dropped below
                        }
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                let mut col = Vec::with_capacity(touched.len());
                for &r in &touched {
                    let mut v = std::mem::take(&mut acc[r as usize]);
                    if let Some(m) = modulus {
                        v = v.rem_euclid(m as i128);
                    }
                    if v != 0 {
                        let v = i64::try_from(v).map_err(|_| {
                            Error::Integrity("matrix product entry overflows i64".into())
                        })?;
                        col.push((r, v));
                    }
                }
                touched.clear();
                Ok(col)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            columns,
        })
    }

    /// Entries reduced into `0..p`.
    pub fn reduce_mod(&self, p: u32) -> Vec<Vec<(u32, u32)>> {
        let p = p as i64;
        self.columns
            .iter()
            .map(|col| {
                col.iter()
                    .filter_map(|&(r, v)| {
                        let v = v.rem_euclid(p) as u32;
                        (v != 0).then_some((r, v))
                    })
                    .collect()
            })
            .collect()
    }

    /// Applies row and column permutations: entry `(r, c)` moves to
    /// `(row_perm[r], col_perm[c])`.
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> SparseMatrix {
        let mut columns = vec![Vec::new(); self.cols];
        for (c, col) in self.columns.iter().enumerate() {
            let mut new_col: Column = col.iter().map(|&(r, v)| (row_perm[r as usize] as u32, v)).collect();
            new_col.sort_unstable_by_key(|e| e.0);
            columns[col_perm[c]] = new_col;
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            columns,
        }
    }

    pub fn negate(&self) -> SparseMatrix {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            columns: self
                .columns
                .iter()
                .map(|col| col.iter().map(|&(r, v)| (r, -v)).collect())
                .collect(),
        }
    }

    /// Stacks matrices into a block matrix given as rows of blocks.
    pub fn block(blocks: &[Vec<&SparseMatrix>]) -> Result<SparseMatrix> {
        let row_heights: Vec<usize> = blocks.iter().map(|row| row[0].rows).collect();
        let col_widths: Vec<usize> = blocks[0].iter().map(|m| m.cols).collect();
        let rows = row_heights.iter().sum();
        let mut columns = Vec::with_capacity(col_widths.iter().sum());
        for (bc, &width) in col_widths.iter().enumerate() {
            for c in 0..width {
                let mut col = Vec::new();
                let mut offset = 0u32;
                for (br, row) in blocks.iter().enumerate() {
                    let m = row[bc];
                    if m.rows != row_heights[br] || m.cols != width {
                        return Err(Error::Validation("block shapes disagree".into()));
                    }
                    col.extend(m.columns[c].iter().map(|&(r, v)| (r + offset, v)));
                    offset += m.rows as u32;
                }
                columns.push(col);
            }
        }
        Ok(SparseMatrix {
            rows,
            cols: columns.len(),
            columns,
        })
    }
}

/// Coordinate-format JSON form of a matrix.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SparseMatrixJson {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col, value)` ordered by column, then row.
    pub entries: Vec<(usize, usize, i64)>,
}

impl From<&SparseMatrix> for SparseMatrixJson {
    fn from(m: &SparseMatrix) -> Self {
        SparseMatrixJson {
            rows: m.rows,
            cols: m.cols,
            entries: m.triplets().collect(),
        }
    }
}

impl TryFrom<SparseMatrixJson> for SparseMatrix {
    type Error = Error;

    fn try_from(j: SparseMatrixJson) -> Result<SparseMatrix> {
        SparseMatrix::from_triplets(j.rows, j.cols, &j.entries)
    }
}

impl Serialize for SparseMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SparseMatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SparseMatrixJson::deserialize(d)?;
        SparseMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_merge_and_cancel() {
        let m = SparseMatrix::from_triplets(2, 1, &[(0, 0, 1), (0, 0, -1), (1, 0, 2), (1, 0, 3)])
            .unwrap();
        assert_eq!(m.column(0), &vec![(1, 5)]);
    }

    #[test]
    fn product_and_transpose() {
        let a = SparseMatrix::from_dense(2, 3, &[vec![1, 2, 0], vec![0, 1, -1]]);
        let b = SparseMatrix::from_dense(3, 1, &[vec![1], vec![1], vec![1]]);
        let ab = a.mul(&b, None).unwrap();
        assert_eq!(ab.to_dense(), vec![vec![3], vec![0]]);
        assert_eq!(a.transpose().transpose(), a);
        let ab2 = a.mul(&b, Some(3)).unwrap();
        assert!(ab2.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let a = SparseMatrix::from_dense(2, 2, &[vec![0, 2], vec![-1, 0]]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"entries":[[1,0,-1],[0,1,2]]}"#);
        let back: SparseMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<SparseMatrix>(r#"{"rows":1,"cols":1,"entries":[[3,0,1]]}"#).is_err());
    }

    #[test]
    fn blocks() {
        let a = SparseMatrix::from_dense(1, 1, &[vec![1]]);
        let z = SparseMatrix::zeros(1, 1);
        let m = SparseMatrix::block(&[vec![&a, &z], vec![&z, &a]]).unwrap();
        assert_eq!(m.to_dense(), vec![vec![1, 0], vec![0, 1]]);
    }
}
