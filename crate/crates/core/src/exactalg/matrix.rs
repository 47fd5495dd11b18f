//! Dense matrices over a single exact field.

use std::fmt;

use super::field::{Field, FieldElement};
use super::ExactError;

/// Row-major dense matrix whose entries all live in `field`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<FieldElement>,
}

impl ExactMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            field,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(field: Field, cols: usize, rows: Vec<Vec<FieldElement>>) -> Result<Self, ExactError> {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for row in rows {
            if row.len() != cols {
                return Err(ExactError::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            for x in row {
                if x.field() != field {
                    return Err(ExactError::FieldMismatch);
                }
                data.push(x);
            }
        }
        Ok(ExactMatrix {
            rows: nrows,
            cols,
            field,
            data,
        })
    }

    pub fn from_i64_rows(field: Field, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Self::from_rows(field, cols, rows).expect("ragged integer rows")
    }

    /// Column vectors stacked side by side.
    pub fn from_columns(field: Field, nrows: usize, columns: &[Vec<FieldElement>]) -> Self {
        let mut m = Self::zeros(field, nrows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), nrows, "column length");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        debug_assert_eq!(v.field(), self.field);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<FieldElement>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ExactError> {
        if self.cols != other.rows {
            return Err(ExactError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        if self.field != other.field {
            return Err(ExactError::FieldMismatch);
        }
        let mut out = Self::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j) + &(a * b);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(self.field.zero(), |acc, (a, b)| &acc + &(a * b))
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &FieldElement) -> Self {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.field, self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                m.set(i, jj, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        ExactMatrix {
            rows: rows.len(),
            cols: self.cols,
            field: self.field,
            data,
        }
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hstack row count");
        let mut m = Self::zeros(self.field, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vstack column count");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        ExactMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            field: self.field,
            data,
        }
    }

    /// Reduced row echelon form and the pivot columns.
    ///
    /// Pivots are taken left to right; within a column the first row at or
    /// below the current position holding a nonzero entry is chosen.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let pj = m.get(r, j);
                    if pj.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j) - &(&f * pj);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, one column per free variable.
    ///
    /// Each vector is supported on pivot columns plus a single free column,
    /// then rescaled so that its first nonzero entry is 1.
    pub fn kernel_basis(&self) -> ExactMatrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Self::zeros(self.field, self.cols, free.len());
        for (jj, &f) in free.iter().enumerate() {
            k.set(f, jj, self.field.one());
            for (pi, &pc) in pivots.iter().enumerate() {
                k.set(pc, jj, -r.get(pi, f));
            }
        }
        k.normalize_kernel_columns();
        k
    }

    /// Rescales each column so its first nonzero entry is 1.
    fn normalize_kernel_columns(&mut self) {
        for j in 0..self.cols {
            if let Some(i) = (0..self.rows).find(|&i| !self.get(i, j).is_zero()) {
                let inv = self.get(i, j).inv().unwrap();
                if inv.is_one() {
                    continue;
                }
                for r in 0..self.rows {
                    let v = self.get(r, j) * &inv;
                    self.set(r, j, v);
                }
            }
        }
    }

    /// Left kernel: row vectors `y` with `y · self = 0`, returned as rows.
    pub fn left_kernel_rows(&self) -> ExactMatrix {
        self.transpose().kernel_basis().transpose()
    }

    pub fn det(&self) -> Result<FieldElement, ExactError> {
        if self.rows != self.cols {
            return Err(ExactError::NotSquare(self.rows, self.cols));
        }
        let mut m = self.clone();
        let mut det = self.field.one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                return Ok(self.field.zero());
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let pivot = m.get(c, c).clone();
            det = &det * &pivot;
            let inv = pivot.inv().unwrap();
            for i in c + 1..m.rows {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) * &inv;
                for j in c..m.cols {
                    let v = m.get(i, j) - &(&f * m.get(c, j));
                    m.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<ExactMatrix, ExactError> {
        if self.rows != self.cols {
            return Err(ExactError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(self.field, n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(ExactError::Singular);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Ok(r.select_columns(&cols))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// String rows for JSON export.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect()
    }

    pub fn from_string_rows(field: Field, cols: usize, rows: &[Vec<String>]) -> Result<Self, ExactError> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| field.parse_scalar(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(field, cols, parsed)
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: Field = Field::Prime(1_000_003);

    #[test]
    fn kernel_of_single_row() {
        let m = ExactMatrix::from_i64_rows(Field::Rational, &[vec![1, -1]]);
        let k = m.kernel_basis();
        assert_eq!(k, ExactMatrix::from_i64_rows(Field::Rational, &[vec![1], vec![1]]));
    }

    #[test]
    fn rank_and_det() {
        let m = ExactMatrix::from_i64_rows(Field::Rational, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.rank(), 1);
        assert!(m.det().unwrap().is_zero());
        let m = ExactMatrix::from_i64_rows(Field::Rational, &[vec![0, 1], vec![1, 0]]);
        assert_eq!(m.det().unwrap(), Field::Rational.from_i64(-1));
        assert_eq!(m.inverse().unwrap(), m);
    }

    #[test]
    fn inverse_of_singular_fails() {
        let m = ExactMatrix::from_i64_rows(P, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.inverse(), Err(ExactError::Singular));
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-3i64..=3, c), r)
        })
    }

    proptest! {
        #[test]
        fn rank_is_transpose_invariant(rows in small_matrix()) {
            let m = ExactMatrix::from_i64_rows(Field::Rational, &rows);
            prop_assert_eq!(m.rank(), m.transpose().rank());
            let mp = ExactMatrix::from_i64_rows(P, &rows);
            prop_assert_eq!(mp.rank(), mp.transpose().rank());
        }

        #[test]
        fn kernel_residual_vanishes(rows in small_matrix()) {
            for field in [Field::Rational, P, Field::Prime(2)] {
                let m = ExactMatrix::from_i64_rows(field, &rows);
                let k = m.kernel_basis();
                prop_assert_eq!(k.cols() + m.rank(), m.cols());
                prop_assert!(m.mul(&k).unwrap().is_zero());
                prop_assert_eq!(k.rank(), k.cols());
            }
        }

        #[test]
        fn inverse_round_trip(rows in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 4), 4)) {
            let m = ExactMatrix::from_i64_rows(Field::Rational, &rows);
            match m.inverse() {
                Ok(inv) => prop_assert_eq!(m.mul(&inv).unwrap(), ExactMatrix::identity(Field::Rational, 4)),
                Err(_) => prop_assert!(m.det().unwrap().is_zero()),
            }
        }
    }
}
