//! Dense matrices over F = F_q((X⁻¹)).

use std::fmt;
use std::sync::Arc;

use crate::ffield::{AbsValue, FieldSpec, Laurent};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentMatrix {
    spec: Arc<FieldSpec>,
    rows: usize,
    cols: usize,
    data: Vec<Laurent>,
}

impl LaurentMatrix {
    pub fn zeros(spec: &Arc<FieldSpec>, rows: usize, cols: usize) -> Self {
        LaurentMatrix { spec: spec.clone(), rows, cols, data: vec![Laurent::zero(spec); rows * cols] }
    }

    pub fn identity(spec: &Arc<FieldSpec>, n: usize) -> Self {
        let mut m = Self::zeros(spec, n, n);
        for i in 0..n {
            m.set(i, i, Laurent::one(spec));
        }
        m
    }

    pub fn diag(spec: &Arc<FieldSpec>, entries: &[Laurent]) -> Self {
        let mut m = Self::zeros(spec, entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    pub fn from_rows(spec: &Arc<FieldSpec>, rows: Vec<Vec<Laurent>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let n = rows.len();
        Ok(LaurentMatrix { spec: spec.clone(), rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_columns(spec: &Arc<FieldSpec>, cols: &[Vec<Laurent>]) -> Result<Self> {
        let rows = cols.first().map_or(0, |c| c.len());
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of different lengths".into()));
        }
        let mut m = Self::zeros(spec, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, e) in c.iter().enumerate() {
                m.set(i, j, e.clone());
            }
        }
        Ok(m)
    }

    /// Rows of Laurent strings in the `body` syntax, e.g. `[["X", "1"], ["0", "X^-1"]]`.
    pub fn parse_rows(spec: &Arc<FieldSpec>, rows: &[Vec<String>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| Laurent::parse_body(spec, s.trim())).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::from_rows(spec, parsed)
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).body_string()).collect()).collect()
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }
    pub fn nrows(&self) -> usize {
        self.rows
    }
    pub fn ncols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> &Laurent {
        &self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: Laurent) {
        self.data[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> Vec<Laurent> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }
    pub fn column(&self, j: usize) -> Vec<Laurent> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }
    pub fn columns(&self) -> Vec<Vec<Laurent>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Sup norm of the entries.
    pub fn norm(&self) -> AbsValue {
        self.data.iter().map(|e| e.abs()).max().unwrap_or(AbsValue::Zero)
    }

    pub fn mul(&self, o: &LaurentMatrix) -> Result<LaurentMatrix> {
        if self.cols != o.rows {
            return Err(Error::Dimension(format!("{}x{} times {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        let mut out = Self::zeros(&self.spec, self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Laurent::zero(&self.spec);
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.checked_add(&a.checked_mul(b)?)?;
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Laurent]) -> Result<Vec<Laurent>> {
        if v.len() != self.cols {
            return Err(Error::Dimension("vector length differs from column count".into()));
        }
        let col = LaurentMatrix::from_columns(&self.spec, &[v.to_vec()])?;
        Ok(self.mul(&col)?.column(0))
    }

    pub fn transpose(&self) -> LaurentMatrix {
        let mut t = Self::zeros(&self.spec, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Submatrix on the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> LaurentMatrix {
        let mut s = Self::zeros(&self.spec, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                s.set(a, b, self.get(i, j).clone());
            }
        }
        s
    }

    /// Determinant by fraction-free (Bareiss) elimination; every division
    /// is exact.
    pub fn det(&self) -> Result<Laurent> {
        if self.rows != self.cols {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Laurent::one(&self.spec));
        }
        let mut a: Vec<Vec<Laurent>> = (0..n).map(|i| self.row(i)).collect();
        let mut prev = Laurent::one(&self.spec);
        let mut negate = false;
        for k in 0..n - 1 {
            let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
                return Ok(Laurent::zero(&self.spec));
            };
            if p != k {
                a.swap(p, k);
                negate = !negate;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i][j].checked_mul(&a[k][k])?.checked_sub(&a[i][k].checked_mul(&a[k][j])?)?;
                    a[i][j] = num
                        .div_exact(&prev)?
                        .ok_or_else(|| Error::Invalid("inexact Bareiss division (non-exact entries?)".into()))?;
                }
                a[i][k] = Laurent::zero(&self.spec);
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        Ok(if negate { d.neg() } else { d })
    }

    /// `‖M⁻¹‖`, as the largest cofactor over `|det M|`.
    pub fn inverse_norm(&self) -> Result<AbsValue> {
        let det = self.det()?;
        let Some(de) = det.abs().exponent() else {
            return Err(Error::Invalid("singular matrix".into()));
        };
        let n = self.rows;
        let mut best = AbsValue::Zero;
        for i in 0..n {
            for j in 0..n {
                let rs: Vec<usize> = (0..n).filter(|&r| r != i).collect();
                let cs: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                best = best.max(self.select(&rs, &cs).det()?.abs());
            }
        }
        Ok(best.shift(-de))
    }
}

impl fmt::Display for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let r: Vec<String> = (0..self.cols).map(|j| self.get(i, j).body_string()).collect();
            writeln!(f, "[{}]", r.join(", "))?;
        }
        Ok(())
    }
}
