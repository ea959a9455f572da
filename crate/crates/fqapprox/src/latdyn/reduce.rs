//! Reduction of F_q[X]-lattices `MΛ^k ⊆ F^m` under the sup norm.
//!
//! A basis is reduced when the leading coefficient vectors of its columns
//! (taken at each column's top degree) are F_q-independent. For such a basis
//! `‖Σ c_j b_j‖ = max |c_j|‖b_j‖`, so the sorted column norms are the
//! successive minima.

use crate::ffield::{AbsValue, FieldError, Laurent};
use crate::{Error, Result};

use super::matrix::LaurentMatrix;

#[derive(Clone, Debug)]
pub struct ReducedLattice {
    /// Reduced basis, columns sorted by norm.
    pub basis: LaurentMatrix,
    /// `basis = M · transform`, with transform in GL_k(F_q[X]).
    pub transform: LaurentMatrix,
    /// Column norm exponents, nondecreasing: `λ_i = q^{minima[i]}`.
    pub minima: Vec<i64>,
    /// One line per leading-term cancellation.
    pub pivot_history: Vec<String>,
}

impl ReducedLattice {
    pub fn lambda1(&self) -> AbsValue {
        AbsValue::Pow(self.minima[0])
    }
    /// `log_q Π λ_i`.
    pub fn minima_sum(&self) -> i64 {
        self.minima.iter().sum()
    }
}

fn col_degree(c: &[Laurent]) -> Option<i64> {
    c.iter().filter_map(|e| e.top_degree()).max()
}

fn leading_vector(c: &[Laurent], deg: i64) -> Result<Vec<u32>> {
    c.iter().map(|e| e.coeff(deg).ok_or(Error::Field(FieldError::PrecisionExhausted))).collect()
}

/// Find `comb` with `comb[j0] = 1` and `Σ comb_i lc_i = 0`, where every i
/// involved has `deg_i ≤ deg_{j0}`.
fn find_dependency(
    spec: &crate::ffield::FieldSpec,
    lcs: &[Vec<u32>],
    degs: &[i64],
) -> Option<(usize, Vec<u32>)> {
    let k = lcs.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&j| (degs[j], j));
    // Echelon rows: (pivot position, vector, combination).
    let mut rows: Vec<(usize, Vec<u32>, Vec<u32>)> = Vec::new();
    for &j in &order {
        let mut v = lcs[j].clone();
        let mut comb = vec![0u32; k];
        comb[j] = 1;
        for (p, rv, rc) in &rows {
            if v[*p] != 0 {
                let f = spec.mul(v[*p], spec.inv(rv[*p]).expect("pivot is nonzero"));
                for (a, b) in v.iter_mut().zip(rv) {
                    *a = spec.sub(*a, spec.mul(f, *b));
                }
                for (a, b) in comb.iter_mut().zip(rc) {
                    *a = spec.sub(*a, spec.mul(f, *b));
                }
            }
        }
        match v.iter().position(|&c| c != 0) {
            Some(p) => rows.push((p, v, comb)),
            None => return Some((j, comb)),
        }
    }
    None
}

/// Reduce the columns of `m` by leading-term cancellation.
pub fn reduce_lattice(m: &LaurentMatrix) -> Result<ReducedLattice> {
    let spec = m.spec().clone();
    let k = m.ncols();
    if k == 0 || k > m.nrows() {
        return Err(Error::Dimension(format!("cannot reduce {} columns in dimension {}", k, m.nrows())));
    }
    let mut cols = m.columns();
    let mut trans = LaurentMatrix::identity(&spec, k).columns();
    let mut history = Vec::new();
    loop {
        let degs: Vec<i64> = cols
            .iter()
            .map(|c| col_degree(c).ok_or_else(|| Error::Invalid("columns are linearly dependent".into())))
            .collect::<Result<_>>()?;
        let lcs: Vec<Vec<u32>> = cols.iter().zip(&degs).map(|(c, &d)| leading_vector(c, d)).collect::<Result<_>>()?;
        let Some((j0, comb)) = find_dependency(&spec, &lcs, &degs) else {
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by_key(|&j| (degs[j], j));
            let basis = LaurentMatrix::from_columns(&spec, &order.iter().map(|&j| cols[j].clone()).collect::<Vec<_>>())?;
            let transform =
                LaurentMatrix::from_columns(&spec, &order.iter().map(|&j| trans[j].clone()).collect::<Vec<_>>())?;
            return Ok(ReducedLattice {
                basis,
                transform,
                minima: order.iter().map(|&j| degs[j]).collect(),
                pivot_history: history,
            });
        };
        let mut new_col = cols[j0].clone();
        let mut new_tr = trans[j0].clone();
        for (i, &c) in comb.iter().enumerate() {
            if i == j0 || c == 0 {
                continue;
            }
            let mult = Laurent::monomial(&spec, c, degs[j0] - degs[i]);
            for (a, b) in new_col.iter_mut().zip(&cols[i]) {
                *a = a.checked_add(&b.checked_mul(&mult)?)?;
            }
            for (a, b) in new_tr.iter_mut().zip(&trans[i]) {
                *a = a.checked_add(&b.checked_mul(&mult)?)?;
            }
        }
        let nd = col_degree(&new_col);
        history.push(format!(
            "column {j0}: degree {} -> {}",
            degs[j0],
            nd.map_or("zero".to_string(), |d| d.to_string())
        ));
        cols[j0] = new_col;
        trans[j0] = new_tr;
    }
}

/// The first `count` vectors of a reduced basis, realizing `λ₁, …, λ_count`.
pub fn short_vectors(m: &LaurentMatrix, count: usize) -> Result<Vec<Vec<Laurent>>> {
    let r = reduce_lattice(m)?;
    if count > r.basis.ncols() {
        return Err(Error::Dimension(format!("asked for {count} vectors of a rank-{} lattice", r.basis.ncols())));
    }
    Ok((0..count).map(|j| r.basis.column(j)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{FieldSpec, Poly};
    use std::sync::Arc;

    fn mat(f: &Arc<FieldSpec>, rows: &[&[&str]]) -> LaurentMatrix {
        let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        LaurentMatrix::parse_rows(f, &rows).unwrap()
    }

    /// Oracle: min over all nonzero coefficient vectors with entries of
    /// degree < `len` of `‖M c‖`.
    pub(crate) fn brute_lambda1(m: &LaurentMatrix, len: usize) -> AbsValue {
        let f = m.spec();
        let q = f.q() as u64;
        let k = m.ncols();
        let per = q.pow(len as u32);
        let mut best: Option<AbsValue> = None;
        for code in 1..per.pow(k as u32) {
            let mut c = code;
            let coeffs: Vec<Laurent> = (0..k)
                .map(|_| {
                    let p = Poly::from_code(f, c % per, len);
                    c /= per;
                    p.to_laurent()
                })
                .collect();
            let v = m.mul_vec(&coeffs).unwrap();
            let n = v.iter().map(|e| e.abs()).max().unwrap();
            best = Some(best.map_or(n, |b| b.min(n)));
        }
        best.unwrap()
    }

    #[test]
    fn identity_and_diag() {
        let f = FieldSpec::with_order(3).unwrap();
        let r = reduce_lattice(&LaurentMatrix::identity(&f, 2)).unwrap();
        assert_eq!(r.minima, vec![0, 0]);
        let d = mat(&f, &[&["X", "0"], &["0", "X^-1"]]);
        let r = reduce_lattice(&d).unwrap();
        assert_eq!(r.minima, vec![-1, 1]);
        assert_eq!(r.minima_sum(), 0);
        let sv = short_vectors(&d, 1).unwrap();
        assert!(sv[0][0].is_zero() && !sv[0][1].is_zero());
    }

    #[test]
    fn reduction_cancels_leading_terms() {
        let f = FieldSpec::with_order(2).unwrap();
        // Columns (X², X) and (X, 1): det 0 ⇒ dependent over F.
        assert!(reduce_lattice(&mat(&f, &[&["X^2", "X"], &["X", "1"]])).is_err());
        let m = mat(&f, &[&["X^2", "X"], &["X", "1 + X^-3"]]);
        let r = reduce_lattice(&m).unwrap();
        assert_eq!(r.minima_sum(), m.det().unwrap().abs().exponent().unwrap());
        assert!(!r.pivot_history.is_empty());
        assert_eq!(m.mul(&r.transform).unwrap(), r.basis);
        assert_eq!(r.transform.det().unwrap().abs(), AbsValue::ONE);
    }

    #[test]
    fn minkowski_body_matches_oracle() {
        // f = x at x = X⁻¹ + X⁻³, n = 1, t = 1, q = 2: the body
        // |a x + a₀| < q^{-2}, |a| ≤ q as a lattice diag(X², X⁻¹)·[[1, x], [0, 1]].
        let f = FieldSpec::with_order(2).unwrap();
        let m = mat(&f, &[&["X^2", "X + X^-1"], &["0", "X^-1"]]);
        let r = reduce_lattice(&m).unwrap();
        assert_eq!(r.lambda1(), brute_lambda1(&m, 4));
        assert_eq!(r.minima_sum(), 1);
    }
}
