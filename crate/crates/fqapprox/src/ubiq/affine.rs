//! F_q-affine families of forms. The set of `(a₀, …, aₙ)` with bounded
//! degrees and `|Σ aᵢFᵢ + c| < q^{e}` is a coset of an F_q-subspace, since
//! the constraint is the vanishing of finitely many coefficients, each linear
//! in the digits of the aᵢ.

use std::sync::Arc;

use crate::ffield::{FieldError, FieldSpec, Laurent, Poly};
use crate::{Error, Result};

pub struct AffineForms {
    spec: Arc<FieldSpec>,
    heights: Vec<i64>,
    particular: Vec<u32>,
    basis: Vec<Vec<u32>>,
}

impl AffineForms {
    /// Solve `|Σ aᵢ Fᵢ + c| < q^{below}` with `deg aᵢ ≤ heights[i]` (`-1`
    /// forces `aᵢ = 0`). `None` when no tuple qualifies.
    pub fn solve(funcs: &[Laurent], shift: &Laurent, heights: &[i64], below: i64) -> Result<Option<Self>> {
        let spec = shift.spec().clone();
        if funcs.len() != heights.len() {
            return Err(Error::Dimension("one height per function".into()));
        }
        let mut vars = Vec::new();
        for (i, &h) in heights.iter().enumerate() {
            for j in 0..=h {
                vars.push((i, j));
            }
        }
        let top = funcs
            .iter()
            .zip(heights)
            .filter_map(|(f, &h)| f.top_degree().map(|t| t + h))
            .chain(shift.top_degree())
            .max();
        let mut rows: Vec<(Vec<u32>, u32)> = Vec::new();
        if let Some(top) = top {
            for k in (below..=top).rev() {
                let mut row = Vec::with_capacity(vars.len());
                for &(i, j) in &vars {
                    row.push(funcs[i].coeff(k - j).ok_or(FieldError::PrecisionExhausted)?);
                }
                let rhs = spec.neg(shift.coeff(k).ok_or(FieldError::PrecisionExhausted)?);
                rows.push((row, rhs));
            }
        }
        // Reduced row echelon form.
        let nv = vars.len();
        let mut pivots: Vec<usize> = Vec::new();
        let mut r = 0;
        for col in 0..nv {
            let Some(p) = (r..rows.len()).find(|&i| rows[i].0[col] != 0) else {
                continue;
            };
            rows.swap(r, p);
            let inv = spec.inv(rows[r].0[col])?;
            for v in rows[r].0.iter_mut() {
                *v = spec.mul(*v, inv);
            }
            rows[r].1 = spec.mul(rows[r].1, inv);
            let (pr, prhs) = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.0[col] != 0 {
                    let f = row.0[col];
                    for (a, b) in row.0.iter_mut().zip(&pr) {
                        *a = spec.sub(*a, spec.mul(f, *b));
                    }
                    row.1 = spec.sub(row.1, spec.mul(f, prhs));
                }
            }
            pivots.push(col);
            r += 1;
        }
        if rows[r..].iter().any(|row| row.1 != 0) {
            return Ok(None);
        }
        let mut particular = vec![0u32; nv];
        for (i, &c) in pivots.iter().enumerate() {
            particular[c] = rows[i].1;
        }
        let mut basis = Vec::new();
        for free in (0..nv).filter(|c| !pivots.contains(c)) {
            let mut v = vec![0u32; nv];
            v[free] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = spec.neg(rows[i].0[free]);
            }
            basis.push(v);
        }
        Ok(Some(AffineForms { spec, heights: heights.to_vec(), particular, basis }))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `q^dim`, saturating.
    pub fn size(&self) -> u128 {
        (self.spec.q() as u128).checked_pow(self.dim() as u32).unwrap_or(u128::MAX)
    }

    fn split(&self, digits: &[u32]) -> Vec<Poly> {
        let mut out = Vec::with_capacity(self.heights.len());
        let mut pos = 0;
        for &h in &self.heights {
            let len = (h + 1).max(0) as usize;
            out.push(Poly::new(&self.spec, digits[pos..pos + len].to_vec()));
            pos += len;
        }
        out
    }

    /// Every member, in counter order over the basis coefficients.
    pub fn iter(&self) -> impl Iterator<Item = Vec<Poly>> + '_ {
        let q = self.spec.q() as u128;
        (0..self.size()).map(move |mut idx| {
            let mut v = self.particular.clone();
            for b in &self.basis {
                let c = (idx % q) as u32;
                idx /= q;
                if c != 0 {
                    for (x, y) in v.iter_mut().zip(b) {
                        *x = self.spec.add(*x, self.spec.mul(c, *y));
                    }
                }
            }
            self.split(&v)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dioph::{polys_up_to, tuples};

    #[test]
    fn matches_brute_force() {
        let f3 = FieldSpec::with_order(3).unwrap();
        let x = Laurent::from_terms(&f3, &[(-1, 1), (-2, 2), (-4, 1)]);
        let funcs = vec![Laurent::one(&f3), x.clone(), x.pow(2)];
        let shift = Laurent::from_terms(&f3, &[(-1, 2)]);
        let heights = [1i64, 1, 0];
        for below in [-4i64, -2, 0] {
            let sol = AffineForms::solve(&funcs, &shift, &heights, below).unwrap();
            let got: Vec<Vec<Poly>> = sol.map(|s| s.iter().collect()).unwrap_or_default();
            let choices: Vec<Vec<Poly>> = heights.iter().map(|&h| polys_up_to(&f3, h)).collect();
            let mut want = Vec::new();
            for a in tuples(&choices) {
                let mut z = shift.clone();
                for (ai, fi) in a.iter().zip(&funcs) {
                    z = z.checked_add(&ai.to_laurent().checked_mul(fi).unwrap()).unwrap();
                }
                if z.abs() < crate::ffield::AbsValue::Pow(below) {
                    want.push(a);
                }
            }
            assert_eq!(got.len(), want.len(), "below={below}");
            for a in &want {
                assert!(got.contains(a));
            }
        }
    }
}
