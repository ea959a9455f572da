//! Primitive submodules of Γ ≅ Λ^{n+1}, enumerated through their Hermite
//! normal forms.

use std::sync::Arc;

use crate::ffield::{FieldSpec, Laurent, Poly};
use crate::Result;

/// A submodule given by its Hermite normal form: rows in echelon form with
/// monic pivots, entries above each pivot reduced modulo it. Row vectors are
/// in Γ coordinates `(ã₀, ã₁, …, ãₙ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveSubmodule {
    pub rows: Vec<Vec<Poly>>,
}

impl PrimitiveSubmodule {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
    /// Basis vectors in F^m, m = n + d + 1, with zeros in the starred slots.
    pub fn embedded(&self, d: usize) -> Vec<Vec<Laurent>> {
        self.rows
            .iter()
            .map(|r| {
                let spec = r[0].spec();
                let mut v = vec![r[0].to_laurent()];
                v.extend(std::iter::repeat_with(|| Laurent::zero(spec)).take(d));
                v.extend(r[1..].iter().map(|p| p.to_laurent()));
                v
            })
            .collect()
    }
}

/// Determinant over F_q[X] by cofactor expansion (k is small here).
pub fn poly_det(m: &[Vec<Poly>]) -> Result<Poly> {
    let k = m.len();
    if k == 1 {
        return Ok(m[0][0].clone());
    }
    let spec = m[0][0].spec().clone();
    let mut acc = Poly::zero(&spec);
    for j in 0..k {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> =
            m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, p)| p.clone()).collect()).collect();
        let t = m[0][j].checked_mul(&poly_det(&minor)?)?;
        acc = if j % 2 == 0 { acc.checked_add(&t)? } else { acc.checked_sub(&t)? };
    }
    Ok(acc)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Content of the module: monic gcd of the maximal minors.
pub fn minor_content(rows: &[Vec<Poly>]) -> Result<Poly> {
    let spec = rows[0][0].spec().clone();
    let k = rows.len();
    let mut g = Poly::zero(&spec);
    for cols in combinations(rows[0].len(), k) {
        let sub: Vec<Vec<Poly>> = rows.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
        g = g.gcd(&poly_det(&sub)?)?;
        if g.is_unit() {
            break;
        }
    }
    Ok(g)
}

/// `M = FM ∩ Λ^{n+1}`, i.e. the maximal minors have unit gcd.
pub fn is_primitive(rows: &[Vec<Poly>]) -> Result<bool> {
    Ok(minor_content(rows)?.is_unit())
}

/// All polynomials of degree ≤ h (h < 0 gives only zero).
fn polys_up_to(spec: &Arc<FieldSpec>, h: i64) -> Vec<Poly> {
    if h < 0 {
        return vec![Poly::zero(spec)];
    }
    let len = (h + 1) as usize;
    let count = (spec.q() as u64).pow(len as u32);
    (0..count).map(|c| Poly::from_code(spec, c, len)).collect()
}

fn monic_up_to(spec: &Arc<FieldSpec>, h: i64) -> Vec<Poly> {
    let mut out = Vec::new();
    for e in 0..=h.max(0) as usize {
        for low in polys_up_to(spec, e as i64 - 1) {
            out.push(low.checked_add(&Poly::monomial(spec, 1, e)).expect("same field"));
        }
    }
    out
}

/// Every primitive submodule of Λ^{n+1} of rank ≤ `max_rank` whose Hermite
/// normal form has entries of degree ≤ `height`, each exactly once.
pub fn primitive_submodules(
    spec: &Arc<FieldSpec>,
    n: usize,
    max_rank: usize,
    height: i64,
) -> Result<Vec<PrimitiveSubmodule>> {
    let width = n + 1;
    let free = polys_up_to(spec, height);
    let monic = monic_up_to(spec, height);
    let mut out = Vec::new();
    for k in 1..=max_rank.min(width) {
        for pivots in combinations(width, k) {
            let mut forms: Vec<Vec<Vec<Poly>>> = vec![vec![]];
            for &p in &pivots {
                let rows = rows_with_pivot(spec, width, p, &monic, &free);
                forms = forms
                    .into_iter()
                    .flat_map(|f| {
                        rows.iter().map(move |r| {
                            let mut g = f.clone();
                            g.push(r.clone());
                            g
                        })
                    })
                    .filter(|f| is_reduced(f, &pivots))
                    .collect();
            }
            for rows in forms {
                if is_primitive(&rows)? {
                    out.push(PrimitiveSubmodule { rows });
                }
            }
        }
    }
    Ok(out)
}

/// Rows `(0, …, 0, pivot, *, …, *)` with a monic pivot in column `p`.
fn rows_with_pivot(spec: &Arc<FieldSpec>, width: usize, p: usize, monic: &[Poly], free: &[Poly]) -> Vec<Vec<Poly>> {
    let mut rows: Vec<Vec<Poly>> = monic
        .iter()
        .map(|m| {
            let mut r = vec![Poly::zero(spec); width];
            r[p] = m.clone();
            r
        })
        .collect();
    for c in p + 1..width {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                free.iter().map(move |v| {
                    let mut r2 = r.clone();
                    r2[c] = v.clone();
                    r2
                })
            })
            .collect();
    }
    rows
}

/// Entries above each pivot have smaller degree than the pivot.
fn is_reduced(rows: &[Vec<Poly>], pivots: &[usize]) -> bool {
    for (i, &p) in pivots.iter().enumerate().take(rows.len()) {
        let pd = rows[i][p].degree().unwrap_or(0);
        for r in &rows[..i] {
            if r[p].degree().is_some_and(|d| d >= pd) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_height_zero() {
        for q in [2u32, 3, 5] {
            let f = FieldSpec::with_order(q).unwrap();
            let subs = primitive_submodules(&f, 1, 1, 0).unwrap();
            assert_eq!(subs.len(), q as usize + 1);
        }
    }

    #[test]
    fn full_module_is_unique() {
        let f = FieldSpec::with_order(2).unwrap();
        for h in 0..3 {
            let top: Vec<_> = primitive_submodules(&f, 1, 2, h).unwrap().into_iter().filter(|s| s.rank() == 2).collect();
            assert_eq!(top.len(), 1);
            assert!(top[0].rows[0][0].is_unit() && top[0].rows[1][1].is_unit() && top[0].rows[0][1].is_zero());
        }
    }

    #[test]
    fn content_detects_imprimitive() {
        let f = FieldSpec::with_order(3).unwrap();
        let x = Poly::monomial(&f, 1, 1);
        assert!(!is_primitive(&[vec![x.clone(), Poly::zero(&f)]]).unwrap());
        assert!(is_primitive(&[vec![x, Poly::constant(&f, 1)]]).unwrap());
    }

    #[test]
    fn rank_one_count_matches_projective_count() {
        // Rank-1 primitive modules ↔ primitive vectors up to units; brute force
        // over all vectors with entries of degree ≤ 1 and normalize.
        let f = FieldSpec::with_order(2).unwrap();
        let subs = primitive_submodules(&f, 1, 1, 1).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for a in 0..4u64 {
            for b in 0..4u64 {
                let (pa, pb) = (Poly::from_code(&f, a, 2), Poly::from_code(&f, b, 2));
                if pa.is_zero() && pb.is_zero() || !pa.gcd(&pb).unwrap().is_unit() {
                    continue;
                }
                seen.insert((a, b));
            }
        }
        assert_eq!(subs.len(), seen.len());
    }
}
