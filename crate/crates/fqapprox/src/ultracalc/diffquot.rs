//! Difference quotients, skew gradients and rescaling.
//!
//! For a monomial, `Φᵏ(x^m)(x_1, …, x_{k+1}) = h_{m−k}(x_1, …, x_{k+1})`,
//! the complete homogeneous symmetric polynomial (zero when `m < k`). This
//! closed form is the extension `Φ̄ᵏ` to coincident arguments, and along
//! several axes `Φ_β(x^α)` factors as a product over axes.

use std::sync::Arc;

use crate::ffield::{FieldSpec, Laurent};
use crate::{Error, Result};

use super::multipoly::{MultiIndex, MultiPoly};

/// `h_m(x_1, …, x_n)` by the recurrence `h_m(x..x_n) = h_m(x..x_{n−1}) + x_n h_{m−1}(x..x_n)`.
pub fn complete_homogeneous(spec: &Arc<FieldSpec>, m: u32, pts: &[Laurent]) -> Laurent {
    let m = m as usize;
    let mut h = vec![Laurent::zero(spec); m + 1];
    h[0] = Laurent::one(spec);
    for x in pts {
        for k in 1..=m {
            let add = x * &h[k - 1];
            h[k] = &h[k] + &add;
        }
    }
    h[m].clone()
}

fn ensure_distinct(pts: &[Laurent]) -> Result<()> {
    for (i, a) in pts.iter().enumerate() {
        if pts[i + 1..].iter().any(|b| b == a) {
            return Err(Error::CoincidentPoints);
        }
    }
    Ok(())
}

/// `Φ̄ᵏ` along `axis`: the result no longer depends on that variable.
pub fn difference_quotient_bar(g: &MultiPoly, k: u32, axis: usize, points: &[Laurent]) -> Result<MultiPoly> {
    if axis >= g.nvars() {
        return Err(Error::Dimension(format!("axis {axis} in {} variables", g.nvars())));
    }
    if points.len() != k as usize + 1 {
        return Err(Error::Dimension(format!("order {k} needs {} points, got {}", k + 1, points.len())));
    }
    let spec = g.spec();
    let mut cache: Vec<Option<Laurent>> = vec![None; g.degree_in(axis).unwrap_or(0) as usize + 1];
    let mut terms = Vec::new();
    for (e, c) in g.terms() {
        if e[axis] < k {
            continue;
        }
        let m = e[axis] as usize;
        let h = cache[m].get_or_insert_with(|| complete_homogeneous(spec, e[axis] - k, points)).clone();
        let mut ne = e.clone();
        ne[axis] = 0;
        terms.push((ne, c * &h));
    }
    MultiPoly::from_terms(spec, g.nvars(), terms)
}

/// `Φᵏ` along `axis` at pairwise distinct points.
pub fn difference_quotient(g: &MultiPoly, k: u32, axis: usize, points: &[Laurent]) -> Result<MultiPoly> {
    ensure_distinct(points)?;
    difference_quotient_bar(g, k, axis, points)
}

/// `Φ̄_β g` with `points[j]` holding the `β_j + 1` arguments on axis j.
pub fn multi_difference_bar(g: &MultiPoly, beta: &[u32], points: &[Vec<Laurent>]) -> Result<Laurent> {
    if beta.len() != g.nvars() || points.len() != g.nvars() {
        return Err(Error::Dimension("multi-index or point tuples do not match the variables".into()));
    }
    for (j, p) in points.iter().enumerate() {
        if p.len() != beta[j] as usize + 1 {
            return Err(Error::Dimension(format!("axis {j} needs {} points", beta[j] + 1)));
        }
    }
    let spec = g.spec();
    let mut acc = Laurent::zero(spec);
    for (e, c) in g.terms() {
        if e.iter().zip(beta).any(|(a, b)| a < b) {
            continue;
        }
        let mut t = c.clone();
        for j in 0..g.nvars() {
            t = &t * &complete_homogeneous(spec, e[j] - beta[j], &points[j]);
        }
        acc = &acc + &t;
    }
    Ok(acc)
}

/// `Φ_β g` at per-axis pairwise distinct points.
pub fn multi_difference(g: &MultiPoly, beta: &[u32], points: &[Vec<Laurent>]) -> Result<Laurent> {
    for p in points {
        ensure_distinct(p)?;
    }
    multi_difference_bar(g, beta, points)
}

/// `Φ̄_β g` as a polynomial in `|β| + d` variables: axis j contributes the
/// block `y_{j,0}, …, y_{j,β_j}`, blocks in axis order.
pub fn multi_difference_poly(g: &MultiPoly, beta: &[u32]) -> Result<MultiPoly> {
    if beta.len() != g.nvars() {
        return Err(Error::Dimension("multi-index length".into()));
    }
    let spec = g.spec();
    let offsets: Vec<usize> = beta
        .iter()
        .scan(0usize, |s, &b| {
            let o = *s;
            *s += b as usize + 1;
            Some(o)
        })
        .collect();
    let total: usize = beta.iter().map(|&b| b as usize + 1).sum();
    let mut acc = MultiPoly::zero(spec, total);
    for (e, c) in g.terms() {
        if e.iter().zip(beta).any(|(a, b)| a < b) {
            continue;
        }
        let mut term = MultiPoly::constant(spec, total, c.clone());
        for j in 0..g.nvars() {
            let h = symbolic_h(spec, e[j] - beta[j], beta[j] as usize + 1, total, offsets[j]);
            term = &term * &h;
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

/// `h_m` in the `n` variables starting at `offset` of a `total`-variable ring.
fn symbolic_h(spec: &Arc<FieldSpec>, m: u32, n: usize, total: usize, offset: usize) -> MultiPoly {
    let mut terms = Vec::new();
    let mut e = vec![0u32; n];
    fn rec(i: usize, left: u32, e: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == e.len() {
            e[i] = left;
            out.push(e.clone());
            return;
        }
        for k in 0..=left {
            e[i] = k;
            rec(i + 1, left - k, e, out);
        }
    }
    let mut monos = Vec::new();
    rec(0, m, &mut e, &mut monos);
    for mono in monos {
        let mut full: MultiIndex = vec![0; total];
        full[offset..offset + n].copy_from_slice(&mono);
        terms.push((full, Laurent::one(spec)));
    }
    MultiPoly::from_terms(spec, total, terms).expect("shapes agree")
}

/// `∇̃(g₁, g₂) = g₁∇g₂ − g₂∇g₁`.
pub fn skew_gradient(g1: &MultiPoly, g2: &MultiPoly) -> Result<Vec<MultiPoly>> {
    if g1.nvars() != g2.nvars() {
        return Err(Error::Dimension("skew gradient of polynomials in different rings".into()));
    }
    (0..g1.nvars())
        .map(|j| g1.checked_mul(&g2.partial(j))?.checked_sub(&g2.checked_mul(&g1.partial(j))?))
        .collect()
}

/// `g(X^r x + x₁) / X^{rl}`; with `x₁ = 0` this is the scaling `P(⌊q^r⌋x)/⌊q^r⌋^l`.
pub fn rescale_recenter(g: &MultiPoly, r: i64, x1: &[Laurent], l: u32) -> Result<MultiPoly> {
    if let Some(d) = g.degree() {
        if d > l {
            return Err(Error::Invalid(format!("degree bound {l} below the degree {d}")));
        }
    }
    let s = Laurent::x_pow(g.spec(), r);
    Ok(g.substitute_affine(&s, x1)?.shift_coeffs(-r * l as i64))
}
