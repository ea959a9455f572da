//! Ultrametric Taylor bounds on balls and exact sup norms.
//!
//! Expanding `g(c + h) = g(c) + Q(h)`, every term of `Q` is bounded on the
//! ball of radius `q^{-r}` by `|coef|·q^{-r|β|}`; call the maximum `L`. If
//! `L < |g(c)|` then `|g| ≡ |g(c)|` on the ball, otherwise `|g| ≤ L` there.

use crate::ffield::{AbsValue, Ball, CellDecision, Laurent, QExp};
use crate::Result;

use super::multipoly::MultiPoly;

/// Range of `|g|` over a ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AbsRange {
    pub lo: AbsValue,
    pub hi: AbsValue,
}

impl AbsRange {
    pub fn exact(v: AbsValue) -> Self {
        AbsRange { lo: v, hi: v }
    }
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
    /// Range of `max(|g₁|, |g₂|)`.
    pub fn max(self, o: AbsRange) -> AbsRange {
        AbsRange { lo: self.lo.max(o.lo), hi: self.hi.max(o.hi) }
    }
    /// Range of `|g₁ g₂|`.
    pub fn mul(self, o: AbsRange) -> AbsRange {
        AbsRange { lo: self.lo.mul(o.lo), hi: self.hi.mul(o.hi) }
    }
    pub fn shift(self, k: i64) -> AbsRange {
        AbsRange { lo: self.lo.shift(k), hi: self.hi.shift(k) }
    }
    /// Decide `|g| < q^e` on the whole ball.
    pub fn below(&self, e: QExp) -> CellDecision {
        if self.hi.lt_qpow(e) {
            CellDecision::In
        } else if !self.lo.lt_qpow(e) {
            CellDecision::Out
        } else {
            CellDecision::Undecided
        }
    }
    /// Decide `|g| ≤ q^e` (integer e).
    pub fn at_most(&self, e: i64) -> CellDecision {
        self.below(QExp::from_integer(e + 1))
    }
}

/// A polynomial expanded at the center of a ball.
#[derive(Clone, Debug)]
pub struct Taylor {
    center: Vec<Laurent>,
    poly: MultiPoly,
}

impl Taylor {
    pub fn new(g: &MultiPoly, center: &[Laurent]) -> Result<Self> {
        Ok(Taylor { center: center.to_vec(), poly: g.recenter(center)? })
    }
    pub fn center(&self) -> &[Laurent] {
        &self.center
    }
    pub fn poly(&self) -> &MultiPoly {
        &self.poly
    }
    pub fn value(&self) -> Laurent {
        self.poly.constant_term()
    }
    pub fn variation(&self, radius_exp: i64) -> AbsValue {
        self.poly.variation_bound(radius_exp)
    }
    pub fn range(&self, radius_exp: i64) -> AbsRange {
        let v = self.value().abs();
        let l = self.variation(radius_exp);
        if l < v {
            AbsRange::exact(v)
        } else {
            AbsRange { lo: AbsValue::Zero, hi: l }
        }
    }
    /// Re-expand at a new center.
    pub fn moved_to(&self, center: &[Laurent]) -> Result<Taylor> {
        let delta: Vec<Laurent> = center.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        Ok(Taylor { center: center.to_vec(), poly: self.poly.recenter(&delta)? })
    }
}

/// Exact bounds on `sup_B |g|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SupBounds {
    pub lower: AbsValue,
    pub upper: AbsValue,
}

impl SupBounds {
    pub fn exact(&self) -> Option<AbsValue> {
        (self.lower == self.upper).then_some(self.lower)
    }
}

/// Branch and bound: refine cells whose coefficient bound exceeds the best
/// value seen at a center, down to radius exponent `max_depth`.
pub fn sup_norm_bounds(g: &MultiPoly, ball: &Ball, max_depth: i64) -> Result<SupBounds> {
    let root = Taylor::new(g, ball.center())?;
    let mut lower = root.value().abs();
    let mut unresolved = AbsValue::Zero;
    let mut stack = vec![(ball.clone(), root)];
    while let Some((b, t)) = stack.pop() {
        let ub = t.poly().coeff_bound(b.radius_exp());
        lower = lower.max(t.value().abs());
        if ub <= lower {
            continue;
        }
        if b.radius_exp() >= max_depth {
            unresolved = unresolved.max(ub);
            continue;
        }
        for child in b.children() {
            let tc = t.moved_to(child.center())?;
            stack.push((child, tc));
        }
    }
    Ok(SupBounds { lower, upper: lower.max(unresolved) })
}

/// `sup_{x∈B} |g(x)|`. The coefficient bound can overshoot because the
/// residue field is finite; refinement continues until the bound is attained
/// at some cell center.
pub fn sup_norm_on_ball(g: &MultiPoly, ball: &Ball) -> Result<AbsValue> {
    let mut depth = ball.radius_exp() + 8;
    loop {
        let b = sup_norm_bounds(g, ball, depth)?;
        if let Some(v) = b.exact() {
            return Ok(v);
        }
        depth += 8;
        if depth > ball.radius_exp() + 64 {
            return Ok(b.upper);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::FieldSpec;
    use std::sync::Arc;

    fn f(q: u32) -> Arc<FieldSpec> {
        FieldSpec::with_order(q).unwrap()
    }

    /// Oracle: max of |g| over all cell centers at a fine resolution.
    fn grid_max(g: &MultiPoly, ball: &Ball, n: i64) -> AbsValue {
        let grid = crate::ffield::GridSpec::new(ball.clone(), n).unwrap();
        crate::ffield::enumerate_cells(&grid).map(|c| g.eval(c.center()).unwrap().abs()).max().unwrap()
    }

    #[test]
    fn sup_examples() {
        let f3 = f(3);
        let unit = Ball::centered(&f3, 1, 0);
        let x = MultiPoly::parse(&f3, 1, "x").unwrap();
        assert_eq!(sup_norm_on_ball(&x, &unit).unwrap(), AbsValue::Pow(0));
        let x2 = MultiPoly::parse(&f3, 1, "x^2").unwrap();
        assert_eq!(sup_norm_on_ball(&x2, &Ball::centered(&f3, 1, 1)).unwrap(), AbsValue::Pow(-2));
    }

    #[test]
    fn sup_of_artin_schreier_polynomial_f2() {
        // x² + x vanishes on F_2, and |x² + x| = |x − x₀| for x near x₀ ∈ F_2,
        // so the sup over 𝒪 is q⁻¹ even though the coefficient bound is 1.
        let f2 = f(2);
        let g = MultiPoly::parse(&f2, 1, "x^2 + x").unwrap();
        let unit = Ball::centered(&f2, 1, 0);
        assert_eq!(g.coeff_bound(0), AbsValue::Pow(0));
        let s = sup_norm_on_ball(&g, &unit).unwrap();
        assert_eq!(s, AbsValue::Pow(-1));
        assert_eq!(grid_max(&g, &unit, 6), s);
    }

    #[test]
    fn sup_matches_grid_oracle() {
        let f3 = f(3);
        for s in ["x^3 + 2*x", "(X)*x^2 + x + (X^-1)", "x1*x2 + x1^2 + 2*x2^2", "x1^3 + (X)*x1*x2^2"] {
            let nv = if s.contains("x2") { 2 } else { 1 };
            let g = MultiPoly::parse(&f3, nv, s).unwrap();
            for r in [0i64, 1] {
                let ball = Ball::centered(&f3, nv, r);
                let sup = sup_norm_on_ball(&g, &ball).unwrap();
                assert_eq!(sup, grid_max(&g, &ball, r + if nv == 1 { 6 } else { 3 }), "{s} r={r}");
            }
        }
    }

    #[test]
    fn range_is_sound() {
        let f3 = f(3);
        let g = MultiPoly::parse(&f3, 1, "x^2 + (X^-2)").unwrap();
        let ball = Ball::centered(&f3, 1, 1);
        let t = Taylor::new(&g, ball.center()).unwrap();
        let r = t.range(1);
        for c in ball.children().iter().flat_map(|b| b.children()) {
            let v = g.eval(c.center()).unwrap().abs();
            assert!(r.lo <= v && v <= r.hi);
        }
    }
}
