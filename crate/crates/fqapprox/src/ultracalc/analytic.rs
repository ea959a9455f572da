//! Polynomial maps `U ⊆ F^d → F^n` with an optional scalar shift θ, and the
//! normalization checks on them.

use std::sync::Arc;

use serde::Serialize;

use crate::ffield::{AbsValue, Ball, FieldSpec, Laurent};
use crate::{Error, Result};

use super::diffquot::multi_difference_poly;
use super::multipoly::{laurent_rank, MultiPoly};
use super::taylor::sup_norm_on_ball;

#[derive(Clone, Debug)]
pub struct AnalyticMap {
    spec: Arc<FieldSpec>,
    d: usize,
    components: Vec<MultiPoly>,
    theta: Option<MultiPoly>,
}

impl AnalyticMap {
    pub fn new(components: Vec<MultiPoly>, theta: Option<MultiPoly>) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::Dimension("map with no components".into()))?;
        let (spec, d) = (first.spec().clone(), first.nvars());
        for c in components.iter().chain(theta.iter()) {
            if c.nvars() != d {
                return Err(Error::Dimension("components live in different numbers of variables".into()));
            }
            if !crate::ffield::same_field(c.spec(), &spec) {
                return Err(crate::ffield::FieldError::SpecMismatch.into());
            }
        }
        Ok(AnalyticMap { spec, d, components, theta })
    }

    /// The Veronese curve `x ↦ (x, x², …, xⁿ)`.
    pub fn veronese(spec: &Arc<FieldSpec>, n: usize) -> Self {
        let comps = (1..=n)
            .map(|k| MultiPoly::monomial(spec, vec![k as u32], Laurent::one(spec)))
            .collect();
        AnalyticMap { spec: spec.clone(), d: 1, components: comps, theta: None }
    }

    pub fn with_theta(mut self, theta: Option<MultiPoly>) -> Result<Self> {
        if let Some(t) = &theta {
            if t.nvars() != self.d {
                return Err(Error::Dimension("θ in the wrong number of variables".into()));
            }
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn n(&self) -> usize {
        self.components.len()
    }
    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }
    pub fn theta(&self) -> Option<&MultiPoly> {
        self.theta.as_ref()
    }
    /// `f₁(x) = x₁`.
    pub fn is_normalized(&self) -> bool {
        self.components[0] == MultiPoly::var(&self.spec, self.d, 0)
    }

    pub fn eval(&self, x: &[Laurent]) -> Result<Vec<Laurent>> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }
    pub fn eval_theta(&self, x: &[Laurent]) -> Result<Laurent> {
        match &self.theta {
            Some(t) => t.eval(x),
            None => Ok(Laurent::zero(&self.spec)),
        }
    }
    /// `jac[i][j] = ∂_j f_i`.
    pub fn jacobian(&self) -> Vec<Vec<MultiPoly>> {
        self.components.iter().map(|c| c.gradient()).collect()
    }
}

pub fn eval_map(m: &AnalyticMap, x: &[Laurent]) -> Result<Vec<Laurent>> {
    m.eval(x)
}

/// Outcome of one bound check.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub name: String,
    /// Upper bound for the sup, exact when `exact` is set.
    pub bound: AbsValue,
    pub exact: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionsReport {
    /// `f₁ = x₁`.
    pub normalized: bool,
    /// `1, f₁, …, fₙ` linearly independent over F.
    pub independent: bool,
    pub checks: Vec<BoundCheck>,
}

impl ConditionsReport {
    pub fn violations(&self) -> Vec<String> {
        let mut v: Vec<String> = self.checks.iter().filter(|c| !c.holds).map(|c| c.name.clone()).collect();
        if !self.independent {
            v.insert(0, "1, f_1, ..., f_n linearly dependent".into());
        }
        v
    }
    /// Every bound and independence hold (normalization is reported separately).
    pub fn all_pass(&self) -> bool {
        self.independent && self.checks.iter().all(|c| c.holds)
    }
}

fn bound_check(name: String, g: &MultiPoly, ball: &Ball) -> Result<BoundCheck> {
    let centered = g.recenter(ball.center())?;
    let bound = centered.coeff_bound(ball.radius_exp());
    if bound <= AbsValue::ONE {
        return Ok(BoundCheck { name, bound, exact: false, holds: true });
    }
    let sup = sup_norm_on_ball(g, ball)?;
    Ok(BoundCheck { name, bound: sup, exact: true, holds: sup <= AbsValue::ONE })
}

/// All multi-indices with `|β| = 2` in d variables.
fn second_order(d: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i..d {
            let mut b = vec![0; d];
            b[i] += 1;
            b[j] += 1;
            out.push(b);
        }
    }
    out
}

/// Ball for the variables of [`multi_difference_poly`]: axis j's block is
/// repeated `β_j + 1` times.
fn difference_domain(ball: &Ball, beta: &[u32]) -> Result<Ball> {
    let mut c = Vec::new();
    for (j, &b) in beta.iter().enumerate() {
        for _ in 0..=b {
            c.push(ball.center()[j].clone());
        }
    }
    Ok(Ball::new(c, ball.radius_exp())?)
}

fn scalar_checks(label: &str, g: &MultiPoly, ball: &Ball, out: &mut Vec<BoundCheck>) -> Result<()> {
    out.push(bound_check(format!("|{label}| <= 1"), g, ball)?);
    for (j, dg) in g.gradient().iter().enumerate() {
        out.push(bound_check(format!("|d{} {label}| <= 1", j + 1), dg, ball)?);
    }
    for beta in second_order(g.nvars()) {
        let sym = multi_difference_poly(g, &beta)?;
        let dom = difference_domain(ball, &beta)?;
        out.push(bound_check(format!("|Phi_{beta:?} {label}| <= 1"), &sym, &dom)?);
    }
    Ok(())
}

/// Certify `‖f‖ ≤ 1`, `‖∇f‖ ≤ 1`, second-difference bounds `≤ 1` and the same
/// for θ on `domain`, and test linear independence of `1, f₁, …, fₙ`.
pub fn check_conditions(m: &AnalyticMap, domain: &Ball) -> Result<ConditionsReport> {
    if domain.dim() != m.d() {
        return Err(Error::Dimension("domain dimension differs from the map".into()));
    }
    let mut checks = Vec::new();
    for (i, c) in m.components().iter().enumerate() {
        scalar_checks(&format!("f{}", i + 1), c, domain, &mut checks)?;
    }
    if let Some(t) = m.theta() {
        scalar_checks("theta", t, domain, &mut checks)?;
    }
    // Coefficient matrix of (1, f_1, ..., f_n) over all monomials.
    let mut monos: Vec<Vec<u32>> = m.components().iter().flat_map(|c| c.terms().map(|(e, _)| e.clone())).collect();
    monos.push(vec![0; m.d()]);
    monos.sort();
    monos.dedup();
    let one = MultiPoly::constant(m.spec(), m.d(), Laurent::one(m.spec()));
    let rows: Vec<Vec<Laurent>> = std::iter::once(&one)
        .chain(m.components())
        .map(|p| monos.iter().map(|e| p.coeff(e)).collect())
        .collect();
    let independent = laurent_rank(rows) == m.n() + 1;
    Ok(ConditionsReport { normalized: m.is_normalized(), independent, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> Arc<FieldSpec> {
        FieldSpec::with_order(q).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f3 = f(3);
        let v = AnalyticMap::veronese(&f3, 2);
        let x = Laurent::x_pow(&f3, -1);
        assert_eq!(v.eval(std::slice::from_ref(&x)).unwrap(), vec![x.clone(), Laurent::x_pow(&f3, -2)]);
        let z = AnalyticMap::new(vec![MultiPoly::zero(&f3, 1); 2], None).unwrap();
        assert!(z.eval(std::slice::from_ref(&x)).unwrap().iter().all(|c| c.is_zero()));
        let m = AnalyticMap::new(
            vec![MultiPoly::parse(&f3, 2, "x1").unwrap(), MultiPoly::parse(&f3, 2, "x1*x2").unwrap()],
            None,
        )
        .unwrap();
        assert_eq!(m.eval(&[x.clone(), x.clone()]).unwrap(), vec![x, Laurent::x_pow(&f3, -2)]);
    }

    #[test]
    fn veronese_passes() {
        let f3 = f(3);
        let r = check_conditions(&AnalyticMap::veronese(&f3, 2), &Ball::centered(&f3, 1, 1)).unwrap();
        assert!(r.all_pass(), "{:?}", r.violations());
        assert!(r.normalized);
    }

    #[test]
    fn scaled_square_fails_second_difference() {
        let f3 = f(3);
        let m = AnalyticMap::new(
            vec![MultiPoly::parse(&f3, 1, "x").unwrap(), MultiPoly::parse(&f3, 1, "(X)*x^2").unwrap()],
            None,
        )
        .unwrap();
        let r = check_conditions(&m, &Ball::centered(&f3, 1, 1)).unwrap();
        let by_name = |n: &str| r.checks.iter().find(|c| c.name == n).unwrap().clone();
        assert!(by_name("|f2| <= 1").holds);
        // |2X x| ≤ q·q⁻¹ = 1 on X⁻¹𝒪.
        assert!(by_name("|d1 f2| <= 1").holds);
        let second = by_name("|Phi_[2] f2| <= 1");
        assert!(!second.holds);
        assert_eq!(second.bound, AbsValue::Pow(1));
        assert_eq!(r.violations(), vec!["|Phi_[2] f2| <= 1".to_string()]);
    }

    #[test]
    fn constant_map_is_dependent() {
        let f3 = f(3);
        let m = AnalyticMap::new(vec![MultiPoly::parse(&f3, 1, "2").unwrap()], None).unwrap();
        let r = check_conditions(&m, &Ball::centered(&f3, 1, 1)).unwrap();
        assert!(!r.independent);
        assert!(!r.all_pass());
    }

    #[test]
    fn theta_is_checked() {
        let f3 = f(3);
        let m = AnalyticMap::veronese(&f3, 2).with_theta(Some(MultiPoly::parse(&f3, 1, "(X^2)*x").unwrap())).unwrap();
        let r = check_conditions(&m, &Ball::centered(&f3, 1, 1)).unwrap();
        assert!(r.violations().iter().any(|v| v.contains("theta")));
    }
}
