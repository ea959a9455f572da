//! Linear forms `a·f(x) + θ(x)` at points and on balls, and a pruned cell
//! count over a family of such forms.

use crate::ffield::{count_cells, sweep, AbsValue, Ball, CellDecision, GridSpec, Laurent, Measure, QExp, SweepReport};
use crate::ultracalc::{AbsRange, AnalyticMap, MultiPoly};
use crate::Result;

/// When a form qualifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradCond {
    Any,
    /// `‖∇‖ < q^e`.
    Below(QExp),
    /// `‖∇‖ ≥ q^e`.
    AtLeast(QExp),
}

/// `dist(a·f(x) + θ(x), Λ) < q^value` together with a gradient condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormCond {
    pub value: QExp,
    pub grad: GradCond,
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub a: Vec<Laurent>,
    pub cond: FormCond,
}

/// `f`, `∇f`, θ and `∇θ` evaluated at one point.
pub struct PointData {
    f: Vec<Laurent>,
    jac: Vec<Vec<Laurent>>,
    theta: Laurent,
    dtheta: Vec<Laurent>,
}

impl PointData {
    pub fn new(m: &AnalyticMap, x: &[Laurent], theta_on: bool) -> Result<Self> {
        let spec = m.spec();
        let f = m.eval(x)?;
        let jac = m.jacobian().iter().map(|r| r.iter().map(|g| g.eval(x)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        let (theta, dtheta) = match m.theta().filter(|_| theta_on) {
            Some(t) => (t.eval(x)?, t.gradient().iter().map(|g| g.eval(x)).collect::<Result<Vec<_>>>()?),
            None => (Laurent::zero(spec), vec![Laurent::zero(spec); m.d()]),
        };
        Ok(PointData { f, jac, theta, dtheta })
    }

    /// `a·f(x) + θ(x)`.
    pub fn form(&self, a: &[Laurent]) -> Result<Laurent> {
        let mut z = self.theta.clone();
        for (ai, fi) in a.iter().zip(&self.f) {
            if !ai.is_zero() {
                z = z.checked_add(&ai.checked_mul(fi)?)?;
            }
        }
        Ok(z)
    }

    /// `‖∇(a·f + θ)(x)‖`.
    pub fn grad_norm(&self, a: &[Laurent]) -> Result<AbsValue> {
        let mut best = AbsValue::Zero;
        for (j, dt) in self.dtheta.iter().enumerate() {
            let mut g = dt.clone();
            for (ai, row) in a.iter().zip(&self.jac) {
                if !ai.is_zero() {
                    g = g.checked_add(&ai.checked_mul(&row[j])?)?;
                }
            }
            best = best.max(g.abs());
        }
        Ok(best)
    }

    pub fn satisfies(&self, c: &Candidate) -> Result<bool> {
        if !grad_ok(c.cond.grad, || self.grad_norm(&c.a))? {
            return Ok(false);
        }
        let (_, frac) = self.form(&c.a)?.poly_part()?;
        Ok(frac.abs().lt_qpow(c.cond.value))
    }
}

fn grad_ok(g: GradCond, norm: impl FnOnce() -> Result<AbsValue>) -> Result<bool> {
    Ok(match g {
        GradCond::Any => true,
        GradCond::Below(e) => norm()?.lt_qpow(e),
        GradCond::AtLeast(e) => !norm()?.lt_qpow(e),
    })
}

/// Taylor expansions of `f`, `∇f`, θ, `∇θ` at a ball center.
pub struct BallData {
    r: i64,
    f: Vec<MultiPoly>,
    jac: Vec<Vec<MultiPoly>>,
    theta: MultiPoly,
    dtheta: Vec<MultiPoly>,
}

impl BallData {
    pub fn new(m: &AnalyticMap, ball: &Ball, theta_on: bool) -> Result<Self> {
        let c = ball.center();
        let f = m.components().iter().map(|g| g.recenter(c)).collect::<Result<Vec<_>>>()?;
        let jac = m
            .jacobian()
            .iter()
            .map(|r| r.iter().map(|g| g.recenter(c)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let (theta, dtheta) = match m.theta().filter(|_| theta_on) {
            Some(t) => (t.recenter(c)?, t.gradient().iter().map(|g| g.recenter(c)).collect::<Result<Vec<_>>>()?),
            None => (MultiPoly::zero(m.spec(), m.d()), vec![MultiPoly::zero(m.spec(), m.d()); m.d()]),
        };
        Ok(BallData { r: ball.radius_exp(), f, jac, theta, dtheta })
    }

    fn combine(base: &MultiPoly, a: &[Laurent], parts: impl Iterator<Item = MultiPoly>) -> Result<MultiPoly> {
        let mut g = base.clone();
        for (ai, p) in a.iter().zip(parts) {
            if !ai.is_zero() {
                g = g.checked_add(&p.scale(ai))?;
            }
        }
        Ok(g)
    }

    fn range(&self, p: &MultiPoly) -> AbsRange {
        let v = p.constant_term().abs();
        let l = p.variation_bound(self.r);
        if l < v {
            AbsRange::exact(v)
        } else {
            AbsRange { lo: AbsValue::Zero, hi: l }
        }
    }

    fn grad_range(&self, a: &[Laurent]) -> Result<AbsRange> {
        let mut r = AbsRange::exact(AbsValue::Zero);
        for (j, dt) in self.dtheta.iter().enumerate() {
            let g = Self::combine(dt, a, self.jac.iter().map(|row| row[j].clone()))?;
            r = r.max(self.range(&g));
        }
        Ok(r)
    }

    /// Three-valued `dist(a·f + θ, Λ) < q^e` on the ball.
    fn frac_below(&self, a: &[Laurent], e: QExp) -> Result<CellDecision> {
        if e > QExp::from_integer(-1) {
            return Ok(CellDecision::In);
        }
        let g = Self::combine(&self.theta, a, self.f.iter().cloned())?;
        let l = g.variation_bound(self.r);
        if l >= AbsValue::ONE {
            return Ok(CellDecision::Undecided);
        }
        // Variation below 1 keeps the polynomial part fixed on the ball.
        let (_, frac) = g.constant_term().poly_part()?;
        let v = frac.abs();
        let r = if l < v { AbsRange::exact(v) } else { AbsRange { lo: AbsValue::Zero, hi: l } };
        Ok(r.below(e))
    }

    pub fn decide(&self, c: &Candidate) -> Result<CellDecision> {
        let g = match c.cond.grad {
            GradCond::Any => CellDecision::In,
            GradCond::Below(e) => self.grad_range(&c.a)?.below(e),
            GradCond::AtLeast(e) => not3(self.grad_range(&c.a)?.below(e)),
        };
        if g == CellDecision::Out {
            return Ok(CellDecision::Out);
        }
        Ok(and3(g, self.frac_below(&c.a, c.cond.value)?))
    }
}

pub fn not3(a: CellDecision) -> CellDecision {
    match a {
        CellDecision::In => CellDecision::Out,
        CellDecision::Out => CellDecision::In,
        CellDecision::Undecided => CellDecision::Undecided,
    }
}

pub fn and3(a: CellDecision, b: CellDecision) -> CellDecision {
    use CellDecision::*;
    match (a, b) {
        (Out, _) | (_, Out) => Out,
        (In, In) => In,
        _ => Undecided,
    }
}

/// Does any candidate qualify at the center of `ball`?
pub fn any_at_point(m: &AnalyticMap, x: &[Laurent], theta_on: bool, cands: &[Candidate]) -> Result<bool> {
    let pd = PointData::new(m, x, theta_on)?;
    for c in cands {
        if pd.satisfies(c)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn any_on_ball(m: &AnalyticMap, ball: &Ball, theta_on: bool, cands: &[Candidate]) -> Result<CellDecision> {
    let bd = BallData::new(m, ball, theta_on)?;
    let mut all_out = true;
    for c in cands {
        match bd.decide(c)? {
            CellDecision::In => return Ok(CellDecision::In),
            CellDecision::Out => {}
            CellDecision::Undecided => all_out = false,
        }
    }
    Ok(if all_out { CellDecision::Out } else { CellDecision::Undecided })
}

/// Measure of the union of the cells of `grid` whose center admits a
/// qualifying candidate.
pub fn union_measure(m: &AnalyticMap, grid: &GridSpec, theta_on: bool, cands: &[Candidate]) -> Result<Measure> {
    let failure = std::sync::Mutex::new(None);
    let record = |e| {
        failure.lock().unwrap().get_or_insert(e);
    };
    let meas = count_cells(
        grid,
        |b| {
            any_on_ball(m, b, theta_on, cands).unwrap_or_else(|e| {
                record(e);
                CellDecision::Undecided
            })
        },
        |b| {
            any_at_point(m, b.center(), theta_on, cands).unwrap_or_else(|e| {
                record(e);
                false
            })
        },
    );
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(meas),
    }
}

/// Exact measure bounds of the union over `domain`, refining undecided balls
/// down to radius exponent `max_depth`.
pub fn union_sweep(m: &AnalyticMap, domain: &Ball, theta_on: bool, cands: &[Candidate], max_depth: i64) -> Result<SweepReport> {
    let failure = std::sync::Mutex::new(None);
    let rep = sweep(domain, max_depth, |b| {
        any_on_ball(m, b, theta_on, cands).unwrap_or_else(|e| {
            failure.lock().unwrap().get_or_insert(e);
            CellDecision::Undecided
        })
    });
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(rep),
    }
}
