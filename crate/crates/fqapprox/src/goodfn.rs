//! (C, α)-good functions: exact sublevel-set measures, certified goodness
//! constants and orthonormality.
//!
//! A function g is (C, α)-good on U when every ball B ⊆ U satisfies
//! `|{x ∈ B : |g(x)| < ε}| ≤ C (ε/‖g‖_B)^α |B|`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::ffield::{sweep, AbsValue, Ball, Laurent, Measure, QExp, SweepReport};
use crate::ultracalc::{AbsRange, MultiPoly, Taylor};
use crate::{Error, Result};

pub use crate::ultracalc::sup_norm_on_ball;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GoodParams {
    pub c: QExp,
    pub alpha: QExp,
}

/// Measure of a sublevel set `{x ∈ B : max_i |g_i(x)| < ε}`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SublevelReport {
    pub ball: String,
    /// ε = q^epsilon_exp.
    pub epsilon_exp: String,
    pub sup_exp: Option<i64>,
    /// Lower measure in units of resolution-N cells (a rational in general).
    pub cell_count: String,
    pub resolution: i64,
    pub certified: bool,
    #[serde(skip)]
    pub lower: Measure,
    #[serde(skip)]
    pub upper: Measure,
    #[serde(skip)]
    pub ball_measure: Measure,
    #[serde(skip)]
    pub eps: QExp,
}

impl SublevelReport {
    pub fn measure(&self) -> Option<Measure> {
        self.certified.then_some(self.lower)
    }
}

/// Three-valued range of `max_i |g_i|` on a ball.
pub fn family_range(gs: &[MultiPoly], ball: &Ball) -> Result<AbsRange> {
    let mut r = AbsRange::exact(AbsValue::Zero);
    for g in gs {
        r = r.max(Taylor::new(g, ball.center())?.range(ball.radius_exp()));
    }
    Ok(r)
}

/// Sweep `{x ∈ B : max_i |g_i(x)| < q^e}` down to radius exponent `max_depth`.
pub fn sublevel_sweep(gs: &[MultiPoly], ball: &Ball, e: QExp, max_depth: i64) -> Result<SweepReport> {
    for g in gs {
        if g.nvars() != ball.dim() {
            return Err(Error::Dimension("polynomial and ball dimensions differ".into()));
        }
    }
    Ok(sweep(ball, max_depth, |b| {
        family_range(gs, b).map(|r| r.below(e)).unwrap_or(crate::ffield::CellDecision::Undecided)
    }))
}

fn report(gs: &[MultiPoly], ball: &Ball, eps: QExp, n: i64, rep: SweepReport) -> Result<SublevelReport> {
    let sup = gs.iter().map(|g| sup_norm_on_ball(g, ball)).collect::<Result<Vec<_>>>()?.into_iter().max();
    let cell = Measure::qpow_neg(ball.spec().q(), ball.dim() as i64 * n);
    Ok(SublevelReport {
        ball: ball.to_string(),
        epsilon_exp: eps.to_string(),
        sup_exp: sup.and_then(|s| s.exponent()),
        cell_count: rep.lower.ratio(&cell).to_string(),
        resolution: n,
        certified: rep.certified(),
        lower: rep.lower,
        upper: rep.upper,
        ball_measure: ball.measure(),
        eps,
    })
}

/// `|{x ∈ B : |g(x)| < ε}|` for `ε = q^eps_exp`, resolving cells down to
/// radius exponent `n + 4`.
pub fn sublevel_measure(g: &MultiPoly, ball: &Ball, eps: AbsValue, n: i64) -> Result<SublevelReport> {
    let e = eps.exponent().ok_or_else(|| Error::Invalid("ε must be positive".into()))?;
    sublevel_measure_family(std::slice::from_ref(g), ball, QExp::from_integer(e), n, n + 4)
}

/// Sublevel set of `max_i |g_i|` at a rational exponent threshold.
pub fn sublevel_measure_family(
    gs: &[MultiPoly],
    ball: &Ball,
    eps_exp: QExp,
    n: i64,
    max_depth: i64,
) -> Result<SublevelReport> {
    if n < ball.radius_exp() {
        return Err(Error::Invalid("resolution coarser than the ball".into()));
    }
    let rep = sublevel_sweep(gs, ball, eps_exp, max_depth)?;
    report(gs, ball, eps_exp, n, rep)
}

/// Certified constant for polynomials of degree ≤ k in m variables with
/// exponent `α = 1/(mk)`: `C = m·k`.
///
/// For m = 1, Lagrange interpolation through k+1 points of the sublevel set
/// that lie in distinct balls of radius ρ gives `‖g‖_B < ε (R/(qρ))^k`, so the
/// set meets at most k such balls once ρ is the largest power of q below
/// `R (ε/‖g‖_B)^{1/k}`; that is `C₁ = k`. Slicing along one coordinate and
/// applying the bound fibrewise adds the constants, `C_m = C_{m−1} + k`.
pub fn poly_good_constant(m: u32, k: u32) -> GoodParams {
    GoodParams { c: QExp::from_integer((m * k) as i64), alpha: QExp::new(1, (m * k).max(1) as i64) }
}

/// Exact test of `ratio ≤ c · q^{γ}` for rational γ.
pub fn below_scaled(q: u32, ratio: &BigRational, c: &BigRational, gamma: QExp) -> bool {
    let (u, v) = (*gamma.numer(), *gamma.denom());
    let lhs = num_traits::pow(ratio.clone(), v as usize);
    let qb = BigRational::from_integer(BigInt::from(q));
    let qu = if u >= 0 {
        num_traits::pow(qb, u as usize)
    } else {
        BigRational::one() / num_traits::pow(qb, (-u) as usize)
    };
    lhs <= num_traits::pow(c.clone(), v as usize) * qu
}

/// Check the goodness inequality for one report using its upper measure.
pub fn satisfies_good_bound(rep: &SublevelReport, sup: AbsValue, params: GoodParams, q: u32) -> bool {
    let Some(s) = sup.exponent() else {
        return true;
    };
    let e = rep.eps;
    let ratio = rep.upper.ratio(&rep.ball_measure);
    let c = BigRational::new(BigInt::from(*params.c.numer()), BigInt::from(*params.c.denom()));
    below_scaled(q, &ratio, &c, params.alpha * (e - QExp::from_integer(s)))
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodEstimate {
    /// Smallest C consistent with the tested thresholds.
    pub c: f64,
    pub worst_eps_exp: String,
    pub certified: bool,
    pub per_eps: Vec<(String, f64)>,
}

/// `max_ε |{|g| < ε}| (‖g‖_B/ε)^α / |B|` over thresholds `q^e`, e in `eps_grid`.
pub fn certify_good(g: &MultiPoly, ball: &Ball, alpha: QExp, eps_grid: &[QExp], n: i64) -> Result<GoodEstimate> {
    certify_good_family(std::slice::from_ref(g), ball, alpha, eps_grid, n)
}

/// As [`certify_good`] for `sup_i |g_i|`.
pub fn certify_good_family(
    gs: &[MultiPoly],
    ball: &Ball,
    alpha: QExp,
    eps_grid: &[QExp],
    n: i64,
) -> Result<GoodEstimate> {
    if eps_grid.is_empty() {
        return Err(Error::Invalid("empty ε grid".into()));
    }
    let sup = gs.iter().map(|g| sup_norm_on_ball(g, ball)).collect::<Result<Vec<_>>>()?.into_iter().max();
    let s = sup.and_then(|s| s.exponent()).ok_or_else(|| Error::Invalid("g vanishes on the ball".into()))?;
    let q = ball.spec().q() as f64;
    let mut best = (f64::NEG_INFINITY, String::new());
    let mut per = Vec::new();
    let mut certified = true;
    for &e in eps_grid {
        if e > QExp::from_integer(s) {
            return Err(Error::Invalid(format!("threshold q^{e} exceeds the sup norm q^{s}")));
        }
        let rep = sublevel_measure_family(gs, ball, e, n, n + 4)?;
        certified &= rep.certified;
        let ratio = rep.upper.ratio(&rep.ball_measure).to_f64().unwrap_or(f64::NAN);
        let scale = q.powf((alpha * (QExp::from_integer(s) - e)).to_f64().unwrap_or(f64::NAN));
        let c = ratio * scale;
        per.push((e.to_string(), c));
        if c > best.0 {
            best = (c, e.to_string());
        }
    }
    Ok(GoodEstimate { c: best.0, worst_eps_exp: best.1, certified, per_eps: per })
}

/// `‖v_1‖ = ⋯ = ‖v_k‖ = ‖v_1 ∧ ⋯ ∧ v_k‖ = 1`.
pub fn check_orthonormal(vs: &[Vec<Laurent>]) -> Result<bool> {
    for v in vs {
        let n = v.iter().map(|x| x.abs()).max().unwrap_or(AbsValue::Zero);
        if n != AbsValue::ONE {
            return Ok(false);
        }
    }
    Ok(crate::latdyn::wedge_norm(vs)? == AbsValue::ONE)
}

/// Measure helper: `true` when a certified measure is zero.
pub fn is_null(m: &Measure) -> bool {
    m.count.is_zero()
}
