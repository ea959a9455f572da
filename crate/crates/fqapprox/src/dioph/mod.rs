//! Ψ-approximation: witnesses, Borel–Cantelli sums and exact cell measures
//! of the approximation sets.

mod approx;
mod forms;

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::ffield::{
    enumerate_shell, qpow_rational, AbsValue, Ball, FieldSpec, GridSpec, Laurent, Measure, Poly, QExp, SweepReport,
};
use crate::latdyn::build_ceil_eps;
use crate::ultracalc::AnalyticMap;
use crate::{Error, Result};

pub use approx::ApproxFn;
pub use forms::{union_measure, union_sweep, Candidate, FormCond, GradCond, PointData};

/// `a₀ = −[z]`, the polynomial minimizing `|z + a₀|`, and that minimum `|{z}|`.
pub fn best_a0(z: &Laurent) -> Result<(Poly, AbsValue)> {
    let (p, frac) = z.poly_part()?;
    Ok((p.neg(), frac.abs()))
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "ser_polys")]
    pub a: Vec<Poly>,
    #[serde(serialize_with = "ser_poly")]
    pub a0: Poly,
    /// `a·f(x) + a₀ + θ(x)`.
    #[serde(serialize_with = "ser_laurent")]
    pub value: Laurent,
    /// `‖∇(a·f + θ)(x)‖`.
    pub grad_norm: AbsValue,
}

fn ser_poly<S: serde::Serializer>(p: &Poly, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}
fn ser_polys<S: serde::Serializer>(p: &[Poly], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.iter().map(|x| x.to_string()))
}
fn ser_laurent<S: serde::Serializer>(l: &Laurent, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&l.body_string())
}

fn lift(a: &[Poly]) -> Vec<Laurent> {
    a.iter().map(|p| p.to_laurent()).collect()
}

/// First `a` on the shell `‖a‖ = q^t` (enumeration order) with
/// `|{a·f(x) + θ(x)}| < Ψ(a)`.
pub fn find_witness(m: &AnalyticMap, x: &[Laurent], psi: &ApproxFn, t: i64, theta_on: bool) -> Result<Option<Witness>> {
    let spec = m.spec();
    let Some(k) = psi.threshold(spec.q(), t)? else {
        return Ok(None);
    };
    let pd = PointData::new(m, x, theta_on)?;
    for a in enumerate_shell(spec, m.n(), t)? {
        let al = lift(&a);
        let z = pd.form(&al)?;
        let (a0, v) = best_a0(&z)?;
        if v.lt_qpow(QExp::from_integer(k)) {
            let value = z.checked_add(&a0.to_laurent())?;
            return Ok(Some(Witness { grad_norm: pd.grad_norm(&al)?, a, a0, value }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct BcSum {
    /// `#shell(t) · Ψ_t` for t = 0..=T.
    #[serde(serialize_with = "ser_rationals")]
    pub terms: Vec<BigRational>,
    #[serde(serialize_with = "ser_rational")]
    pub partial: BigRational,
    /// Closed-form value of the full series when it converges.
    #[serde(serialize_with = "ser_opt_rational")]
    pub limit: Option<BigRational>,
    /// Known for power laws.
    pub diverges: Option<bool>,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}
fn ser_rationals<S: serde::Serializer>(r: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(|x| x.to_string()))
}
fn ser_opt_rational<S: serde::Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// `Σ_{t≤T} q^{tn}(qⁿ−1) Ψ_t`, exactly. Shell values must be rational.
pub fn borel_cantelli_sum(psi: &ApproxFn, q: u32, n: u32, big_t: i64) -> Result<BcSum> {
    if big_t < 0 {
        return Err(Error::Invalid("T must be nonnegative".into()));
    }
    let qn = qpow_rational(q, n as i64);
    let mut terms = Vec::new();
    for t in 0..=big_t {
        let v = psi
            .shell_rational(q, t)?
            .ok_or_else(|| Error::Invalid(format!("Ψ on shell {t} is irrational; no exact sum")))?;
        terms.push(qpow_rational(q, t * n as i64) * (&qn - BigRational::one()) * v);
    }
    let partial = terms.iter().fold(BigRational::zero(), |a, b| a + b);
    let (limit, diverges) = match psi {
        ApproxFn::PowerLaw { c, .. } if c.is_zero() => (Some(BigRational::zero()), Some(false)),
        ApproxFn::PowerLaw { c, tau } => {
            if *tau <= QExp::from_integer(n as i64) {
                (None, Some(true))
            } else if tau.is_integer() {
                // c(qⁿ−1) Σ_t q^{(n−τ)t}.
                let ratio = qpow_rational(q, n as i64 - tau.to_integer());
                (Some(c * (&qn - BigRational::one()) / (BigRational::one() - ratio)), Some(false))
            } else {
                (None, Some(false))
            }
        }
        ApproxFn::ShellTable(_) => (None, None),
    };
    Ok(BcSum { terms, partial, limit, diverges })
}

/// All polynomials of degree ≤ h (only 0 when h < 0).
pub fn polys_up_to(spec: &Arc<FieldSpec>, h: i64) -> Vec<Poly> {
    if h < 0 {
        return vec![Poly::zero(spec)];
    }
    let len = (h + 1) as usize;
    (0..(spec.q() as u64).pow(len as u32)).map(|c| Poly::from_code(spec, c, len)).collect()
}

/// Polynomials of degree exactly t.
pub fn polys_of_degree(spec: &Arc<FieldSpec>, t: i64) -> Vec<Poly> {
    polys_up_to(spec, t).into_iter().filter(|p| p.degree() == Some(t as usize)).collect()
}

/// Cartesian product of per-coordinate choices.
pub fn tuples(choices: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let mut out: Vec<Vec<Poly>> = vec![vec![]];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|p| {
                c.iter().map(move |x| {
                    let mut v = p.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

fn shell_candidates(m: &AnalyticMap, t: i64, value: QExp) -> Result<Vec<Candidate>> {
    Ok(enumerate_shell(m.spec(), m.n(), t)?
        .map(|a| Candidate { a: lift(&a), cond: FormCond { value, grad: GradCond::Any } })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct WReport {
    pub total: Measure,
    /// Hit measure of each shell on its own.
    pub per_shell: Vec<(i64, Measure)>,
}

/// Measure of the resolution-N cells whose center has a witness on some
/// shell `T0 ≤ t ≤ T1`.
pub fn measure_w(m: &AnalyticMap, psi: &ApproxFn, theta_on: bool, t0: i64, t1: i64, grid: &GridSpec) -> Result<WReport> {
    if t0 > t1 || t0 < 0 {
        return Err(Error::Invalid(format!("bad shell range {t0}..{t1}")));
    }
    let q = m.spec().q();
    let mut all = Vec::new();
    let mut per_shell = Vec::new();
    for t in t0..=t1 {
        let Some(k) = psi.threshold(q, t)? else {
            per_shell.push((t, Measure::zero(q)));
            continue;
        };
        let c = shell_candidates(m, t, QExp::from_integer(k))?;
        per_shell.push((t, union_measure(m, grid, theta_on, &c)?));
        all.extend(c);
    }
    Ok(WReport { total: union_measure(m, grid, theta_on, &all)?, per_shell })
}

/// For every cell of a grid, the shells in `T0..=T1` on which its center has
/// a Ψ-witness, as a bit mask (bit `t − T0`).
#[derive(Clone, Debug)]
pub struct ShellHits {
    pub t0: i64,
    pub t1: i64,
    pub cell: Measure,
    pub masks: Vec<u64>,
}

impl ShellHits {
    /// Measure of the cells with a witness on some shell in `a..=b`.
    pub fn measure(&self, a: i64, b: i64) -> Measure {
        let (a, b) = (a.max(self.t0), b.min(self.t1));
        if a > b {
            return Measure::zero(self.cell.q);
        }
        let width = (b - a + 1) as u32;
        let bits = if width == 64 { u64::MAX } else { (1u64 << width) - 1 } << (a - self.t0);
        let hits = self.masks.iter().filter(|&&m| m & bits != 0).count() as u128;
        Measure { count: hits * self.cell.count, ..self.cell }.reduced()
    }
}

/// Cell-center evaluation of [`measure_w`] for all shell ranges at once.
pub fn shell_hits(m: &AnalyticMap, psi: &ApproxFn, theta_on: bool, t0: i64, t1: i64, grid: &GridSpec) -> Result<ShellHits> {
    if t0 > t1 || t0 < 0 || t1 - t0 >= 64 {
        return Err(Error::Invalid(format!("bad shell range {t0}..{t1}")));
    }
    let masks = (0..grid.cell_count())
        .into_par_iter()
        .map(|i| {
            let x = grid.cell(i).center().to_vec();
            let mut mask = 0u64;
            for t in t0..=t1 {
                if find_witness(m, &x, psi, t, theta_on)?.is_some() {
                    mask |= 1 << (t - t0);
                }
            }
            Ok(mask)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(ShellHits { t0, t1, cell: grid.cell_measure(), masks })
}

fn check_split(eps: QExp) -> Result<()> {
    if eps <= QExp::from_integer(0) || eps >= QExp::new(1, 2) {
        return Err(Error::Hypothesis("need 0 < ε < 1/2".into()));
    }
    Ok(())
}

/// Forms with `|aᵢ| = q^{tᵢ}`, `|a·f + θ + a₀| < δ q^{-Σtᵢ}` and large
/// gradient `‖∇(a·f + θ)‖ ≥ ‖a‖^{1−ε}`; δ = q^{delta_exp}.
pub fn big_grad_candidates(m: &AnalyticMap, delta_exp: QExp, tvec: &[i64], eps: QExp) -> Result<Vec<Candidate>> {
    check_split(eps)?;
    if tvec.len() != m.n() || tvec.iter().any(|&t| t < 0) {
        return Err(Error::Dimension("t-vector must have n nonnegative entries".into()));
    }
    let spec = m.spec();
    let sum: i64 = tvec.iter().sum();
    let max = *tvec.iter().max().unwrap();
    let cond = FormCond {
        value: delta_exp - QExp::from_integer(sum),
        grad: GradCond::AtLeast((QExp::from_integer(1) - eps) * QExp::from_integer(max)),
    };
    let choices: Vec<Vec<Poly>> = tvec.iter().map(|&t| polys_of_degree(spec, t)).collect();
    Ok(tuples(&choices).into_iter().map(|a| Candidate { a: lift(&a), cond }).collect())
}

pub fn measure_big_a(
    m: &AnalyticMap,
    delta_exp: QExp,
    tvec: &[i64],
    eps: QExp,
    theta_on: bool,
    grid: &GridSpec,
) -> Result<Measure> {
    if delta_exp >= QExp::from_integer(0) {
        return Err(Error::Hypothesis("need δ < 1".into()));
    }
    let c = big_grad_candidates(m, delta_exp, tvec, eps)?;
    union_measure(m, grid, theta_on, &c)
}

/// As [`measure_big_a`], swept adaptively over `domain` down to radius
/// exponent `max_depth` instead of sampled at cell centers.
pub fn sweep_big_a(
    m: &AnalyticMap,
    delta_exp: QExp,
    tvec: &[i64],
    eps: QExp,
    theta_on: bool,
    domain: &Ball,
    max_depth: i64,
) -> Result<SweepReport> {
    if delta_exp >= QExp::from_integer(0) {
        return Err(Error::Hypothesis("need δ < 1".into()));
    }
    let c = big_grad_candidates(m, delta_exp, tvec, eps)?;
    union_sweep(m, domain, theta_on, &c, max_depth)
}

/// Forms of the small-gradient set: `ã ≠ 0`, `|ãᵢ| < q^{tᵢ}`,
/// `|f·ã + ã₀| < q^{-t}`, `‖∇(f·ã)‖ < q^{t′}`.
pub fn small_grad_candidates(m: &AnalyticMap, t: i64, t_prime: i64, tvec: &[i64]) -> Result<Vec<Candidate>> {
    build_ceil_eps(t, t_prime, tvec)?;
    if tvec.len() != m.n() {
        return Err(Error::Dimension("t-vector must have n entries".into()));
    }
    let spec = m.spec();
    let cond = FormCond { value: QExp::from_integer(-t), grad: GradCond::Below(QExp::from_integer(t_prime)) };
    let choices: Vec<Vec<Poly>> = tvec.iter().map(|&ti| polys_up_to(spec, ti - 1)).collect();
    Ok(tuples(&choices)
        .into_iter()
        .filter(|a| a.iter().any(|p| !p.is_zero()))
        .map(|a| Candidate { a: lift(&a), cond })
        .collect())
}

/// Measure of the small-gradient set on the grid, and the ε of the bound.
pub fn measure_smallgrad_s(m: &AnalyticMap, t: i64, t_prime: i64, tvec: &[i64], grid: &GridSpec) -> Result<(Measure, QExp)> {
    let eps = build_ceil_eps(t, t_prime, tvec)?.eps;
    let c = small_grad_candidates(m, t, t_prime, tvec)?;
    Ok((union_measure(m, grid, false, &c)?, eps))
}

/// `measure / (ε^α |B|)` as a float diagnostic.
pub fn smallgrad_ratio(measure: &Measure, ball: &Measure, eps: QExp, alpha: f64, q: u32) -> f64 {
    measure.to_f64() / (ball.to_f64() * crate::ffield::qpow_f64(q, eps).powf(alpha))
}

fn alpha_nonzero(a0: &Poly, a: &[Poly]) -> bool {
    !a0.is_zero() || a.iter().any(|p| !p.is_zero())
}

/// `|a₀ + f·a + θ| < λ q^{-Σtᵢ}`, `‖∇(f·a + θ)‖ < λ q^{|t|(1−ε)}`,
/// `max(1, |aᵢ|) ≤ q^{tᵢ}`; λ = q^{lambda_exp}.
pub fn in_i_t(
    m: &AnalyticMap,
    x: &[Laurent],
    a0: &Poly,
    a: &[Poly],
    tvec: &[i64],
    lambda_exp: QExp,
    eps: QExp,
) -> Result<bool> {
    in_set(m, x, a0, a, tvec, lambda_exp, eps, true)
}

/// As [`in_i_t`] without θ and with `|aᵢ| ≤ q^{tᵢ}`.
pub fn in_h_t(
    m: &AnalyticMap,
    x: &[Laurent],
    a0: &Poly,
    a: &[Poly],
    tvec: &[i64],
    lambda_exp: QExp,
    eps: QExp,
) -> Result<bool> {
    in_set(m, x, a0, a, tvec, lambda_exp, eps, false)
}

#[allow(clippy::too_many_arguments)]
fn in_set(
    m: &AnalyticMap,
    x: &[Laurent],
    a0: &Poly,
    a: &[Poly],
    tvec: &[i64],
    lambda_exp: QExp,
    eps: QExp,
    inhomogeneous: bool,
) -> Result<bool> {
    if a.len() != m.n() || tvec.len() != m.n() {
        return Err(Error::Dimension("α and t must have n entries".into()));
    }
    if !alpha_nonzero(a0, a) {
        return Ok(false);
    }
    for (ai, &ti) in a.iter().zip(tvec) {
        let deg = ai.degree().map_or(i64::MIN, |d| d as i64);
        let bound = if inhomogeneous { deg.max(0) } else { deg };
        if bound > ti {
            return Ok(false);
        }
    }
    let sum: i64 = tvec.iter().sum();
    let max = tvec.iter().copied().max().unwrap_or(0);
    let pd = PointData::new(m, x, inhomogeneous)?;
    let al = lift(a);
    let z = pd.form(&al)?.checked_add(&a0.to_laurent())?;
    if !z.abs().lt_qpow(lambda_exp - QExp::from_integer(sum)) {
        return Ok(false);
    }
    let grad = lambda_exp + QExp::from_integer(max) * (QExp::from_integer(1) - eps);
    Ok(pd.grad_norm(&al)?.lt_qpow(grad))
}

/// `∃ a, ‖a‖ = q^t, a₀: |f(x)·a + a₀| < δ q^{-nt}`, δ = q^{delta_exp}.
pub fn phi_f_candidates(m: &AnalyticMap, t: i64, delta_exp: QExp) -> Result<Vec<Candidate>> {
    if t < 1 {
        return Err(Error::Invalid("need t ≥ 1".into()));
    }
    shell_candidates(m, t, delta_exp - QExp::from_integer(m.n() as i64 * t))
}

pub fn in_phi_f(m: &AnalyticMap, x: &[Laurent], t: i64, delta_exp: QExp) -> Result<bool> {
    forms::any_at_point(m, x, false, &phi_f_candidates(m, t, delta_exp)?)
}

pub fn measure_phi_f(m: &AnalyticMap, t: i64, delta_exp: QExp, grid: &GridSpec) -> Result<Measure> {
    union_measure(m, grid, false, &phi_f_candidates(m, t, delta_exp)?)
}

/// `n(t) = q^{tn}(qⁿ−1)` as a rational, handy for tail sums.
pub fn shell_size(q: u32, n: u32, t: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(crate::ffield::shell_count(q, n, t as u32)))
}
