//! Resonant functions `g = a₀ + a·f`, the B1 gate, axis distances to the
//! zero set of `g + θ`, and the explicit construction of a resonant `g` near
//! a point outside `Φ^f(t, δ)`.

use std::sync::Arc;

use serde::Serialize;

use crate::dioph::in_phi_f;
use crate::ffield::{AbsValue, Ball, FieldSpec, Laurent, Poly, QExp};
use crate::latdyn::{reduce_lattice, LaurentMatrix};
use crate::ultracalc::{AnalyticMap, MultiPoly, Taylor};
use crate::{Error, Result};

use super::newton::{hensel_ok, newton_root_1d, NewtonRoot};

/// Extra refinement levels below `U₀` when certifying the gate.
const GATE_DEPTH: i64 = 6;
/// `k₀* = q^{K0_STAR_EXP}` in the height bracket `k₀* q^t < β_g ≤ q^t`.
pub const K0_STAR_EXP: i64 = -1;
const NEWTON_PREC: i64 = 48;

pub(crate) fn le_qpow(v: AbsValue, e: QExp) -> bool {
    match v {
        AbsValue::Zero => true,
        AbsValue::Pow(a) => QExp::from_integer(a) <= e,
    }
}

/// Constants attached to `δ`: `t′` with `q^{-t′} ≤ δ < q^{-(t′-1)}`,
/// `k₀ = q^{-(nt′+1)}`, `k₁ = q^{-nt′}`, `ρ(r) = k₁ r^{-(n+1)}`, `γ = d − 1`.
#[derive(Clone, Debug, Serialize)]
pub struct UbiquityParams {
    pub q: u32,
    pub n: usize,
    pub d: usize,
    #[serde(serialize_with = "super::ser_qexp")]
    pub delta_exp: QExp,
    pub t_prime: i64,
}

impl UbiquityParams {
    pub fn new(m: &AnalyticMap, delta_exp: QExp) -> Result<Self> {
        if delta_exp >= QExp::from_integer(0) {
            return Err(Error::Hypothesis("need 0 < δ < 1".into()));
        }
        Ok(UbiquityParams {
            q: m.spec().q(),
            n: m.n(),
            d: m.d(),
            delta_exp,
            t_prime: (-delta_exp).ceil().to_integer(),
        })
    }
    pub fn k0_exp(&self) -> i64 {
        -(self.n as i64 * self.t_prime + 1)
    }
    pub fn k1_exp(&self) -> i64 {
        -(self.n as i64 * self.t_prime)
    }
    /// `log_q ρ(q^r)`.
    pub fn rho_exp(&self, r: i64) -> i64 {
        self.k1_exp() - (self.n as i64 + 1) * r
    }
    pub fn gamma(&self) -> usize {
        self.d - 1
    }
    /// `ρ(q^{t+1}) < λ ρ(q^t)` for all t, λ = q^{lambda_exp}. The ratio is
    /// exactly `q^{-(n+1)}`, so this holds iff `λ > q^{-(n+1)}`.
    pub fn rho_decay_holds(&self, lambda_exp: QExp) -> bool {
        let ratio = QExp::from_integer(-(self.n as i64 + 1));
        ratio < lambda_exp && lambda_exp < QExp::from_integer(0)
    }
    /// Largest `deg aᵢ` with `β_g ≤ q^t`.
    pub fn height_for(&self, t: i64) -> i64 {
        t - self.k0_exp()
    }
}

/// `g = a₀ + a₁f₁ + ⋯ + aₙfₙ` with `β_g = k₀‖(a₁, …, aₙ)‖`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResonantFn {
    pub coeffs: Vec<Poly>,
}

impl ResonantFn {
    pub fn new(coeffs: Vec<Poly>) -> Result<Self> {
        if coeffs.len() < 2 || coeffs.iter().all(|p| p.is_zero()) {
            return Err(Error::Invalid("need (a₀, a) ≠ 0 with n ≥ 1".into()));
        }
        Ok(ResonantFn { coeffs })
    }
    pub fn a(&self) -> &[Poly] {
        &self.coeffs[1..]
    }
    /// `max deg aᵢ` over i ≥ 1, `None` when `a = 0`.
    pub fn height(&self) -> Option<i64> {
        self.a().iter().filter_map(|p| p.degree()).map(|d| d as i64).max()
    }
    pub fn beta_exp(&self, p: &UbiquityParams) -> Option<i64> {
        self.height().map(|h| p.k0_exp() + h)
    }
    /// `g + θ` as a polynomial map.
    pub fn with_theta(&self, m: &AnalyticMap) -> Result<MultiPoly> {
        let spec = m.spec();
        let mut g = MultiPoly::constant(spec, m.d(), self.coeffs[0].to_laurent());
        for (ai, fi) in self.a().iter().zip(m.components()) {
            if !ai.is_zero() {
                g = g.checked_add(&fi.scale(&ai.to_laurent()))?;
            }
        }
        if let Some(t) = m.theta() {
            g = g.checked_add(t)?;
        }
        Ok(g)
    }
    pub fn codes(&self) -> Vec<u64> {
        self.coeffs.iter().map(|p| p.code()).collect()
    }
}

impl Serialize for ResonantFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter().map(|p| p.to_string()))
    }
}

/// `|w| > λ|v|` with `λ = 1/q − 1/q²`, for integral valuations.
fn gate_cmp(w: AbsValue, v: AbsValue) -> bool {
    match (w, v) {
        (AbsValue::Zero, _) => false,
        (_, AbsValue::Zero) => true,
        (AbsValue::Pow(a), AbsValue::Pow(b)) => a >= b - 1,
    }
}

/// `|∂₁(g+θ)(y)| > (1/q − 1/q²)‖∇(g+θ)(y)‖` for every y in `U₀`, certified by
/// Taylor ranges on a refinement of `U₀`. False when uncertified.
pub fn resonant_gate(m: &AnalyticMap, g: &ResonantFn, u0: &Ball) -> Result<bool> {
    if u0.radius_exp() < 2 {
        return Err(Error::Hypothesis("need diam U₀ ≤ q⁻²".into()));
    }
    let grad = g.with_theta(m)?.gradient();
    let root: Vec<Taylor> = grad.iter().map(|p| Taylor::new(p, u0.center())).collect::<Result<_>>()?;
    let max_depth = u0.radius_exp() + GATE_DEPTH;
    let mut stack = vec![(u0.clone(), root)];
    while let Some((b, ts)) = stack.pop() {
        let r = b.radius_exp();
        let ranges: Vec<_> = ts.iter().map(|t| t.range(r)).collect();
        let hi = ranges.iter().map(|x| x.hi).max().unwrap();
        if gate_cmp(ranges[0].lo, hi) {
            continue;
        }
        let at_center = ts.iter().map(|t| t.value().abs()).collect::<Vec<_>>();
        if !gate_cmp(at_center[0], at_center.iter().copied().max().unwrap()) || r >= max_depth {
            return Ok(false);
        }
        for c in b.children() {
            let moved = ts.iter().map(|t| t.moved_to(c.center())).collect::<Result<_>>()?;
            stack.push((c, moved));
        }
    }
    Ok(true)
}

/// Coefficients of `η ↦ (g+θ)(x₁+η, x₂, …, x_d)`.
fn axis_poly(m: &AnalyticMap, g: &ResonantFn, x: &[Laurent]) -> Result<Vec<Laurent>> {
    let centered = g.with_theta(m)?.recenter(x)?;
    let deg = centered.degree_in(0).unwrap_or(0);
    Ok((0..=deg)
        .map(|k| {
            let mut e = vec![0u32; m.d()];
            e[0] = k;
            centered.coeff(&e)
        })
        .collect())
}

/// Axis distance `|η̃|` from the Hensel data alone: `|c₀|/|c₁|`, or `None`
/// when the Hensel condition fails.
pub(crate) fn axis_distance(m: &AnalyticMap, g: &ResonantFn, x: &[Laurent]) -> Result<Option<AbsValue>> {
    let h = axis_poly(m, g, x)?;
    if !hensel_ok(&h) {
        return Ok(None);
    }
    Ok(Some(match (h[0].abs(), h[1].abs()) {
        (AbsValue::Zero, _) => AbsValue::Zero,
        (AbsValue::Pow(a), AbsValue::Pow(b)) => AbsValue::Pow(a - b),
        (_, AbsValue::Zero) => unreachable!("Hensel condition needs c₁ ≠ 0"),
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct ResonantPoint {
    pub dist: AbsValue,
    #[serde(serialize_with = "super::ser_laurents")]
    pub point: Vec<Laurent>,
    pub newton: NewtonRoot,
}

/// Nearest zero of `g + θ` along the first axis, by Newton from x. `None`
/// when there is no nearby resonance (Hensel condition fails at x).
pub fn dist_to_resonant(m: &AnalyticMap, g: &ResonantFn, x: &[Laurent]) -> Result<Option<ResonantPoint>> {
    let h = axis_poly(m, g, x)?;
    if !hensel_ok(&h) {
        return Ok(None);
    }
    let newton = newton_root_1d(&h, &Laurent::zero(m.spec()), NEWTON_PREC)?;
    let mut point = x.to_vec();
    point[0] = point[0].checked_add(&newton.root)?;
    Ok(Some(ResonantPoint { dist: newton.root.abs(), point, newton }))
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub g: ResonantFn,
    pub beta_exp: Option<i64>,
    /// Successive minima exponents of the Minkowski body.
    pub minima: Vec<i64>,
    /// The independent short vectors `(a_{j,0}, …, a_{j,n})`.
    #[serde(serialize_with = "ser_poly_rows")]
    pub short_vectors: Vec<Vec<Poly>>,
    #[serde(serialize_with = "super::ser_laurents")]
    pub eta: Vec<Laurent>,
    pub resonance: Option<ResonantPoint>,
    pub rho_exp: i64,
    /// Intermediate bounds, each re-checked.
    pub bounds: Vec<Claim>,
    pub b1: bool,
    pub b2: bool,
    pub b3: bool,
}

fn ser_poly_rows<S: serde::Serializer>(v: &[Vec<Poly>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.iter().map(|p| p.to_string()).collect::<Vec<_>>()))
}

impl WitnessReport {
    pub fn claims_hold(&self) -> bool {
        self.b1 && self.b2 && self.b3
    }
}

/// The radius-q⁻² ball of the grid containing x.
pub fn default_u0(x: &[Laurent]) -> Result<Ball> {
    Ok(Ball::new(x.to_vec(), 2)?)
}

/// `diag(X^{nt}, X^{-t}, …) · [[1, f(x)], [0, I]]`; its sup-norm unit ball
/// is the Minkowski body `|a₀ + a·f(x)| ≤ q^{-nt}`, `|aᵢ| ≤ q^t`.
pub fn minkowski_matrix(spec: &Arc<FieldSpec>, fx: &[Laurent], t: i64) -> Result<LaurentMatrix> {
    let n = fx.len();
    let mut m = LaurentMatrix::zeros(spec, n + 1, n + 1);
    let top = Laurent::x_pow(spec, n as i64 * t);
    m.set(0, 0, top.clone());
    for (i, fi) in fx.iter().enumerate() {
        m.set(0, i + 1, fi.checked_mul(&top)?);
        m.set(i + 1, i + 1, Laurent::x_pow(spec, -t));
    }
    Ok(m)
}

fn to_polys(v: &[Laurent]) -> Result<Vec<Poly>> {
    v.iter().map(|c| Ok(c.to_poly()?)).collect()
}

fn linear_value(a: &[Poly], vals: &[Laurent], constant: bool) -> Result<Laurent> {
    let spec = vals[0].spec();
    let mut z = if constant { a[0].to_laurent() } else { Laurent::zero(spec) };
    for (ai, v) in a[1..].iter().zip(vals) {
        z = z.checked_add(&ai.to_laurent().checked_mul(v)?)?;
    }
    Ok(z)
}

/// Build `g = Σ rⱼ gⱼ` from the short vectors of the Minkowski body at x
/// and re-verify every claimed bound.
pub fn construct_resonant_witness(
    m: &AnalyticMap,
    x: &[Laurent],
    t: i64,
    delta_exp: QExp,
    u0: &Ball,
) -> Result<WitnessReport> {
    let spec = m.spec().clone();
    let params = UbiquityParams::new(m, delta_exp)?;
    let (n, ni) = (m.n(), m.n() as i64);
    let tp = params.t_prime;
    if !m.is_normalized() {
        return Err(Error::Hypothesis("need f₁(x) = x₁".into()));
    }
    if !u0.contains_point(x)? {
        return Err(Error::Hypothesis("x lies outside U₀".into()));
    }
    if in_phi_f(m, x, t, delta_exp)? {
        return Err(Error::Hypothesis(format!("x ∈ Φ^f({t}, δ)")));
    }
    let fx = m.eval(x)?;
    let d1f: Vec<Laurent> = m.jacobian().iter().map(|row| row[0].eval(x)).collect::<Result<_>>()?;
    let theta = m.eval_theta(x)?;
    let d1theta = match m.theta() {
        Some(th) => th.partial(0).eval(x)?,
        None => Laurent::zero(&spec),
    };

    let red = reduce_lattice(&minkowski_matrix(&spec, &fx, t)?)?;
    let vecs: Vec<Vec<Poly>> = red.transform.columns().iter().map(|c| to_polys(c)).collect::<Result<_>>()?;
    let gx: Vec<Laurent> = vecs.iter().map(|a| linear_value(a, &fx, true)).collect::<Result<_>>()?;
    let dgx: Vec<Laurent> = vecs.iter().map(|a| linear_value(a, &d1f, false)).collect::<Result<_>>()?;

    let mut bounds = Vec::new();
    let dn = -delta_exp * QExp::from_integer(ni);
    bounds.push(Claim {
        name: "|g_j(x)| <= delta^-n q^-nt".into(),
        holds: gx.iter().all(|v| le_qpow(v.abs(), dn - QExp::from_integer(ni * t))),
    });
    bounds.push(Claim {
        name: "|a_ji| <= delta^-n q^t".into(),
        holds: vecs.iter().all(|a| a[1..].iter().all(|p| le_qpow(p.to_laurent().abs(), dn + QExp::from_integer(t)))),
    });

    // Rows: value, first partial, then the coordinates a_{·,k} for k ≥ 2.
    let mut rows = vec![gx.clone(), dgx.clone()];
    for k in 2..=n {
        rows.push(vecs.iter().map(|a| a[k].to_laurent()).collect());
    }
    let mut rhs = vec![theta.neg(), Laurent::x_pow(&spec, ni * tp + t + 1).checked_sub(&d1theta)?];
    rhs.resize(n + 1, Laurent::zero(&spec));
    let sys = LaurentMatrix::from_rows(&spec, rows)?;
    let det = sys.det()?;
    if det.is_zero() {
        return Err(Error::Invalid("singular system for η".into()));
    }
    let mut eta = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut sj = sys.clone();
        for (i, r) in rhs.iter().enumerate() {
            sj.set(i, j, r.clone());
        }
        let num = sj.det()?;
        let e = match num.div_exact(&det)? {
            Some(e) => e,
            None => num.div_prec(&det, 96)?,
        };
        eta.push(e);
    }
    let r: Vec<Poly> = eta.iter().map(|e| Ok(e.poly_part()?.0)).collect::<Result<_>>()?;
    let mut coeffs = vec![Poly::zero(&spec); n + 1];
    for (rj, a) in r.iter().zip(&vecs) {
        for (c, aji) in coeffs.iter_mut().zip(a) {
            *c = c.checked_add(&rj.checked_mul(aji)?)?;
        }
    }
    let g = ResonantFn::new(coeffs)?;

    let gt = g.with_theta(m)?;
    let val = gt.eval(x)?.abs();
    let d1 = gt.partial(0).eval(x)?.abs();
    bounds.push(Claim { name: "|(g+theta)(x)| <= q^(nt'-nt)".into(), holds: le_qpow(val, QExp::from_integer(ni * tp - ni * t)) });
    // q^a ≥ q^e(q−1) iff a ≥ e, plus one when q > 2.
    let need = ni * tp + t + i64::from(spec.q() > 2);
    bounds.push(Claim {
        name: "|d1(g+theta)(x)| >= q^(nt'+t)(q-1)".into(),
        holds: d1.exponent().is_some_and(|a| a >= need),
    });

    let b1 = resonant_gate(m, &g, u0)?;
    let beta_exp = g.beta_exp(&params);
    let b2 = beta_exp.is_some_and(|b| b > t + K0_STAR_EXP && b <= t);
    let resonance = dist_to_resonant(m, &g, x)?;
    let rho_exp = params.rho_exp(t);
    if let Some(rp) = &resonance {
        // |η̃| < q^{-(nt+t)}/(q−1) iff |η̃| ≤ q^{-(nt+t)-1}.
        bounds.push(Claim { name: "|eta~| < 1/(q^(nt+t)(q-1))".into(), holds: le_qpow(rp.dist, QExp::from_integer(-(ni * t + t) - 1)) });
        bounds.push(Claim { name: "|eta~| <= |h(0)|/|h'(0)|".into(), holds: rp.dist <= rp.newton.step_bound });
    }
    let b3 = b1
        && resonance
            .as_ref()
            .map(|rp| -> Result<bool> { Ok(rp.dist < AbsValue::Pow(rho_exp) && u0.contains_point(&rp.point)?) })
            .transpose()?
            .unwrap_or(false);
    Ok(WitnessReport {
        g,
        beta_exp,
        minima: red.minima,
        short_vectors: vecs,
        eta,
        resonance,
        rho_exp,
        bounds,
        b1,
        b2,
        b3,
    })
}
