//! The lattices `D U_x Γ`, their shortest vectors, and the nondivergence
//! conditions on primitive submodules.
//!
//! Coordinates of F^m (m = n + d + 1) are ordered `e₀, e₁*, …, e_d*, e₁, …, eₙ`
//! and Γ is spanned by `e₀, e₁, …, eₙ`.

use num_rational::Ratio;
use serde::Serialize;

use crate::ffield::{sweep, AbsValue, Ball, CellDecision, Laurent, Poly, QExp, SweepReport};
use crate::goodfn::{certify_good_family, poly_good_constant, sup_norm_on_ball};
use crate::ultracalc::{AnalyticMap, MultiPoly, Taylor};
use crate::{Error, Result};

use super::matrix::LaurentMatrix;
use super::reduce::reduce_lattice;
use super::submodule::PrimitiveSubmodule;

/// `U_x`: identity plus the blocks `f(x)ᵀ` (row e₀) and `∇f(x)` (rows e_j*),
/// entry `(j*, i) = ∂_j f_i(x)`.
pub fn build_ux(m: &AnalyticMap, x: &[Laurent]) -> Result<LaurentMatrix> {
    if x.len() != m.d() {
        return Err(Error::Dimension(format!("point of dimension {} for a map on F^{}", x.len(), m.d())));
    }
    let (d, n) = (m.d(), m.n());
    let spec = m.spec();
    let mut u = LaurentMatrix::identity(spec, n + d + 1);
    let fx = m.eval(x)?;
    let jac = m.jacobian();
    for i in 0..n {
        u.set(0, d + 1 + i, fx[i].clone());
        for j in 0..d {
            u.set(1 + j, d + 1 + i, jac[i][j].eval(x)?);
        }
    }
    Ok(u)
}

/// The m × (n+1) inclusion of Γ: columns e₀, e₁, …, eₙ.
pub fn gamma_matrix(spec: &std::sync::Arc<crate::ffield::FieldSpec>, d: usize, n: usize) -> LaurentMatrix {
    let mut g = LaurentMatrix::zeros(spec, n + d + 1, n + 1);
    g.set(0, 0, Laurent::one(spec));
    for i in 0..n {
        g.set(d + 1 + i, 1 + i, Laurent::one(spec));
    }
    g
}

/// `⌈ε⌉ = X^exp`, together with the rational exponent of ε itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CeilEps {
    pub exp: i64,
    #[serde(serialize_with = "ser_qexp")]
    pub eps: QExp,
    /// Which branch of the definition applied: `X^{-t}` or the rounded one.
    pub first_branch: bool,
}

fn ser_qexp<S: serde::Serializer>(e: &QExp, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

fn check_small_grad_params(t: i64, tvec: &[i64], t_prime: i64) -> Result<(i64, i64)> {
    if tvec.is_empty() {
        return Err(Error::Dimension("empty t-vector".into()));
    }
    if t < 0 || tvec.iter().any(|&ti| ti < 1) {
        return Err(Error::Hypothesis("need t ≥ 0 and every tᵢ ≥ 1".into()));
    }
    let (sum, max) = (tvec.iter().sum::<i64>(), *tvec.iter().max().unwrap());
    if t_prime + sum - t - max >= 0 {
        return Err(Error::Hypothesis("need t′ + Σtᵢ − t − max tᵢ < 0".into()));
    }
    Ok((sum, max))
}

pub fn build_ceil_eps(t: i64, t_prime: i64, tvec: &[i64]) -> Result<CeilEps> {
    let (sum, max) = check_small_grad_params(t, tvec, t_prime)?;
    let n1 = tvec.len() as i64 + 1;
    let y = QExp::new(t_prime + sum - t - max, n1);
    let first = n1 * t < t + max - t_prime - sum;
    let exp = if first { -t } else { y.floor().to_integer() + 1 };
    let eps = y.max(QExp::from_integer(-t));
    debug_assert!(QExp::from_integer(exp) >= eps);
    Ok(CeilEps { exp, eps, first_branch: first })
}

/// `D = diag(a₀⁻¹, a_*⁻¹ (d times), a₁⁻¹, …, aₙ⁻¹)` with `a₀ = X^{e0}`,
/// `a_* = X^{estar}`, `aᵢ = X^{e[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DParams {
    pub e0: i64,
    pub estar: i64,
    pub e: Vec<i64>,
}

impl DParams {
    /// Checks `0 < |a₀| ≤ 1 ≤ |a₁| ≤ ⋯ ≤ |aₙ|` and `|a_*| ≤ |a₀ a₁ ⋯ a_{n−1}|⁻¹`.
    pub fn new(e0: i64, estar: i64, e: Vec<i64>) -> Result<Self> {
        if e.is_empty() {
            return Err(Error::Dimension("no aᵢ".into()));
        }
        if e0 > 0 || e[0] < 0 || e.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Hypothesis("need 0 < |a₀| ≤ 1 ≤ |a₁| ≤ … ≤ |aₙ|".into()));
        }
        let prod: i64 = e0 + e[..e.len() - 1].iter().sum::<i64>();
        if estar > -prod {
            return Err(Error::Hypothesis("need |a_*| ≤ |a₀a₁⋯a_{n−1}|⁻¹".into()));
        }
        Ok(DParams { e0, estar, e })
    }

    pub fn n(&self) -> usize {
        self.e.len()
    }

    pub fn matrix(&self, spec: &std::sync::Arc<crate::ffield::FieldSpec>, d: usize) -> LaurentMatrix {
        let mut diag = vec![Laurent::x_pow(spec, -self.e0)];
        diag.extend(std::iter::repeat_with(|| Laurent::x_pow(spec, -self.estar)).take(d));
        diag.extend(self.e.iter().map(|&e| Laurent::x_pow(spec, -e)));
        LaurentMatrix::diag(spec, &diag)
    }

    /// `log_q |det D|`.
    pub fn log_det(&self, d: usize) -> i64 {
        -(self.e0 + d as i64 * self.estar + self.e.iter().sum::<i64>())
    }
}

/// `a₀ = X^{-t}/⌈ε⌉`, `a_* = X^{t′}/⌈ε⌉`, `aᵢ = X^{tᵢ}/⌈ε⌉`.
pub fn build_d(ceil: &CeilEps, t: i64, t_prime: i64, tvec: &[i64]) -> Result<DParams> {
    check_small_grad_params(t, tvec, t_prime)?;
    DParams::new(-t - ceil.exp, t_prime - ceil.exp, tvec.iter().map(|&ti| ti - ceil.exp).collect())
}

/// Generator matrix of `D U_x Γ` (m × (n+1)).
pub fn lattice_at(m: &AnalyticMap, x: &[Laurent], dp: &DParams) -> Result<LaurentMatrix> {
    if dp.n() != m.n() {
        return Err(Error::Dimension("D built for a different n".into()));
    }
    let (d, n) = (m.d(), m.n());
    let spec = m.spec();
    let fx = m.eval(x)?;
    let jac = m.jacobian();
    let mut g = LaurentMatrix::zeros(spec, n + d + 1, n + 1);
    g.set(0, 0, Laurent::x_pow(spec, -dp.e0));
    for i in 0..n {
        g.set(0, 1 + i, fx[i].shift(-dp.e0));
        for j in 0..d {
            g.set(1 + j, 1 + i, jac[i][j].eval(x)?.shift(-dp.estar));
        }
        g.set(d + 1 + i, 1 + i, Laurent::x_pow(spec, -dp.e[i]));
    }
    Ok(g)
}

#[derive(Clone, Debug)]
pub struct QnMembership {
    pub member: bool,
    pub lambda1: AbsValue,
    /// Γ coordinates `(ã₀, ã₁, …, ãₙ)` of a shortest vector.
    pub witness: Vec<Poly>,
}

/// `‖D U_x v‖ < q^{eps} for some v ∈ Γ∖{0}`, decided through λ₁.
pub fn qn_membership(m: &AnalyticMap, x: &[Laurent], dp: &DParams, eps: QExp) -> Result<QnMembership> {
    let lat = lattice_at(m, x, dp)?;
    let r = reduce_lattice(&lat)?;
    let witness = r.transform.column(0).iter().map(|c| c.to_poly()).collect::<std::result::Result<Vec<_>, _>>()?;
    let lambda1 = r.lambda1();
    Ok(QnMembership { member: lambda1.lt_qpow(eps), lambda1, witness })
}

/// On a ball where `κ = max(|aᵢ/a₀| var fᵢ, |aᵢ/a_*| var ∂_j fᵢ) < 1`,
/// `D U_x = (I + P) D U_c` with `‖P‖ < 1`, an isometry, so membership is
/// constant and equal to its value at the center.
pub fn qn_cell_decision(m: &AnalyticMap, dp: &DParams, ball: &Ball, eps: QExp) -> Result<CellDecision> {
    let c = ball.center();
    let r = ball.radius_exp();
    let jac = m.jacobian();
    for (i, fi) in m.components().iter().enumerate() {
        let var = Taylor::new(fi, c)?.variation(r);
        if !var.shift(dp.e[i] - dp.e0).lt_qpow(QExp::from_integer(0)) {
            return Ok(CellDecision::Undecided);
        }
        for g in &jac[i] {
            let var = Taylor::new(g, c)?.variation(r);
            if !var.shift(dp.e[i] - dp.estar).lt_qpow(QExp::from_integer(0)) {
                return Ok(CellDecision::Undecided);
            }
        }
    }
    Ok(if qn_membership(m, c, dp, eps)?.member { CellDecision::In } else { CellDecision::Out })
}

/// Exact measure of `{x ∈ B : λ₁(D U_x Γ) < q^{eps}}`.
pub fn qn_measure(m: &AnalyticMap, dp: &DParams, ball: &Ball, eps: QExp, max_depth: i64) -> Result<SweepReport> {
    if ball.dim() != m.d() {
        return Err(Error::Dimension("ball and map dimensions differ".into()));
    }
    let failure = std::sync::Mutex::new(None);
    let rep = sweep(ball, max_depth, |b| {
        qn_cell_decision(m, dp, b, eps).unwrap_or_else(|e| {
            *failure.lock().unwrap() = Some(e);
            CellDecision::Undecided
        })
    });
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(rep),
    }
}

/// Coordinates of `h(x)v = D U_x v` for a Γ vector v, as polynomials in x.
pub fn hx_vector(m: &AnalyticMap, dp: &DParams, v: &[Poly]) -> Result<Vec<MultiPoly>> {
    let (d, n) = (m.d(), m.n());
    if v.len() != n + 1 {
        return Err(Error::Dimension("Γ vector of the wrong length".into()));
    }
    let spec = m.spec();
    let lv: Vec<Laurent> = v.iter().map(|p| p.to_laurent()).collect();
    let mut first = MultiPoly::constant(spec, d, lv[0].clone());
    for i in 0..n {
        first = first.checked_add(&m.components()[i].scale(&lv[1 + i]))?;
    }
    let mut out = vec![first.shift_coeffs(-dp.e0)];
    let jac = m.jacobian();
    for j in 0..d {
        let mut g = MultiPoly::zero(spec, d);
        for i in 0..n {
            g = g.checked_add(&jac[i][j].scale(&lv[1 + i]))?;
        }
        out.push(g.shift_coeffs(-dp.estar));
    }
    for i in 0..n {
        out.push(MultiPoly::constant(spec, d, lv[1 + i].shift(-dp.e[i])));
    }
    Ok(out)
}

fn multipoly_det(rows: &[Vec<MultiPoly>]) -> Result<MultiPoly> {
    let k = rows.len();
    if k == 1 {
        return Ok(rows[0][0].clone());
    }
    let mut acc = MultiPoly::zero(rows[0][0].spec(), rows[0][0].nvars());
    for j in 0..k {
        if rows[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly>> = rows[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, p)| p.clone()).collect())
            .collect();
        let t = rows[0][j].checked_mul(&multipoly_det(&minor)?)?;
        acc = if j % 2 == 0 { acc.checked_add(&t)? } else { acc.checked_sub(&t)? };
    }
    Ok(acc)
}

/// The components of `h(x)Δ` (a k-vector) with at most one starred index;
/// `‖h(x)Δ‖` is the max of their absolute values.
pub fn hx_wedge_components(m: &AnalyticMap, dp: &DParams, delta: &PrimitiveSubmodule) -> Result<Vec<MultiPoly>> {
    let d = m.d();
    let vecs = delta.rows.iter().map(|r| hx_vector(m, dp, r)).collect::<Result<Vec<_>>>()?;
    let dim = vecs[0].len();
    let k = vecs.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let starred = idx.iter().filter(|&&i| (1..=d).contains(&i)).count();
        if starred <= 1 {
            let sub: Vec<Vec<MultiPoly>> = vecs.iter().map(|v| idx.iter().map(|&i| v[i].clone()).collect()).collect();
            let c = multipoly_det(&sub)?;
            if !c.is_zero() {
                out.push(c);
            }
        }
        // Next k-subset in lexicographic order.
        let mut p = k;
        while p > 0 && idx[p - 1] == dim - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        idx[p - 1] += 1;
        for i in p..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaReport {
    pub rows: Vec<Vec<String>>,
    pub rank: usize,
    /// `log_q sup_{x∈V} ‖h(x)Δ‖`.
    pub sup_exp: Option<i64>,
    /// Empirical goodness constant at exponent `alpha` (condition A).
    pub good_c: Option<f64>,
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbcReport {
    pub alpha: String,
    pub deltas: Vec<DeltaReport>,
    /// Largest number of Δ with `‖h(x)Δ‖ ≤ 1` over the sample points (condition B).
    pub max_small_count: usize,
    /// `log_q` of the smallest sup over Δ (condition C).
    pub rho_exp: Option<i64>,
}

/// Conditions (A), (B), (C) over a finite list of primitive submodules.
/// Goodness is probed at thresholds `sup·q^{-1}, …, sup·q^{-eps_steps}`
/// at resolution `res`; (B) samples the centers of the resolution-`res` grid.
pub fn check_abc(
    m: &AnalyticMap,
    v: &Ball,
    dp: &DParams,
    deltas: &[PrimitiveSubmodule],
    eps_steps: i64,
    res: i64,
) -> Result<AbcReport> {
    let mut reports = Vec::new();
    let mut families = Vec::new();
    let mut max_deg = 1;
    for delta in deltas {
        let fam = hx_wedge_components(m, dp, delta)?;
        max_deg = max_deg.max(fam.iter().filter_map(|g| g.degree()).max().unwrap_or(0));
        families.push(fam);
    }
    let alpha = poly_good_constant(m.d() as u32, max_deg).alpha;
    let mut rho: Option<i64> = None;
    for (delta, fam) in deltas.iter().zip(&families) {
        let sup = fam.iter().map(|g| sup_norm_on_ball(g, v)).collect::<Result<Vec<_>>>()?.into_iter().max();
        let sup_exp = sup.and_then(|s| s.exponent());
        let (good_c, certified) = match sup_exp {
            Some(s) => {
                let grid: Vec<QExp> = (1..=eps_steps).map(|k| QExp::from_integer(s - k)).collect();
                let est = certify_good_family(fam, v, alpha, &grid, res)?;
                (Some(est.c), est.certified)
            }
            None => (None, true),
        };
        rho = match (rho, sup_exp) {
            (None, s) => s,
            (Some(r), Some(s)) => Some(r.min(s)),
            (Some(_), None) => None,
        };
        reports.push(DeltaReport {
            rows: delta.rows.iter().map(|r| r.iter().map(|p| p.to_laurent().body_string()).collect()).collect(),
            rank: delta.rank(),
            sup_exp,
            good_c,
            certified,
        });
    }
    let grid = crate::ffield::GridSpec::new(v.clone(), res)?;
    let mut max_small = 0;
    for cell in crate::ffield::enumerate_cells(&grid) {
        let x = cell.center();
        let mut count = 0;
        for fam in &families {
            let norm = fam.iter().map(|g| g.eval(x).map(|y| y.abs())).collect::<Result<Vec<_>>>()?.into_iter().max();
            if norm.unwrap_or(AbsValue::Zero) <= AbsValue::ONE {
                count += 1;
            }
        }
        max_small = max_small.max(count);
    }
    Ok(AbcReport { alpha: alpha.to_string(), deltas: reports, max_small_count: max_small, rho_exp: rho })
}

#[derive(Clone, Debug, Serialize)]
pub struct QnProbeRow {
    pub eps_exp: i64,
    /// Lower and upper measure relative to |B|.
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    pub certified: bool,
    #[serde(skip)]
    pub report: SweepReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct QnProbe {
    pub rows: Vec<QnProbeRow>,
    /// Least-squares slope of `log_q(measure/|B|)` against `log_q ε`.
    pub alpha_hat: Option<f64>,
}

/// Least-squares slope through `(x_i, y_i)`; `None` with fewer than two points.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Measures of the nondivergence sets over `ε = q^e`, e in `eps_exps`.
pub fn qn_bound_probe(m: &AnalyticMap, ball: &Ball, dp: &DParams, eps_exps: &[i64], max_depth: i64) -> Result<QnProbe> {
    let q = ball.spec().q() as f64;
    let bm = ball.measure();
    let mut rows = Vec::new();
    for &e in eps_exps {
        let rep = qn_measure(m, dp, ball, Ratio::from_integer(e), max_depth)?;
        let lower_ratio = rep.lower.to_f64() / bm.to_f64();
        let upper_ratio = rep.upper.to_f64() / bm.to_f64();
        rows.push(QnProbeRow { eps_exp: e, lower_ratio, upper_ratio, certified: rep.certified(), report: rep });
    }
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.upper_ratio > 0.0).map(|r| (r.eps_exp as f64, r.upper_ratio.ln() / q.ln())).collect();
    Ok(QnProbe { alpha_hat: fit_slope(&pts), rows })
}
