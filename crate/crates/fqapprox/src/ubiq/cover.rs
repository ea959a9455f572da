//! Exact cell counts of `⋃ Δ(R_g, r)` over resonant functions of bounded
//! height. Candidate g at a cell center x satisfy `|(g+θ)(x)| < |∂₁(g+θ)(x)| r`,
//! which confines `(a₀, a)` to an F_q-affine family solved digit by digit.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::dioph::{find_witness, in_phi_f, ApproxFn};
use crate::ffield::{enumerate_cells, AbsValue, Ball, GridSpec, Laurent, Measure, QExp};
use crate::ultracalc::AnalyticMap;
use crate::{Error, Result};

use super::affine::AffineForms;
use super::witness::{axis_distance, resonant_gate, ResonantFn, UbiquityParams};

/// Memoized gate decisions for one `U₀`.
struct GateCache<'a> {
    m: &'a AnalyticMap,
    u0: &'a Ball,
    seen: Mutex<HashMap<Vec<u64>, bool>>,
}

impl GateCache<'_> {
    fn passes(&self, g: &ResonantFn) -> Result<bool> {
        let key = g.codes();
        if let Some(&v) = self.seen.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let v = resonant_gate(self.m, g, self.u0)?;
        self.seen.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

struct PointForms {
    funcs: Vec<Laurent>,
    theta: Laurent,
    /// `max_i |∂₁fᵢ(x)|` and `|∂₁θ(x)|`.
    d1f: AbsValue,
    d1theta: AbsValue,
}

impl PointForms {
    fn new(m: &AnalyticMap, x: &[Laurent]) -> Result<Self> {
        let mut funcs = vec![Laurent::one(m.spec())];
        funcs.extend(m.eval(x)?);
        let d1f = m.jacobian().iter().map(|row| row[0].eval(x).map(|v| v.abs())).collect::<Result<Vec<_>>>()?;
        let d1theta = match m.theta() {
            Some(t) => t.partial(0).eval(x)?.abs(),
            None => AbsValue::Zero,
        };
        Ok(PointForms {
            funcs,
            theta: m.eval_theta(x)?,
            d1f: d1f.into_iter().max().unwrap_or(AbsValue::Zero),
            d1theta,
        })
    }

    /// All g with `max deg aᵢ ≤ h` (exactly h when `exact`) whose zero set
    /// may come within `q^{dist_exp}` of x along the first axis.
    fn candidates(&self, h: i64, dist_exp: i64) -> Result<Option<AffineForms>> {
        let grad = self.d1f.shift(h).max(self.d1theta);
        let Some(g) = grad.exponent() else {
            return Ok(None);
        };
        let below = g + dist_exp;
        let top_f = self.funcs[1..].iter().filter_map(|f| f.top_degree()).max().unwrap_or(0);
        let h0 = (h + top_f).max(below - 1).max(self.theta.top_degree().unwrap_or(0)).max(0);
        let mut heights = vec![h0];
        heights.extend(std::iter::repeat_n(h, self.funcs.len() - 1));
        AffineForms::solve(&self.funcs, &self.theta, &heights, below)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub covered: Measure,
    /// Cells whose center lies outside `Φ^f(t, δ)`.
    pub outside_phi: Measure,
    pub ball: Measure,
    /// Cells outside `Φ^f` that are not covered.
    pub uncovered_outside_phi: u64,
    /// Some cell hit the tuple budget; `covered` is then a lower bound.
    pub budget_hit: bool,
}

impl CoverReport {
    pub fn fraction(&self) -> f64 {
        self.covered.to_f64() / self.ball.to_f64()
    }
}

struct CellOutcome {
    covered: bool,
    outside_phi: bool,
    budget_hit: bool,
}

/// Fraction of the grid covered by `Δ(R_g, ρ(q^t))`, g over `β_g ≤ q^t`,
/// with `R_g = R̃_g ∩ U₀` when the gate holds on `U₀` and empty otherwise.
pub fn covering_fraction(
    m: &AnalyticMap,
    u0: &Ball,
    t: i64,
    delta_exp: QExp,
    grid: &GridSpec,
    budget: u128,
) -> Result<CoverReport> {
    let params = UbiquityParams::new(m, delta_exp)?;
    if !matches!(u0.relation(&grid.domain)?, crate::ffield::BallRelation::Contains | crate::ffield::BallRelation::Equal) {
        return Err(Error::Hypothesis("grid domain must lie inside U₀".into()));
    }
    let cache = GateCache { m, u0, seen: Mutex::new(HashMap::new()) };
    let rho = params.rho_exp(t);
    let h = params.height_for(t);
    let cells: Vec<Ball> = enumerate_cells(grid).collect();
    let out: Vec<CellOutcome> = cells
        .par_iter()
        .map(|cell| -> Result<CellOutcome> {
            let x = cell.center();
            let outside_phi = t >= 1 && !in_phi_f(m, x, t, delta_exp)?;
            let pf = PointForms::new(m, x)?;
            let mut res = CellOutcome { covered: false, outside_phi, budget_hit: false };
            let Some(fam) = pf.candidates(h, rho)? else {
                return Ok(res);
            };
            if fam.size() > budget {
                res.budget_hit = true;
                return Ok(res);
            }
            for coeffs in fam.iter() {
                if coeffs[1..].iter().all(|p| p.is_zero()) {
                    continue;
                }
                let g = ResonantFn { coeffs };
                let Some(dist) = axis_distance(m, &g, x)? else { continue };
                if dist < AbsValue::Pow(rho) && dist <= u0.radius() && cache.passes(&g)? {
                    res.covered = true;
                    break;
                }
            }
            Ok(res)
        })
        .collect::<Result<_>>()?;
    let cm = grid.cell_measure();
    let count = |f: &dyn Fn(&CellOutcome) -> bool| {
        let k = out.iter().filter(|o| f(o)).count() as u128;
        Measure { q: cm.q, count: k * cm.count, exp: cm.exp }.reduced()
    };
    Ok(CoverReport {
        covered: count(&|o| o.covered),
        outside_phi: count(&|o| o.outside_phi),
        ball: grid.domain.measure().reduced(),
        uncovered_outside_phi: out.iter().filter(|o| o.outside_phi && !o.covered).count() as u64,
        budget_hit: out.iter().any(|o| o.budget_hit),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaHits {
    pub hits: Measure,
    pub cells_hit: u64,
    /// Hits at which `find_witness` found no Ψ-witness on the matching shell.
    pub witness_failures: u64,
    pub budget_hit: bool,
}


/// Cells whose center x has `dist(x, R_g) < φ(β_g)` for some g with
/// `β_g ≤ q^T`, where `φ(r) = k₀ r⁻¹ ψ(k₀⁻¹ r)` and ψ is read off `psi`
/// shellwise (`ψ(q^s)` is Ψ on shell s). Each hit is re-verified as a
/// Ψ-witness on shell `s = log_q ‖a‖`.
pub fn lambda_phi_hits(
    m: &AnalyticMap,
    u0: &Ball,
    psi: &ApproxFn,
    big_t: i64,
    delta_exp: QExp,
    grid: &GridSpec,
    budget: u128,
) -> Result<LambdaHits> {
    if big_t < 1 {
        return Err(Error::Invalid("need T ≥ 1".into()));
    }
    let params = UbiquityParams::new(m, delta_exp)?;
    let q = m.spec().q();
    let cache = GateCache { m, u0, seen: Mutex::new(HashMap::new()) };
    let max_shell = params.height_for(big_t);
    let cells: Vec<Ball> = enumerate_cells(grid).collect();
    let out: Vec<(Option<i64>, bool)> = cells
        .par_iter()
        .map(|cell| -> Result<(Option<i64>, bool)> {
            let x = cell.center();
            let pf = PointForms::new(m, x)?;
            let mut budget_hit = false;
            for s in 0..=max_shell {
                // dist < q^{-s} Ψ_s iff dist < q^{k-s}.
                let Some(k) = psi.threshold(q, s)? else { continue };
                let Some(fam) = pf.candidates(s, k - s)? else { continue };
                if fam.size() > budget {
                    budget_hit = true;
                    continue;
                }
                for coeffs in fam.iter() {
                    let h = coeffs[1..].iter().filter_map(|p| p.degree()).max();
                    if h != Some(s as usize) {
                        continue;
                    }
                    let g = ResonantFn { coeffs };
                    let Some(dist) = axis_distance(m, &g, x)? else { continue };
                    if dist < AbsValue::Pow(k - s) && dist <= u0.radius() && cache.passes(&g)? {
                        return Ok((Some(s), budget_hit));
                    }
                }
            }
            Ok((None, budget_hit))
        })
        .collect::<Result<_>>()?;
    let mut failures = 0;
    for (cell, (hit, _)) in cells.iter().zip(&out) {
        if let Some(s) = hit {
            if find_witness(m, cell.center(), psi, *s, true)?.is_none() {
                failures += 1;
            }
        }
    }
    let cm = grid.cell_measure();
    let k = out.iter().filter(|o| o.0.is_some()).count() as u128;
    Ok(LambdaHits {
        hits: Measure { q: cm.q, count: k * cm.count, exp: cm.exp }.reduced(),
        cells_hit: k as u64,
        witness_failures: failures,
        budget_hit: out.iter().any(|o| o.1),
    })
}
