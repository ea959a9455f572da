//! The four headline experiments.

use fqapprox::dioph::{
    borel_cantelli_sum, in_phi_f, measure_big_a, polys_of_degree, shell_hits, sweep_big_a, ApproxFn,
};
use fqapprox::ffield::{enumerate_cells, qpow_rational, shell_count, QExp};
use fqapprox::latdyn::{
    build_ceil_eps, build_d, hx_wedge_components, primitive_submodules, qn_bound_probe, DParams,
};
use fqapprox::ubiq::{
    construct_resonant_witness, covering_fraction, default_u0, lambda_phi_hits, ubiquity_sum, UbiquityParams,
};
use fqapprox::ultracalc::sup_norm_on_ball;
use fqapprox::Measure;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::json;

use crate::config::{parse_qexp, ExperimentConfig};
use crate::report::{measure_json, ExperimentReport, Table};
use crate::CliError;

fn integral(e: QExp, what: &str) -> Result<i64, CliError> {
    if e.is_integer() {
        Ok(e.to_integer())
    } else {
        Err(CliError::Config(format!("{what} exponent {e} must be an integer")))
    }
}

fn nonincreasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

/// Tail measures `W(T0'..T1)`, cumulative hits `W(T0..T1')` (cell centers) and the
/// Borel–Cantelli shell sums, with the convergence constant
/// `C = max tail measure / tail sum`.
pub fn run_khintchine(cfg: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let s = cfg.setup()?;
    let psi = s.require_psi()?.clone();
    let [t0, t1] = cfg.shells;
    if t0 < 0 || t1 < t0 {
        return Err(CliError::Config(format!("bad shell range {t0}:{t1}")));
    }
    let (q, n) = (s.spec.q(), s.map.n() as u32);
    s.check_tuples(shell_count(q, n, t1 as u32), "largest shell")?;
    let grid = s.grid(cfg.grid)?;
    let theta_on = cfg.theta && s.map.theta().is_some();
    let bc = borel_cantelli_sum(&psi, q, n, t1)?;
    let ball = grid.domain.measure();

    let sh = shell_hits(&s.map, &psi, theta_on, t0, t1, &grid)?;
    let per_shell: Vec<Measure> = (t0..=t1).map(|t| sh.measure(t, t)).collect();
    let tails: Vec<Measure> = (t0..=t1).map(|t| sh.measure(t, t1)).collect();
    let hits: Vec<Measure> = (t0..=t1).map(|t| sh.measure(t0, t)).collect();
    let tail_sum = |t: i64| -> BigRational { bc.terms[t as usize..].iter().sum() };

    let mut table = Table::new(
        "shells",
        &["t", "shell_sum", "shell_measure", "tail_measure", "tail_sum", "hit_measure", "hit_fraction"],
    );
    let mut c_max: Option<BigRational> = Some(BigRational::zero());
    for (i, t) in (t0..=t1).enumerate() {
        let ts = tail_sum(t);
        let tail = tails[i].to_rational();
        if ts.is_zero() {
            if !tail.is_zero() {
                c_max = None;
            }
        } else if let Some(c) = &mut c_max {
            let r = &tail / &ts;
            if r > *c {
                *c = r;
            }
        }
        table.push(vec![
            t.to_string(),
            bc.terms[t as usize].to_string(),
            per_shell[i].to_string(),
            tails[i].to_string(),
            ts.to_string(),
            hits[i].to_string(),
            hits[i].ratio(&ball).to_string(),
        ]);
    }

    let mut rep = ExperimentReport::new("khintchine", &cfg);
    rep.summarize("psi", psi.to_string());
    rep.summarize("theta_applied", theta_on);
    rep.summarize("domain_measure", measure_json(&ball));
    rep.summarize("partial_sum", bc.partial.to_string());
    rep.summarize("closed_form_limit", bc.limit.as_ref().map(|l| l.to_string()));
    rep.summarize("diverges", bc.diverges);
    rep.summarize("tail_constant", c_max.as_ref().map(|c| c.to_string()));
    rep.summarize("tail_measures", tails.iter().map(measure_json).collect::<Vec<_>>());
    rep.summarize("hit_measures", hits.iter().map(measure_json).collect::<Vec<_>>());
    rep.verdict("tail_measure_nonincreasing_in_T0", nonincreasing(&tails), "W(T0..T1) shrinks as T0 grows");
    rep.verdict(
        "hit_fraction_nondecreasing_in_T1",
        hits.windows(2).all(|w| w[0] <= w[1]),
        "W(T0..T1) grows with T1",
    );
    rep.verdict(
        "tail_bounded_by_constant_times_tail_sum",
        c_max.is_some(),
        "a nonzero tail measure over a zero tail sum has no constant",
    );
    if let Some(l) = &bc.limit {
        rep.verdict("closed_form_bounds_partial_sum", bc.partial <= *l, format!("partial {} <= limit {l}", bc.partial));
    }
    rep.tables.push(table);
    Ok(rep)
}

/// Every t-vector with entries in `0..=tmax`.
fn all_tvecs(n: usize, tmax: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v| (0..=tmax).map(move |t| [v.clone(), vec![t]].concat())).collect();
    }
    out
}

/// `|𝒜_δ| / (δ|U|)` over the δ list and t-vectors; the verdict asks that the
/// largest ratio at the smallest δ not exceed the one at the next larger δ.
pub fn run_biggrad(cfg: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let s = cfg.setup()?;
    let (q, n) = (s.spec.q(), s.map.n());
    let eps = parse_qexp(&cfg.eps)?;
    let mut deltas = cfg.delta_exps.iter().map(|d| parse_qexp(d)).collect::<Result<Vec<_>, _>>()?;
    deltas.sort_by(|a, b| b.cmp(a));
    deltas.dedup();
    let tvecs = if cfg.tvecs.is_empty() { all_tvecs(n, cfg.tmax) } else { cfg.tvecs.clone() };
    for tv in &tvecs {
        let count: u128 = tv.iter().map(|&t| polys_of_degree(&s.spec, t).len() as u128).product();
        s.check_tuples(count, &format!("t-vector {tv:?}"))?;
    }
    let grid = match cfg.sweep_depth {
        Some(_) => None,
        None => Some(s.grid(cfg.grid)?),
    };
    let theta_on = cfg.theta && s.map.theta().is_some();
    let u = s.domain.measure();

    let mut table = Table::new("sweep", &["delta_exp", "tvec", "measure", "ratio", "certified"]);
    let mut maxima: Vec<(QExp, BigRational)> = Vec::new();
    let mut all_certified = true;
    for &de in &deltas {
        let dint = integral(de, "δ")?;
        let scale = qpow_rational(q, dint) * u.to_rational();
        let mut best = BigRational::zero();
        for tv in &tvecs {
            let (m, certified) = match (&grid, cfg.sweep_depth) {
                (Some(g), _) => (measure_big_a(&s.map, de, tv, eps, theta_on, g)?, true),
                (None, Some(depth)) => {
                    let r = sweep_big_a(&s.map, de, tv, eps, theta_on, &s.domain, depth)?;
                    (r.upper, r.certified())
                }
                (None, None) => unreachable!(),
            };
            all_certified &= certified;
            let ratio = m.to_rational() / &scale;
            if ratio > best {
                best = ratio.clone();
            }
            let tvs: Vec<String> = tv.iter().map(|t| t.to_string()).collect();
            table.push(vec![de.to_string(), tvs.join(" "), m.to_string(), ratio.to_string(), certified.to_string()]);
        }
        maxima.push((de, best));
    }

    let mut rep = ExperimentReport::new("biggrad", &cfg);
    rep.summarize("eps", eps.to_string());
    rep.summarize("mode", if grid.is_some() { "cell_centers" } else { "adaptive_sweep" });
    rep.summarize(
        "max_ratio_per_delta",
        maxima.iter().map(|(d, r)| json!({"delta_exp": d.to_string(), "ratio": r.to_string()})).collect::<Vec<_>>(),
    );
    let c = maxima.iter().map(|m| m.1.clone()).max();
    rep.summarize("constant", c.as_ref().map(|c| c.to_string()));
    let bounded = match maxima.as_slice() {
        [.., (_, a), (_, b)] => b <= a,
        _ => true,
    };
    rep.verdict("ratio_bounded", bounded, "largest ratio at the smallest δ is at most that at the next δ");
    if cfg.sweep_depth.is_some() {
        rep.verdict("sweep_certified", all_certified, "every sweep decided all cells");
    }
    rep.tables.push(table);
    Ok(rep)
}

/// Exact measures of `{x ∈ B : λ₁(D U_x Γ) < q^e}` over the ε list, after
/// checking `ε ≤ ρ` against the empirical ρ.
pub fn run_qn(cfg: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let s = cfg.setup()?;
    let qc = &cfg.qn;
    let dp = if qc.tvec.is_empty() {
        DParams::new(qc.e0, qc.estar, qc.e.clone())?
    } else {
        build_d(&build_ceil_eps(qc.t, qc.t_prime, &qc.tvec)?, qc.t, qc.t_prime, &qc.tvec)?
    };
    let n = s.map.n();
    let mut rho: Option<i64> = None;
    for delta in primitive_submodules(&s.spec, n, n + 1, qc.rho_height)? {
        let mut sup = None;
        for g in hx_wedge_components(&s.map, &dp, &delta)? {
            sup = sup.max(sup_norm_on_ball(&g, &s.domain)?.exponent());
        }
        if let Some(e) = sup {
            rho = Some(rho.map_or(e, |r: i64| r.min(e)));
        }
    }
    if let (Some(r), Some(&e)) = (rho, qc.eps_exps.iter().max()) {
        if e > r {
            return Err(CliError::Engine(fqapprox::Error::Hypothesis(format!("ε = q^{e} exceeds ρ = q^{r}"))));
        }
    }
    let mut eps = qc.eps_exps.clone();
    eps.sort_unstable_by(|a, b| b.cmp(a));
    let probe = qn_bound_probe(&s.map, &s.domain, &dp, &eps, qc.max_depth)?;
    let bm = s.domain.measure();

    let mut table = Table::new("qn", &["eps_exp", "lower", "upper", "lower_ratio", "upper_ratio", "certified"]);
    for r in &probe.rows {
        table.push(vec![
            r.eps_exp.to_string(),
            r.report.lower.to_string(),
            r.report.upper.to_string(),
            r.report.lower.ratio(&bm).to_string(),
            r.report.upper.ratio(&bm).to_string(),
            r.certified.to_string(),
        ]);
    }
    let uppers: Vec<Measure> = probe.rows.iter().map(|r| r.report.upper).collect();
    let lowers: Vec<Measure> = probe.rows.iter().map(|r| r.report.lower).collect();
    // ε decreases down the table; each upper bound must sit below the previous lower bound.
    let monotone = uppers.iter().skip(1).zip(&lowers).all(|(u, l)| u <= l);

    let mut rep = ExperimentReport::new("qn", &cfg);
    rep.summarize("d_params", &dp);
    rep.summarize("log_det", dp.log_det(s.map.d()));
    rep.summarize("rho_exp", rho);
    rep.summarize("ball_measure", measure_json(&bm));
    rep.diagnose("alpha_hat", probe.alpha_hat);
    rep.verdict("measure_nonincreasing_as_eps_shrinks", monotone, "exact bounds, ε from largest to smallest");
    rep.verdict("sweep_certified", probe.rows.iter().all(|r| r.certified), "every sweep decided all cells");
    rep.tables.push(table);
    Ok(rep)
}

/// Covering fractions of the resonant neighbourhoods, an audit of the
/// witness construction on every cell outside Φ^f, φ-hits and the
/// divergence series.
pub fn run_ubiquity(cfg: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let s = cfg.setup()?;
    let uc = cfg.ubiquity.clone();
    let delta = parse_qexp(&uc.delta_exp)?;
    let params = UbiquityParams::new(&s.map, delta)?;
    let u0 = default_u0(s.domain.center())?;
    let grid = s.grid(cfg.grid)?;
    let budget = s.max_tuples;
    let mut rep = ExperimentReport::new("ubiquity", &cfg);
    rep.summarize("params", &params);
    rep.summarize("u0", u0.to_string());

    let mut cover = Table::new(
        "covering",
        &["t", "covered", "outside_phi", "ball", "uncovered_outside_phi", "budget_hit", "fraction"],
    );
    let mut covers_ok = true;
    for &t in &uc.ts {
        let c = covering_fraction(&s.map, &u0, t, delta, &grid, budget)?;
        if t >= 1 {
            covers_ok &= c.uncovered_outside_phi == 0 && !c.budget_hit;
        }
        cover.push(vec![
            t.to_string(),
            c.covered.to_string(),
            c.outside_phi.to_string(),
            c.ball.to_string(),
            c.uncovered_outside_phi.to_string(),
            c.budget_hit.to_string(),
            c.covered.ratio(&c.ball).to_string(),
        ]);
    }
    rep.verdict("covering_contains_complement_of_phi", covers_ok, "for every t >= 1 in ts");
    rep.tables.push(cover);

    if uc.audit_witnesses {
        let mut audit = Table::new("witness_audit", &["t", "cells", "outside_phi", "failures"]);
        let mut failures_total = 0u64;
        for &t in uc.ts.iter().filter(|&&t| t >= 1) {
            let (mut cells, mut outside, mut failures) = (0u64, 0u64, 0u64);
            for cell in enumerate_cells(&grid) {
                cells += 1;
                let x = cell.center();
                if in_phi_f(&s.map, x, t, delta)? {
                    continue;
                }
                outside += 1;
                match construct_resonant_witness(&s.map, x, t, delta, &u0) {
                    Ok(w) if w.claims_hold() => {}
                    _ => failures += 1,
                }
            }
            failures_total += failures;
            audit.push(vec![t.to_string(), cells.to_string(), outside.to_string(), failures.to_string()]);
        }
        rep.verdict("witness_audit", failures_total == 0, format!("{failures_total} failed constructions"));
        rep.tables.push(audit);
    }

    if let Some(psi) = &s.psi {
        series(&mut rep, psi, &params, &uc.s, uc.big_t, s.map.d())?;
        let hits = lambda_phi_hits(&s.map, &u0, psi, uc.big_t, delta, &grid, budget)?;
        rep.summarize("phi_hits", measure_json(&hits.hits));
        rep.summarize("phi_hit_cells", hits.cells_hit);
        rep.verdict(
            "phi_hits_are_psi_witnesses",
            hits.witness_failures == 0 && !hits.budget_hit,
            format!("{} hits without a witness", hits.witness_failures),
        );
    }
    Ok(rep)
}

fn series(
    rep: &mut ExperimentReport,
    psi: &ApproxFn,
    params: &UbiquityParams,
    s: &Option<String>,
    big_t: i64,
    d: usize,
) -> Result<(), CliError> {
    let s = match s {
        Some(s) => parse_qexp(s)?,
        None => QExp::from_integer(d as i64),
    };
    let sum = ubiquity_sum(psi, params, s, big_t)?;
    let mut table = Table::new("series", &["t", "ubiquity_term", "khintchine_term", "ratio"]);
    for r in &sum.rows {
        table.push(vec![
            r.t.to_string(),
            format!("{:e}", r.ubiquity_term),
            format!("{:e}", r.khintchine_term),
            format!("{:e}", r.ratio),
        ]);
    }
    rep.summarize("series_s", s.to_string());
    rep.summarize("series_partial", sum.partial.as_ref().map(|p| p.to_string()));
    rep.summarize("series_ratio_exp", sum.ratio_exp.map(|r| r.to_string()));
    rep.summarize("series_diverges", sum.diverges);
    rep.summarize("series_limit", sum.limit.as_ref().map(|l| l.to_string()));
    rep.diagnose("series_partial_f64", sum.partial_f64);
    if let (Some(p), Some(l)) = (&sum.partial, &sum.limit) {
        rep.verdict("series_partial_below_limit", p <= l, format!("{p} <= {l}"));
    }
    rep.tables.push(table);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tvec_enumeration() {
        assert_eq!(all_tvecs(2, 1), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(all_tvecs(1, 2).len(), 3);
    }

    #[test]
    fn monotone_helper() {
        assert!(nonincreasing(&[3, 3, 1]));
        assert!(!nonincreasing(&[1, 2]));
    }
}
