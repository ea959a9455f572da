//! Single-shot subcommands: point evaluation, witnesses, sublevel measures,
//! goodness checks and lattice reduction.

use std::path::Path;

use fqapprox::dioph::{best_a0, find_witness};
use fqapprox::ffield::QExp;
use fqapprox::goodfn::{certify_good, poly_good_constant, satisfies_good_bound, sublevel_measure_family};
use fqapprox::latdyn::{reduce_lattice, LaurentMatrix, ReducedLattice};
use fqapprox::ultracalc::{check_conditions, sup_norm_on_ball, MultiPoly};
use fqapprox::{FieldSpec, Laurent};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::report::{measure_json, ExperimentReport, Table};
use crate::CliError;

fn parse_point(spec: &std::sync::Arc<FieldSpec>, point: &[String], d: usize) -> Result<Vec<Laurent>, CliError> {
    if point.len() != d {
        return Err(CliError::Config(format!("point has {} coordinates, map has d = {d}", point.len())));
    }
    Ok(point.iter().map(|s| Laurent::parse_body(spec, s)).collect::<Result<_, _>>()?)
}

/// `f(x)`, `θ(x)`, the Jacobian, the standing bounds on the domain and,
/// given coefficients a, the value `a·f(x) + θ(x)` with its best `a₀`.
pub fn approx_eval(cfg: &ExperimentConfig, point: &[String], coeffs: &[String]) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let s = cfg.setup()?;
    let m = &s.map;
    let x = parse_point(&s.spec, point, m.d())?;
    let body = |v: &Laurent| v.body_string();
    let mut rep = ExperimentReport::new("approx_eval", &cfg);
    rep.summarize("point", x.iter().map(body).collect::<Vec<_>>());
    rep.summarize("f", m.eval(&x)?.iter().map(body).collect::<Vec<_>>());
    rep.summarize("theta", body(&m.eval_theta(&x)?));
    let jac = m
        .jacobian()
        .iter()
        .map(|row| row.iter().map(|g| g.eval(&x).map(|v| body(&v))).collect::<fqapprox::Result<Vec<_>>>())
        .collect::<fqapprox::Result<Vec<_>>>()?;
    rep.summarize("jacobian", jac);
    let cond = check_conditions(m, &s.domain)?;
    rep.summarize("normalized", cond.normalized);
    rep.summarize("condition_violations", cond.violations());
    if !coeffs.is_empty() {
        if coeffs.len() != m.n() {
            return Err(CliError::Config(format!("{} coefficients for n = {}", coeffs.len(), m.n())));
        }
        let a = coeffs.iter().map(|c| Laurent::parse_body(&s.spec, c)).collect::<Result<Vec<_>, _>>()?;
        let mut z = m.eval_theta(&x)?;
        for (ai, fi) in a.iter().zip(m.eval(&x)?) {
            z = z.checked_add(&ai.checked_mul(&fi)?)?;
        }
        let (a0, dist) = best_a0(&z)?;
        rep.summarize("form_value", body(&z));
        rep.summarize("best_a0", body(&a0.to_laurent()));
        rep.summarize("distance_to_polynomials", dist.to_string());
    }
    Ok(rep)
}

/// First Ψ-witness on the shell `‖a‖ = q^t`; the verdict is its existence.
pub fn approx_witness(cfg: &ExperimentConfig, point: &[String], shell: i64) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let s = cfg.setup()?;
    let psi = s.require_psi()?;
    let x = parse_point(&s.spec, point, s.map.d())?;
    let theta_on = cfg.theta && s.map.theta().is_some();
    let s_count = fqapprox::ffield::shell_count(s.spec.q(), s.map.n() as u32, shell.max(0) as u32);
    s.check_tuples(s_count, "shell")?;
    let w = find_witness(&s.map, &x, psi, shell, theta_on)?;
    let mut rep = ExperimentReport::new("approx_witness", &cfg);
    rep.summarize("shell", shell);
    rep.summarize("witness", &w);
    rep.verdict("witness_found", w.is_some(), format!("shell {shell}"));
    Ok(rep)
}

fn parse_g(cfg: &mut ExperimentConfig, g: &str) -> Result<(crate::config::Setup, MultiPoly), CliError> {
    let s = cfg.setup()?;
    let poly = MultiPoly::parse(&s.spec, s.domain.dim(), g)?;
    Ok((s, poly))
}

/// Exact measure of `{x ∈ B : |g(x)| < q^e}`.
pub fn measure_sublevel(cfg: &ExperimentConfig, g: &str, eps_exp: &str) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let (s, poly) = parse_g(&mut cfg, g)?;
    let e: QExp = crate::config::parse_qexp(eps_exp)?;
    let r = sublevel_measure_family(std::slice::from_ref(&poly), &s.domain, e, cfg.grid, cfg.grid + 4)?;
    let mut rep = ExperimentReport::new("measure_sublevel", &cfg);
    rep.summarize("g", poly.to_string());
    rep.summarize("report", &r);
    rep.summarize("lower", measure_json(&r.lower));
    rep.summarize("upper", measure_json(&r.upper));
    rep.summarize("ratio_to_ball", r.lower.ratio(&r.ball_measure).to_string());
    rep.verdict("certified", r.certified, "sweep decided every cell");
    Ok(rep)
}

/// Checks `|{|g| < ε}| ≤ C (ε/‖g‖_B)^α |B|` with the certified polynomial
/// constants at every `ε = q^e`.
pub fn measure_good(cfg: &ExperimentConfig, g: &str, eps_exps: &[String]) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let (s, poly) = parse_g(&mut cfg, g)?;
    let q = s.spec.q();
    let deg = poly.degree().ok_or_else(|| CliError::Config("g is zero".into()))?;
    let params = poly_good_constant(s.domain.dim() as u32, deg);
    let sup = sup_norm_on_ball(&poly, &s.domain)?;
    let grid = eps_exps.iter().map(|e| crate::config::parse_qexp(e)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new("sublevels", &["eps_exp", "measure", "ratio_to_ball", "within_bound"]);
    let mut ok = true;
    for &e in &grid {
        let r = sublevel_measure_family(std::slice::from_ref(&poly), &s.domain, e, cfg.grid, cfg.grid + 4)?;
        let holds = satisfies_good_bound(&r, sup, params, q);
        ok &= holds;
        table.push(vec![e.to_string(), r.upper.to_string(), r.upper.ratio(&r.ball_measure).to_string(), holds.to_string()]);
    }
    let est = certify_good(&poly, &s.domain, params.alpha, &grid, cfg.grid)?;
    let mut rep = ExperimentReport::new("measure_good", &cfg);
    rep.summarize("g", poly.to_string());
    rep.summarize("sup", sup.to_string());
    rep.summarize("c", params.c.to_string());
    rep.summarize("alpha", params.alpha.to_string());
    rep.diagnose("empirical_c", &est);
    rep.verdict("good_bound_holds", ok, "every threshold within C(ε/sup)^α|B|");
    rep.tables.push(table);
    Ok(rep)
}

fn load_matrix(cfg: &mut ExperimentConfig, path: &Path) -> Result<LaurentMatrix, CliError> {
    let rows: Vec<Vec<String>> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let spec = FieldSpec::with_order(cfg.field)?;
    Ok(LaurentMatrix::parse_rows(&spec, &rows)?)
}

fn reduced_json(r: &ReducedLattice) -> serde_json::Value {
    json!({
        "basis": r.basis.to_string_rows(),
        "transform": r.transform.to_string_rows(),
        "minima": r.minima,
        "pivot_history": r.pivot_history,
    })
}

pub fn lattice_reduce(cfg: &ExperimentConfig, matrix: &Path) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let m = load_matrix(&mut cfg, matrix)?;
    let r = reduce_lattice(&m)?;
    let mut rep = ExperimentReport::new("lattice_reduce", &cfg);
    rep.summarize("input", m.to_string_rows());
    rep.summarize("reduced", reduced_json(&r));
    Ok(rep)
}

/// Successive minima; square inputs also check `Σ log_q λᵢ = log_q |det|`.
pub fn lattice_minima(cfg: &ExperimentConfig, matrix: &Path) -> Result<ExperimentReport, CliError> {
    let mut cfg = cfg.clone();
    let m = load_matrix(&mut cfg, matrix)?;
    let r = reduce_lattice(&m)?;
    let mut rep = ExperimentReport::new("lattice_minima", &cfg);
    rep.summarize("minima", &r.minima);
    rep.summarize("lambda1", r.lambda1().to_string());
    rep.summarize("minima_sum", r.minima_sum());
    if m.nrows() == m.ncols() {
        let det = m.det()?.abs().exponent();
        rep.summarize("log_det", det);
        rep.verdict("minkowski_equality", det == Some(r.minima_sum()), "Π λᵢ = |det M|");
    }
    Ok(rep)
}
