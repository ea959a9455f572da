//! The ubiquity-lemma series `Σ φ(q^t)^{s−γ} / ρ(q^t)^{d−γ}` and the
//! Khintchine-type series `Σ_a ‖a‖ (Ψ(a)/‖a‖)^{s+1−d}` it is compared with.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::dioph::ApproxFn;
use crate::ffield::{qpow_f64, qpow_rational, shell_count, QExp};
use crate::{Error, Result};

use super::witness::UbiquityParams;

#[derive(Clone, Debug, Serialize)]
pub struct SeriesRow {
    pub t: i64,
    pub ubiquity_term: f64,
    /// Khintchine shell term on the shell `‖a‖ = k₀⁻¹ q^t`.
    pub khintchine_term: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UbiquitySum {
    pub rows: Vec<SeriesRow>,
    /// Exact partial sum of the ubiquity series when every term is rational.
    #[serde(serialize_with = "ser_opt")]
    pub partial: Option<BigRational>,
    pub partial_f64: f64,
    /// Power laws: per-step exponent of the geometric term ratio.
    #[serde(serialize_with = "super::ser_opt_qexp")]
    pub ratio_exp: Option<QExp>,
    pub diverges: Option<bool>,
    #[serde(serialize_with = "ser_opt")]
    pub limit: Option<BigRational>,
}

fn ser_opt<S: serde::Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// `c^k`, k integral.
fn rat_pow(c: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        num_traits::pow(c.clone(), k as usize)
    } else {
        num_traits::pow(c.recip(), (-k) as usize)
    }
}

/// `c q^e` raised to σ, exactly when σ and `eσ` are integers.
fn exact_pow(q: u32, c: &BigRational, e: QExp, sigma: QExp) -> Option<BigRational> {
    let es = e * sigma;
    (sigma.is_integer() && es.is_integer() && (c.is_positive() || sigma.to_integer() > 0))
        .then(|| rat_pow(c, sigma.to_integer()) * qpow_rational(q, es.to_integer()))
}

fn approx_pow(q: u32, c: &BigRational, e: QExp, sigma: QExp) -> f64 {
    let c = c.to_f64().unwrap_or(f64::NAN);
    let s = *sigma.numer() as f64 / *sigma.denom() as f64;
    c.powf(s) * qpow_f64(q, e * sigma)
}

/// Partial sums over `1 ≤ t ≤ T` with `φ(r) = k₀ r⁻¹ ψ(k₀⁻¹ r)`,
/// `ρ(r) = k₁ r^{-(n+1)}`, γ = d − 1, and ψ given shellwise by `psi`.
pub fn ubiquity_sum(psi: &ApproxFn, params: &UbiquityParams, s: QExp, big_t: i64) -> Result<UbiquitySum> {
    let gamma = QExp::from_integer(params.gamma() as i64);
    if s <= gamma {
        return Err(Error::Hypothesis("need s > γ".into()));
    }
    if big_t < 1 {
        return Err(Error::Invalid("need T ≥ 1".into()));
    }
    let q = params.q;
    let (n, k0, k1) = (params.n as i64, params.k0_exp(), params.k1_exp());
    let sigma = s - gamma;
    let mut rows = Vec::new();
    let mut partial = Some(BigRational::zero());
    let mut partial_f64 = 0.0;
    for t in 1..=big_t {
        // φ(q^t) = c q^{k₀ − t + e}, where ψ(q^{t−k₀}) = c q^e.
        let shell = t - k0;
        let (c, e) = psi.shell_value(shell)?;
        let phi_e = QExp::from_integer(k0 - t) + e;
        let rho_e = QExp::from_integer(k1 - (n + 1) * t);
        let term_f = approx_pow(q, &c, phi_e, sigma) * qpow_f64(q, -rho_e);
        let term = exact_pow(q, &c, phi_e, sigma)
            .filter(|_| rho_e.is_integer())
            .map(|v| v * qpow_rational(q, -rho_e.to_integer()));
        partial = partial.zip(term).map(|(a, b)| a + b);
        partial_f64 += term_f;
        // ‖a‖ (Ψ/‖a‖)^σ summed over the shell, with Ψ = c q^e and ‖a‖ = q^shell.
        let kh = shell_count(q, params.n as u32, shell as u32) as f64
            * qpow_f64(q, QExp::from_integer(shell))
            * approx_pow(q, &c, e - QExp::from_integer(shell), sigma);
        rows.push(SeriesRow { t, ubiquity_term: term_f, khintchine_term: kh, ratio: kh / term_f });
    }
    let (ratio_exp, diverges, limit) = match psi {
        ApproxFn::PowerLaw { c, .. } if c.is_zero() => (None, Some(false), Some(BigRational::zero())),
        ApproxFn::PowerLaw { c, tau } => {
            // Term(t) ∝ q^{t((n+1) − σ(1+τ))}.
            let r = QExp::from_integer(n + 1) - sigma * (QExp::one() + tau);
            let div = r >= QExp::from_integer(0);
            let limit = if div || !r.is_integer() {
                None
            } else {
                // Σ_{t≥1} C q^{rt} = first / (1 − q^r), first = term at t = 1.
                let phi_e = QExp::from_integer(k0 - 1) - *tau * QExp::from_integer(1 - k0);
                let rho_e = QExp::from_integer(k1 - (n + 1));
                exact_pow(q, c, phi_e, sigma)
                    .filter(|_| rho_e.is_integer())
                    .map(|first| first * qpow_rational(q, -rho_e.to_integer()) / (BigRational::one() - qpow_rational(q, r.to_integer())))
            };
            (Some(r), Some(div), limit)
        }
        ApproxFn::ShellTable(_) => (None, None, None),
    };
    Ok(UbiquitySum { rows, partial, partial_f64, ratio_exp, diverges, limit })
}
