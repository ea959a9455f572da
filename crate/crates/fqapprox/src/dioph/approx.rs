//! Approximating functions Ψ that depend on ‖a‖ only.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ffield::{qpow_f64, qpow_rational, QExp};
use crate::{Error, Result};

/// Ψ on the shell `‖a‖ = q^t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApproxFn {
    /// `Ψ(a) = c ‖a‖^{-τ}`.
    PowerLaw { c: BigRational, tau: QExp },
    /// `Ψ = q^{values[t]}` on shell t; shells past the end are errors.
    ShellTable(Vec<QExp>),
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("bad number {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((i, f)) = s.split_once('.') {
        let digits = f.len() as u32;
        let whole: BigInt = format!("{i}{f}").parse().map_err(|_| bad())?;
        return Ok(BigRational::new(whole, num_traits::pow(BigInt::from(10), digits as usize)));
    }
    Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
}

fn parse_qexp(s: &str) -> Result<QExp> {
    let r = parse_rational(s)?;
    let (n, d) = (r.numer().to_i64(), r.denom().to_i64());
    match (n, d) {
        (Some(n), Some(d)) => Ok(QExp::new(n, d)),
        _ => Err(Error::Invalid(format!("exponent {s:?} out of range"))),
    }
}

impl ApproxFn {
    pub fn power_law(c: BigRational, tau: QExp) -> Result<Self> {
        if c.is_negative() || tau < QExp::from_integer(0) {
            return Err(Error::Invalid("Ψ must be nonnegative and nonincreasing".into()));
        }
        Ok(ApproxFn::PowerLaw { c, tau })
    }

    /// `Ψ(a) = ‖a‖^{-τ}`.
    pub fn norm_power(tau: i64) -> Self {
        ApproxFn::PowerLaw { c: BigRational::one(), tau: QExp::from_integer(tau) }
    }

    pub fn zero() -> Self {
        ApproxFn::PowerLaw { c: BigRational::zero(), tau: QExp::from_integer(0) }
    }

    pub fn shell_table(values: Vec<QExp>) -> Result<Self> {
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Invalid("shell table must be nonincreasing".into()));
        }
        Ok(ApproxFn::ShellTable(values))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ApproxFn::PowerLaw { c, .. } if c.is_zero())
    }

    /// `Ψ = c · q^e` on shell t.
    pub fn shell_value(&self, t: i64) -> Result<(BigRational, QExp)> {
        match self {
            ApproxFn::PowerLaw { c, tau } => Ok((c.clone(), -*tau * QExp::from_integer(t))),
            ApproxFn::ShellTable(v) => usize::try_from(t)
                .ok()
                .and_then(|i| v.get(i))
                .map(|&e| (BigRational::one(), e))
                .ok_or_else(|| Error::Invalid(format!("shell {t} outside the Ψ table"))),
        }
    }

    /// Smallest integer k with `q^k ≥ Ψ` on shell t, so that `|z| < Ψ` iff
    /// `|z| < q^k`; `None` when Ψ vanishes there.
    pub fn threshold(&self, q: u32, t: i64) -> Result<Option<i64>> {
        let (c, e) = self.shell_value(t)?;
        if c.is_zero() {
            return Ok(None);
        }
        let (u, v) = (*e.numer(), *e.denom());
        let cv = num_traits::pow(c.clone(), v as usize);
        // q^k ≥ c q^{u/v}  ⇔  q^{kv−u} ≥ c^v.
        let holds = |k: i64| qpow_rational(q, k * v - u) >= cv;
        let guess = (e.to_f64().unwrap_or(0.0) + c.to_f64().unwrap_or(1.0).log(q as f64)).floor() as i64;
        let mut k = guess - 2;
        while holds(k) {
            k -= 4;
        }
        while !holds(k) {
            k += 1;
        }
        Ok(Some(k))
    }

    /// Ψ on shell t as an exact rational when the exponent is an integer.
    pub fn shell_rational(&self, q: u32, t: i64) -> Result<Option<BigRational>> {
        let (c, e) = self.shell_value(t)?;
        Ok(e.is_integer().then(|| c * qpow_rational(q, e.to_integer())))
    }

    pub fn shell_f64(&self, q: u32, t: i64) -> Result<f64> {
        let (c, e) = self.shell_value(t)?;
        Ok(c.to_f64().unwrap_or(f64::NAN) * qpow_f64(q, e))
    }
}

impl fmt::Display for ApproxFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxFn::PowerLaw { c, tau } => write!(f, "{c}*q^(-{tau}*t)"),
            ApproxFn::ShellTable(v) => {
                let s: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "table:{}", s.join(","))
            }
        }
    }
}

/// Accepts `c*q^(E*t)`, `q^(E*t)`, `q^(-t)`, a bare constant `c`, and
/// `table:e0,e1,…` (exponents of q per shell).
impl FromStr for ApproxFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(rest) = s.strip_prefix("table:") {
            let v = rest.split(',').filter(|p| !p.is_empty()).map(parse_qexp).collect::<Result<Vec<_>>>()?;
            return ApproxFn::shell_table(v);
        }
        let Some(pos) = s.find("q^(") else {
            return ApproxFn::power_law(parse_rational(&s)?, QExp::from_integer(0));
        };
        let c = match s[..pos].strip_suffix('*') {
            Some(c) => parse_rational(c)?,
            None if pos == 0 => BigRational::one(),
            None => return Err(Error::Invalid(format!("bad Ψ {s:?}"))),
        };
        let inner = s[pos + 3..].strip_suffix(')').ok_or_else(|| Error::Invalid(format!("bad Ψ {s:?}")))?;
        let e = inner.strip_suffix('t').ok_or_else(|| Error::Invalid(format!("Ψ exponent must be linear in t: {s:?}")))?;
        let e = e.strip_suffix('*').unwrap_or(e);
        let slope = match e {
            "" | "+" => QExp::from_integer(1),
            "-" => QExp::from_integer(-1),
            _ => parse_qexp(e)?,
        };
        ApproxFn::power_law(c, -slope)
    }
}
