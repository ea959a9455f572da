//! Truncated Laurent series in X⁻¹ over F_q and the degree absolute value.
//!
//! A nonzero [`Laurent`] stores its leading degree `top` and the coefficients
//! of degrees `top, top-1, ...`. Exact values store their whole (finite)
//! support and carry a nominal precision used when an operation such as
//! inversion has to truncate. Non-exact values store a window of exactly
//! `prec` coefficients; everything below the window is unknown.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::field::{same_field, FieldError, FieldResult, FieldSpec};
use super::poly::Poly;

/// Rational exponent of q, used for thresholds such as `q^{|t|(1-ε)}`.
pub type QExp = Ratio<i64>;

/// `|x| = q^{deg x}`, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AbsValue {
    Zero,
    Pow(i64),
}

impl AbsValue {
    pub const ONE: AbsValue = AbsValue::Pow(0);

    pub fn exponent(self) -> Option<i64> {
        match self {
            AbsValue::Zero => None,
            AbsValue::Pow(e) => Some(e),
        }
    }
    pub fn is_zero(self) -> bool {
        self == AbsValue::Zero
    }
    /// Multiplicative on products.
    pub fn mul(self, o: AbsValue) -> AbsValue {
        match (self, o) {
            (AbsValue::Pow(a), AbsValue::Pow(b)) => AbsValue::Pow(a + b),
            _ => AbsValue::Zero,
        }
    }
    /// Multiply by q^k.
    pub fn shift(self, k: i64) -> AbsValue {
        match self {
            AbsValue::Zero => AbsValue::Zero,
            AbsValue::Pow(e) => AbsValue::Pow(e + k),
        }
    }
    /// Strict comparison with a rational power of q.
    pub fn lt_qpow(self, e: QExp) -> bool {
        match self {
            AbsValue::Zero => true,
            AbsValue::Pow(k) => QExp::from_integer(k) < e,
        }
    }
    pub fn to_f64(self, q: u32) -> f64 {
        match self {
            AbsValue::Zero => 0.0,
            AbsValue::Pow(e) => (q as f64).powi(e as i32),
        }
    }
}

impl fmt::Display for AbsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsValue::Zero => write!(f, "0"),
            AbsValue::Pow(e) => write!(f, "q^{e}"),
        }
    }
}

/// Element of F = F_q((X⁻¹)), possibly truncated.
#[derive(Clone, Debug)]
pub struct Laurent {
    spec: Arc<FieldSpec>,
    top: i64,
    coeffs: Vec<u32>,
    prec: usize,
    exact: bool,
}

impl PartialEq for Laurent {
    fn eq(&self, o: &Self) -> bool {
        same_field(&self.spec, &o.spec)
            && self.exact == o.exact
            && self.coeffs == o.coeffs
            && (self.coeffs.is_empty() || self.top == o.top)
            && (self.exact || self.prec == o.prec)
    }
}
impl Eq for Laurent {}

fn max_floor(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.max(y)),
    }
}

/// Truncated product of two power series in X⁻¹ (first `m` coefficients).
fn series_mul(spec: &FieldSpec, a: &[u32], b: &[u32], m: usize) -> Vec<u32> {
    let mut out = vec![0u32; m];
    for (i, &x) in a.iter().enumerate().take(m) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(m - i) {
            out[i + j] = spec.add(out[i + j], spec.mul(x, y));
        }
    }
    out
}

impl Laurent {
    /// Default nominal precision for exact values built from code.
    pub const DEFAULT_PREC: usize = 16;

    pub fn zero(spec: &Arc<FieldSpec>) -> Self {
        Laurent { spec: spec.clone(), top: 0, coeffs: Vec::new(), prec: Self::DEFAULT_PREC, exact: true }
    }
    pub fn one(spec: &Arc<FieldSpec>) -> Self {
        Self::monomial(spec, 1, 0)
    }
    pub fn constant(spec: &Arc<FieldSpec>, c: u32) -> Self {
        Self::monomial(spec, c, 0)
    }
    /// `c·X^k`, exact.
    pub fn monomial(spec: &Arc<FieldSpec>, c: u32, k: i64) -> Self {
        if c == 0 {
            return Self::zero(spec);
        }
        Laurent { spec: spec.clone(), top: k, coeffs: vec![c], prec: Self::DEFAULT_PREC, exact: true }
    }
    pub fn x_pow(spec: &Arc<FieldSpec>, k: i64) -> Self {
        Self::monomial(spec, 1, k)
    }

    /// Exact value from `(degree, coefficient)` terms; repeated degrees add.
    pub fn from_terms(spec: &Arc<FieldSpec>, terms: &[(i64, u32)]) -> Self {
        let nz: Vec<_> = terms.iter().filter(|t| t.1 != 0).collect();
        if nz.is_empty() {
            return Self::zero(spec);
        }
        let top = nz.iter().map(|t| t.0).max().unwrap();
        let bot = nz.iter().map(|t| t.0).min().unwrap();
        let mut v = vec![0u32; (top - bot + 1) as usize];
        for &&(k, c) in &nz {
            let i = (top - k) as usize;
            v[i] = spec.add(v[i], c);
        }
        Self::normalize(spec, top, v, Self::DEFAULT_PREC, true).expect("exact values never exhaust")
    }

    pub fn from_poly(p: &Poly) -> Self {
        let spec = p.spec();
        match p.degree() {
            None => Self::zero(spec),
            Some(d) => {
                let v: Vec<u32> = p.coeffs().iter().rev().copied().collect();
                Self::normalize(spec, d as i64, v, Self::DEFAULT_PREC.max(d + 1), true).unwrap()
            }
        }
    }

    /// Build from a descending window starting at degree `top`. Leading zeros
    /// are stripped; a non-exact window that is entirely zero is an error.
    pub fn from_window(
        spec: &Arc<FieldSpec>,
        top: i64,
        window: Vec<u32>,
        exact: bool,
    ) -> FieldResult<Self> {
        let prec = window.len().max(1);
        Self::normalize(spec, top, window, prec, exact)
    }

    fn normalize(
        spec: &Arc<FieldSpec>,
        mut top: i64,
        mut v: Vec<u32>,
        prec: usize,
        exact: bool,
    ) -> FieldResult<Self> {
        let lead = v.iter().position(|&c| c != 0);
        let Some(lead) = lead else {
            return if exact { Ok(Self::zero(spec).with_prec(prec)) } else { Err(FieldError::PrecisionExhausted) };
        };
        if lead > 0 {
            v.drain(..lead);
            top -= lead as i64;
        }
        if exact {
            while v.last() == Some(&0) {
                v.pop();
            }
            let prec = prec.max(v.len());
            Ok(Laurent { spec: spec.clone(), top, coeffs: v, prec, exact: true })
        } else {
            let prec = v.len();
            Ok(Laurent { spec: spec.clone(), top, coeffs: v, prec, exact: false })
        }
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn is_exact(&self) -> bool {
        self.exact
    }
    /// Window length (non-exact) or nominal precision (exact).
    pub fn prec(&self) -> usize {
        self.prec
    }
    /// Leading degree, `None` for zero.
    pub fn top_degree(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.top)
        }
    }
    /// Lowest degree whose coefficient is known; `None` when exact.
    pub fn floor(&self) -> Option<i64> {
        if self.exact {
            None
        } else {
            Some(self.top - self.prec as i64 + 1)
        }
    }
    /// Lowest degree with a stored coefficient.
    fn bottom(&self) -> i64 {
        self.top - self.coeffs.len() as i64 + 1
    }
    pub fn abs(&self) -> AbsValue {
        if self.is_zero() {
            AbsValue::Zero
        } else {
            AbsValue::Pow(self.top)
        }
    }
    /// Coefficient of X^k, `None` if it lies below the known window.
    pub fn coeff(&self, k: i64) -> Option<u32> {
        if let Some(f) = self.floor() {
            if k < f {
                return None;
            }
        }
        if self.is_zero() || k > self.top || k < self.bottom() {
            return Some(0);
        }
        Some(self.coeffs[(self.top - k) as usize])
    }
    pub fn leading_coeff(&self) -> u32 {
        self.coeffs.first().copied().unwrap_or(0)
    }
    /// Nonzero `(degree, coefficient)` pairs, descending.
    pub fn terms(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        let top = self.top;
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(move |(i, &c)| (top - i as i64, c))
    }

    /// Set the nominal precision of an exact value, or shorten the window of a
    /// non-exact one.
    pub fn with_prec(mut self, n: usize) -> Self {
        let n = n.max(1);
        if self.exact {
            self.prec = n.max(self.coeffs.len());
            self
        } else if n < self.prec {
            self.coeffs.truncate(n);
            self.prec = n;
            self
        } else {
            self
        }
    }

    /// Forget everything below degree `floor`, producing a non-exact value.
    pub fn truncate_below(&self, floor: i64) -> FieldResult<Self> {
        if let Some(f) = self.floor() {
            if f >= floor {
                return Ok(self.clone());
            }
        }
        if self.is_zero() || self.top < floor {
            return Err(FieldError::PrecisionExhausted);
        }
        let len = (self.top - floor + 1) as usize;
        let mut v = self.coeffs.clone();
        v.resize(len, 0);
        Self::normalize(&self.spec, self.top, v, len, false)
    }

    /// Keep only the terms of degree ≥ `deg` (exact result).
    pub fn keep_degrees_at_least(&self, deg: i64) -> Self {
        let terms: Vec<_> = self.terms().filter(|t| t.0 >= deg).collect();
        Self::from_terms(&self.spec, &terms).with_prec(self.prec)
    }

    fn check(&self, o: &Laurent) -> FieldResult<()> {
        if same_field(&self.spec, &o.spec) {
            Ok(())
        } else {
            Err(FieldError::SpecMismatch)
        }
    }

    pub fn checked_add(&self, o: &Laurent) -> FieldResult<Laurent> {
        self.check(o)?;
        let exact = self.exact && o.exact;
        if self.is_zero() {
            return Ok(if exact { o.clone().with_prec(self.prec.max(o.prec)) } else { o.clone() });
        }
        if o.is_zero() {
            return Ok(if exact { self.clone().with_prec(self.prec.max(o.prec)) } else { self.clone() });
        }
        let fl = max_floor(self.floor(), o.floor());
        let top = self.top.max(o.top);
        let bot = fl.unwrap_or_else(|| self.bottom().min(o.bottom()));
        let len = (top - bot + 1) as usize;
        let mut buf = vec![0u32; len];
        for x in [self, o] {
            for (i, &c) in x.coeffs.iter().enumerate() {
                let k = x.top - i as i64;
                if k < bot {
                    break;
                }
                let idx = (top - k) as usize;
                buf[idx] = self.spec.add(buf[idx], c);
            }
        }
        Self::normalize(&self.spec, top, buf, self.prec.max(o.prec), exact)
    }

    pub fn neg(&self) -> Laurent {
        let mut r = self.clone();
        for c in r.coeffs.iter_mut() {
            *c = self.spec.neg(*c);
        }
        r
    }

    pub fn checked_sub(&self, o: &Laurent) -> FieldResult<Laurent> {
        self.checked_add(&o.neg())
    }

    pub fn checked_mul(&self, o: &Laurent) -> FieldResult<Laurent> {
        self.check(o)?;
        let prec = self.prec.max(o.prec);
        if (self.is_zero() && self.exact) || (o.is_zero() && o.exact) {
            return Ok(Self::zero(&self.spec).with_prec(prec));
        }
        let top = self.top + o.top;
        let f = &self.spec;
        if self.exact && o.exact {
            let mut buf = vec![0u32; self.coeffs.len() + o.coeffs.len() - 1];
            for (i, &a) in self.coeffs.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (j, &b) in o.coeffs.iter().enumerate() {
                    buf[i + j] = f.add(buf[i + j], f.mul(a, b));
                }
            }
            return Self::normalize(f, top, buf, prec, true);
        }
        let fl = max_floor(self.floor().map(|x| x + o.top), o.floor().map(|x| x + self.top))
            .expect("one operand is non-exact");
        let len = (top - fl + 1) as usize;
        let buf = series_mul(f, &self.coeffs, &o.coeffs, len);
        Self::normalize(f, top, buf, len, false)
    }

    /// Multiply by `c ∈ F_q`.
    pub fn scale(&self, c: u32) -> Laurent {
        if c == 0 {
            return Self::zero(&self.spec).with_prec(self.prec);
        }
        let mut r = self.clone();
        for x in r.coeffs.iter_mut() {
            *x = self.spec.mul(*x, c);
        }
        r
    }

    /// Multiply by X^k.
    pub fn shift(&self, k: i64) -> Laurent {
        let mut r = self.clone();
        if !r.is_zero() {
            r.top += k;
        }
        r
    }

    /// Inverse with relative precision `prec` (capped by the operand's own
    /// window when non-exact). Leading-term seed, then Newton steps
    /// `v ← v(2 − uv)` doubling the number of correct coefficients.
    pub fn inv_prec(&self, prec: usize) -> FieldResult<Laurent> {
        if self.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        let f = &self.spec;
        let c0inv = f.inv(self.coeffs[0])?;
        if self.exact && self.coeffs.len() == 1 {
            return Ok(Laurent { spec: f.clone(), top: -self.top, coeffs: vec![c0inv], prec: self.prec, exact: true });
        }
        let prec = if self.exact { prec.max(1) } else { prec.max(1).min(self.prec) };
        let u = &self.coeffs;
        let mut v = vec![c0inv];
        let mut m = 1usize;
        while m < prec {
            m = (2 * m).min(prec);
            let uv = series_mul(f, u, &v, m);
            // 2 - uv
            let mut two_minus: Vec<u32> = uv.iter().map(|&c| f.neg(c)).collect();
            two_minus[0] = f.add(two_minus[0], f.from_int(2));
            v = series_mul(f, &v, &two_minus, m);
        }
        v.truncate(prec);
        v.resize(prec, 0);
        Self::normalize(f, -self.top, v, prec, false)
    }

    /// Inverse at the value's own precision.
    pub fn inv(&self) -> FieldResult<Laurent> {
        self.inv_prec(self.prec)
    }

    /// `self / o` with relative precision `prec` for the inverse.
    pub fn div_prec(&self, o: &Laurent, prec: usize) -> FieldResult<Laurent> {
        self.check(o)?;
        self.checked_mul(&o.inv_prec(prec)?)
    }

    /// Exact quotient of two exact values if it is a finite Laurent
    /// polynomial, by long division from the top.
    pub fn div_exact(&self, o: &Laurent) -> FieldResult<Option<Laurent>> {
        self.check(o)?;
        if o.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        if !self.exact || !o.exact {
            return Ok(None);
        }
        if self.is_zero() {
            return Ok(Some(Self::zero(&self.spec)));
        }
        let f = &self.spec;
        let lead_inv = f.inv(o.coeffs[0])?;
        let lowest = self.bottom() - o.bottom();
        let mut rem = self.clone();
        let mut quot: Vec<(i64, u32)> = Vec::new();
        while !rem.is_zero() {
            let k = rem.top - o.top;
            if k < lowest {
                return Ok(None);
            }
            let c = f.mul(rem.coeffs[0], lead_inv);
            quot.push((k, c));
            rem = rem.checked_sub(&o.shift(k).scale(c))?;
        }
        Ok(Some(Self::from_terms(f, &quot).with_prec(self.prec.max(o.prec))))
    }

    /// Split into polynomial part and fractional part: `z = [z] + {z}` with
    /// `deg {z} ≤ -1`.
    pub fn poly_part(&self) -> FieldResult<(Poly, Laurent)> {
        let f = &self.spec;
        if let Some(fl) = self.floor() {
            if fl > -1 {
                return Err(FieldError::PrecisionExhausted);
            }
        }
        let mut int = Vec::new();
        if !self.is_zero() && self.top >= 0 {
            int = vec![0u32; self.top as usize + 1];
            for (k, c) in self.terms() {
                if k >= 0 {
                    int[k as usize] = c;
                }
            }
        }
        let int = Poly::new(f, int);
        let frac = match self.floor() {
            None => {
                let terms: Vec<_> = self.terms().filter(|t| t.0 < 0).collect();
                Self::from_terms(f, &terms).with_prec(self.prec)
            }
            Some(fl) => {
                let len = (-1 - fl + 1) as usize;
                let v: Vec<u32> = (0..len).map(|i| self.coeff(-1 - i as i64).unwrap()).collect();
                Self::normalize(f, -1, v, len, false)?
            }
        };
        Ok((int, frac))
    }

    /// `|{z}|`, the distance from `z` to the nearest polynomial.
    pub fn dist_to_poly(&self) -> FieldResult<AbsValue> {
        if let Some(fl) = self.floor() {
            if fl > -1 {
                return Err(FieldError::PrecisionExhausted);
            }
        }
        for (k, _) in self.terms() {
            if k < 0 {
                return Ok(AbsValue::Pow(k));
            }
        }
        if self.exact {
            Ok(AbsValue::Zero)
        } else {
            Err(FieldError::PrecisionExhausted)
        }
    }

    pub fn to_poly(&self) -> FieldResult<Poly> {
        if !self.exact {
            return Err(FieldError::Parse("non-exact value is not a polynomial".into()));
        }
        if self.is_zero() {
            return Ok(Poly::zero(&self.spec));
        }
        if self.bottom() < 0 {
            return Err(FieldError::Parse("negative exponent in a polynomial".into()));
        }
        let mut v = vec![0u32; self.top as usize + 1];
        for (k, c) in self.terms() {
            v[k as usize] = c;
        }
        Ok(Poly::new(&self.spec, v))
    }

    /// Equality on all degrees known for both operands.
    pub fn approx_eq(&self, o: &Laurent) -> bool {
        match self.checked_sub(o) {
            Ok(d) => d.is_zero(),
            Err(FieldError::PrecisionExhausted) => true,
            Err(_) => false,
        }
    }

    /// Raise to a nonnegative power.
    pub fn pow(&self, e: u32) -> Laurent {
        let mut r = Self::one(&self.spec).with_prec(self.prec);
        for _ in 0..e {
            r = &r * self;
        }
        r
    }
}

/// `⌊c⌋ = X^r` for `c = q^r`.
pub fn floor_scale(spec: &Arc<FieldSpec>, c: &BigRational) -> FieldResult<Laurent> {
    let err = || FieldError::NotPowerOfQ(c.to_string());
    if !c.is_positive() {
        return Err(err());
    }
    let q = BigInt::from(spec.q());
    let log = |mut n: BigInt| -> Option<i64> {
        let mut k = 0i64;
        while n > BigInt::one() {
            if (&n % &q) != BigInt::zero() {
                return None;
            }
            n /= &q;
            k += 1;
        }
        Some(k)
    };
    let (num, den) = (c.numer().clone(), c.denom().clone());
    let r = if den.is_one() {
        log(num).ok_or_else(err)?
    } else if num.is_one() {
        -log(den).ok_or_else(err)?
    } else {
        return Err(err());
    };
    Ok(Laurent::x_pow(spec, r))
}

impl Laurent {
    /// The term list without the `(mod q, prec N)` suffix, e.g. `X^2+1+X^-1`.
    pub fn body_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(k, c)| match (k, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "X".into(),
                (1, c) => format!("{c}*X"),
                (k, 1) => format!("X^{k}"),
                (k, c) => format!("{c}*X^{k}"),
            })
            .collect();
        parts.join("+")
    }

    /// Parse a term list such as `2*X^3+X^-1` as an exact value over `spec`.
    pub fn parse_body(spec: &Arc<FieldSpec>, body: &str) -> FieldResult<Laurent> {
        let body = body.trim();
        let terms: Vec<(i64, u32)> = if body == "0" {
            Vec::new()
        } else {
            body.split('+').map(|t| parse_term(t, spec.q())).collect::<FieldResult<_>>()?
        };
        Ok(Laurent::from_terms(spec, &terms))
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}, prec {}", self.body_string(), self.spec.q(), self.prec)?;
        if self.exact {
            write!(f, ", exact")?;
        }
        write!(f, ")")
    }
}

fn parse_term(t: &str, q: u32) -> FieldResult<(i64, u32)> {
    let bad = || FieldError::Parse(format!("bad term '{t}'"));
    let t = t.trim();
    let (coef, mono) = match t.find('X') {
        None => (t, None),
        Some(i) => {
            let c = t[..i].trim_end();
            let c = c.strip_suffix('*').map(str::trim_end).unwrap_or(c);
            (c, Some(&t[i + 1..]))
        }
    };
    let c: u32 = if coef.is_empty() {
        if mono.is_none() {
            return Err(bad());
        }
        1
    } else {
        coef.parse().map_err(|_| bad())?
    };
    if c >= q {
        return Err(FieldError::Parse(format!("coefficient {c} is not below {q}")));
    }
    let k = match mono {
        None => 0,
        Some("") => 1,
        Some(rest) => {
            let e = rest.trim().strip_prefix('^').ok_or_else(bad)?;
            e.trim().parse().map_err(|_| bad())?
        }
    };
    Ok((k, c))
}

impl FromStr for Laurent {
    type Err = FieldError;

    fn from_str(s: &str) -> FieldResult<Self> {
        let s = s.trim();
        let open = s.rfind('(').ok_or_else(|| FieldError::Parse("missing '(mod q, prec N)' suffix".into()))?;
        let body = s[..open].trim();
        let suffix = s[open + 1..]
            .trim()
            .strip_suffix(')')
            .ok_or_else(|| FieldError::Parse("unterminated suffix".into()))?;
        let mut q = None;
        let mut prec = None;
        let mut exact = false;
        for part in suffix.split(',') {
            let part = part.trim();
            if let Some(v) = part.strip_prefix("mod") {
                q = Some(v.trim().parse::<u32>().map_err(|_| FieldError::Parse(format!("bad modulus '{v}'")))?);
            } else if let Some(v) = part.strip_prefix("prec") {
                prec = Some(v.trim().parse::<usize>().map_err(|_| FieldError::Parse(format!("bad precision '{v}'")))?);
            } else if part == "exact" {
                exact = true;
            } else {
                return Err(FieldError::Parse(format!("unknown suffix item '{part}'")));
            }
        }
        let q = q.ok_or_else(|| FieldError::Parse("missing 'mod q'".into()))?;
        let prec = prec.ok_or_else(|| FieldError::Parse("missing 'prec N'".into()))?;
        if prec == 0 {
            return Err(FieldError::Parse("precision must be positive".into()));
        }
        let spec = FieldSpec::with_order(q)?;
        let value = Laurent::parse_body(&spec, body)?;
        if exact {
            if value.coeffs.len() > prec {
                return Err(FieldError::Parse("support wider than the stated precision".into()));
            }
            return Ok(value.with_prec(prec));
        }
        let top = value.top_degree().ok_or(FieldError::PrecisionExhausted)?;
        let floor = top - prec as i64 + 1;
        if value.bottom() < floor {
            return Err(FieldError::Parse("term below the precision window".into()));
        }
        value.truncate_below(floor)
    }
}

macro_rules! laurent_binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl std::ops::$tr<&Laurent> for &Laurent {
            type Output = Laurent;
            /// Panics where the checked variant returns an error.
            fn $m(self, o: &Laurent) -> Laurent {
                self.$checked(o).unwrap_or_else(|e| panic!("Laurent {}: {e}", stringify!($m)))
            }
        }
        impl std::ops::$tr<Laurent> for Laurent {
            type Output = Laurent;
            fn $m(self, o: Laurent) -> Laurent {
                (&self).$m(&o)
            }
        }
    };
}
laurent_binop!(Add, add, checked_add);
laurent_binop!(Sub, sub, checked_sub);
laurent_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent::neg(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaurentOp {
    Add,
    Mul,
    Inv,
}

pub fn laurent_arith(op: LaurentOp, x: &Laurent, y: Option<&Laurent>) -> FieldResult<Laurent> {
    let other = || y.ok_or_else(|| FieldError::Parse("missing second operand".into()));
    match op {
        LaurentOp::Add => x.checked_add(other()?),
        LaurentOp::Mul => x.checked_mul(other()?),
        LaurentOp::Inv => x.inv(),
    }
}

/// `|P/Q| = q^{deg P − deg Q}`.
pub fn abs_of_ratio(p: &Poly, q: &Poly) -> FieldResult<AbsValue> {
    let dq = q.degree().ok_or(FieldError::ZeroDivisor)?;
    Ok(match p.degree() {
        None => AbsValue::Zero,
        Some(dp) => AbsValue::Pow(dp as i64 - dq as i64),
    })
}

/// Value of `q^e` as an f64, for diagnostics only.
pub fn qpow_f64(q: u32, e: QExp) -> f64 {
    (q as f64).powf(e.to_f64().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> Arc<FieldSpec> {
        FieldSpec::with_order(q).unwrap()
    }

    #[test]
    fn text_roundtrip_example() {
        let s = "X^2+1+X^-1 (mod 3, prec 8, exact)";
        let z: Laurent = s.parse().unwrap();
        assert_eq!(z.to_string(), s);
        assert_eq!(z.abs(), AbsValue::Pow(2));
        let w: Laurent = "2*X^-1+X^-3 (mod 3, prec 4)".parse().unwrap();
        assert!(!w.is_exact());
        assert_eq!(w.floor(), Some(-4));
        assert_eq!(w.to_string(), "2*X^-1+X^-3 (mod 3, prec 4)");
    }

    #[test]
    fn abs_examples() {
        let f2 = f(2);
        let p = Poly::new(&f2, vec![1, 0, 1]);
        let d = Poly::new(&f2, vec![1, 1]);
        assert_eq!(abs_of_ratio(&p, &d).unwrap(), AbsValue::Pow(1));
        assert_eq!(Laurent::zero(&f2).abs(), AbsValue::Zero);
        let f3 = f(3);
        let z = Laurent::from_terms(&f3, &[(-3, 1), (-5, 1)]);
        assert_eq!(z.abs(), AbsValue::Pow(-3));
    }

    #[test]
    fn inverse_of_x_plus_one_f2() {
        let f2 = f(2);
        let x1 = Laurent::from_terms(&f2, &[(1, 1), (0, 1)]);
        let inv = x1.inv_prec(4).unwrap();
        assert_eq!(inv.to_string(), "X^-1+X^-2+X^-3+X^-4 (mod 2, prec 4)");
        // Oracle: multiply back; the residual must vanish through the window.
        let prod = &x1 * &inv;
        assert_eq!(prod.floor(), Some(-3));
        assert!(prod.approx_eq(&Laurent::one(&f2)));
    }

    #[test]
    fn inverse_of_monomial_is_exact() {
        let f3 = f(3);
        let x = Laurent::x_pow(&f3, 1);
        let i = x.inv().unwrap();
        assert!(i.is_exact());
        assert_eq!(i, Laurent::x_pow(&f3, -1));
    }

    #[test]
    fn char2_cancellation_drops_valuation() {
        let f2 = f(2);
        let a = Laurent::from_terms(&f2, &[(1, 1), (-1, 1)]);
        let b = Laurent::x_pow(&f2, 1);
        assert_eq!(&a + &b, Laurent::x_pow(&f2, -1));
    }

    #[test]
    fn cancellation_exhausts_non_exact_window() {
        let f3 = f(3);
        let a: Laurent = "X^2+X (mod 3, prec 2)".parse().unwrap();
        let b = Laurent::from_terms(&f3, &[(2, 2), (1, 2)]);
        assert_eq!(a.checked_add(&b), Err(FieldError::PrecisionExhausted));
    }

    #[test]
    fn poly_part_examples() {
        let f3 = f(3);
        let z = Laurent::from_terms(&f3, &[(2, 1), (0, 1), (-1, 1)]);
        let (i, fr) = z.poly_part().unwrap();
        assert_eq!(i, Poly::new(&f3, vec![1, 0, 1]));
        assert_eq!(fr, Laurent::x_pow(&f3, -1));
        let (i, fr) = Laurent::x_pow(&f3, -2).poly_part().unwrap();
        assert!(i.is_zero());
        assert_eq!(fr, Laurent::x_pow(&f3, -2));
        let w: Laurent = "X^3+X (mod 3, prec 3)".parse().unwrap();
        assert_eq!(w.poly_part().unwrap_err(), FieldError::PrecisionExhausted);
    }

    #[test]
    fn floor_scale_examples() {
        let f3 = f(3);
        let c = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(floor_scale(&f3, &c(9, 1)).unwrap(), Laurent::x_pow(&f3, 2));
        assert_eq!(floor_scale(&f3, &c(1, 1)).unwrap(), Laurent::one(&f3));
        assert_eq!(floor_scale(&f3, &c(1, 27)).unwrap(), Laurent::x_pow(&f3, -3));
        assert!(floor_scale(&f3, &c(2, 1)).is_err());
        assert!(floor_scale(&f3, &c(9, 2)).is_err());
    }

    #[test]
    fn div_exact_finds_polynomial_quotients() {
        let f3 = f(3);
        let a = Laurent::from_terms(&f3, &[(2, 1), (0, 2)]); // X^2 - 1
        let b = Laurent::from_terms(&f3, &[(1, 1), (0, 1)]); // X + 1
        let q = a.div_exact(&b).unwrap().unwrap();
        assert_eq!(q, Laurent::from_terms(&f3, &[(1, 1), (0, 2)]));
        assert_eq!(Laurent::one(&f3).div_exact(&b).unwrap(), None);
    }

    #[test]
    fn parse_errors() {
        assert!("X^2 (mod 3)".parse::<Laurent>().is_err());
        assert!("3*X (mod 3, prec 4, exact)".parse::<Laurent>().is_err());
        assert!("X^5+1 (mod 3, prec 3, exact)".parse::<Laurent>().is_err());
        assert!("X+X^-5 (mod 3, prec 3)".parse::<Laurent>().is_err());
        assert!("X (mod 6, prec 3)".parse::<Laurent>().is_err());
    }

    #[test]
    fn extension_field_coefficients() {
        let z: Laurent = "3*X+2 (mod 4, prec 4, exact)".parse().unwrap();
        let sq = &z * &z;
        // (tX + t... ) codes: 3 = t+1, 2 = t over F_4 with t^2 = t + 1.
        // (t+1)^2 = t^2 + 1 = t; t^2 = t + 1; cross terms vanish in char 2.
        assert_eq!(sq, Laurent::from_terms(z.spec(), &[(2, 2), (0, 3)]));
    }
}
