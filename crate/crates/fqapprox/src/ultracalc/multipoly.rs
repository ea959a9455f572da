//! Polynomials in d variables with exact Laurent coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::ffield::{AbsValue, FieldSpec, Laurent};
use crate::{Error, Result};

/// Exponent vector of a monomial.
pub type MultiIndex = Vec<u32>;

/// Sparse polynomial `Σ c_β x^β`; no stored coefficient is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    spec: Arc<FieldSpec>,
    nvars: usize,
    terms: BTreeMap<MultiIndex, Laurent>,
}

fn binom_mod(n: u32, k: u32, spec: &FieldSpec) -> u32 {
    // Lucas: product of digit binomials base p.
    let p = spec.p();
    let (mut n, mut k) = (n, k);
    let mut acc = 1u64;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        let mut c = 1u64;
        for i in 0..b {
            c = c * (a - i) as u64 / (i + 1) as u64;
        }
        acc = acc * (c % p as u64) % p as u64;
        n /= p;
        k /= p;
    }
    spec.from_int(acc as i64)
}

impl MultiPoly {
    pub fn zero(spec: &Arc<FieldSpec>, nvars: usize) -> Self {
        MultiPoly { spec: spec.clone(), nvars, terms: BTreeMap::new() }
    }
    pub fn constant(spec: &Arc<FieldSpec>, nvars: usize, c: Laurent) -> Self {
        Self::monomial(spec, vec![0; nvars], c)
    }
    /// The coordinate function `x_i` (0-based).
    pub fn var(spec: &Arc<FieldSpec>, nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(spec, e, Laurent::one(spec))
    }
    pub fn monomial(spec: &Arc<FieldSpec>, exps: MultiIndex, c: Laurent) -> Self {
        let mut p = Self::zero(spec, exps.len());
        p.add_term(exps, c);
        p
    }
    pub fn from_terms(spec: &Arc<FieldSpec>, nvars: usize, terms: Vec<(MultiIndex, Laurent)>) -> Result<Self> {
        let mut p = Self::zero(spec, nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::Dimension(format!("monomial with {} exponents in {nvars} variables", e.len())));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }
    /// Univariate polynomial from ascending coefficients.
    pub fn univariate(spec: &Arc<FieldSpec>, coeffs: &[Laurent]) -> Self {
        let mut p = Self::zero(spec, 1);
        for (k, c) in coeffs.iter().enumerate() {
            p.add_term(vec![k as u32], c.clone());
        }
        p
    }

    fn add_term(&mut self, e: MultiIndex, c: Laurent) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&e) {
            None => {
                self.terms.insert(e, c);
            }
            Some(old) => {
                let s = &old + &c;
                if !s.is_zero() {
                    self.terms.insert(e, s);
                }
            }
        }
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Laurent)> {
        self.terms.iter()
    }
    pub fn coeff(&self, e: &[u32]) -> Laurent {
        self.terms.get(e).cloned().unwrap_or_else(|| Laurent::zero(&self.spec))
    }
    pub fn constant_term(&self) -> Laurent {
        self.coeff(&vec![0; self.nvars])
    }
    /// Total degree; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }
    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    fn same_shape(&self, o: &MultiPoly) -> Result<()> {
        if self.nvars != o.nvars {
            return Err(Error::Dimension(format!("{} vs {} variables", self.nvars, o.nvars)));
        }
        if !crate::ffield::same_field(&self.spec, &o.spec) {
            return Err(crate::ffield::FieldError::SpecMismatch.into());
        }
        Ok(())
    }

    pub fn checked_add(&self, o: &MultiPoly) -> Result<MultiPoly> {
        self.same_shape(o)?;
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        Ok(r)
    }
    pub fn neg(&self) -> MultiPoly {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = -&*c;
        }
        r
    }
    pub fn checked_sub(&self, o: &MultiPoly) -> Result<MultiPoly> {
        self.checked_add(&o.neg())
    }
    pub fn checked_mul(&self, o: &MultiPoly) -> Result<MultiPoly> {
        self.same_shape(o)?;
        let mut r = Self::zero(&self.spec, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                r.add_term(e, ca * cb);
            }
        }
        Ok(r)
    }
    pub fn scale(&self, c: &Laurent) -> MultiPoly {
        let mut r = Self::zero(&self.spec, self.nvars);
        for (e, a) in &self.terms {
            r.add_term(e.clone(), a * c);
        }
        r
    }
    /// Multiply every coefficient by X^k.
    pub fn shift_coeffs(&self, k: i64) -> MultiPoly {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = c.shift(k);
        }
        r
    }
    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut r = Self::constant(&self.spec, self.nvars, Laurent::one(&self.spec));
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// Formal partial derivative in variable `j`.
    pub fn partial(&self, j: usize) -> MultiPoly {
        let mut r = Self::zero(&self.spec, self.nvars);
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let m = self.spec.from_int(e[j] as i64);
            let mut e2 = e.clone();
            e2[j] -= 1;
            r.add_term(e2, c.scale(m));
        }
        r
    }
    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.nvars).map(|j| self.partial(j)).collect()
    }

    pub fn eval(&self, x: &[Laurent]) -> Result<Laurent> {
        if x.len() != self.nvars {
            return Err(Error::Dimension(format!("point of length {} for {} variables", x.len(), self.nvars)));
        }
        // Cache powers per variable.
        let mut powers: Vec<Vec<Laurent>> = Vec::with_capacity(self.nvars);
        for (j, xj) in x.iter().enumerate() {
            let top = self.degree_in(j).unwrap_or(0) as usize;
            let mut v = vec![Laurent::one(&self.spec)];
            for k in 1..=top {
                let next = v[k - 1].checked_mul(xj)?;
                v.push(next);
            }
            powers.push(v);
        }
        let mut acc = Laurent::zero(&self.spec);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.checked_mul(&powers[j][k as usize])?;
                }
            }
            acc = acc.checked_add(&t)?;
        }
        Ok(acc)
    }

    /// `g(s·x + shift)` as a polynomial in x.
    pub fn substitute_affine(&self, s: &Laurent, shift: &[Laurent]) -> Result<MultiPoly> {
        if shift.len() != self.nvars {
            return Err(Error::Dimension("shift length".into()));
        }
        let f = &self.spec;
        // Per-variable expansions of (s x_j + c_j)^k, indexed by k.
        let mut expansions: Vec<Vec<Vec<Laurent>>> = Vec::with_capacity(self.nvars);
        for (j, c) in shift.iter().enumerate() {
            let top = self.degree_in(j).unwrap_or(0);
            let mut per_k = Vec::with_capacity(top as usize + 1);
            let spow: Vec<Laurent> = (0..=top).map(|i| s.pow(i)).collect();
            let cpow: Vec<Laurent> = (0..=top).map(|i| c.pow(i)).collect();
            for k in 0..=top {
                // coefficient of x_j^i in (s x + c)^k = C(k,i) s^i c^{k-i}
                let v: Vec<Laurent> = (0..=k)
                    .map(|i| (&spow[i as usize] * &cpow[(k - i) as usize]).scale(binom_mod(k, i, f)))
                    .collect();
                per_k.push(v);
            }
            expansions.push(per_k);
        }
        let mut r = Self::zero(f, self.nvars);
        for (e, c) in &self.terms {
            // Multiply out the product over variables.
            let mut partial: Vec<(MultiIndex, Laurent)> = vec![(vec![0; self.nvars], c.clone())];
            for (j, &k) in e.iter().enumerate() {
                let exp = &expansions[j][k as usize];
                let mut next = Vec::with_capacity(partial.len() * exp.len());
                for (pe, pc) in &partial {
                    for (i, a) in exp.iter().enumerate() {
                        if a.is_zero() {
                            continue;
                        }
                        let mut ne = pe.clone();
                        ne[j] = i as u32;
                        next.push((ne, pc * a));
                    }
                }
                partial = next;
            }
            for (ne, nc) in partial {
                r.add_term(ne, nc);
            }
        }
        Ok(r)
    }

    /// Taylor expansion at `c`: the polynomial `h ↦ g(c + h)`.
    pub fn recenter(&self, c: &[Laurent]) -> Result<MultiPoly> {
        self.substitute_affine(&Laurent::one(&self.spec), c)
    }

    /// `max_β |c_β| q^{-r|β|}` over all terms, the sup bound on the ball of
    /// radius `q^{-r}` centered at 0.
    pub fn coeff_bound(&self, radius_exp: i64) -> AbsValue {
        self.terms
            .iter()
            .map(|(e, c)| c.abs().shift(-radius_exp * e.iter().sum::<u32>() as i64))
            .max()
            .unwrap_or(AbsValue::Zero)
    }
    /// As [`coeff_bound`](Self::coeff_bound) but skipping the constant term.
    pub fn variation_bound(&self, radius_exp: i64) -> AbsValue {
        self.terms
            .iter()
            .filter(|(e, _)| e.iter().any(|&k| k > 0))
            .map(|(e, c)| c.abs().shift(-radius_exp * e.iter().sum::<u32>() as i64))
            .max()
            .unwrap_or(AbsValue::Zero)
    }

    /// Same polynomial viewed in `nvars` ≥ current variables, old variables
    /// placed at positions `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> MultiPoly {
        let mut r = Self::zero(&self.spec, nvars);
        for (e, c) in &self.terms {
            let mut ne = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                ne[map[i]] += k;
            }
            r.add_term(ne, c.clone());
        }
        r
    }

    /// Parse `x1 + (X^-1)*x1^2 + 2`; `x` abbreviates `x1`.
    pub fn parse(spec: &Arc<FieldSpec>, nvars: usize, s: &str) -> Result<MultiPoly> {
        let bad = |m: &str| Error::Invalid(format!("polynomial '{s}': {m}"));
        let mut terms = Vec::new();
        let mut depth = 0i32;
        let mut start = 0usize;
        for (i, ch) in s.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' if depth == 0 => {
                    terms.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        terms.push(&s[start..]);
        let mut p = Self::zero(spec, nvars);
        for t in terms {
            let t = t.trim();
            if t.is_empty() {
                return Err(bad("empty term"));
            }
            let mut coef = Laurent::one(spec);
            let mut exps = vec![0u32; nvars];
            for factor in split_factors(t) {
                let factor = factor.trim();
                if let Some(inner) = factor.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
                    coef = &coef * &Laurent::parse_body(spec, inner)?;
                } else if let Some(v) = factor.strip_prefix('x') {
                    let (idx, e) = match v.split_once('^') {
                        Some((a, b)) => (a, b.trim().parse::<u32>().map_err(|_| bad("bad exponent"))?),
                        None => (v, 1),
                    };
                    let idx: usize = if idx.is_empty() { 1 } else { idx.parse().map_err(|_| bad("bad variable"))? };
                    if idx == 0 || idx > nvars {
                        return Err(bad("variable index out of range"));
                    }
                    exps[idx - 1] += e;
                } else {
                    coef = &coef * &Laurent::parse_body(spec, factor)?;
                }
            }
            p.add_term(exps, coef);
        }
        Ok(p)
    }
}

fn split_factors(t: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in t.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(&t[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&t[start..]);
    out
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        // Highest total degree first.
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by(|a, b| b.0.iter().sum::<u32>().cmp(&a.0.iter().sum::<u32>()).then(b.0.cmp(a.0)));
        for (e, c) in ts {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| if k == 1 { format!("x{}", j + 1) } else { format!("x{}^{k}", j + 1) })
                .collect();
            let is_one = *c == Laurent::one(&self.spec);
            let body = c.body_string();
            let simple = c.top_degree() == Some(0) && c.terms().count() == 1;
            let cs = if simple { body } else { format!("({body})") };
            match (mono.is_empty(), is_one) {
                (true, _) => write!(f, "{cs}")?,
                (false, true) => write!(f, "{}", mono.join("*"))?,
                (false, false) => write!(f, "{cs}*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

macro_rules! mp_binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl std::ops::$tr<&MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $m(self, o: &MultiPoly) -> MultiPoly {
                self.$checked(o).unwrap_or_else(|e| panic!("MultiPoly {}: {e}", stringify!($m)))
            }
        }
    };
}
mp_binop!(Add, add, checked_add);
mp_binop!(Sub, sub, checked_sub);
mp_binop!(Mul, mul, checked_mul);

/// Rank over F of a matrix of exact Laurent values, by fraction-free
/// elimination.
pub fn laurent_rank(mut rows: Vec<Vec<Laurent>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let prow = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let a = row[col].clone();
            for (x, p) in row.iter_mut().zip(&prow) {
                *x = &(&*x * &prow[col]) - &(p * &a);
            }
        }
        rank += 1;
    }
    rank
}
