//! Finite fields F_q, q = p^b.
//!
//! Elements are encoded as integers in `0..q`. For prime fields this is the
//! residue; for extensions it is the base-p integer `c_0 + c_1 p + ... +
//! c_{b-1} p^{b-1}` of the coefficient vector modulo the defining polynomial.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest extension-field order for which full operation tables are built.
const MAX_EXT_ORDER: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("modulus is not irreducible of the requested degree")]
    ReducibleModulus,
    #[error("field order {0} is too large for an extension field")]
    OrderTooLarge(u64),
    #[error("inversion of zero")]
    ZeroInverse,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("operands live in different fields")]
    SpecMismatch,
    #[error("precision exhausted: value indistinguishable from 0 at the available precision")]
    PrecisionExhausted,
    #[error("{0} is not an integer power of q")]
    NotPowerOfQ(String),
    #[error("negative exponent {0} where a nonnegative one is required")]
    NegativeExponent(i64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type FieldResult<T> = Result<T, FieldError>;

struct ExtTables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

/// Description of F_q together with its arithmetic tables.
pub struct FieldSpec {
    p: u32,
    b: u32,
    q: u32,
    modulus: Option<Vec<u32>>,
    ext: Option<ExtTables>,
    prime_inv: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("b", &self.b)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.b == other.b && self.modulus == other.modulus
    }
}
impl Eq for FieldSpec {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

// Dense polynomials over F_p, ascending, used only to build extension tables.
fn fp_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = pow_mod(m[dm] as u64, p as u64 - 2, p as u64) as u32;
    while r.len() > dm {
        let dr = r.len() - 1;
        let c = (r[dr] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &mi) in m.iter().enumerate() {
            let idx = dr - dm + i;
            r[idx] = ((r[idx] as u64 + (p - c) as u64 * mi as u64) % p as u64) as u32;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = ((out[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    fp_rem(&out, m, p)
}

fn decode(code: u32, p: u32, b: u32) -> Vec<u32> {
    let mut v = Vec::with_capacity(b as usize);
    let mut c = code;
    for _ in 0..b {
        v.push(c % p);
        c /= p;
    }
    fp_trim(&mut v);
    v
}

fn encode(v: &[u32], p: u32) -> u32 {
    v.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Monic irreducibility test by trial division with all monic polynomials of
/// degree at most half the degree.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    if deg == 0 {
        return false;
    }
    for dd in 1..=deg / 2 {
        let count = (p as u64).pow(dd as u32);
        for low in 0..count {
            let mut div: Vec<u32> = decode(low as u32, p, dd as u32);
            div.resize(dd, 0);
            div.push(1);
            if fp_rem(m, &div, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// The prime field F_p.
    pub fn prime(p: u32) -> FieldResult<Arc<Self>> {
        if !is_prime(p as u64) {
            return Err(FieldError::NotPrime(p as u64));
        }
        let prime_inv = if p <= 1 << 16 {
            (0..p)
                .map(|a| if a == 0 { 0 } else { pow_mod(a as u64, p as u64 - 2, p as u64) as u32 })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Arc::new(FieldSpec { p, b: 1, q: p, modulus: None, ext: None, prime_inv }))
    }

    /// F_{p^b} defined by an irreducible monic `modulus` of degree b over F_p
    /// (ascending coefficients, leading 1 included).
    pub fn extension(p: u32, modulus: Vec<u32>) -> FieldResult<Arc<Self>> {
        if !is_prime(p as u64) {
            return Err(FieldError::NotPrime(p as u64));
        }
        let mut m = modulus;
        fp_trim(&mut m);
        if m.len() < 2 || m.iter().any(|&c| c >= p) || *m.last().unwrap() != 1 {
            return Err(FieldError::ReducibleModulus);
        }
        let b = (m.len() - 1) as u32;
        if b == 1 {
            return Self::prime(p);
        }
        let q64 = (p as u64).pow(b);
        if q64 > MAX_EXT_ORDER as u64 {
            return Err(FieldError::OrderTooLarge(q64));
        }
        if !is_irreducible(&m, p) {
            return Err(FieldError::ReducibleModulus);
        }
        let q = q64 as u32;
        let qs = q as usize;
        let mut add = vec![0u32; qs * qs];
        let mut mul = vec![0u32; qs * qs];
        let mut neg = vec![0u32; qs];
        let mut inv = vec![0u32; qs];
        let elems: Vec<Vec<u32>> = (0..q).map(|c| decode(c, p, b)).collect();
        for x in 0..qs {
            let mut nx = elems[x].clone();
            for c in nx.iter_mut() {
                *c = (p - *c) % p;
            }
            neg[x] = encode(&nx, p);
            for y in 0..qs {
                let len = elems[x].len().max(elems[y].len());
                let mut s = vec![0u32; len];
                for (i, c) in s.iter_mut().enumerate() {
                    let a = elems[x].get(i).copied().unwrap_or(0);
                    let bb = elems[y].get(i).copied().unwrap_or(0);
                    *c = (a + bb) % p;
                }
                fp_trim(&mut s);
                add[x * qs + y] = encode(&s, p);
                mul[x * qs + y] = encode(&fp_mulmod(&elems[x], &elems[y], &m, p), p);
            }
        }
        for x in 1..qs {
            inv[x] = (1..q).find(|&y| mul[x * qs + y as usize] == 1).expect("field has inverses");
        }
        Ok(Arc::new(FieldSpec {
            p,
            b,
            q,
            modulus: Some(m),
            ext: Some(ExtTables { add, mul, neg, inv }),
            prime_inv: Vec::new(),
        }))
    }

    /// F_q for a prime power q. Extensions use the first monic irreducible
    /// polynomial of degree b in integer-encoding order.
    pub fn with_order(q: u32) -> FieldResult<Arc<Self>> {
        if is_prime(q as u64) {
            return Self::prime(q);
        }
        let p = (2..q).find(|&d| q.is_multiple_of(d)).ok_or(FieldError::NotPrimePower(q as u64))?;
        let mut b = 0u32;
        let mut r = q;
        while r.is_multiple_of(p) {
            r /= p;
            b += 1;
        }
        if r != 1 {
            return Err(FieldError::NotPrimePower(q as u64));
        }
        if q > MAX_EXT_ORDER {
            return Err(FieldError::OrderTooLarge(q as u64));
        }
        for low in 0..q {
            let mut m = decode(low, p, b);
            m.resize(b as usize, 0);
            m.push(1);
            if is_irreducible(&m, p) {
                return Self::extension(p, m);
            }
        }
        Err(FieldError::ReducibleModulus)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn b(&self) -> u32 {
        self.b
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn modulus(&self) -> Option<&[u32]> {
        self.modulus.as_deref()
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.ext {
            None => {
                let s = a + b;
                if s >= self.p {
                    s - self.p
                } else {
                    s
                }
            }
            Some(t) => t.add[(a * self.q + b) as usize],
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match &self.ext {
            None => {
                if a == 0 {
                    0
                } else {
                    self.p - a
                }
            }
            Some(t) => t.neg[a as usize],
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.ext {
            None => ((a as u64 * b as u64) % self.p as u64) as u32,
            Some(t) => t.mul[(a * self.q + b) as usize],
        }
    }

    pub fn inv(&self, a: u32) -> FieldResult<u32> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(match &self.ext {
            None if !self.prime_inv.is_empty() => self.prime_inv[a as usize],
            None => pow_mod(a as u64, self.p as u64 - 2, self.p as u64) as u32,
            Some(t) => t.inv[a as usize],
        })
    }

    /// Image of an integer under Z -> F_p ⊆ F_q.
    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }
}

/// An element of F_q tied to its field.
#[derive(Clone, Debug)]
pub struct FieldElem {
    spec: Arc<FieldSpec>,
    v: u32,
}

impl PartialEq for FieldElem {
    fn eq(&self, o: &Self) -> bool {
        same_field(&self.spec, &o.spec) && self.v == o.v
    }
}
impl Eq for FieldElem {}

pub(crate) fn same_field(a: &Arc<FieldSpec>, b: &Arc<FieldSpec>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Neg,
    Inv,
}

impl FieldElem {
    pub fn new(spec: &Arc<FieldSpec>, code: u32) -> FieldResult<Self> {
        if code >= spec.q {
            return Err(FieldError::Parse(format!("{code} is not an element of F_{}", spec.q)));
        }
        Ok(FieldElem { spec: spec.clone(), v: code })
    }
    pub fn code(&self) -> u32 {
        self.v
    }
    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }
    pub fn is_zero(&self) -> bool {
        self.v == 0
    }
}

/// Exact arithmetic in F_q. Binary operations need `y`; `Neg` and `Inv` ignore it.
pub fn field_arith(op: FieldOp, x: &FieldElem, y: Option<&FieldElem>) -> FieldResult<FieldElem> {
    let spec = &x.spec;
    let other = |y: Option<&FieldElem>| -> FieldResult<u32> {
        let y = y.ok_or_else(|| FieldError::Parse("missing second operand".into()))?;
        if !same_field(spec, &y.spec) {
            return Err(FieldError::SpecMismatch);
        }
        Ok(y.v)
    };
    let v = match op {
        FieldOp::Add => spec.add(x.v, other(y)?),
        FieldOp::Mul => spec.mul(x.v, other(y)?),
        FieldOp::Neg => spec.neg(x.v),
        FieldOp::Inv => spec.inv(x.v)?,
    };
    Ok(FieldElem { spec: spec.clone(), v })
}
