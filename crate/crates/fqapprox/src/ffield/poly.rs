//! The polynomial ring Λ = F_q[X].

use std::fmt;
use std::sync::Arc;

use super::field::{same_field, FieldError, FieldResult, FieldSpec};
use super::laurent::Laurent;

/// Dense polynomial, ascending coefficients, no trailing zeros.
#[derive(Clone, Debug)]
pub struct Poly {
    spec: Arc<FieldSpec>,
    coeffs: Vec<u32>,
}

impl PartialEq for Poly {
    fn eq(&self, o: &Self) -> bool {
        same_field(&self.spec, &o.spec) && self.coeffs == o.coeffs
    }
}
impl Eq for Poly {}

impl Poly {
    pub fn new(spec: &Arc<FieldSpec>, mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { spec: spec.clone(), coeffs }
    }
    pub fn zero(spec: &Arc<FieldSpec>) -> Self {
        Poly { spec: spec.clone(), coeffs: Vec::new() }
    }
    pub fn constant(spec: &Arc<FieldSpec>, c: u32) -> Self {
        Self::new(spec, vec![c])
    }
    /// c·X^k.
    pub fn monomial(spec: &Arc<FieldSpec>, c: u32, k: usize) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = c;
        Self::new(spec, v)
    }

    /// Polynomial whose coefficients c_0..c_{len-1} are the base-q digits of
    /// `code`, c_0 least significant.
    pub fn from_code(spec: &Arc<FieldSpec>, mut code: u64, len: usize) -> Self {
        let q = spec.q() as u64;
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            v.push((code % q) as u32);
            code /= q;
        }
        Self::new(spec, v)
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    pub fn leading(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    fn check(&self, o: &Poly) -> FieldResult<()> {
        if same_field(&self.spec, &o.spec) {
            Ok(())
        } else {
            Err(FieldError::SpecMismatch)
        }
    }

    pub fn checked_add(&self, o: &Poly) -> FieldResult<Poly> {
        self.check(o)?;
        let f = &self.spec;
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n)
            .map(|i| {
                f.add(self.coeffs.get(i).copied().unwrap_or(0), o.coeffs.get(i).copied().unwrap_or(0))
            })
            .collect();
        Ok(Poly::new(f, v))
    }

    pub fn neg(&self) -> Poly {
        let f = &self.spec;
        Poly { spec: f.clone(), coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }

    pub fn checked_sub(&self, o: &Poly) -> FieldResult<Poly> {
        self.checked_add(&o.neg())
    }

    pub fn checked_mul(&self, o: &Poly) -> FieldResult<Poly> {
        self.check(o)?;
        if self.is_zero() || o.is_zero() {
            return Ok(Poly::zero(&self.spec));
        }
        let f = &self.spec;
        let mut v = vec![0u32; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                v[i + j] = f.add(v[i + j], f.mul(a, b));
            }
        }
        Ok(Poly::new(f, v))
    }

    pub fn scale(&self, c: u32) -> Poly {
        let f = &self.spec;
        Poly::new(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Euclidean division: `(quot, rem)` with `deg rem < deg divisor`.
    pub fn divmod(&self, d: &Poly) -> FieldResult<(Poly, Poly)> {
        self.check(d)?;
        let dd = d.degree().ok_or(FieldError::ZeroDivisor)?;
        let f = &self.spec;
        let lead_inv = f.inv(d.leading())?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(f), self.clone()));
        }
        let mut quot = vec![0u32; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = f.mul(rem[k + dd], lead_inv);
            quot[k] = c;
            if c != 0 {
                for (i, &di) in d.coeffs.iter().enumerate() {
                    rem[k + i] = f.sub(rem[k + i], f.mul(c, di));
                }
            }
        }
        rem.truncate(dd);
        Ok((Poly::new(f, quot), Poly::new(f, rem)))
    }

    /// Scale to leading coefficient 1 (zero stays zero).
    pub fn monic(&self) -> Poly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&c) => self.scale(self.spec.inv(c).expect("nonzero leading coefficient")),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Poly) -> FieldResult<Poly> {
        self.check(o)?;
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.divmod(&b)?;
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    pub fn is_unit(&self) -> bool {
        self.degree() == Some(0)
    }

    /// Integer code `Σ c_k q^k`, inverse of [`Poly::from_code`].
    pub fn code(&self) -> u64 {
        let q = self.spec.q() as u64;
        self.coeffs.iter().rev().fold(0u64, |acc, &c| acc * q + c as u64)
    }

    pub fn to_laurent(&self) -> Laurent {
        Laurent::from_poly(self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_laurent())
    }
}

impl std::str::FromStr for Poly {
    type Err = FieldError;
    fn from_str(s: &str) -> FieldResult<Self> {
        let l: Laurent = s.parse()?;
        l.to_poly()
    }
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        self.checked_add(o).expect("polynomials over different fields")
    }
}
impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self.checked_sub(o).expect("polynomials over different fields")
    }
}
impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        self.checked_mul(o).expect("polynomials over different fields")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Mul,
    DivMod,
}

/// `poly_arith` returns a single polynomial for `Add`/`Mul` and the pair
/// `(quotient, remainder)` for `DivMod`.
pub fn poly_arith(op: PolyOp, a: &Poly, b: &Poly) -> FieldResult<(Poly, Option<Poly>)> {
    match op {
        PolyOp::Add => Ok((a.checked_add(b)?, None)),
        PolyOp::Mul => Ok((a.checked_mul(b)?, None)),
        PolyOp::DivMod => {
            let (q, r) = a.divmod(b)?;
            Ok((q, Some(r)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(spec: &Arc<FieldSpec>, c: &[u32]) -> Poly {
        Poly::new(spec, c.to_vec())
    }

    #[test]
    fn char2_square() {
        let f = FieldSpec::prime(2).unwrap();
        let x1 = p(&f, &[1, 1]);
        assert_eq!(&x1 * &x1, p(&f, &[1, 0, 1]));
    }

    #[test]
    fn divmod_small() {
        let f = FieldSpec::prime(3).unwrap();
        let (q, r) = p(&f, &[1, 0, 1]).divmod(&p(&f, &[0, 1])).unwrap();
        assert_eq!(q, p(&f, &[0, 1]));
        assert_eq!(r, p(&f, &[1]));
    }

    #[test]
    fn char2_cancellation() {
        let f = FieldSpec::prime(2).unwrap();
        assert_eq!(&p(&f, &[0, 1, 1]) + &p(&f, &[0, 1]), p(&f, &[0, 0, 1]));
    }

    #[test]
    fn division_by_zero() {
        let f = FieldSpec::prime(3).unwrap();
        assert_eq!(p(&f, &[1]).divmod(&Poly::zero(&f)).unwrap_err(), FieldError::ZeroDivisor);
    }

    #[test]
    fn gcd_examples() {
        let f = FieldSpec::prime(3).unwrap();
        // (X+1)(X+2) and (X+1)X share X+1.
        let a = &p(&f, &[1, 1]) * &p(&f, &[2, 1]);
        let b = &p(&f, &[1, 1]) * &p(&f, &[0, 1]);
        assert_eq!(a.gcd(&b).unwrap(), p(&f, &[1, 1]));
        assert!(p(&f, &[2]).gcd(&p(&f, &[0, 1])).unwrap().is_unit());
        assert_eq!(Poly::from_code(&f, 17, 3).code(), 17);
    }

    #[test]
    fn from_code_order() {
        let f = FieldSpec::prime(3).unwrap();
        // 5 = 2 + 1*3 -> 2 + X
        assert_eq!(Poly::from_code(&f, 5, 2), p(&f, &[2, 1]));
    }

    #[test]
    fn divmod_roundtrip_exhaustive_f2() {
        let f = FieldSpec::prime(2).unwrap();
        for a in 0..64u64 {
            for d in 1..16u64 {
                let pa = Poly::from_code(&f, a, 6);
                let pd = Poly::from_code(&f, d, 4);
                let (q, r) = pa.divmod(&pd).unwrap();
                assert_eq!(&(&q * &pd) + &r, pa);
                assert!(r.degree().is_none_or(|dr| dr < pd.degree().unwrap()));
            }
        }
    }
}
