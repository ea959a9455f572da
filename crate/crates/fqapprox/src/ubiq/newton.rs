//! Ultrametric Newton iteration for simple roots of one-variable polynomials.

use serde::Serialize;

use crate::ffield::{AbsValue, Laurent};
use crate::ultracalc::MultiPoly;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct NewtonRoot {
    #[serde(serialize_with = "crate::ubiq::ser_laurent")]
    pub root: Laurent,
    /// `|h(root)|`, zero when the root is a finite Laurent polynomial.
    pub residual: AbsValue,
    /// `|h(seed)| / |h′(seed)|`, which bounds `|root − seed|`.
    pub step_bound: AbsValue,
    pub steps: usize,
}

/// `h(η) = Σ cₖ ηᵏ`.
pub fn eval_univariate(h: &[Laurent], eta: &Laurent) -> Result<Laurent> {
    let spec = eta.spec();
    let mut acc = Laurent::zero(spec);
    for c in h.iter().rev() {
        acc = acc.checked_mul(eta)?.checked_add(c)?;
    }
    Ok(acc)
}

pub fn derivative(h: &[Laurent]) -> Vec<Laurent> {
    h.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| {
            let p = c.spec().p();
            c.scale((k as u64 % p as u64) as u32)
        })
        .collect()
}

/// Coefficients of `η ↦ h(seed + η)`.
pub fn recenter(h: &[Laurent], seed: &Laurent) -> Result<Vec<Laurent>> {
    let spec = seed.spec();
    if h.is_empty() {
        return Ok(vec![]);
    }
    let p = MultiPoly::univariate(spec, h).recenter(std::slice::from_ref(seed))?;
    Ok((0..h.len()).map(|k| p.coeff(&[k as u32])).collect())
}

fn exp_of(v: AbsValue) -> Option<i64> {
    v.exponent()
}

/// Hensel condition at 0: `c₁ ≠ 0` and `|cₖ| rᵏ⁻¹ < |c₁|` for k ≥ 2 where
/// `r = |c₀|/|c₁|`. Under it the linear term dominates on `|η| ≤ r`.
pub fn hensel_ok(h: &[Laurent]) -> bool {
    let Some(v1) = h.get(1).and_then(|c| exp_of(c.abs())) else {
        return false;
    };
    let Some(v0) = h.first().and_then(|c| exp_of(c.abs())) else {
        return true;
    };
    let r = v0 - v1;
    h.iter().enumerate().skip(2).all(|(k, c)| match exp_of(c.abs()) {
        None => true,
        Some(vk) => vk + (k as i64 - 1) * r < v1,
    })
}

/// Newton iteration from `seed`, keeping iterates exact and cut below degree
/// `-abs_prec`. Stops once `|h(η)| < |h′(seed)| q^{-abs_prec}`.
pub fn newton_root_1d(h: &[Laurent], seed: &Laurent, abs_prec: i64) -> Result<NewtonRoot> {
    let local = recenter(h, seed)?;
    if !hensel_ok(&local) {
        return Err(Error::Hypothesis("Hensel condition fails at the seed".into()));
    }
    let c1 = local[1].abs();
    let v1 = c1.exponent().expect("Hensel condition needs c1 ≠ 0");
    let step_bound = match local[0].abs() {
        AbsValue::Zero => AbsValue::Zero,
        AbsValue::Pow(v0) => AbsValue::Pow(v0 - v1),
    };
    let dh = derivative(h);
    let mut eta = seed.clone();
    let mut steps = 0;
    loop {
        let r = eval_univariate(h, &eta)?;
        let done = match r.abs() {
            AbsValue::Zero => true,
            AbsValue::Pow(e) => e < v1 - abs_prec,
        };
        if done {
            return Ok(NewtonRoot { root: eta, residual: r.abs(), step_bound, steps });
        }
        if steps >= 128 {
            return Err(Error::Field(crate::ffield::FieldError::PrecisionExhausted));
        }
        let d = eval_univariate(&dh, &eta)?;
        let top = r.abs().exponent().unwrap() - v1;
        let digits = (top + abs_prec + 2).max(1) as usize;
        let step = r.div_prec(&d, digits)?;
        eta = eta.checked_sub(&step)?.keep_degrees_at_least(-abs_prec - 1);
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::FieldSpec;
    use proptest::prelude::*;

    #[test]
    fn linear_root_is_exact() {
        let f3 = FieldSpec::with_order(3).unwrap();
        let c = Laurent::from_terms(&f3, &[(-1, 2), (-3, 1)]);
        let h = vec![c.neg(), Laurent::one(&f3)];
        let r = newton_root_1d(&h, &Laurent::zero(&f3), 20).unwrap();
        assert_eq!(r.root, c);
        assert_eq!(r.residual, AbsValue::Zero);
        assert_eq!(r.step_bound, AbsValue::Pow(-1));
    }

    #[test]
    fn square_root_from_seed() {
        let f3 = FieldSpec::with_order(3).unwrap();
        let h = vec![Laurent::x_pow(&f3, -2).neg(), Laurent::zero(&f3), Laurent::one(&f3)];
        for s in [Laurent::x_pow(&f3, -1), Laurent::x_pow(&f3, -1).neg()] {
            let r = newton_root_1d(&h, &s, 20).unwrap();
            assert_eq!(r.root, s);
        }
        // h′(0) = 0: no Hensel start at the origin.
        assert!(newton_root_1d(&h, &Laurent::zero(&f3), 20).is_err());
    }

    #[test]
    fn irrational_root_converges() {
        // η² + η − X⁻¹ over F_3: c₁ = 1 dominates, root ≈ X⁻¹ − X⁻² + …
        let f3 = FieldSpec::with_order(3).unwrap();
        let h = vec![Laurent::x_pow(&f3, -1).neg(), Laurent::one(&f3), Laurent::one(&f3)];
        let r = newton_root_1d(&h, &Laurent::zero(&f3), 30).unwrap();
        assert!(r.residual < AbsValue::Pow(-30));
        assert_eq!(r.root.abs(), AbsValue::Pow(-1));
        assert_eq!(r.root.coeff(-2), Some(2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn contract_holds(c0 in 0u64..729, c2 in 0u64..729, c3 in 0u64..27, lead in 1u32..3) {
            let f3 = FieldSpec::with_order(3).unwrap();
            let small = |code: u64, len: usize, top: i64| {
                crate::ffield::Poly::from_code(&f3, code, len).to_laurent().shift(top - len as i64 + 1)
            };
            let h = vec![small(c0, 6, -1), Laurent::constant(&f3, lead), small(c2, 6, 1), small(c3, 3, 0)];
            prop_assume!(hensel_ok(&h));
            let r = newton_root_1d(&h, &Laurent::zero(&f3), 24).unwrap();
            prop_assert!(r.residual < AbsValue::Pow(-24));
            prop_assert!(r.root.abs() <= r.step_bound);
        }
    }
}
