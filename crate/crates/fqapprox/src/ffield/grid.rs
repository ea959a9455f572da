//! Ultrametric balls, exact Haar measure, cell and shell enumeration, and the
//! adaptive sweep that measures definable subsets of a ball exactly.
//!
//! Haar measure is normalized so that the closed unit ball of F^d has
//! measure 1; a ball of radius `q^{-r}` then has measure `q^{-dr}`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{same_field, FieldError, FieldResult, FieldSpec};
use super::laurent::{AbsValue, Laurent};
use super::poly::Poly;

/// Exact nonnegative measure `count · q^{-exp}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Measure {
    pub q: u32,
    pub count: u128,
    pub exp: i64,
}

impl Measure {
    pub fn zero(q: u32) -> Self {
        Measure { q, count: 0, exp: 0 }
    }
    /// `q^{-exp}`.
    pub fn qpow_neg(q: u32, exp: i64) -> Self {
        Measure { q, count: 1, exp }
    }
    pub fn is_zero(&self) -> bool {
        self.count == 0
    }

    fn rescaled(&self, exp: i64) -> u128 {
        debug_assert!(exp >= self.exp);
        let f = (self.q as u128)
            .checked_pow((exp - self.exp) as u32)
            .expect("measure exponent overflow");
        self.count.checked_mul(f).expect("measure count overflow")
    }

    /// Divide out common powers of q.
    pub fn reduced(mut self) -> Self {
        if self.count == 0 {
            return Measure::zero(self.q);
        }
        let q = self.q as u128;
        while self.count.is_multiple_of(q) {
            self.count /= q;
            self.exp -= 1;
        }
        self
    }

    pub fn add(&self, o: &Measure) -> Measure {
        assert_eq!(self.q, o.q, "measures over different fields");
        if self.count == 0 {
            return *o;
        }
        if o.count == 0 {
            return *self;
        }
        let exp = self.exp.max(o.exp);
        Measure { q: self.q, count: self.rescaled(exp) + o.rescaled(exp), exp }.reduced()
    }

    /// `self - o`, which must be nonnegative.
    pub fn sub(&self, o: &Measure) -> Measure {
        assert_eq!(self.q, o.q, "measures over different fields");
        if o.count == 0 {
            return *self;
        }
        let exp = self.exp.max(o.exp);
        let (a, b) = (self.rescaled(exp), o.rescaled(exp));
        assert!(a >= b, "negative measure");
        Measure { q: self.q, count: a - b, exp }.reduced()
    }

    pub fn to_rational(&self) -> BigRational {
        let q = BigInt::from(self.q);
        let c = BigInt::from(self.count);
        if self.exp >= 0 {
            BigRational::new(c, num_traits::pow(q, self.exp as usize))
        } else {
            BigRational::from_integer(c * num_traits::pow(q, (-self.exp) as usize))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.count as f64 * (self.q as f64).powi(-(self.exp as i32))
    }

    /// `self / o` as an exact rational.
    pub fn ratio(&self, o: &Measure) -> BigRational {
        self.to_rational() / o.to_rational()
    }
}

impl PartialEq for Measure {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Measure {}
impl PartialOrd for Measure {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Measure {
    fn cmp(&self, o: &Self) -> Ordering {
        assert_eq!(self.q, o.q, "measures over different fields");
        if self.count == 0 || o.count == 0 {
            return self.count.cmp(&o.count);
        }
        let exp = self.exp.max(o.exp);
        self.rescaled(exp).cmp(&o.rescaled(exp))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_rational();
        write!(f, "{r}")
    }
}

/// `{x ∈ F^d : ‖x − center‖ ≤ q^{-radius_exp}}`.
///
/// The center is canonical: it carries no digits of degree `≤ -radius_exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    center: Vec<Laurent>,
    radius_exp: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallRelation {
    Disjoint,
    Equal,
    /// The first ball strictly contains the second.
    Contains,
    ContainedIn,
}

impl Ball {
    pub fn new(center: Vec<Laurent>, radius_exp: i64) -> FieldResult<Self> {
        if center.is_empty() {
            return Err(FieldError::InvalidGrid("ball of dimension 0".into()));
        }
        let spec = center[0].spec().clone();
        let mut c = Vec::with_capacity(center.len());
        for x in &center {
            if !same_field(x.spec(), &spec) {
                return Err(FieldError::SpecMismatch);
            }
            if let Some(fl) = x.floor() {
                if fl > -radius_exp + 1 {
                    return Err(FieldError::PrecisionExhausted);
                }
            }
            let t = x.keep_degrees_at_least(-radius_exp + 1);
            c.push(t);
        }
        Ok(Ball { center: c, radius_exp })
    }

    /// The d-fold product of `X^{-r}𝒪`.
    pub fn centered(spec: &Arc<FieldSpec>, d: usize, radius_exp: i64) -> Self {
        Ball { center: vec![Laurent::zero(spec); d], radius_exp }
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.center[0].spec()
    }
    pub fn dim(&self) -> usize {
        self.center.len()
    }
    pub fn center(&self) -> &[Laurent] {
        &self.center
    }
    pub fn radius_exp(&self) -> i64 {
        self.radius_exp
    }
    /// `q^{-radius_exp}`.
    pub fn radius(&self) -> AbsValue {
        AbsValue::Pow(-self.radius_exp)
    }
    pub fn measure(&self) -> Measure {
        Measure::qpow_neg(self.spec().q(), self.dim() as i64 * self.radius_exp)
    }

    pub fn contains_point(&self, x: &[Laurent]) -> FieldResult<bool> {
        if x.len() != self.dim() {
            return Err(FieldError::InvalidGrid("point dimension differs from ball".into()));
        }
        for (xi, ci) in x.iter().zip(&self.center) {
            let d = xi.checked_sub(ci)?;
            if d.abs() > self.radius() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn relation(&self, o: &Ball) -> FieldResult<BallRelation> {
        let big = self.radius_exp.min(o.radius_exp);
        let r = AbsValue::Pow(-big);
        for (a, b) in self.center.iter().zip(&o.center) {
            if a.checked_sub(b)?.abs() > r {
                return Ok(BallRelation::Disjoint);
            }
        }
        Ok(match self.radius_exp.cmp(&o.radius_exp) {
            Ordering::Equal => BallRelation::Equal,
            Ordering::Less => BallRelation::Contains,
            Ordering::Greater => BallRelation::ContainedIn,
        })
    }

    /// The `q^d` balls of radius exponent `radius_exp + 1` partitioning this
    /// one, in cell order (first coordinate's digit least significant).
    pub fn children(&self) -> Vec<Ball> {
        let spec = self.spec().clone();
        let q = spec.q() as usize;
        let d = self.dim();
        let total = q.pow(d as u32);
        let digit_deg = -self.radius_exp;
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let center = self
                .center
                .iter()
                .map(|c| {
                    let j = (rem % q) as u32;
                    rem /= q;
                    if j == 0 {
                        c.clone()
                    } else {
                        c + &Laurent::monomial(&spec, j, digit_deg)
                    }
                })
                .collect();
            out.push(Ball { center, radius_exp: self.radius_exp + 1 });
        }
        out
    }

    /// The sub-ball of radius exponent `radius_exp + 1` sharing this center.
    pub fn halved(&self) -> Ball {
        Ball { center: self.center.clone(), radius_exp: self.radius_exp + 1 }
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B(")?;
        for (i, c) in self.center.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "; r={})", self.radius_exp)
    }
}

/// Partition of `domain` into cells of radius exponent `resolution`.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub domain: Ball,
    pub resolution: i64,
}

impl GridSpec {
    pub fn new(domain: Ball, resolution: i64) -> FieldResult<Self> {
        if resolution < domain.radius_exp() {
            return Err(FieldError::InvalidGrid(format!(
                "resolution {resolution} is coarser than the domain radius exponent {}",
                domain.radius_exp()
            )));
        }
        Ok(GridSpec { domain, resolution })
    }
    /// Cells of `(X^{-1}𝒪)^d`.
    pub fn unit(spec: &Arc<FieldSpec>, d: usize, resolution: i64) -> FieldResult<Self> {
        Self::new(Ball::centered(spec, d, 1), resolution)
    }
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
    pub fn cell_count(&self) -> u128 {
        let q = self.domain.spec().q() as u128;
        q.pow(self.dim() as u32 * (self.resolution - self.domain.radius_exp()) as u32)
    }
    pub fn cell_measure(&self) -> Measure {
        Measure::qpow_neg(self.domain.spec().q(), self.dim() as i64 * self.resolution)
    }

    /// The cell with the given index. Per coordinate, the `L = N - r` free
    /// digits (degrees `-r, -r-1, …, -(N-1)`) form the code
    /// `Σ_k digit_{-(r+k)} q^k`; coordinate j contributes `code_j · q^{L j}`.
    pub fn cell(&self, mut index: u128) -> Ball {
        let spec = self.domain.spec().clone();
        let q = spec.q() as u128;
        let r = self.domain.radius_exp();
        let l = self.resolution - r;
        let center = self
            .domain
            .center()
            .iter()
            .map(|c| {
                let mut terms: Vec<(i64, u32)> = c.terms().collect();
                for k in 0..l {
                    let dgt = (index % q) as u32;
                    index /= q;
                    terms.push((-(r + k), dgt));
                }
                Laurent::from_terms(&spec, &terms)
            })
            .collect();
        Ball { center, radius_exp: self.resolution }
    }
}

pub fn enumerate_cells(g: &GridSpec) -> impl Iterator<Item = Ball> + '_ {
    (0..g.cell_count()).map(move |i| g.cell(i))
}

/// Number of `a ∈ Λ^n` with `‖a‖ = q^t`: `q^{tn}(q^n − 1)`.
pub fn shell_count(q: u32, n: u32, t: u32) -> u128 {
    let q = q as u128;
    q.pow(t * n) * (q.pow(n) - 1)
}

/// All `a ∈ Λ^n` with `max deg a_i = t`.
///
/// Order: the tuple code `Σ_i code(a_i) q^{(t+1)(i-1)}` increases, where
/// `code(a) = Σ_k c_k q^k`; tuples of smaller height are skipped.
pub fn enumerate_shell(
    spec: &Arc<FieldSpec>,
    n: usize,
    t: i64,
) -> FieldResult<impl Iterator<Item = Vec<Poly>> + '_> {
    if t < 0 {
        return Err(FieldError::NegativeExponent(t));
    }
    let q = spec.q() as u64;
    let len = t as usize + 1;
    let per = q.checked_pow(len as u32).ok_or_else(|| FieldError::InvalidGrid("shell too large".into()))?;
    let total = per
        .checked_pow(n as u32)
        .ok_or_else(|| FieldError::InvalidGrid("shell too large".into()))?;
    let top = q.pow(t as u32);
    Ok((0..total).filter_map(move |mut code| {
        let mut parts = Vec::with_capacity(n);
        let mut on_shell = false;
        for _ in 0..n {
            let c = code % per;
            code /= per;
            on_shell |= c >= top;
            parts.push(c);
        }
        on_shell.then(|| parts.into_iter().map(|c| Poly::from_code(spec, c, len)).collect())
    }))
}

/// Outcome of testing a predicate on a whole cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellDecision {
    In,
    Out,
    Undecided,
}

/// Exact bounds on the measure of a set, as produced by [`sweep`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    /// Measure of cells certified inside the set.
    pub lower: Measure,
    /// `lower` plus the measure of cells left undecided.
    pub upper: Measure,
    pub undecided_cells: u64,
    pub cells_visited: u64,
}

impl SweepReport {
    fn empty(q: u32) -> Self {
        SweepReport { lower: Measure::zero(q), upper: Measure::zero(q), undecided_cells: 0, cells_visited: 0 }
    }
    fn merge(mut self, o: SweepReport) -> Self {
        self.lower = self.lower.add(&o.lower);
        self.upper = self.upper.add(&o.upper);
        self.undecided_cells += o.undecided_cells;
        self.cells_visited += o.cells_visited;
        self
    }
    pub fn certified(&self) -> bool {
        self.undecided_cells == 0
    }
    /// The measure when certified.
    pub fn exact(&self) -> Option<Measure> {
        self.certified().then_some(self.lower)
    }
    /// Midpoint of the bounds, as a float.
    pub fn estimate(&self) -> f64 {
        0.5 * (self.lower.to_f64() + self.upper.to_f64())
    }
}

fn visit<F, L>(b: Ball, max_depth: i64, decide: &F, leaf: &L, acc: &mut SweepReport, next: &mut Vec<Ball>)
where
    F: Fn(&Ball) -> CellDecision,
    L: Fn(&Ball) -> Option<bool>,
{
    acc.cells_visited += 1;
    let inside = |acc: &mut SweepReport, b: &Ball| {
        let m = b.measure();
        acc.lower = acc.lower.add(&m);
        acc.upper = acc.upper.add(&m);
    };
    match decide(&b) {
        CellDecision::In => inside(acc, &b),
        CellDecision::Out => {}
        CellDecision::Undecided if b.radius_exp() >= max_depth => match leaf(&b) {
            Some(true) => inside(acc, &b),
            Some(false) => {}
            None => {
                acc.upper = acc.upper.add(&b.measure());
                acc.undecided_cells += 1;
            }
        },
        CellDecision::Undecided => next.extend(b.children()),
    }
}

fn sweep_impl<F, L>(domain: &Ball, max_depth: i64, decide: F, leaf: L) -> SweepReport
where
    F: Fn(&Ball) -> CellDecision + Sync,
    L: Fn(&Ball) -> Option<bool> + Sync,
{
    const PARALLEL_FRONTIER: usize = 256;
    let q = domain.spec().q();
    let mut acc = SweepReport::empty(q);
    let mut frontier = vec![domain.clone()];
    while !frontier.is_empty() && frontier.len() < PARALLEL_FRONTIER {
        let mut next = Vec::new();
        for b in frontier {
            visit(b, max_depth, &decide, &leaf, &mut acc, &mut next);
        }
        frontier = next;
    }
    let rest = frontier
        .into_par_iter()
        .map(|b| {
            let mut r = SweepReport::empty(q);
            let mut stack = vec![b];
            while let Some(b) = stack.pop() {
                visit(b, max_depth, &decide, &leaf, &mut r, &mut stack);
            }
            r
        })
        .reduce(|| SweepReport::empty(q), SweepReport::merge);
    acc.merge(rest)
}

/// Measure `{x ∈ domain : P(x)}` by refining undecided cells down to radius
/// exponent `max_depth`. `decide` must be sound: `In`/`Out` only when the
/// predicate is constant on the whole cell.
pub fn sweep<F>(domain: &Ball, max_depth: i64, decide: F) -> SweepReport
where
    F: Fn(&Ball) -> CellDecision + Sync,
{
    sweep_impl(domain, max_depth, decide, |_| None)
}

/// Measure of the union of the cells of `grid` whose center satisfies
/// `pred`. `decide` prunes: a coarser ball decided `In`/`Out` settles all the
/// cell centers inside it, and `pred` runs only on cells still undecided.
pub fn count_cells<F, P>(grid: &GridSpec, decide: F, pred: P) -> Measure
where
    F: Fn(&Ball) -> CellDecision + Sync,
    P: Fn(&Ball) -> bool + Sync,
{
    sweep_impl(&grid.domain, grid.resolution, decide, |b| Some(pred(b))).lower.reduced()
}

/// Measure of `{x : P(x)}` where `P` is known to be constant on cells of
/// `grid`, by evaluating it once per cell.
pub fn measure_by_cells<F>(grid: &GridSpec, pred: F) -> Measure
where
    F: Fn(&Ball) -> bool + Sync,
{
    let hits: u128 = (0..grid.cell_count())
        .into_par_iter()
        .filter(|&i| pred(&grid.cell(i)))
        .count() as u128;
    let m = grid.cell_measure();
    Measure { q: m.q, count: hits, exp: m.exp }.reduced()
}

/// `BigRational` power `q^e`.
pub fn qpow_rational(q: u32, e: i64) -> BigRational {
    let qb = BigInt::from(q);
    if e >= 0 {
        BigRational::from_integer(num_traits::pow(qb, e as usize))
    } else {
        BigRational::new(BigInt::one(), num_traits::pow(qb, (-e) as usize))
    }
}

/// Exact log base q of a rational that is a power of q.
pub fn log_q_exact(q: u32, x: &BigRational) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let l = x.to_f64()?.log(q as f64).round() as i64;
    (qpow_rational(q, l) == *x).then_some(l)
}
