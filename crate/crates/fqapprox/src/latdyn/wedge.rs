//! Exterior powers of F^m with basis `e₀, e₁*, …, e_d*, e₁, …, eₙ`
//! (indices 0, 1..=d, d+1..m), and the norm that ignores components with
//! two or more starred indices.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::ffield::{AbsValue, FieldSpec, Laurent};
use crate::{Error, Result};

/// A k-vector stored as sorted index sets with nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeVector {
    spec: Arc<FieldSpec>,
    dim: usize,
    starred: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, Laurent>,
}

/// Sign of merging two disjoint sorted index lists: parity of the pairs
/// (i ∈ a, j ∈ b) with i > j.
fn merge_sign(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut inversions = 0usize;
    for &i in a {
        for &j in b {
            if i == j {
                return None;
            }
            if i > j {
                inversions += 1;
            }
        }
    }
    let mut m: Vec<usize> = a.iter().chain(b).copied().collect();
    m.sort_unstable();
    Some((m, inversions % 2 == 1))
}

impl WedgeVector {
    /// A 1-vector in F^m; indices `1..=starred` are the starred ones.
    pub fn from_vector(spec: &Arc<FieldSpec>, v: &[Laurent], starred: usize) -> Result<Self> {
        if starred + 1 > v.len() {
            return Err(Error::Dimension("more starred indices than coordinates".into()));
        }
        let coeffs = v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (vec![i], c.clone())).collect();
        Ok(WedgeVector { spec: spec.clone(), dim: v.len(), starred, degree: 1, coeffs })
    }

    /// `c · e_I` for an index set given in any order.
    pub fn basis(spec: &Arc<FieldSpec>, dim: usize, starred: usize, idx: &[usize], c: Laurent) -> Result<Self> {
        let mut w = WedgeVector { spec: spec.clone(), dim, starred, degree: idx.len(), coeffs: BTreeMap::new() };
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) || c.is_zero() {
            return Ok(w);
        }
        if sorted.last().is_some_and(|&i| i >= dim) {
            return Err(Error::Dimension("basis index out of range".into()));
        }
        // Sign of the sorting permutation.
        let mut inv = 0;
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                if idx[a] > idx[b] {
                    inv += 1;
                }
            }
        }
        w.coeffs.insert(sorted, if inv % 2 == 1 { c.neg() } else { c });
        Ok(w)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn coeff(&self, idx: &[usize]) -> Laurent {
        self.coeffs.get(idx).cloned().unwrap_or_else(|| Laurent::zero(&self.spec))
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Laurent)> {
        self.coeffs.iter()
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn wedge(&self, o: &WedgeVector) -> Result<WedgeVector> {
        if self.dim != o.dim || self.starred != o.starred {
            return Err(Error::Dimension("wedge of vectors from different spaces".into()));
        }
        let mut out: BTreeMap<Vec<usize>, Laurent> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &o.coeffs {
                let Some((idx, neg)) = merge_sign(a, b) else { continue };
                let mut c = ca.checked_mul(cb)?;
                if neg {
                    c = c.neg();
                }
                let entry = out.entry(idx).or_insert_with(|| Laurent::zero(&self.spec));
                *entry = entry.checked_add(&c)?;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(WedgeVector { spec: self.spec.clone(), dim: self.dim, starred: self.starred, degree: self.degree + o.degree, coeffs: out })
    }

    pub fn scale(&self, c: &Laurent) -> Result<WedgeVector> {
        let mut w = self.clone();
        for v in w.coeffs.values_mut() {
            *v = v.checked_mul(c)?;
        }
        w.coeffs.retain(|_, c| !c.is_zero());
        Ok(w)
    }

    fn starred_count(&self, idx: &[usize]) -> usize {
        idx.iter().filter(|&&i| (1..=self.starred).contains(&i)).count()
    }

    /// Sup over components with at most one starred index.
    pub fn pi_norm(&self) -> AbsValue {
        self.coeffs
            .iter()
            .filter(|(idx, _)| self.starred_count(idx) <= 1)
            .map(|(_, c)| c.abs())
            .max()
            .unwrap_or(AbsValue::Zero)
    }

    /// Sup over all components.
    pub fn sup_norm(&self) -> AbsValue {
        self.coeffs.values().map(|c| c.abs()).max().unwrap_or(AbsValue::Zero)
    }
}

impl fmt::Display for WedgeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let name = |i: usize| {
            if i == 0 {
                "e0".to_string()
            } else if i <= self.starred {
                format!("e{i}*")
            } else {
                format!("e{}", i - self.starred)
            }
        };
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(idx, c)| {
                let b: Vec<String> = idx.iter().map(|&i| name(i)).collect();
                format!("({}) {}", c.body_string(), b.join("^"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `v₁ ∧ ⋯ ∧ v_k`.
pub fn wedge(vs: &[Vec<Laurent>], starred: usize) -> Result<WedgeVector> {
    let first = vs.first().ok_or_else(|| Error::Dimension("wedge of no vectors".into()))?;
    let spec = first.first().ok_or_else(|| Error::Dimension("zero-dimensional vector".into()))?.spec().clone();
    let mut w = WedgeVector::from_vector(&spec, first, starred)?;
    for v in &vs[1..] {
        if v.len() != first.len() {
            return Err(Error::Dimension("vectors of different lengths".into()));
        }
        w = w.wedge(&WedgeVector::from_vector(&spec, v, starred)?)?;
    }
    Ok(w)
}

pub fn pi_norm(w: &WedgeVector) -> AbsValue {
    w.pi_norm()
}

/// Sup norm of `v₁ ∧ ⋯ ∧ v_k` with no starred indices.
pub fn wedge_norm(vs: &[Vec<Laurent>]) -> Result<AbsValue> {
    Ok(wedge(vs, 0)?.sup_norm())
}
