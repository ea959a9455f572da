//! Resonant sets, ultrametric Newton roots, the resonant-witness
//! construction, covering counts and divergence series for ubiquity.

mod affine;
mod cover;
mod newton;
mod sums;
mod witness;

use crate::ffield::{Laurent, QExp};

pub use affine::AffineForms;
pub use cover::{covering_fraction, lambda_phi_hits, CoverReport, LambdaHits};
pub use newton::{derivative, eval_univariate, hensel_ok, newton_root_1d, recenter, NewtonRoot};
pub use sums::{ubiquity_sum, SeriesRow, UbiquitySum};
pub use witness::{
    construct_resonant_witness, default_u0, dist_to_resonant, minkowski_matrix, resonant_gate, Claim, ResonantFn,
    ResonantPoint, UbiquityParams, WitnessReport, K0_STAR_EXP,
};

pub(crate) fn ser_laurent<S: serde::Serializer>(l: &Laurent, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&l.body_string())
}

pub(crate) fn ser_laurents<S: serde::Serializer>(v: &[Laurent], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|l| l.body_string()))
}

pub(crate) fn ser_qexp<S: serde::Serializer>(e: &QExp, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

pub(crate) fn ser_opt_qexp<S: serde::Serializer>(e: &Option<QExp>, s: S) -> Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(&e.to_string()),
        None => s.serialize_none(),
    }
}
