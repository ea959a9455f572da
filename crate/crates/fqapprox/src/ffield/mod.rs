//! Arithmetic in F_q, F_q[X] and F_q((X⁻¹)), balls, Haar measure and
//! enumeration.

mod field;
mod grid;
mod laurent;
mod poly;

pub use field::{field_arith, FieldElem, FieldError, FieldOp, FieldResult, FieldSpec};
#[allow(unused_imports)]
pub(crate) use field::same_field;
pub use grid::{
    count_cells, enumerate_cells, enumerate_shell, log_q_exact, measure_by_cells, qpow_rational, shell_count, sweep, Ball,
    BallRelation, CellDecision, GridSpec, Measure, SweepReport,
};
pub use laurent::{abs_of_ratio, floor_scale, laurent_arith, qpow_f64, AbsValue, Laurent, LaurentOp, QExp};
pub use poly::{poly_arith, Poly, PolyOp};
