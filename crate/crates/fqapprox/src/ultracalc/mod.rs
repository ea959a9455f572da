//! Ultrametric calculus on polynomial maps: difference quotients, formal
//! partials, skew gradients, rescaling, Taylor bounds and the normalization
//! conditions.

mod analytic;
mod diffquot;
mod multipoly;
mod taylor;

pub use analytic::{check_conditions, eval_map, AnalyticMap, BoundCheck, ConditionsReport};
pub use diffquot::{
    complete_homogeneous, difference_quotient, difference_quotient_bar, multi_difference, multi_difference_bar,
    multi_difference_poly, rescale_recenter, skew_gradient,
};
pub use multipoly::{laurent_rank, MultiIndex, MultiPoly};
pub use taylor::{sup_norm_bounds, sup_norm_on_ball, AbsRange, SupBounds, Taylor};
