//! Lattices over Λ = F_q[X], the matrices `D U_x`, exterior powers and
//! nondivergence checks.

mod matrix;
mod qn;
mod reduce;
mod submodule;
mod wedge;

pub use matrix::LaurentMatrix;
pub use qn::{
    build_ceil_eps, build_d, build_ux, check_abc, fit_slope, gamma_matrix, hx_vector, hx_wedge_components,
    lattice_at, qn_bound_probe, qn_cell_decision, qn_measure, qn_membership, AbcReport, CeilEps, DParams,
    DeltaReport, QnMembership, QnProbe, QnProbeRow,
};
pub use reduce::{reduce_lattice, short_vectors, ReducedLattice};
pub use submodule::{is_primitive, minor_content, poly_det, primitive_submodules, PrimitiveSubmodule};
pub use wedge::{pi_norm, wedge, wedge_norm, WedgeVector};
