//! Radial profiles on graded grids, the functionals of the inequality, and
//! the changes of variables between coordinate frames.

mod functionals;
mod grid;
mod profile;
mod report;
mod transforms;

pub use functionals::{
    dirichlet_energy, hardy_term, hs_lhs, hs_quotient, hs_rhs_integral, hs_rhs_norm, integrate_radial, series_term,
};
pub use grid::{log_grid, make_grid, Frame, FrameKind, Grading, GridMeta, RadialGrid, MAX_CELL_RATIO, MIN_NODES, R_MIN};
pub use profile::{default_boundary, Boundary, RadialProfile, DIRICHLET_TOL};
pub use report::{QuotientParams, QuotientReport};
pub use transforms::{
    ckn_quotient, default_truncation, k_transform, k_transformed_quotient, kelvin, scaling_check, substitute_v,
    t_quotient, t_transform, tail_weight, tau_quotient, tau_transform, v_form_quotient,
};
