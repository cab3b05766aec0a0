//! Upper evidence for the sharp constants: concentrating bubbles, truncated
//! minimization in the half-line frame, and the weighted Sobolev certificate
//! for the lower branch.

mod branch;
mod bubble;
mod minimize;
mod sweep;

pub use branch::{ckn_branch_bound, CknBound};
pub use bubble::{
    bubble_profile, cutoff, cutoff_slope, sobolev_quotient_bubble, weighted_quotient_bubble, BubbleParams,
    WeightedBubble, EPS_FLOOR,
};
pub use minimize::{
    frame_start, minimize_tau, MinimizeResult, MinimizeSummary, DIVERGENCE_WINDOW, STALL_TOL, STALL_WINDOW,
};
pub use sweep::{concentration_sweep, fit_power_law, halving, SweepEntry, SweepKind, SweepRecord};
