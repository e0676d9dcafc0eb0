//! Max-sum dispersion for points under rectilinear distances.
//!
//! Given `n` points in `d` dimensions, choose `k` of them maximizing the sum
//! of pairwise distances. The crate provides:
//!
//! - [`exact::solve_fixed_k`]: an optimal subset in time linear in `n` for
//!   fixed `k` and `d`, searching a directional candidate pool of at most
//!   `k^(d+1)` points;
//! - [`ptas::solve_ptas`]: a planar approximation scheme for variable `k`
//!   with guarantee `1 - (5m - 9) / (2 (m - 1)(m - 2))` when `m | k`;
//! - [`baselines::brute_force`] (the exhaustive oracle) and
//!   [`baselines::greedy_baseline`].
//!
//! Coordinates are integers, so L1 and L∞ weights are exact. L∞ instances
//! are solved as L1 instances after a 45 degree rotation; Euclidean (L2)
//! weights are reported for selections made under L1.

pub mod baselines;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod io;
pub mod ptas;
pub mod search;
pub mod solution;

pub use baselines::{brute_force, brute_force_with, greedy_baseline};
pub use error::{Error, Result};
pub use exact::{candidate_union, enumerate_directions, solve_fixed_k, solve_fixed_k_with};
pub use geometry::{
    directional_topk, inner_product, l1_distance, rotate_linf_to_l1, subset_weight, Direction,
    Metric, PointSet, Weight,
};
pub use ptas::{bound_fraction, choose_m, solve_ptas, BoundFraction, CellConfig, PtasParams};
pub use search::SearchLimits;
pub use solution::{Algorithm, Solution, SolveStats};
