//! Expected-departure Green's functions for diagonal random walks.
//!
//! A diagonal walk on `Z^d` moves every coordinate by `+1` or `-1` at each
//! step, all `2^d` moves equally likely. The walk is killed on the boundary
//! of a domain. `F_src(x)` counts the expected departures from `x`.
//!
//! * [`lattice`]: points, domains, boundary sets, parity.
//! * [`dispersion`]: branches of `c * cosh(beta) = 1` and the hyperbolic factors.
//! * [`series`]: finite sums for rectangles, strips and blocks.
//! * [`integral`]: half-plane and full-lattice integrals, return constants.
//! * [`oracles`]: linear solve and Monte Carlo for cross-checking.
//! * [`check`]: the invariant suite behind the `check` command.

pub mod check;
pub mod dispersion;
pub mod error;
pub mod integral;
pub mod lattice;
pub mod numeric;
pub mod oracles;
pub mod quadrature;
pub mod series;

pub use dispersion::{solve_branch, term_rect, term_semistrip, term_strip, BranchKind, DispersionBranch};
pub use error::{Error, Result};
pub use integral::{halfplane_green, lattice_green_nd, return_constant, ReturnConstant, ReturnStyle};
pub use lattice::{boundary_set, classify_point, diagonal_neighbors, parity_compatible, DomainSpec, LatticePoint, PointClass};
pub use oracles::{fundamental_matrix_green, mc_absorption_time, mc_expected_departures, mc_return_prob, McConfig, McEstimate};
pub use quadrature::{integrate_adaptive, QuadratureResult, QuadratureSpec};
pub use series::{absorption_probs, block_green, green, green_row, rect_green, return_prob_finite, semistrip_green, strip_green, AbsorptionMap};
