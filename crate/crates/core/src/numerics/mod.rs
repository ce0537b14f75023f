//! Dense linear algebra, the box LP, and seeded randomness.

pub mod linalg;
pub mod lp;
pub mod rng;

pub use linalg::{
    block_diag, check_orthogonal, hstack, inv_sqrt_spd, orthogonality_residual, pinv, svd,
    sym_eig, vstack, Matrix, Svd, SymEig, Vector, DEFAULT_RANK_TOL,
};
pub use lp::{solve_bounded_lp, solve_box_lp, LpSolution};
pub use rng::{random_orthogonal, Rng};
