//! Linear programs over the coefficient box `[-1, 1]^n` with equality rows.
//!
//! Every support-function and membership query on constrained zonotopes
//! reduces to this form. Problems without equality rows are solved in closed
//! form; everything else goes to `microlp`'s bounded simplex.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::linalg::{Matrix, Vector};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vector,
    pub value: f64,
}

/// Maximize `objective^T x` subject to `aeq x = beq`, `x` in `[-1, 1]^n`.
pub fn solve_box_lp(objective: &Vector, aeq: &Matrix, beq: &Vector) -> Result<LpSolution> {
    solve_bounded_lp(objective, aeq, beq, 1.0)
}

/// Like [`solve_box_lp`] on the widened box `[-bound, bound]^n`.
pub fn solve_bounded_lp(
    objective: &Vector,
    aeq: &Matrix,
    beq: &Vector,
    bound: f64,
) -> Result<LpSolution> {
    let n = objective.len();
    if aeq.nrows() > 0 {
        Error::check_dim("box lp columns", n, aeq.ncols())?;
    }
    Error::check_dim("box lp rows", aeq.nrows(), beq.len())?;
    if !(bound > 0.0) {
        return Err(Error::Parameter(format!("box bound must be positive, got {bound}")));
    }

    if aeq.nrows() == 0 {
        let x = objective.map(|c| if c >= 0.0 { bound } else { -bound });
        let value = objective.dot(&x);
        return Ok(LpSolution { x, value });
    }

    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = objective
        .iter()
        .map(|&c| problem.add_var(c, (-bound, bound)))
        .collect();

    let scale = aeq.amax().max(beq.amax()).max(1.0);
    for (i, row) in aeq.row_iter().enumerate() {
        let terms: Vec<_> = row
            .iter()
            .zip(&vars)
            .filter(|(a, _)| **a != 0.0)
            .map(|(&a, &v)| (v, a))
            .collect();
        if terms.is_empty() {
            if beq[i].abs() > 1e-12 * scale {
                return Err(Error::Infeasible);
            }
            continue;
        }
        problem.add_constraint(terms.as_slice(), ComparisonOp::Eq, beq[i]);
    }

    let solution = match problem.solve() {
        Ok(outcome) => outcome
            .into_solution()
            .map_err(|_| Error::Numerical("lp interrupted".into()))?,
        Err(microlp::Error::Infeasible) => return Err(Error::Infeasible),
        Err(e) => return Err(Error::Numerical(format!("lp solver: {e}"))),
    };
    let x = Vector::from_iterator(
        n,
        vars.iter()
            .map(|&v| solution.var_value(v).clamp(-bound, bound)),
    );
    let value = objective.dot(&x);
    Ok(LpSolution { x, value })
}
