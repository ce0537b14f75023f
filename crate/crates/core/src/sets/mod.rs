//! Zonotopes, constrained zonotopes, and matrix zonotopes.

mod constrained;
mod matrix_zonotope;
mod zonotope;

use serde::{Deserialize, Serialize};

pub use constrained::ConstrainedZonotope;
pub use matrix_zonotope::{MatrixZonotope, MzGenerators, ORTHOGONALITY_TOL};
pub use zonotope::Zonotope;

use crate::error::Result;
use crate::numerics::{Matrix, Vector};

/// A reachable set in either representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "set", rename_all = "snake_case")]
pub enum ReachSet {
    Zonotope(Zonotope),
    Constrained(ConstrainedZonotope),
}

impl ReachSet {
    pub fn dim(&self) -> usize {
        match self {
            ReachSet::Zonotope(z) => z.dim(),
            ReachSet::Constrained(c) => c.dim(),
        }
    }

    pub fn num_generators(&self) -> usize {
        match self {
            ReachSet::Zonotope(z) => z.num_generators(),
            ReachSet::Constrained(c) => c.num_generators(),
        }
    }

    pub fn num_constraints(&self) -> usize {
        match self {
            ReachSet::Zonotope(_) => 0,
            ReachSet::Constrained(c) => c.num_constraints(),
        }
    }

    pub fn center(&self) -> &Vector {
        match self {
            ReachSet::Zonotope(z) => z.center(),
            ReachSet::Constrained(c) => c.center(),
        }
    }

    pub fn generators(&self) -> &Matrix {
        match self {
            ReachSet::Zonotope(z) => z.generators(),
            ReachSet::Constrained(c) => c.generators(),
        }
    }

    pub fn support(&self, d: &Vector) -> Result<f64> {
        match self {
            ReachSet::Zonotope(z) => z.support(d),
            ReachSet::Constrained(c) => c.support(d),
        }
    }

    pub fn contains_point(&self, x: &Vector, tol: f64) -> bool {
        match self {
            ReachSet::Zonotope(z) => z.contains_point(x, tol),
            ReachSet::Constrained(c) => c.contains_point(x, tol),
        }
    }

    pub fn linear_map(&self, r: &Matrix) -> Result<ReachSet> {
        Ok(match self {
            ReachSet::Zonotope(z) => ReachSet::Zonotope(z.linear_map(r)?),
            ReachSet::Constrained(c) => ReachSet::Constrained(c.linear_map(r)?),
        })
    }

    pub fn minkowski_zonotope(&self, other: &Zonotope) -> Result<ReachSet> {
        Ok(match self {
            ReachSet::Zonotope(z) => ReachSet::Zonotope(z.minkowski(other)?),
            ReachSet::Constrained(c) => ReachSet::Constrained(c.minkowski_zonotope(other)?),
        })
    }

    /// `self x u`; constraints stay attached to the state coefficients.
    pub fn cartesian(&self, u: &Zonotope) -> ReachSet {
        match self {
            ReachSet::Zonotope(z) => ReachSet::Zonotope(z.cartesian(u)),
            ReachSet::Constrained(c) => {
                let stacked = c.without_constraints().cartesian(u);
                let mut aeq = Matrix::zeros(c.num_constraints(), stacked.num_generators());
                aeq.columns_mut(0, c.num_generators()).copy_from(c.aeq());
                let (center, generators) = stacked.into_parts();
                ReachSet::Constrained(
                    ConstrainedZonotope::new(center, generators, aeq, c.beq().clone())
                        .expect("shapes checked"),
                )
            }
        }
    }

    pub fn to_constrained(&self) -> ConstrainedZonotope {
        match self {
            ReachSet::Zonotope(z) => ConstrainedZonotope::from(z.clone()),
            ReachSet::Constrained(c) => c.clone(),
        }
    }

    pub fn as_zonotope(&self) -> Option<&Zonotope> {
        match self {
            ReachSet::Zonotope(z) => Some(z),
            ReachSet::Constrained(_) => None,
        }
    }

    /// Zonotope enclosure: the set itself, or the constrained set with its
    /// constraints dropped.
    pub fn outer_zonotope(&self) -> Zonotope {
        match self {
            ReachSet::Zonotope(z) => z.clone(),
            ReachSet::Constrained(c) => c.without_constraints(),
        }
    }
}

impl From<Zonotope> for ReachSet {
    fn from(z: Zonotope) -> Self {
        ReachSet::Zonotope(z)
    }
}

impl From<ConstrainedZonotope> for ReachSet {
    fn from(c: ConstrainedZonotope) -> Self {
        ReachSet::Constrained(c)
    }
}
