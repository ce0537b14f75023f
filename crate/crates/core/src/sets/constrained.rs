use serde::{Deserialize, Serialize};

use super::Zonotope;
use crate::error::{Error, Result};
use crate::numerics::linalg::{block_diag, from_rows, hstack, to_rows, vstack};
use crate::numerics::{solve_bounded_lp, solve_box_lp, Matrix, Vector};

/// `{ c + G xi : xi in [-1, 1]^ng, Aeq xi = beq }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstrainedJson", into = "ConstrainedJson")]
pub struct ConstrainedZonotope {
    center: Vector,
    generators: Matrix,
    aeq: Matrix,
    beq: Vector,
}

impl ConstrainedZonotope {
    pub fn new(center: Vector, generators: Matrix, aeq: Matrix, beq: Vector) -> Result<Self> {
        Error::check_dim("constrained generators", center.len(), generators.nrows())?;
        Error::check_dim("constraint columns", generators.ncols(), aeq.ncols())?;
        Error::check_dim("constraint rows", aeq.nrows(), beq.len())?;
        Ok(ConstrainedZonotope {
            center,
            generators,
            aeq,
            beq,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    pub fn num_constraints(&self) -> usize {
        self.aeq.nrows()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn generators(&self) -> &Matrix {
        &self.generators
    }

    pub fn aeq(&self) -> &Matrix {
        &self.aeq
    }

    pub fn beq(&self) -> &Vector {
        &self.beq
    }

    /// The enclosing zonotope obtained by dropping every constraint.
    pub fn without_constraints(&self) -> Zonotope {
        Zonotope::new(self.center.clone(), self.generators.clone()).expect("shapes checked")
    }

    pub fn linear_map(&self, r: &Matrix) -> Result<ConstrainedZonotope> {
        Error::check_dim("linear_map", self.dim(), r.ncols())?;
        Ok(ConstrainedZonotope {
            center: r * &self.center,
            generators: r * &self.generators,
            aeq: self.aeq.clone(),
            beq: self.beq.clone(),
        })
    }

    pub fn minkowski(&self, other: &ConstrainedZonotope) -> Result<ConstrainedZonotope> {
        Error::check_dim("minkowski", self.dim(), other.dim())?;
        Ok(ConstrainedZonotope {
            center: &self.center + &other.center,
            generators: hstack(&self.generators, &other.generators),
            aeq: block_diag(&self.aeq, &other.aeq),
            beq: stack_vectors(&self.beq, &other.beq),
        })
    }

    pub fn minkowski_zonotope(&self, other: &Zonotope) -> Result<ConstrainedZonotope> {
        self.minkowski(&ConstrainedZonotope::from(other.clone()))
    }

    /// Generalized intersection `{ z in self : R z in other }`.
    pub fn intersect(&self, other: &ConstrainedZonotope, r: &Matrix) -> Result<ConstrainedZonotope> {
        Error::check_dim("intersection map columns", self.dim(), r.ncols())?;
        Error::check_dim("intersection map rows", other.dim(), r.nrows())?;
        let ng_z = self.num_generators();
        let ng_y = other.num_generators();
        let generators = hstack(&self.generators, &Matrix::zeros(self.dim(), ng_y));
        let coupling = hstack(&(r * &self.generators), &(-other.generators.clone()));
        let aeq = vstack(&block_diag(&self.aeq, &other.aeq), &coupling);
        let beq = stack_vectors(
            &stack_vectors(&self.beq, &other.beq),
            &(&other.center - r * &self.center),
        );
        debug_assert_eq!(aeq.ncols(), ng_z + ng_y);
        Ok(ConstrainedZonotope {
            center: self.center.clone(),
            generators,
            aeq,
            beq,
        })
    }

    /// `h(d) = d^T c + max { (G^T d)^T xi : Aeq xi = beq, xi in box }`.
    pub fn support(&self, d: &Vector) -> Result<f64> {
        Error::check_dim("support", self.dim(), d.len())?;
        let objective = self.generators.tr_mul(d);
        match solve_box_lp(&objective, &self.aeq, &self.beq) {
            Ok(sol) => Ok(sol.value + d.dot(&self.center)),
            Err(Error::Infeasible) => Err(Error::EmptySet),
            Err(e) => Err(e),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(
            solve_box_lp(
                &Vector::zeros(self.num_generators()),
                &self.aeq,
                &self.beq
            ),
            Err(Error::Infeasible)
        )
    }

    /// Tight axis-aligned bounds from `2n` support evaluations.
    pub fn interval_hull(&self) -> Result<(Vector, Vector)> {
        let n = self.dim();
        let mut lo = Vector::zeros(n);
        let mut hi = Vector::zeros(n);
        for i in 0..n {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            hi[i] = self.support(&e)?;
            lo[i] = -self.support(&-e)?;
        }
        Ok((lo, hi))
    }

    pub fn contains_point(&self, x: &Vector, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let offset = x - &self.center;
        let rows = vstack(&self.generators, &self.aeq);
        let rhs = stack_vectors(&offset, &self.beq);
        if self.num_generators() == 0 {
            return rhs.amax() <= 1e-12 * (1.0 + x.amax());
        }
        let objective = Vector::zeros(self.num_generators());
        solve_bounded_lp(&objective, &rows, &rhs, 1.0 + tol).is_ok()
    }

    /// The lifted zonotope `<[c; -b], [G; A]>` in `R^(n + nc)`; the set is
    /// its slice at zero in the last `nc` coordinates.
    pub fn lift(&self) -> Zonotope {
        Zonotope::new(
            stack_vectors(&self.center, &(-self.beq.clone())),
            vstack(&self.generators, &self.aeq),
        )
        .expect("shapes checked")
    }

    /// Inverse of [`Self::lift`] for a set of dimension `n`.
    pub fn unlift(lifted: &Zonotope, n: usize) -> Result<ConstrainedZonotope> {
        if lifted.dim() < n {
            return Err(Error::dim("unlift", n, lifted.dim()));
        }
        let nc = lifted.dim() - n;
        let g = lifted.generators();
        let c = lifted.center();
        ConstrainedZonotope::new(
            c.rows(0, n).into_owned(),
            g.rows(0, n).into_owned(),
            g.rows(n, nc).into_owned(),
            -c.rows(n, nc).into_owned(),
        )
    }
}

impl From<Zonotope> for ConstrainedZonotope {
    fn from(z: Zonotope) -> Self {
        let p = z.num_generators();
        let (center, generators) = z.into_parts();
        ConstrainedZonotope {
            center,
            generators,
            aeq: Matrix::zeros(0, p),
            beq: Vector::zeros(0),
        }
    }
}

pub(crate) fn stack_vectors(a: &Vector, b: &Vector) -> Vector {
    let mut out = Vector::zeros(a.len() + b.len());
    out.rows_mut(0, a.len()).copy_from(a);
    out.rows_mut(a.len(), b.len()).copy_from(b);
    out
}

#[derive(Serialize, Deserialize)]
struct ConstrainedJson {
    center: Vec<f64>,
    generators: Vec<Vec<f64>>,
    #[serde(rename = "Aeq")]
    aeq: Vec<Vec<f64>>,
    beq: Vec<f64>,
}

impl From<ConstrainedZonotope> for ConstrainedJson {
    fn from(z: ConstrainedZonotope) -> Self {
        ConstrainedJson {
            center: z.center.iter().copied().collect(),
            generators: to_rows(&z.generators),
            aeq: to_rows(&z.aeq),
            beq: z.beq.iter().copied().collect(),
        }
    }
}

impl TryFrom<ConstrainedJson> for ConstrainedZonotope {
    type Error = Error;
    fn try_from(j: ConstrainedJson) -> Result<Self> {
        let generators = if j.generators.is_empty() {
            Matrix::zeros(j.center.len(), 0)
        } else {
            from_rows(&j.generators)?
        };
        let aeq = if j.aeq.is_empty() {
            Matrix::zeros(0, generators.ncols())
        } else {
            from_rows(&j.aeq)?
        };
        ConstrainedZonotope::new(
            Vector::from_vec(j.center),
            generators,
            aeq,
            Vector::from_vec(j.beq),
        )
    }
}
