//! Matrix zonotopes and their product with (constrained) zonotopes.
//!
//! The product follows the standard over-approximation
//! `M x S  subset  <C c, [C G, G_1 c .. G_k c, G_1 G .. G_k G]>`.
//! Data-driven models arrive in factorized form, `G_(i,j) = -g_i h_j^T`,
//! with `p * T` generators; products against that form work directly on the
//! factors and never build the dense generator list.

use serde::{Deserialize, Serialize};

use super::{ConstrainedZonotope, ReachSet, Zonotope};
use crate::error::{Error, Result};
use crate::numerics::linalg::{block_diag, from_rows, to_rows};
use crate::numerics::{check_orthogonal, Matrix, Vector};

/// Tolerance on `||P^T P - I||_F` accepted by basis changes.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum MzGenerators {
    Dense(Vec<Matrix>),
    /// Generator `(i, j)` is `-left[i] * right.row(j)`; linear index `i * T + j`.
    Factorized {
        left: Vec<Vector>,
        /// `T x d`, row `j` is `h_j^T`.
        right: Matrix,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixZonotopeJson", into = "MatrixZonotopeJson")]
pub struct MatrixZonotope {
    center: Matrix,
    generators: MzGenerators,
}

impl MatrixZonotope {
    pub fn new(center: Matrix, generators: Vec<Matrix>) -> Result<Self> {
        for g in &generators {
            if g.shape() != center.shape() {
                return Err(Error::dim(
                    "matrix zonotope generator",
                    center.nrows() * center.ncols(),
                    g.nrows() * g.ncols(),
                ));
            }
        }
        Ok(MatrixZonotope {
            center,
            generators: MzGenerators::Dense(generators),
        })
    }

    /// Rank-one factorized form with `left.len() * right.nrows()` generators.
    pub fn factorized(center: Matrix, left: Vec<Vector>, right: Matrix) -> Result<Self> {
        for g in &left {
            Error::check_dim("left factor", center.nrows(), g.len())?;
        }
        Error::check_dim("right factor", center.ncols(), right.ncols())?;
        Ok(MatrixZonotope {
            center,
            generators: MzGenerators::Factorized { left, right },
        })
    }

    pub fn center(&self) -> &Matrix {
        &self.center
    }

    pub fn generator_form(&self) -> &MzGenerators {
        &self.generators
    }

    pub fn rows(&self) -> usize {
        self.center.nrows()
    }

    pub fn cols(&self) -> usize {
        self.center.ncols()
    }

    pub fn is_factorized(&self) -> bool {
        matches!(self.generators, MzGenerators::Factorized { .. })
    }

    /// gamma, the number of matrix generators.
    pub fn num_generators(&self) -> usize {
        match &self.generators {
            MzGenerators::Dense(g) => g.len(),
            MzGenerators::Factorized { left, right } => left.len() * right.nrows(),
        }
    }

    pub fn generator(&self, k: usize) -> Matrix {
        match &self.generators {
            MzGenerators::Dense(g) => g[k].clone(),
            MzGenerators::Factorized { left, right } => {
                let t = right.nrows();
                let (i, j) = (k / t, k % t);
                -(&left[i] * right.row(j))
            }
        }
    }

    pub fn generators_dense(&self) -> Vec<Matrix> {
        (0..self.num_generators()).map(|k| self.generator(k)).collect()
    }

    pub fn densify(&self) -> MatrixZonotope {
        MatrixZonotope {
            center: self.center.clone(),
            generators: MzGenerators::Dense(self.generators_dense()),
        }
    }

    /// `C + sum_k beta_k G_k`.
    pub fn matrix_at(&self, beta: &[f64]) -> Result<Matrix> {
        Error::check_dim("matrix zonotope coefficients", self.num_generators(), beta.len())?;
        let mut m = self.center.clone();
        match &self.generators {
            MzGenerators::Dense(g) => {
                for (gk, b) in g.iter().zip(beta) {
                    m += gk * *b;
                }
            }
            MzGenerators::Factorized { left, right } => {
                let t = right.nrows();
                for (i, g) in left.iter().enumerate() {
                    // sum_j beta_ij h_j^T as one row vector
                    let coeffs = nalgebra::DVector::from_column_slice(&beta[i * t..(i + 1) * t]);
                    let row = right.tr_mul(&coeffs).transpose();
                    m -= g * row;
                }
            }
        }
        Ok(m)
    }

    /// Columns `[C G, G_k c for all k, G_k G for all k]` of the product.
    fn product_generators(&self, c: &Vector, g: &Matrix) -> Matrix {
        let n = self.rows();
        let ng = g.ncols();
        let gamma = self.num_generators();
        let mut out = Matrix::zeros(n, ng + gamma + gamma * ng);
        out.columns_mut(0, ng).copy_from(&(&self.center * g));
        match &self.generators {
            MzGenerators::Dense(list) => {
                for (k, gk) in list.iter().enumerate() {
                    out.set_column(ng + k, &(gk * c));
                    out.columns_mut(ng + gamma + k * ng, ng).copy_from(&(gk * g));
                }
            }
            MzGenerators::Factorized { left, right } => {
                let t = right.nrows();
                let hc = right * c;
                let hg = right * g;
                for (i, gi) in left.iter().enumerate() {
                    for j in 0..t {
                        let k = i * t + j;
                        out.set_column(ng + k, &(gi * (-hc[j])));
                        let block = -(gi * hg.row(j));
                        out.columns_mut(ng + gamma + k * ng, ng).copy_from(&block);
                    }
                }
            }
        }
        out
    }

    pub fn times_zonotope(&self, z: &Zonotope) -> Result<Zonotope> {
        Error::check_dim("matrix zonotope product", self.cols(), z.dim())?;
        let generators = self.product_generators(z.center(), z.generators());
        Zonotope::new(&self.center * z.center(), generators)
    }

    /// Product with a constrained zonotope.
    ///
    /// The first coefficient block keeps the operand's constraints. The
    /// replicated blocks carry coefficients `beta_k xi`, which always lie in
    /// the box, so they are left unconstrained.
    pub fn times_constrained(&self, z: &ConstrainedZonotope) -> Result<ConstrainedZonotope> {
        Error::check_dim("matrix zonotope product", self.cols(), z.dim())?;
        let generators = self.product_generators(z.center(), z.generators());
        let mut aeq = Matrix::zeros(z.num_constraints(), generators.ncols());
        aeq.columns_mut(0, z.num_generators()).copy_from(z.aeq());
        ConstrainedZonotope::new(&self.center * z.center(), generators, aeq, z.beq().clone())
    }

    pub fn times_set(&self, s: &ReachSet) -> Result<ReachSet> {
        Ok(match s {
            ReachSet::Zonotope(z) => ReachSet::Zonotope(self.times_zonotope(z)?),
            ReachSet::Constrained(c) => ReachSet::Constrained(self.times_constrained(c)?),
        })
    }

    /// `P^T M blockdiag(P, I_m)` for an `n x (n + m)` matrix zonotope.
    pub fn change_basis(&self, p: &Matrix) -> Result<MatrixZonotope> {
        let n = self.rows();
        Error::check_dim("basis change", n, p.nrows())?;
        if self.cols() < n {
            return Err(Error::dim("basis change columns", n, self.cols()));
        }
        check_orthogonal(p, ORTHOGONALITY_TOL)?;
        let m = self.cols() - n;
        let right_map = block_diag(p, &Matrix::identity(m, m));
        let map = |x: &Matrix| p.transpose() * x * &right_map;
        let generators = match &self.generators {
            MzGenerators::Dense(list) => MzGenerators::Dense(list.iter().map(map).collect()),
            MzGenerators::Factorized { left, right } => MzGenerators::Factorized {
                left: left.iter().map(|g| p.tr_mul(g)).collect(),
                right: right * &right_map,
            },
        };
        Ok(MatrixZonotope {
            center: map(&self.center),
            generators,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixZonotopeJson {
    center: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    gen_list: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    left: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    right: Option<Vec<Vec<f64>>>,
}

impl From<MatrixZonotope> for MatrixZonotopeJson {
    fn from(m: MatrixZonotope) -> Self {
        let center = to_rows(&m.center);
        match m.generators {
            MzGenerators::Dense(list) => MatrixZonotopeJson {
                center,
                gen_list: Some(list.iter().map(to_rows).collect()),
                left: None,
                right: None,
            },
            MzGenerators::Factorized { left, right } => MatrixZonotopeJson {
                center,
                gen_list: None,
                left: Some(left.iter().map(|g| g.iter().copied().collect()).collect()),
                right: Some(to_rows(&right)),
            },
        }
    }
}

impl TryFrom<MatrixZonotopeJson> for MatrixZonotope {
    type Error = Error;
    fn try_from(j: MatrixZonotopeJson) -> Result<Self> {
        let center = from_rows(&j.center)?;
        match (j.gen_list, j.left, j.right) {
            (Some(list), None, None) => {
                let gens = list.iter().map(|g| from_rows(g)).collect::<Result<Vec<_>>>()?;
                MatrixZonotope::new(center, gens)
            }
            (None, Some(left), Some(right)) => {
                let left = left.into_iter().map(Vector::from_vec).collect();
                let right = if right.is_empty() {
                    Matrix::zeros(0, center.ncols())
                } else {
                    from_rows(&right)?
                };
                MatrixZonotope::factorized(center, left, right)
            }
            (None, None, None) => MatrixZonotope::new(center, Vec::new()),
            _ => Err(Error::Parameter(
                "matrix zonotope needs either gen_list or both left and right".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{random_orthogonal, Rng};
    use approx::assert_relative_eq;

    fn random_factorized(n: usize, d: usize, p: usize, t: usize, rng: &mut Rng) -> MatrixZonotope {
        let left = (0..p).map(|_| rng.normal_vector(n) * 0.1).collect();
        MatrixZonotope::factorized(rng.normal_matrix(n, d), left, rng.normal_matrix(t, d)).unwrap()
    }

    #[test]
    fn degenerate_matrix_zonotope_is_linear_map() {
        let mut rng = Rng::new(2);
        let c = rng.normal_matrix(2, 3);
        let m = MatrixZonotope::new(c.clone(), vec![]).unwrap();
        let z = Zonotope::new(rng.normal_vector(3), rng.normal_matrix(3, 4)).unwrap();
        assert_eq!(m.times_zonotope(&z).unwrap(), z.linear_map(&c).unwrap());
    }

    #[test]
    fn product_generator_count() {
        let mut rng = Rng::new(3);
        let m = random_factorized(2, 3, 2, 4, &mut rng);
        let z = Zonotope::new(rng.normal_vector(3), rng.normal_matrix(3, 5)).unwrap();
        let out = m.times_zonotope(&z).unwrap();
        let gamma = m.num_generators();
        assert_eq!(gamma, 8);
        assert_eq!(out.num_generators(), (1 + gamma) * 5 + gamma);
    }

    #[test]
    fn factorized_and_dense_products_agree() {
        let mut rng = Rng::new(4);
        let m = random_factorized(3, 4, 2, 5, &mut rng);
        let z = Zonotope::new(rng.normal_vector(4), rng.normal_matrix(4, 3)).unwrap();
        let a = m.times_zonotope(&z).unwrap();
        let b = m.densify().times_zonotope(&z).unwrap();
        assert!((a.generators() - b.generators()).amax() <= 1e-10);
        assert!((a.center() - b.center()).amax() <= 1e-10);
    }

    #[test]
    fn sampled_products_are_members() {
        let mut rng = Rng::new(5);
        let m = random_factorized(2, 3, 2, 3, &mut rng);
        let z = Zonotope::new(rng.normal_vector(3), rng.normal_matrix(3, 2)).unwrap();
        let out = m.times_zonotope(&z).unwrap();
        for _ in 0..500 {
            let beta: Vec<f64> = (0..m.num_generators()).map(|_| rng.box_coeff()).collect();
            let mat = m.matrix_at(&beta).unwrap();
            let x = mat * z.sample(&mut rng);
            assert!(out.contains_point(&x, 1e-9));
        }
    }

    #[test]
    fn constrained_product_is_conservative() {
        let mut rng = Rng::new(6);
        let m = random_factorized(2, 2, 1, 3, &mut rng);
        let a = ConstrainedZonotope::from(
            Zonotope::new(Vector::from_vec(vec![1.0, 0.5]), Matrix::identity(2, 2)).unwrap(),
        );
        let b = ConstrainedZonotope::from(
            Zonotope::new(Vector::from_vec(vec![1.8, 0.5]), Matrix::identity(2, 2)).unwrap(),
        );
        let s = a.intersect(&b, &Matrix::identity(2, 2)).unwrap();
        let out = m.times_constrained(&s).unwrap();
        assert_eq!(out.num_constraints(), s.num_constraints());
        for _ in 0..300 {
            // rejection-sample a point of the intersection
            let x = Vector::from_vec(vec![rng.uniform(0.8, 2.0), rng.uniform(-0.5, 1.5)]);
            let beta: Vec<f64> = (0..m.num_generators()).map(|_| rng.box_coeff()).collect();
            let y = m.matrix_at(&beta).unwrap() * &x;
            assert!(out.contains_point(&y, 1e-9));
        }
    }

    #[test]
    fn basis_change_identity_and_involution() {
        let mut rng = Rng::new(7);
        let m = random_factorized(3, 4, 2, 4, &mut rng);
        assert_eq!(m.change_basis(&Matrix::identity(3, 3)).unwrap(), m);
        let p = random_orthogonal(3, &mut rng);
        let back = m.change_basis(&p).unwrap().change_basis(&p.transpose()).unwrap();
        assert!((back.center() - m.center()).amax() <= 1e-12);
        for k in 0..m.num_generators() {
            assert!((back.generator(k) - m.generator(k)).amax() <= 1e-12);
        }
    }

    #[test]
    fn basis_change_factorized_matches_dense() {
        let mut rng = Rng::new(8);
        let m = random_factorized(3, 4, 2, 3, &mut rng);
        let p = random_orthogonal(3, &mut rng);
        let a = m.change_basis(&p).unwrap();
        let b = m.densify().change_basis(&p).unwrap();
        for k in 0..m.num_generators() {
            assert!((a.generator(k) - b.generator(k)).amax() <= 1e-12);
        }
    }

    #[test]
    fn basis_change_preserves_center_singular_values() {
        let mut rng = Rng::new(9);
        let m = random_factorized(3, 5, 1, 2, &mut rng);
        let p = random_orthogonal(3, &mut rng);
        let a = crate::numerics::svd(m.center()).unwrap().sigma;
        let b = crate::numerics::svd(m.change_basis(&p).unwrap().center()).unwrap().sigma;
        for (x, y) in a.iter().zip(b.iter()) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn basis_change_rejects_non_orthogonal() {
        let mut rng = Rng::new(10);
        let m = random_factorized(2, 3, 1, 2, &mut rng);
        let r = m.change_basis(&(Matrix::identity(2, 2) * 1.1));
        assert!(matches!(r, Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn json_forms() {
        let mut rng = Rng::new(11);
        let f = random_factorized(2, 3, 1, 2, &mut rng);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"left\"") && s.contains("\"right\""));
        let back: MatrixZonotope = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let d = f.densify();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"gen_list\""));
        assert_eq!(serde_json::from_str::<MatrixZonotope>(&s).unwrap(), d);
    }
}
