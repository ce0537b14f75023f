use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::{block_diag, from_rows, hstack, to_rows};
use crate::numerics::{solve_bounded_lp, Matrix, Rng, Vector};

/// `<c, G> = { c + G xi : xi in [-1, 1]^p }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZonotopeJson", into = "ZonotopeJson")]
pub struct Zonotope {
    center: Vector,
    generators: Matrix,
}

impl Zonotope {
    pub fn new(center: Vector, generators: Matrix) -> Result<Self> {
        Error::check_dim("zonotope generators", center.len(), generators.nrows())?;
        Ok(Zonotope { center, generators })
    }

    pub fn point(center: Vector) -> Self {
        let n = center.len();
        Zonotope {
            center,
            generators: Matrix::zeros(n, 0),
        }
    }

    /// Axis-aligned box `c + diag(half_widths) [-1,1]^n`.
    pub fn from_box(center: Vector, half_widths: &Vector) -> Result<Self> {
        Zonotope::new(center, Matrix::from_diagonal(half_widths))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn generators(&self) -> &Matrix {
        &self.generators
    }

    pub fn into_parts(self) -> (Vector, Matrix) {
        (self.center, self.generators)
    }

    pub fn linear_map(&self, r: &Matrix) -> Result<Zonotope> {
        Error::check_dim("linear_map", self.dim(), r.ncols())?;
        Ok(Zonotope {
            center: r * &self.center,
            generators: r * &self.generators,
        })
    }

    pub fn minkowski(&self, other: &Zonotope) -> Result<Zonotope> {
        Error::check_dim("minkowski", self.dim(), other.dim())?;
        Ok(Zonotope {
            center: &self.center + &other.center,
            generators: hstack(&self.generators, &other.generators),
        })
    }

    /// `self x other`, dimension `n + m`.
    pub fn cartesian(&self, other: &Zonotope) -> Zonotope {
        let mut center = Vector::zeros(self.dim() + other.dim());
        center.rows_mut(0, self.dim()).copy_from(&self.center);
        center.rows_mut(self.dim(), other.dim()).copy_from(&other.center);
        Zonotope {
            center,
            generators: block_diag(&self.generators, &other.generators),
        }
    }

    /// `h(d) = d^T c + sum_j |d^T g_j|`.
    pub fn support(&self, d: &Vector) -> Result<f64> {
        Error::check_dim("support", self.dim(), d.len())?;
        let proj = self.generators.tr_mul(d);
        Ok(d.dot(&self.center) + proj.iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Row-wise absolute sums of the generator matrix.
    pub fn half_widths(&self) -> Vector {
        Vector::from_iterator(
            self.dim(),
            self.generators
                .row_iter()
                .map(|row| row.iter().map(|x| x.abs()).sum::<f64>()),
        )
    }

    pub fn interval_hull(&self) -> (Vector, Vector) {
        let d = self.half_widths();
        (&self.center - &d, &self.center + &d)
    }

    /// Image of a uniform draw from the coefficient box.
    pub fn sample(&self, rng: &mut Rng) -> Vector {
        let xi = rng.box_vector(self.num_generators());
        &self.center + &self.generators * xi
    }

    /// LP feasibility of `c + G xi = x` with `xi` in `[-1-tol, 1+tol]^p`.
    pub fn contains_point(&self, x: &Vector, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let offset = x - &self.center;
        let slack = 1.0 + tol;
        let hw = self.half_widths();
        let scale = 1.0 + self.center.amax() + hw.amax();
        if offset
            .iter()
            .zip(hw.iter())
            .any(|(o, h)| o.abs() > slack * h + 1e-12 * scale)
        {
            return false;
        }
        if self.num_generators() == 0 {
            return offset.amax() <= 1e-12 * scale;
        }
        let objective = Vector::zeros(self.num_generators());
        solve_bounded_lp(&objective, &self.generators, &offset, slack).is_ok()
    }

    /// Same set with parallel generators merged and zero generators dropped.
    ///
    /// Parallel segments sum to a single segment, so the result is exact up to
    /// the `rel_tol` used to decide parallelism.
    pub fn compact(&self, rel_tol: f64) -> Zonotope {
        let n = self.dim();
        let mut dirs: Vec<(Vector, f64)> = Vec::new();
        for col in self.generators.column_iter() {
            let len = col.norm();
            if len == 0.0 {
                continue;
            }
            let mut u = col.into_owned() / len;
            if let Some(first) = u.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    u.neg_mut();
                }
            }
            dirs.push((u, len));
        }
        dirs.sort_by(|a, b| {
            a.0.iter()
                .zip(b.0.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut merged: Vec<(Vector, f64)> = Vec::new();
        for (u, len) in dirs {
            match merged.last_mut() {
                Some((v, total)) if 1.0 - v.dot(&u).abs() <= rel_tol => *total += len,
                _ => merged.push((u, len)),
            }
        }
        let mut generators = Matrix::zeros(n, merged.len());
        for (j, (u, len)) in merged.iter().enumerate() {
            generators.set_column(j, &(u * *len));
        }
        Zonotope {
            center: self.center.clone(),
            generators,
        }
    }

    /// Dense generator columns by index.
    pub fn select_generators(&self, indices: &[usize]) -> Matrix {
        Matrix::from_fn(self.dim(), indices.len(), |i, j| self.generators[(i, indices[j])])
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct ZonotopeJson {
    center: Vec<f64>,
    generators: Vec<Vec<f64>>,
}

impl From<Zonotope> for ZonotopeJson {
    fn from(z: Zonotope) -> Self {
        ZonotopeJson {
            center: z.center.iter().copied().collect(),
            generators: to_rows(&z.generators),
        }
    }
}

impl TryFrom<ZonotopeJson> for Zonotope {
    type Error = Error;
    fn try_from(j: ZonotopeJson) -> Result<Self> {
        let n = j.center.len();
        let generators = if j.generators.is_empty() {
            Matrix::zeros(n, 0)
        } else {
            from_rows(&j.generators)?
        };
        Zonotope::new(Vector::from_vec(j.center), generators)
    }
}
