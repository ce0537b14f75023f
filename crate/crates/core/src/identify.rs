//! Trajectory generation and the data-driven set of models consistent with
//! noisy data.
//!
//! With `D = [X-; U-]` of full row rank and `H = pinv(D)`, every `[A B]`
//! that explains the data under noise in `Z_w` lies in the matrix zonotope
//! `<(X+ - c_w 1^T) H, {-g_i h_j^T}>`, where `g_i` are the noise generators
//! and `h_j^T` the rows of `H`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::vstack;
use crate::numerics::{pinv, svd, Matrix, Rng, Vector, DEFAULT_RANK_TOL};
use crate::sets::{MatrixZonotope, Zonotope};

/// Smallest accepted `sigma_min / sigma_max` of the stacked data matrix.
pub const RANK_RATIO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueSystem {
    #[serde(with = "crate::serde_matrix")]
    pub a: Matrix,
    #[serde(with = "crate::serde_matrix")]
    pub b: Matrix,
    pub noise: Zonotope,
}

impl TrueSystem {
    pub fn new(a: Matrix, b: Matrix, noise: Zonotope) -> Result<Self> {
        let n = a.nrows();
        Error::check_dim("system matrix A columns", n, a.ncols())?;
        Error::check_dim("input matrix B rows", n, b.nrows())?;
        Error::check_dim("noise dimension", n, noise.dim())?;
        Ok(TrueSystem { a, b, noise })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// `[A B]`.
    pub fn stacked(&self) -> Matrix {
        crate::numerics::hstack(&self.a, &self.b)
    }

    pub fn step(&self, x: &Vector, u: &Vector, w: &Vector) -> Vector {
        &self.a * x + &self.b * u + w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSet {
    #[serde(with = "crate::serde_matrix")]
    pub xplus: Matrix,
    #[serde(with = "crate::serde_matrix")]
    pub xminus: Matrix,
    #[serde(with = "crate::serde_matrix")]
    pub uminus: Matrix,
    /// The noise actually drawn, `xplus - A xminus - B uminus`.
    #[serde(with = "crate::serde_matrix")]
    pub noise: Matrix,
    /// Length of each concatenated experiment.
    pub lengths: Vec<usize>,
}

impl DataSet {
    pub fn len(&self) -> usize {
        self.xplus.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state_dim(&self) -> usize {
        self.xplus.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.uminus.nrows()
    }

    /// `[X-; U-]`.
    pub fn regressor(&self) -> Matrix {
        vstack(&self.xminus, &self.uminus)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.len();
        Error::check_dim("X- columns", t, self.xminus.ncols())?;
        Error::check_dim("U- columns", t, self.uminus.ncols())?;
        Error::check_dim("noise columns", t, self.noise.ncols())?;
        Error::check_dim("X- rows", self.xplus.nrows(), self.xminus.nrows())?;
        Error::check_dim("experiment lengths", t, self.lengths.iter().sum())
    }

    /// Concatenate experiments column-wise.
    pub fn concat(parts: &[DataSet]) -> Result<DataSet> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Parameter("no experiments to concatenate".into()))?;
        let (n, m) = (first.state_dim(), first.input_dim());
        let t: usize = parts.iter().map(DataSet::len).sum();
        let mut out = DataSet {
            xplus: Matrix::zeros(n, t),
            xminus: Matrix::zeros(n, t),
            uminus: Matrix::zeros(m, t),
            noise: Matrix::zeros(n, t),
            lengths: Vec::new(),
        };
        let mut col = 0;
        for part in parts {
            Error::check_dim("experiment state dimension", n, part.state_dim())?;
            Error::check_dim("experiment input dimension", m, part.input_dim())?;
            let k = part.len();
            out.xplus.columns_mut(col, k).copy_from(&part.xplus);
            out.xminus.columns_mut(col, k).copy_from(&part.xminus);
            out.uminus.columns_mut(col, k).copy_from(&part.uminus);
            out.noise.columns_mut(col, k).copy_from(&part.noise);
            out.lengths.extend(&part.lengths);
            col += k;
        }
        Ok(out)
    }
}

/// Inputs drawn uniformly from the input zonotope's coefficient box.
pub fn random_inputs(u: &Zonotope, t: usize, rng: &mut Rng) -> Matrix {
    let mut out = Matrix::zeros(u.dim(), t);
    for k in 0..t {
        out.set_column(k, &u.sample(rng));
    }
    out
}

/// One experiment of `inputs.ncols()` steps from `x0`, with noise drawn as
/// `c_w + G_w xi`, `xi` uniform in the unit box.
pub fn simulate(sys: &TrueSystem, x0: &Vector, inputs: &Matrix, rng: &mut Rng) -> Result<DataSet> {
    let n = sys.state_dim();
    Error::check_dim("initial state", n, x0.len())?;
    Error::check_dim("input rows", sys.input_dim(), inputs.nrows())?;
    let t = inputs.ncols();
    let mut xminus = Matrix::zeros(n, t);
    let mut xplus = Matrix::zeros(n, t);
    let mut noise = Matrix::zeros(n, t);
    let mut x = x0.clone();
    for k in 0..t {
        let w = sys.noise.sample(rng);
        let next = sys.step(&x, &inputs.column(k).into_owned(), &w);
        xminus.set_column(k, &x);
        xplus.set_column(k, &next);
        noise.set_column(k, &w);
        x = next;
    }
    Ok(DataSet {
        xplus,
        xminus,
        uminus: inputs.clone(),
        noise,
        lengths: vec![t],
    })
}

/// `count` experiments of `length` steps, initial states sampled from `x0`
/// and inputs uniform over `u`.
pub fn generate_data(
    sys: &TrueSystem,
    x0: &Zonotope,
    u: &Zonotope,
    count: usize,
    length: usize,
    rng: &mut Rng,
) -> Result<DataSet> {
    let parts = (0..count)
        .map(|_| {
            let start = x0.sample(rng);
            let inputs = random_inputs(u, length, rng);
            simulate(sys, &start, &inputs, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    DataSet::concat(&parts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedModel {
    pub msigma: MatrixZonotope,
    /// `T x (n + m)` right inverse of the regressor.
    #[serde(with = "crate::serde_matrix")]
    pub h: Matrix,
    pub data: DataSet,
    /// `sigma_min / sigma_max` of the regressor.
    pub rank_ratio: f64,
    pub rank_ok: bool,
}

impl IdentifiedModel {
    pub fn state_dim(&self) -> usize {
        self.msigma.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.msigma.cols() - self.msigma.rows()
    }

    pub fn gamma(&self) -> usize {
        self.msigma.num_generators()
    }
}

pub fn identify(data: &DataSet, zw: &Zonotope) -> Result<IdentifiedModel> {
    data.validate()?;
    let n = data.state_dim();
    Error::check_dim("noise dimension", n, zw.dim())?;
    let d = data.regressor();
    let rows = d.nrows();
    let sv = svd(&d)?;
    let ratio = if sv.sigma.len() < rows || sv.sigma[0] == 0.0 {
        0.0
    } else {
        sv.sigma[rows - 1] / sv.sigma[0]
    };
    if ratio <= RANK_RATIO_TOL {
        return Err(Error::Identifiability { ratio });
    }
    let h = pinv(&d, DEFAULT_RANK_TOL);
    let mut shifted = data.xplus.clone();
    for mut col in shifted.column_iter_mut() {
        col -= zw.center();
    }
    let center = shifted * &h;
    let left: Vec<Vector> = zw.generators().column_iter().map(|c| c.into_owned()).collect();
    let msigma = MatrixZonotope::factorized(center, left, h.clone())?;
    Ok(IdentifiedModel {
        msigma,
        h,
        data: data.clone(),
        rank_ratio: ratio,
        rank_ok: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipDiagnostic {
    pub member: bool,
    pub max_abs_coeff: f64,
    pub residual: f64,
}

/// Least-squares certificate that `sigma` lies in the model set.
///
/// Solves `C - sigma = G_w B H` for the minimum-norm coefficient matrix
/// `B = pinv(G_w) (C - sigma) pinv(H)`. A pass is sound; a fail may be a
/// false negative.
pub fn membership_diagnostic(model: &IdentifiedModel, sigma: &Matrix) -> MembershipDiagnostic {
    const RESIDUAL_TOL: f64 = 1e-6;
    const COEFF_TOL: f64 = 1e-6;
    let fail = MembershipDiagnostic {
        member: false,
        max_abs_coeff: f64::INFINITY,
        residual: f64::INFINITY,
    };
    let c = model.msigma.center();
    if sigma.shape() != c.shape() {
        return fail;
    }
    let delta = c - sigma;
    let left = match model.msigma.generator_form() {
        crate::sets::MzGenerators::Factorized { left, .. } => left,
        crate::sets::MzGenerators::Dense(_) => return fail,
    };
    if left.is_empty() {
        let residual = delta.norm();
        return MembershipDiagnostic {
            member: residual <= RESIDUAL_TOL * c.norm().max(f64::MIN_POSITIVE),
            max_abs_coeff: 0.0,
            residual,
        };
    }
    let g = Matrix::from_columns(left);
    let beta = pinv(&g, DEFAULT_RANK_TOL) * &delta * pinv(&model.h, DEFAULT_RANK_TOL);
    let residual = (&g * &beta * &model.h - &delta).norm();
    let max_abs_coeff = beta.amax();
    if !residual.is_finite() || !max_abs_coeff.is_finite() {
        return fail;
    }
    MembershipDiagnostic {
        member: residual <= RESIDUAL_TOL * c.norm() && max_abs_coeff <= 1.0 + COEFF_TOL,
        max_abs_coeff,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_system(rng: &mut Rng, noise_scale: f64) -> TrueSystem {
        let a = rng.normal_matrix(3, 3) * 0.3;
        let b = rng.normal_matrix(3, 1);
        let noise = Zonotope::new(Vector::zeros(3), Matrix::identity(3, 3) * noise_scale).unwrap();
        TrueSystem::new(a, b, noise).unwrap()
    }

    #[test]
    fn zero_noise_identity_dynamics_stay_put() {
        let sys = TrueSystem::new(
            Matrix::identity(2, 2),
            Matrix::zeros(2, 1),
            Zonotope::point(Vector::zeros(2)),
        )
        .unwrap();
        let x0 = Vector::from_vec(vec![1.5, -2.0]);
        let data = simulate(&sys, &x0, &Matrix::from_element(1, 4, 3.0), &mut Rng::new(1)).unwrap();
        for k in 0..4 {
            assert_eq!(data.xminus.column(k), x0.column(0));
            assert_eq!(data.xplus.column(k), x0.column(0));
        }
    }

    #[test]
    fn residuals_reproduce_recorded_noise() {
        let mut rng = Rng::new(2);
        let sys = small_system(&mut rng, 0.1);
        let data = simulate(&sys, &Vector::zeros(3), &rng.normal_matrix(1, 20), &mut rng).unwrap();
        let residual = &data.xplus - &sys.a * &data.xminus - &sys.b * &data.uminus;
        assert!((residual - &data.noise).amax() < 1e-12);
        for w in data.noise.column_iter() {
            assert!(sys.noise.contains_point(&w.into_owned(), 1e-9));
        }
    }

    #[test]
    fn zero_noise_recovers_system() {
        let mut rng = Rng::new(3);
        let sys = small_system(&mut rng, 0.0);
        let sys = TrueSystem::new(sys.a, sys.b, Zonotope::point(Vector::zeros(3))).unwrap();
        let u = Zonotope::new(Vector::zeros(1), Matrix::identity(1, 1)).unwrap();
        let x0 = Zonotope::new(Vector::zeros(3), Matrix::identity(3, 3)).unwrap();
        let data = generate_data(&sys, &x0, &u, 2, 10, &mut rng).unwrap();
        let model = identify(&data, &sys.noise).unwrap();
        assert_eq!(model.gamma(), 0);
        assert!((model.msigma.center() - sys.stacked()).amax() < 1e-8);
    }

    #[test]
    fn right_inverse_and_generator_count() {
        let mut rng = Rng::new(4);
        let sys = small_system(&mut rng, 0.05);
        let u = Zonotope::new(Vector::zeros(1), Matrix::identity(1, 1)).unwrap();
        let x0 = Zonotope::new(Vector::zeros(3), Matrix::identity(3, 3)).unwrap();
        let data = generate_data(&sys, &x0, &u, 3, 7, &mut rng).unwrap();
        assert_eq!(data.lengths, vec![7, 7, 7]);
        let model = identify(&data, &sys.noise).unwrap();
        assert_eq!(model.gamma(), 3 * 21);
        let eye = Matrix::identity(4, 4);
        assert!((data.regressor() * &model.h - eye).norm() <= 1e-8);
    }

    #[test]
    fn rank_deficiency_rejected() {
        let mut rng = Rng::new(5);
        let sys = small_system(&mut rng, 0.05);
        let data = simulate(&sys, &Vector::zeros(3), &Matrix::zeros(1, 10), &mut rng).unwrap();
        assert!(matches!(identify(&data, &sys.noise), Err(Error::Identifiability { .. })));
        let short = simulate(&sys, &Vector::zeros(3), &rng.normal_matrix(1, 2), &mut rng).unwrap();
        assert!(matches!(identify(&short, &sys.noise), Err(Error::Identifiability { .. })));
    }

    #[test]
    fn membership_examples() {
        let mut rng = Rng::new(6);
        let sys = small_system(&mut rng, 0.05);
        let u = Zonotope::new(Vector::zeros(1), Matrix::identity(1, 1)).unwrap();
        let x0 = Zonotope::new(Vector::zeros(3), Matrix::identity(3, 3)).unwrap();
        let data = generate_data(&sys, &x0, &u, 1, 30, &mut rng).unwrap();
        let model = identify(&data, &sys.noise).unwrap();
        let c = model.msigma.center().clone();

        let at_center = membership_diagnostic(&model, &c);
        assert!(at_center.member);
        assert!(at_center.max_abs_coeff < 1e-12);

        // C - g_1 h_1^T is C + 1 * G_(1,1)
        let g1 = sys.noise.generators().column(0).into_owned();
        let h1 = model.h.row(0).into_owned();
        let vertex = &c - &g1 * &h1;
        let diag = membership_diagnostic(&model, &vertex);
        assert!(diag.member, "{diag:?}");
        // redundant basis: the minimum-norm coefficients spread below 1
        assert!(diag.max_abs_coeff <= 1.0 + 1e-9);

        let outside = &c - (&g1 * &h1) * 3.0;
        assert!(!membership_diagnostic(&model, &outside).member);

        assert!(membership_diagnostic(&model, &sys.stacked()).member);
        assert!(!membership_diagnostic(&model, &Matrix::zeros(2, 2)).member);
    }

    #[test]
    fn vertex_coefficient_is_exact_with_minimal_data() {
        let mut rng = Rng::new(8);
        let sys = small_system(&mut rng, 0.05);
        let u = Zonotope::new(Vector::zeros(1), Matrix::identity(1, 1)).unwrap();
        let x0 = Zonotope::new(Vector::zeros(3), Matrix::identity(3, 3)).unwrap();
        let data = generate_data(&sys, &x0, &u, 1, 4, &mut rng).unwrap();
        let model = identify(&data, &sys.noise).unwrap();
        let g1 = sys.noise.generators().column(0).into_owned();
        let h1 = model.h.row(0).into_owned();
        let vertex = model.msigma.center() - &g1 * &h1;
        let diag = membership_diagnostic(&model, &vertex);
        assert!(diag.member);
        assert!((diag.max_abs_coeff - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nonzero_noise_center_is_absorbed() {
        let mut rng = Rng::new(7);
        let base = small_system(&mut rng, 0.05);
        let noise = Zonotope::new(Vector::from_vec(vec![0.2, -0.1, 0.3]), base.noise.generators().clone()).unwrap();
        let sys = TrueSystem::new(base.a, base.b, noise).unwrap();
        let u = Zonotope::new(Vector::zeros(1), Matrix::identity(1, 1)).unwrap();
        let x0 = Zonotope::new(Vector::zeros(3), Matrix::identity(3, 3)).unwrap();
        let data = generate_data(&sys, &x0, &u, 1, 12, &mut rng).unwrap();
        let model = identify(&data, &sys.noise).unwrap();
        assert!(membership_diagnostic(&model, &sys.stacked()).member);
    }
}
