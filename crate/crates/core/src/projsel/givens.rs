//! Coarse-to-fine coordinate descent over plane rotations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::objective::Objective;
use crate::error::{Error, Result};
use crate::numerics::{check_orthogonal, Matrix};
use crate::sets::ORTHOGONALITY_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GivensParams {
    /// Finest scale index `J`; scale `j` uses step `pi 2^-j`.
    pub scales: usize,
    /// Relative improvement needed to accept a rotation.
    pub epsilon: f64,
}

impl Default for GivensParams {
    fn default() -> Self {
        GivensParams {
            scales: 4,
            epsilon: 1e-4,
        }
    }
}

impl GivensParams {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon > 0.0 && self.epsilon.is_finite() {
            Ok(())
        } else {
            Err(Error::Parameter(format!("improvement threshold must be positive, got {}", self.epsilon)))
        }
    }
}

/// Rotation by `theta` in the `(i1, i2)` plane, zero-based, `i1 < i2 < n`.
pub fn givens_rotation(i1: usize, i2: usize, theta: f64, n: usize) -> Result<Matrix> {
    if !(i1 < i2 && i2 < n) {
        return Err(Error::Parameter(format!("invalid rotation plane ({i1}, {i2}) for dimension {n}")));
    }
    let mut g = Matrix::identity(n, n);
    let (c, s) = (theta.cos(), theta.sin());
    g[(i1, i1)] = c;
    g[(i2, i2)] = c;
    g[(i1, i2)] = s;
    g[(i2, i1)] = -s;
    Ok(g)
}

/// `{-pi, -pi + s_j, ..., pi}`.
pub fn angle_grid(scale: usize) -> Vec<f64> {
    let steps = 1usize << (scale + 1);
    let s = PI / (1usize << scale) as f64;
    (0..=steps).map(|k| -PI + k as f64 * s).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GivensStep {
    pub iterate: usize,
    pub scale: usize,
    pub i1: usize,
    pub i2: usize,
    pub theta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GivensOutcome {
    #[serde(with = "crate::serde_matrix")]
    pub p: Matrix,
    pub value: f64,
    pub initial_value: f64,
    /// Accepted updates; row 0 is the start.
    pub trace: Vec<GivensStep>,
    pub evaluations: usize,
    /// Set when an objective failure stopped the search early.
    pub aborted: Option<String>,
}

pub fn givens_descent(p0: &Matrix, params: &GivensParams, obj: &dyn Objective) -> Result<GivensOutcome> {
    params.validate()?;
    check_orthogonal(p0, ORTHOGONALITY_TOL)?;
    let n = p0.nrows();
    let mut p = p0.clone();
    let mut current = obj.value(&p)?;
    let mut out = GivensOutcome {
        p: p.clone(),
        value: current,
        initial_value: current,
        trace: vec![GivensStep {
            iterate: 0,
            scale: 0,
            i1: 0,
            i2: 0,
            theta: 0.0,
            value: current,
        }],
        evaluations: 1,
        aborted: None,
    };
    for scale in 0..=params.scales {
        let grid: Vec<f64> = angle_grid(scale).into_iter().filter(|&t| t != 0.0).collect();
        loop {
            let mut improved = false;
            for i1 in 0..n {
                for i2 in i1 + 1..n {
                    if current <= 0.0 {
                        return Ok(out);
                    }
                    let values: Vec<Result<f64>> = grid
                        .par_iter()
                        .map(|&theta| obj.value(&(givens_rotation(i1, i2, theta, n)? * &p)))
                        .collect();
                    out.evaluations += values.len();
                    let mut best = current;
                    let mut best_theta = 0.0;
                    for (theta, v) in grid.iter().zip(values) {
                        match v {
                            Ok(v) if v < best => {
                                best = v;
                                best_theta = *theta;
                            }
                            Ok(_) => {}
                            Err(e) => {
                                out.aborted = Some(e.to_string());
                                return Ok(out);
                            }
                        }
                    }
                    if (current - best) / current > params.epsilon {
                        p = givens_rotation(i1, i2, best_theta, n)? * &p;
                        current = best;
                        improved = true;
                        out.p = p.clone();
                        out.value = current;
                        out.trace.push(GivensStep {
                            iterate: out.trace.len(),
                            scale,
                            i1,
                            i2,
                            theta: best_theta,
                            value: current,
                        });
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricOutcome {
    pub best: GivensOutcome,
    /// 1 for the plain start, 2 for the reflected one.
    pub branch: u8,
    pub other_value: f64,
}

/// Descent from `P0` and from `diag(-1, 1, ..., 1) P0`; ties go to `P0`.
pub fn givens_descent_sym(p0: &Matrix, params: &GivensParams, obj: &dyn Objective) -> Result<SymmetricOutcome> {
    let mut reflected = p0.clone();
    reflected.row_mut(0).neg_mut();
    let first = givens_descent(p0, params, obj)?;
    let second = givens_descent(&reflected, params, obj)?;
    Ok(if second.value < first.value {
        SymmetricOutcome {
            other_value: first.value,
            best: second,
            branch: 2,
        }
    } else {
        SymmetricOutcome {
            other_value: second.value,
            best: first,
            branch: 1,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{orthogonality_residual, random_orthogonal, sym_eig, Rng, Vector};
    use crate::reduction::hadamard_product;
    use approx::assert_relative_eq;

    #[test]
    fn rotation_examples() {
        assert_eq!(givens_rotation(0, 1, 0.0, 3).unwrap(), Matrix::identity(3, 3));
        let g = givens_rotation(0, 1, PI / 2.0, 2).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((g - expected).amax() < 1e-15);
        let a = givens_rotation(1, 3, 0.7, 4).unwrap();
        let b = givens_rotation(1, 3, -0.7, 4).unwrap();
        assert!((a * b - Matrix::identity(4, 4)).amax() < 1e-12);
        assert!(givens_rotation(2, 1, 0.1, 3).is_err());
        assert!(givens_rotation(0, 3, 0.1, 3).is_err());
    }

    #[test]
    fn rotations_are_proper() {
        let mut rng = Rng::new(1);
        for _ in 0..50 {
            let theta = rng.uniform(-PI, PI);
            let g = givens_rotation(0, 2, theta, 4).unwrap();
            assert!(orthogonality_residual(&g) < 1e-14);
            assert_relative_eq!(g.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn grid_shape() {
        let g = angle_grid(0);
        assert_eq!(g, vec![-PI, 0.0, PI]);
        let g = angle_grid(3);
        assert_eq!(g.len(), 17);
        assert_relative_eq!(g[1] - g[0], PI / 8.0, epsilon = 1e-15);
        assert_relative_eq!(*g.last().unwrap(), PI, epsilon = 1e-12);
    }

    #[test]
    fn constant_objective_keeps_start() {
        let p0 = random_orthogonal(3, &mut Rng::new(2));
        let out = givens_descent(&p0, &GivensParams::default(), &|_: &Matrix| Ok(1.0)).unwrap();
        assert_eq!(out.p, p0);
        assert_eq!(out.trace.len(), 1);
    }

    fn hadamard_objective(s_root: Matrix) -> impl Fn(&Matrix) -> Result<f64> + Sync {
        move |p: &Matrix| Ok(hadamard_product(&s_root, p))
    }

    #[test]
    fn recovers_pca_basis_in_2d() {
        let mut rng = Rng::new(3);
        for _ in 0..10 {
            let g = rng.normal_matrix(2, 5);
            let obj = hadamard_objective(g.clone());
            let out = givens_descent(&Matrix::identity(2, 2), &GivensParams { scales: 6, epsilon: 1e-12 }, &obj).unwrap();
            let eig = sym_eig(&(&g * g.transpose())).unwrap();
            let axis: Vector = out.p.column(0).into_owned();
            let cos = eig
                .vectors
                .column_iter()
                .map(|u| u.dot(&axis).abs())
                .fold(0.0, f64::max)
                .min(1.0);
            assert!(cos.acos().to_degrees() <= 2.0, "{}", cos.acos().to_degrees());
            assert!(orthogonality_residual(&out.p) <= 1e-10);
        }
    }

    #[test]
    fn trace_is_monotone_and_bounded() {
        let mut rng = Rng::new(4);
        let g = rng.normal_matrix(4, 9);
        let obj = hadamard_objective(g);
        let p0 = random_orthogonal(4, &mut rng);
        let out = givens_descent(&p0, &GivensParams { scales: 3, epsilon: 1e-6 }, &obj).unwrap();
        assert!(out.value <= out.initial_value);
        for w in out.trace.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
        assert!(orthogonality_residual(&out.p) <= 1e-10);
    }

    #[test]
    fn failing_objective_reports_partial_result() {
        let p0 = Matrix::identity(2, 2);
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let obj = |_: &Matrix| {
            if calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst) == 0 {
                Ok(1.0)
            } else {
                Err(Error::Objective("boom".into()))
            }
        };
        let out = givens_descent(&p0, &GivensParams::default(), &obj).unwrap();
        assert!(out.aborted.is_some());
        assert_eq!(out.p, p0);
    }

    #[test]
    fn symmetric_objective_ties_to_first_branch() {
        let mut rng = Rng::new(5);
        let g = rng.normal_matrix(3, 6);
        // invariant under flipping a row of P, hence under the reflected seed
        let obj = move |p: &Matrix| Ok(hadamard_product(&g, &p.transpose()));
        let p0 = random_orthogonal(3, &mut rng);
        let out = givens_descent_sym(&p0, &GivensParams { scales: 2, epsilon: 1e-6 }, &obj).unwrap();
        assert_eq!(out.branch, 1);
        assert!(out.best.value <= out.best.initial_value);
    }

    #[test]
    fn reflection_sensitive_objective_prefers_second_branch() {
        // distance to a target of determinant -1 is unreachable by rotations from the identity
        let mut target = Matrix::identity(3, 3);
        target.row_mut(0).neg_mut();
        let obj = move |p: &Matrix| Ok((p - &target).norm_squared());
        let out = givens_descent_sym(&Matrix::identity(3, 3), &GivensParams { scales: 3, epsilon: 1e-9 }, &obj).unwrap();
        assert_eq!(out.branch, 2);
        assert!(out.best.value < 1e-12);
        assert!(out.other_value > 1.0);
    }
}
