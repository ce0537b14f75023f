//! Trust-region descent of `log J` on the orthogonal group, with
//! finite-difference gradients and Cauchy steps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::Objective;
use crate::error::{Error, Result};
use crate::numerics::{check_orthogonal, inv_sqrt_spd, orthogonality_residual, Matrix};
use crate::sets::ORTHOGONALITY_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustRegionParams {
    /// Stop when the Riemannian gradient norm drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_radius: f64,
    /// Random orthogonal starts added by the dispatcher.
    pub random_starts: usize,
    pub fd_step: f64,
}

impl Default for TrustRegionParams {
    fn default() -> Self {
        TrustRegionParams {
            tolerance: 1e-4,
            max_iterations: 30,
            max_radius: 2.0,
            random_starts: 2,
            fd_step: 1e-4,
        }
    }
}

impl TrustRegionParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tolerance > 0.0 && self.max_iterations > 0 && self.max_radius > 0.0 && self.fd_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("trust-region parameters must be positive: {self:?}")))
        }
    }
}

/// `(P + xi)(I + xi^T xi)^(-1/2)`.
pub fn retract(p: &Matrix, xi: &Matrix) -> Result<Matrix> {
    let n = p.ncols();
    let gram = Matrix::identity(n, n) + xi.tr_mul(xi);
    Ok((p + xi) * inv_sqrt_spd(&gram)?)
}

/// Orthonormal basis `P (e_a e_b^T - e_b e_a^T) / sqrt(2)` of the tangent space.
pub fn tangent_basis(p: &Matrix) -> Vec<Matrix> {
    let n = p.nrows();
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            let mut omega = Matrix::zeros(n, n);
            omega[(a, b)] = w;
            omega[(b, a)] = -w;
            out.push(p * omega);
        }
    }
    out
}

/// Projection onto the tangent space at `P`: `Z - P sym(P^T Z)`.
pub fn project_tangent(p: &Matrix, z: &Matrix) -> Matrix {
    let ptz = p.tr_mul(z);
    z - p * ((&ptz + ptz.transpose()) * 0.5)
}

fn log_value(obj: &dyn Objective, p: &Matrix) -> Result<f64> {
    let v = obj.value(p)?;
    if v > 0.0 && v.is_finite() {
        Ok(v.ln())
    } else {
        Err(Error::Objective(format!("objective value {v} has no logarithm")))
    }
}

/// Central differences of `log J` along the tangent basis.
pub fn riemannian_gradient(obj: &dyn Objective, p: &Matrix, step: f64) -> Result<Matrix> {
    let basis = tangent_basis(p);
    let slopes: Vec<f64> = basis
        .par_iter()
        .map(|xi| {
            let plus = log_value(obj, &retract(p, &(xi * step))?)?;
            let minus = log_value(obj, &retract(p, &(xi * -step))?)?;
            Ok((plus - minus) / (2.0 * step))
        })
        .collect::<Result<_>>()?;
    let mut grad = Matrix::zeros(p.nrows(), p.ncols());
    for (xi, s) in basis.iter().zip(slopes) {
        grad += xi * s;
    }
    Ok(project_tangent(p, &grad))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustRegionStep {
    pub start: usize,
    pub iteration: usize,
    pub value: f64,
    pub radius: f64,
    pub grad_norm: f64,
    pub ratio: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: usize,
    pub initial_value: Option<f64>,
    pub final_value: Option<f64>,
    pub iterations: usize,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannianOutcome {
    #[serde(with = "crate::serde_matrix")]
    pub p: Matrix,
    pub value: f64,
    pub start: usize,
    pub starts: Vec<StartRecord>,
    pub trace: Vec<TrustRegionStep>,
    /// Largest `||P^T P - I||_F` over every retraction output.
    pub max_retraction_residual: f64,
}

struct StartResult {
    p: Matrix,
    f: f64,
    record: StartRecord,
    trace: Vec<TrustRegionStep>,
    residual: f64,
}

fn optimize_from(index: usize, p0: &Matrix, params: &TrustRegionParams, obj: &dyn Objective) -> Result<StartResult> {
    check_orthogonal(p0, ORTHOGONALITY_TOL)?;
    let mut p = p0.clone();
    let mut f = log_value(obj, &p)?;
    let f0 = f;
    let mut radius = params.max_radius.min(1.0);
    let mut trace = Vec::new();
    let mut residual: f64 = 0.0;
    let mut grad = riemannian_gradient(obj, &p, params.fd_step)?;
    let mut status = "max_iterations".to_string();
    let mut iterations = 0;
    for it in 0..params.max_iterations {
        iterations = it;
        let gn = grad.norm();
        if gn < params.tolerance {
            status = "converged".into();
            break;
        }
        if radius < 1e-12 {
            status = "radius_collapsed".into();
            break;
        }
        let xi = &grad * (-radius / gn);
        let trial = retract(&p, &xi)?;
        residual = residual.max(orthogonality_residual(&trial));
        let predicted = radius * gn;
        let trial_f = log_value(obj, &trial).unwrap_or(f64::INFINITY);
        let ratio = if trial_f.is_finite() { (f - trial_f) / predicted } else { f64::NEG_INFINITY };
        let accepted = ratio > 0.25;
        if accepted {
            f = trial_f;
            p = trial;
            if ratio > 0.75 {
                radius = (2.0 * radius).min(params.max_radius);
            }
        } else {
            radius *= 0.25;
        }
        trace.push(TrustRegionStep {
            start: index,
            iteration: it,
            value: f.exp(),
            radius,
            grad_norm: gn,
            ratio,
            accepted,
        });
        if accepted {
            grad = riemannian_gradient(obj, &p, params.fd_step)?;
        }
        iterations = it + 1;
    }
    Ok(StartResult {
        p,
        f,
        record: StartRecord {
            start: index,
            initial_value: Some(f0.exp()),
            final_value: Some(f.exp()),
            iterations,
            status,
        },
        trace,
        residual,
    })
}

/// Runs from every start and returns the best `(P, J)`. Failed starts are
/// recorded and skipped.
pub fn riemannian_opt(starts: &[Matrix], params: &TrustRegionParams, obj: &dyn Objective) -> Result<RiemannianOutcome> {
    params.validate()?;
    let mut best: Option<(usize, Matrix, f64)> = None;
    let mut records = Vec::new();
    let mut trace = Vec::new();
    let mut residual: f64 = 0.0;
    for (i, p0) in starts.iter().enumerate() {
        match optimize_from(i, p0, params, obj) {
            Ok(r) => {
                residual = residual.max(r.residual);
                trace.extend(r.trace);
                records.push(r.record);
                if best.as_ref().is_none_or(|b| r.f < b.2) {
                    best = Some((i, r.p, r.f));
                }
            }
            Err(e) => {
                log::warn!("start {i} skipped: {e}");
                records.push(StartRecord {
                    start: i,
                    initial_value: None,
                    final_value: None,
                    iterations: 0,
                    status: format!("failed: {e}"),
                });
            }
        }
    }
    let (start, p, f) = best.ok_or_else(|| Error::Objective("every start failed".into()))?;
    Ok(RiemannianOutcome {
        p,
        value: f.exp(),
        start,
        starts: records,
        trace,
        max_retraction_residual: residual,
    })
}
