//! Choosing the orthogonal frame `P` used before reduction.
//!
//! [`select`] is the single entry point: two closed-form heuristics driven
//! by the model set's structure, and two searches that minimize the final
//! reachable-set volume directly, seeded with the heuristics.

mod givens;
mod heuristics;
mod objective;
mod riemannian;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use givens::{angle_grid, givens_descent, givens_descent_sym, givens_rotation, GivensOutcome, GivensParams, GivensStep, SymmetricOutcome};
pub use heuristics::{couplings, l1_aggregate, l1_svd, max_rotation, L1Svd, MaxRotation, MIN_SPECTRAL_GAP};
pub use objective::{Objective, ReachObjective, VolumeMetric};
pub use riemannian::{
    project_tangent, retract, riemannian_gradient, riemannian_opt, tangent_basis, RiemannianOutcome, StartRecord,
    TrustRegionParams, TrustRegionStep,
};

use crate::error::{Error, Result};
use crate::numerics::{random_orthogonal, Matrix, Rng};
use crate::sets::MatrixZonotope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Identity,
    L1Svd,
    MaxRotation,
    Givens,
    Riemannian,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Identity, Method::L1Svd, Method::MaxRotation, Method::Givens, Method::Riemannian];

    pub fn label(self) -> &'static str {
        match self {
            Method::Identity => "identity",
            Method::L1Svd => "l1_svd",
            Method::MaxRotation => "max_rotation",
            Method::Givens => "givens",
            Method::Riemannian => "riemannian",
        }
    }

    pub fn needs_objective(self) -> bool {
        matches!(self, Method::Givens | Method::Riemannian)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectParams {
    pub givens: GivensParams,
    pub trust_region: TrustRegionParams,
    /// Seed for the random orthogonal starts.
    pub seed: u64,
}

impl Default for SelectParams {
    fn default() -> Self {
        SelectParams {
            givens: GivensParams::default(),
            trust_region: TrustRegionParams::default(),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub method: Method,
    #[serde(with = "crate::serde_matrix")]
    pub p: Matrix,
    /// Objective at `p`, when an objective was used.
    pub value: Option<f64>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dk_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub givens: Option<SymmetricOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub riemannian: Option<RiemannianOutcome>,
}

impl Selection {
    fn plain(method: Method, p: Matrix) -> Self {
        Selection {
            method,
            p,
            value: None,
            warnings: Vec::new(),
            dk_bound: None,
            givens: None,
            riemannian: None,
        }
    }
}

/// `max_rotation`, falling back to `l1_svd` on a flat spectrum.
fn max_rotation_or_fallback(m: &MatrixZonotope, warnings: &mut Vec<String>) -> Result<(Matrix, Option<f64>)> {
    match max_rotation(m) {
        Ok(r) => Ok((r.p, Some(r.dk_bound))),
        Err(Error::DegenerateSpectrum { gap }) => {
            let msg = format!("max_rotation: eigen-gap {gap:.3e} too small, using l1_svd");
            log::warn!("{msg}");
            warnings.push(msg);
            Ok((l1_svd(m)?.p, None))
        }
        Err(e) => Err(e),
    }
}

/// Identity, both heuristics, then random orthogonal matrices.
pub fn start_list(m: &MatrixZonotope, random: usize, seed: u64, warnings: &mut Vec<String>) -> Result<Vec<Matrix>> {
    let n = m.rows();
    let mut starts = vec![Matrix::identity(n, n), l1_svd(m)?.p];
    match max_rotation(m) {
        Ok(r) => starts.push(r.p),
        Err(Error::DegenerateSpectrum { gap }) => {
            warnings.push(format!("max_rotation start skipped: eigen-gap {gap:.3e}"));
        }
        Err(e) => return Err(e),
    }
    let mut rng = Rng::new(seed);
    starts.extend((0..random).map(|_| random_orthogonal(n, &mut rng)));
    Ok(starts)
}

pub fn select(method: Method, m: &MatrixZonotope, obj: Option<&dyn Objective>, params: &SelectParams) -> Result<Selection> {
    let n = m.rows();
    match method {
        Method::Identity => Ok(Selection::plain(method, Matrix::identity(n, n))),
        Method::L1Svd => Ok(Selection::plain(method, l1_svd(m)?.p)),
        Method::MaxRotation => {
            let mut warnings = Vec::new();
            let (p, dk) = max_rotation_or_fallback(m, &mut warnings)?;
            let mut sel = Selection::plain(method, p);
            sel.warnings = warnings;
            sel.dk_bound = dk;
            Ok(sel)
        }
        Method::Givens | Method::Riemannian => {
            let obj = obj.ok_or_else(|| Error::Parameter(format!("method {method} needs an objective")))?;
            let mut warnings = Vec::new();
            let starts = start_list(m, params.trust_region.random_starts, params.seed, &mut warnings)?;
            let mut sel = if method == Method::Givens {
                let mut best: Option<(usize, f64)> = None;
                for (i, s) in starts.iter().enumerate() {
                    match obj.value(s) {
                        Ok(v) if best.is_none_or(|b| v < b.1) => best = Some((i, v)),
                        Ok(_) => {}
                        Err(e) => warnings.push(format!("start {i} failed: {e}")),
                    }
                }
                let (i, _) = best.ok_or_else(|| Error::Objective("every start failed".into()))?;
                let out = givens_descent_sym(&starts[i], &params.givens, obj)?;
                if let Some(reason) = &out.best.aborted {
                    warnings.push(format!("givens descent stopped early: {reason}"));
                }
                let mut sel = Selection::plain(method, out.best.p.clone());
                sel.value = Some(out.best.value);
                sel.givens = Some(out);
                sel
            } else {
                let out = riemannian_opt(&starts, &params.trust_region, obj)?;
                let mut sel = Selection::plain(method, out.p.clone());
                sel.value = Some(out.value);
                sel.riemannian = Some(out);
                sel
            };
            sel.warnings.extend(warnings);
            Ok(sel)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{orthogonality_residual, sym_eig, Vector};

    fn single_generator(g: Matrix) -> MatrixZonotope {
        let n = g.nrows();
        let d = g.ncols();
        MatrixZonotope::new(Matrix::zeros(n, d), vec![g]).unwrap()
    }

    fn random_model(rng: &mut Rng, n: usize, d: usize, p: usize, t: usize, scale: f64) -> MatrixZonotope {
        let c = rng.normal_matrix(n, d);
        let left = (0..p).map(|_| rng.normal_vector(n) * scale).collect();
        MatrixZonotope::factorized(c, left, rng.normal_matrix(t, d)).unwrap()
    }

    #[test]
    fn labels_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("pca".parse::<Method>(), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn l1_single_direction() {
        // aggregate (2, 0)
        let m = single_generator(Matrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0]));
        let out = l1_svd(&m).unwrap();
        assert!((out.p[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!((out.p[(1, 1)].abs() - 1.0).abs() < 1e-12);
        assert!(out.eigenvalues[0] >= out.eigenvalues[1]);
    }

    #[test]
    fn l1_without_generators_is_degenerate_identity() {
        let m = MatrixZonotope::new(Matrix::identity(2, 3), vec![]).unwrap();
        let out = l1_svd(&m).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.p, Matrix::identity(2, 2));
    }

    #[test]
    fn l1_orthogonal_sorted_and_factor_consistent() {
        let mut rng = Rng::new(1);
        for _ in 0..100 {
            let m = random_model(&mut rng, 4, 5, 3, 6, 0.1);
            let out = l1_svd(&m).unwrap();
            assert!(orthogonality_residual(&out.p) <= 1e-10);
            assert!(out.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            assert!((l1_aggregate(&m) - l1_aggregate(&m.densify())).amax() < 1e-12);
        }
    }

    #[test]
    fn max_rotation_without_generators() {
        let mut rng = Rng::new(2);
        let c = rng.normal_matrix(3, 4);
        let m = MatrixZonotope::new(c.clone(), vec![]).unwrap();
        let out = max_rotation(&m).unwrap();
        assert_eq!(out.dk_bound, 0.0);
        let expected = sym_eig(&(&c * c.transpose() / 4.0)).unwrap().vectors;
        assert_eq!(out.p, expected);
    }

    #[test]
    fn max_rotation_flat_spectrum_rejected_and_select_falls_back() {
        let m = MatrixZonotope::new(Matrix::identity(2, 2), vec![Matrix::identity(2, 2) * 0.1]).unwrap();
        assert!(matches!(max_rotation(&m), Err(Error::DegenerateSpectrum { .. })));
        let sel = select(Method::MaxRotation, &m, None, &SelectParams::default()).unwrap();
        assert_eq!(sel.p, l1_svd(&m).unwrap().p);
        assert_eq!(sel.warnings.len(), 1);
    }

    #[test]
    fn couplings_factorized_match_dense() {
        let mut rng = Rng::new(3);
        let m = random_model(&mut rng, 3, 4, 2, 5, 0.3);
        let ui = rng.normal_vector(3);
        let uj = rng.normal_vector(3);
        let a = couplings(&m, &ui, &uj);
        let b = couplings(&m.densify(), &ui, &uj);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    fn sine_between(u: &Vector, v: &Vector) -> f64 {
        let c = (u.dot(v) / (u.norm() * v.norm())).abs().min(1.0);
        (1.0 - c * c).sqrt()
    }

    #[test]
    fn davis_kahan_bound_dominates_rotation() {
        let mut rng = Rng::new(4);
        let mut checked = 0;
        while checked < 100 {
            let m = random_model(&mut rng, 4, 5, 3, 6, 0.02);
            let Ok(out) = max_rotation(&m) else { continue };
            if out.gap <= 0.1 {
                continue;
            }
            let c = m.center();
            let u0 = sym_eig(&(c * c.transpose())).unwrap().vectors.column(0).into_owned();
            let u1 = out.p.column(0).into_owned();
            assert!(sine_between(&u0, &u1) <= out.dk_bound + 1e-9);
            checked += 1;
        }
    }

    #[test]
    fn coupling_sign_symmetry_at_small_scale() {
        let mut rng = Rng::new(5);
        let base = random_model(&mut rng, 3, 4, 2, 4, 1e-6);
        let out = max_rotation(&base).unwrap();
        let c = base.center();
        let d = base.cols() as f64;
        let s0 = c * c.transpose() / d;
        let delta = |beta: &[f64]| {
            let neg: Vec<f64> = beta.iter().map(|b| -b).collect();
            let cs = base.matrix_at(&neg).unwrap();
            (&cs * cs.transpose() / d - &s0).norm()
        };
        let flipped: Vec<f64> = out.beta.iter().map(|b| -b).collect();
        let (a, b) = (delta(&out.beta), delta(&flipped));
        assert!((a - b).abs() <= 1e-4 * a.max(b), "{a} vs {b}");
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let mut rng = Rng::new(6);
        let m = random_model(&mut rng, 3, 4, 2, 5, 0.1);
        let params = SelectParams::default();
        assert_eq!(select(Method::L1Svd, &m, None, &params).unwrap().p, l1_svd(&m).unwrap().p);
        assert_eq!(select(Method::MaxRotation, &m, None, &params).unwrap().p, max_rotation(&m).unwrap().p);
        assert_eq!(select(Method::Identity, &m, None, &params).unwrap().p, Matrix::identity(3, 3));
        assert!(select(Method::Givens, &m, None, &params).is_err());
    }

    #[test]
    fn searches_never_lose_to_identity() {
        let mut rng = Rng::new(7);
        let m = random_model(&mut rng, 3, 4, 2, 5, 0.1);
        let g = rng.normal_matrix(3, 8);
        let obj = move |p: &Matrix| Ok(crate::reduction::hadamard_product(&g, p));
        let identity_value = obj(&Matrix::identity(3, 3)).unwrap();
        let mut params = SelectParams::default();
        params.givens.scales = 2;
        for method in [Method::Givens, Method::Riemannian] {
            let sel = select(method, &m, Some(&obj), &params).unwrap();
            assert!(sel.value.unwrap() <= identity_value);
            assert!(orthogonality_residual(&sel.p) <= 1e-10);
        }
    }
}
