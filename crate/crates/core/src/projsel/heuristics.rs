//! Closed-form choices of `P` from the structure of the model set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sym_eig, Matrix, Vector};
use crate::sets::{MatrixZonotope, MzGenerators};

/// Smallest eigen-gap accepted by [`max_rotation`].
pub const MIN_SPECTRAL_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Svd {
    #[serde(with = "crate::serde_matrix")]
    pub p: Matrix,
    pub eigenvalues: Vec<f64>,
    /// No generators: `P` is the identity.
    pub degenerate: bool,
}

/// Row-wise absolute sums of every matrix generator, one column each.
pub fn l1_aggregate(m: &MatrixZonotope) -> Matrix {
    let n = m.rows();
    match m.generator_form() {
        MzGenerators::Dense(list) => Matrix::from_fn(n, list.len(), |r, k| {
            list[k].row(r).iter().map(|x| x.abs()).sum()
        }),
        MzGenerators::Factorized { left, right } => {
            let t = right.nrows();
            let h_l1: Vec<f64> = right.row_iter().map(|h| h.iter().map(|x| x.abs()).sum()).collect();
            Matrix::from_fn(n, left.len() * t, |r, k| left[k / t][r].abs() * h_l1[k % t])
        }
    }
}

pub fn l1_svd(m: &MatrixZonotope) -> Result<L1Svd> {
    let n = m.rows();
    let gamma = m.num_generators();
    if gamma == 0 {
        return Ok(L1Svd {
            p: Matrix::identity(n, n),
            eigenvalues: vec![0.0; n],
            degenerate: true,
        });
    }
    let g = l1_aggregate(m);
    let x = crate::numerics::hstack(&g, &(-&g)).transpose();
    let s = x.tr_mul(&x) / (2.0 * gamma as f64);
    let eig = sym_eig(&s)?;
    Ok(L1Svd {
        p: eig.vectors,
        eigenvalues: eig.values.iter().copied().collect(),
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxRotation {
    #[serde(with = "crate::serde_matrix")]
    pub p: Matrix,
    /// `||S(beta*) - S_0||_2 / gap`.
    pub dk_bound: f64,
    pub gap: f64,
    pub competitor: usize,
    pub beta: Vec<f64>,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// First-order couplings `u_j^T C G_k^T u_i + u_j^T G_k C^T u_i`.
pub fn couplings(m: &MatrixZonotope, ui: &Vector, uj: &Vector) -> Vec<f64> {
    let c = m.center();
    match m.generator_form() {
        MzGenerators::Dense(list) => list
            .iter()
            .map(|g| {
                uj.dot(&(c * g.tr_mul(ui))) + uj.dot(&(g * c.tr_mul(ui)))
            })
            .collect(),
        MzGenerators::Factorized { left, right } => {
            // G = -g h^T: -(u_j^T C h)(g^T u_i) - (u_j^T g)(h^T C^T u_i)
            let a = c.tr_mul(uj);
            let b = c.tr_mul(ui);
            let ha = right * &a;
            let hb = right * &b;
            let mut out = Vec::with_capacity(left.len() * right.nrows());
            for g in left {
                let (gi, gj) = (g.dot(ui), g.dot(uj));
                for t in 0..right.nrows() {
                    out.push(-ha[t] * gi - gj * hb[t]);
                }
            }
            out
        }
    }
}

pub fn max_rotation(m: &MatrixZonotope) -> Result<MaxRotation> {
    let n = m.rows();
    let d = m.cols() as f64;
    let c = m.center();
    let s0 = c * c.transpose() / d;
    let eig = sym_eig(&s0)?;
    if n < 2 {
        return Ok(MaxRotation {
            p: Matrix::identity(n, n),
            dk_bound: 0.0,
            gap: f64::INFINITY,
            competitor: 0,
            beta: vec![0.0; m.num_generators()],
        });
    }
    let target = 0;
    let (competitor, gap) = (0..n)
        .filter(|&j| j != target)
        .map(|j| (j, (eig.values[target] - eig.values[j]).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("n >= 2");
    if gap <= MIN_SPECTRAL_GAP {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let ui = eig.vectors.column(target).into_owned();
    let uj = eig.vectors.column(competitor).into_owned();
    let beta: Vec<f64> = couplings(m, &ui, &uj).into_iter().map(sign).collect();
    let neg_beta: Vec<f64> = beta.iter().map(|b| -b).collect();
    // C* = C + E*, E* = -sum beta_k G_k
    let c_star = m.matrix_at(&neg_beta)?;
    let s_star = &c_star * c_star.transpose() / d;
    let delta_s = &s_star - &s0;
    let delta_norm = sym_eig(&((&delta_s + delta_s.transpose()) * 0.5))?
        .values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let p = sym_eig(&s_star)?.vectors;
    Ok(MaxRotation {
        p,
        dk_bound: delta_norm / gap,
        gap,
        competitor,
        beta,
    })
}
