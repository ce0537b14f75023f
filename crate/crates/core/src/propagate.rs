//! Reachability recursions: model-based ground truth, the plain data-driven
//! step, and propagation in a rotated frame with optional intersection.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identify::{IdentifiedModel, TrueSystem};
use crate::numerics::{check_orthogonal, Matrix};
use crate::reduction::{girard_reduce, reduce_set};
use crate::sets::{ConstrainedZonotope, ReachSet, Zonotope, ORTHOGONALITY_TOL};
use crate::volume::VolumeResult;

/// Above this many constraints, intersection mode stops intersecting.
pub const DEFAULT_CONSTRAINT_CAP: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachRun {
    pub method_tag: String,
    /// `horizon + 1` sets in original coordinates, starting with `X0`.
    pub sets: Vec<ReachSet>,
    pub generator_counts: Vec<usize>,
    pub constraint_counts: Vec<usize>,
    /// Seconds spent producing each set; zero for the initial set.
    pub wall_times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volumes: Option<Vec<VolumeResult>>,
    /// Step from which intersection was abandoned because of the cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_step: Option<usize>,
}

impl ReachRun {
    fn start(tag: &str, x0: ReachSet) -> Self {
        ReachRun {
            method_tag: tag.to_string(),
            generator_counts: vec![x0.num_generators()],
            constraint_counts: vec![x0.num_constraints()],
            sets: vec![x0],
            wall_times: vec![0.0],
            volumes: None,
            fallback_step: None,
        }
    }

    fn push(&mut self, set: ReachSet, seconds: f64) {
        self.generator_counts.push(set.num_generators());
        self.constraint_counts.push(set.num_constraints());
        self.sets.push(set);
        self.wall_times.push(seconds);
    }

    pub fn horizon(&self) -> usize {
        self.sets.len() - 1
    }

    pub fn last(&self) -> &ReachSet {
        self.sets.last().expect("a run holds at least X0")
    }

    pub fn total_time(&self) -> f64 {
        self.wall_times.iter().sum()
    }
}

/// `R_(k+1) = A R_k + B U + Z_w`, unreduced.
pub fn model_reach(sys: &TrueSystem, x0: &Zonotope, u: &Zonotope, horizon: usize) -> Result<ReachRun> {
    Error::check_dim("initial set", sys.state_dim(), x0.dim())?;
    Error::check_dim("input set", sys.input_dim(), u.dim())?;
    let bu = u.linear_map(&sys.b)?;
    let mut run = ReachRun::start("model", ReachSet::Zonotope(x0.clone()));
    let mut r = x0.clone();
    for _ in 0..horizon {
        let t0 = Instant::now();
        r = r.linear_map(&sys.a)?.minkowski(&bu)?.minkowski(&sys.noise)?;
        run.push(ReachSet::Zonotope(r.clone()), t0.elapsed().as_secs_f64());
    }
    Ok(run)
}

/// `M_Sigma (X_k x U) + Z_w`.
pub fn dd_step(model: &IdentifiedModel, xk: &ReachSet, u: &Zonotope, zw: &Zonotope) -> Result<ReachSet> {
    Error::check_dim("state set", model.state_dim(), xk.dim())?;
    Error::check_dim("input set", model.input_dim(), u.dim())?;
    model.msigma.times_set(&xk.cartesian(u))?.minkowski_zonotope(zw)
}

/// Generators after one data-driven step.
pub fn predicted_generator_count(g_k: usize, g_u: usize, gamma: usize, g_w: usize) -> usize {
    (1 + gamma) * (g_k + g_u) + gamma + g_w
}

/// Unreduced data-driven propagation.
pub fn dd_reach(model: &IdentifiedModel, x0: &Zonotope, u: &Zonotope, zw: &Zonotope, horizon: usize) -> Result<ReachRun> {
    let mut run = ReachRun::start("data_driven", ReachSet::Zonotope(x0.clone()));
    let mut x = ReachSet::Zonotope(x0.clone());
    for _ in 0..horizon {
        let t0 = Instant::now();
        x = dd_step(model, &x, u, zw)?;
        run.push(x.clone(), t0.elapsed().as_secs_f64());
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub horizon: usize,
    /// Reduction order; `f64::INFINITY` disables reduction.
    pub rho: f64,
    pub use_intersection: bool,
    pub constraint_cap: usize,
}

impl RunConfig {
    pub fn new(horizon: usize, rho: f64, use_intersection: bool) -> Self {
        RunConfig {
            horizon,
            rho,
            use_intersection,
            constraint_cap: DEFAULT_CONSTRAINT_CAP,
        }
    }
}

/// Propagation in the frame `P`: the model becomes `P^T M blockdiag(P, I)`,
/// the noise `P^T Z_w`, and each step is reduced there. With intersection,
/// the original-frame reduction is intersected in as well. Sets are
/// returned in original coordinates.
pub fn run(
    model: &IdentifiedModel,
    x0: &Zonotope,
    u: &Zonotope,
    zw: &Zonotope,
    p: &Matrix,
    cfg: &RunConfig,
) -> Result<ReachRun> {
    check_orthogonal(p, ORTHOGONALITY_TOL)?;
    if !(cfg.rho >= 1.0) {
        return Err(Error::Parameter(format!("reduction order must be >= 1, got {}", cfg.rho)));
    }
    let n = model.state_dim();
    Error::check_dim("rotation size", n, p.nrows())?;
    let pt = p.transpose();
    let m_p = model.msigma.change_basis(p)?;
    let zw_p = zw.linear_map(&pt)?;
    let tag = if cfg.use_intersection { "projected_intersection" } else { "projected" };
    let mut out = ReachRun::start(tag, ReachSet::Zonotope(x0.clone()));
    let mut x_p = ReachSet::Zonotope(x0.linear_map(&pt)?);
    let mut x_orig = ReachSet::Zonotope(x0.clone());
    let mut intersecting = cfg.use_intersection;

    for t in 1..=cfg.horizon {
        let t0 = Instant::now();
        let z_p = m_p.times_set(&x_p.cartesian(u))?.minkowski_zonotope(&zw_p)?;
        let reduced_p = reduce_set(&z_p, cfg.rho)?;
        let next = if intersecting {
            let direct = dd_step(model, &x_orig, u, zw)?;
            let reduced = reduce_set(&direct, cfg.rho)?;
            let back = reduced_p.linear_map(p)?.to_constrained();
            let cz = reduced.to_constrained().intersect(&back, &Matrix::identity(n, n))?;
            if cz.num_constraints() > cfg.constraint_cap {
                log::warn!(
                    "step {t}: {} constraints exceed cap {}, continuing without intersection",
                    cz.num_constraints(),
                    cfg.constraint_cap
                );
                intersecting = false;
                out.fallback_step = Some(t);
                reduced_p
            } else {
                let cz = ReachSet::Constrained(cz);
                x_orig = cz.clone();
                cz.linear_map(&pt)?
            }
        } else {
            reduced_p
        };
        x_p = next;
        if !intersecting {
            x_orig = x_p.linear_map(p)?;
        }
        out.push(x_orig.clone(), t0.elapsed().as_secs_f64());
    }
    Ok(out)
}

/// Direct-frame reference: `dd_step` followed by Girard reduction.
pub fn reduced_reach(
    model: &IdentifiedModel,
    x0: &Zonotope,
    u: &Zonotope,
    zw: &Zonotope,
    horizon: usize,
    rho: f64,
) -> Result<ReachRun> {
    let mut out = ReachRun::start("girard", ReachSet::Zonotope(x0.clone()));
    let mut x = x0.clone();
    for _ in 0..horizon {
        let t0 = Instant::now();
        let step = dd_step(model, &ReachSet::Zonotope(x), u, zw)?;
        x = girard_reduce(&step.outer_zonotope(), rho)?.0;
        out.push(ReachSet::Zonotope(x.clone()), t0.elapsed().as_secs_f64());
    }
    Ok(out)
}

/// The final set as a constrained zonotope, whatever the run produced.
pub fn final_constrained(run: &ReachRun) -> ConstrainedZonotope {
    run.last().to_constrained()
}
