//! The volume objective `J(P)` of the final reachable set in frame `P`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identify::IdentifiedModel;
use crate::numerics::{Matrix, Rng};
use crate::propagate::{run, ReachRun, RunConfig};
use crate::reduction::dominant_directions;
use crate::sets::{ReachSet, Zonotope};
use crate::volume::{binomial, exact_volume, mc_volume, projected_volume, VolumeResult, DEFAULT_SUBSET_CAP};

/// Anything that scores an orthogonal matrix; lower is better.
pub trait Objective: Sync {
    fn value(&self, p: &Matrix) -> Result<f64>;
}

impl<F> Objective for F
where
    F: Fn(&Matrix) -> Result<f64> + Sync,
{
    fn value(&self, p: &Matrix) -> Result<f64> {
        self(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolumeMetric {
    /// Exact volume when the subset count fits the cap, otherwise the volume
    /// projected onto the three dominant axes of the final set. Constrained
    /// sets always use Monte Carlo.
    Auto,
    Exact,
    Projected {
        #[serde(with = "crate::serde_matrix")]
        basis: Matrix,
    },
    MonteCarlo { samples: usize, seed: u64 },
}

const AUTO_MC_SAMPLES: usize = 4000;
const AUTO_MC_SEED: u64 = 0x5eed;

impl VolumeMetric {
    pub fn measure(&self, set: &ReachSet) -> Result<VolumeResult> {
        match (self, set) {
            (VolumeMetric::MonteCarlo { samples, seed }, _) => mc_volume(set, *samples, &mut Rng::new(*seed)),
            (_, ReachSet::Constrained(_)) if !matches!(self, VolumeMetric::Projected { .. }) => {
                mc_volume(set, AUTO_MC_SAMPLES, &mut Rng::new(AUTO_MC_SEED))
            }
            (VolumeMetric::Projected { basis }, ReachSet::Constrained(c)) => {
                // a constrained set is measured through its zonotope enclosure
                projected_volume(&c.without_constraints(), basis, DEFAULT_SUBSET_CAP)
            }
            (VolumeMetric::Projected { basis }, ReachSet::Zonotope(z)) => projected_volume(z, basis, DEFAULT_SUBSET_CAP),
            (VolumeMetric::Exact, ReachSet::Zonotope(z)) => exact_volume(z, DEFAULT_SUBSET_CAP),
            (VolumeMetric::Auto, ReachSet::Zonotope(z)) => auto_volume(z),
            _ => unreachable!("constrained sets handled above"),
        }
    }
}

fn auto_volume(z: &Zonotope) -> Result<VolumeResult> {
    if binomial(z.num_generators(), z.dim()) <= DEFAULT_SUBSET_CAP {
        return exact_volume(z, DEFAULT_SUBSET_CAP);
    }
    let axes = dominant_directions(z.generators())?;
    let k = z.dim().min(3);
    projected_volume(z, &axes.columns(0, k).into_owned(), DEFAULT_SUBSET_CAP)
}

/// `J(P) = vol(X_P^(T))` for a fixed model, sets, and run configuration.
#[derive(Debug, Clone)]
pub struct ReachObjective {
    pub model: IdentifiedModel,
    pub x0: Zonotope,
    pub u: Zonotope,
    pub zw: Zonotope,
    pub cfg: RunConfig,
    pub metric: VolumeMetric,
}

impl ReachObjective {
    pub fn evaluate(&self, p: &Matrix) -> Result<(ReachRun, VolumeResult)> {
        let out = run(&self.model, &self.x0, &self.u, &self.zw, p, &self.cfg)?;
        let vol = self.metric.measure(out.last())?;
        Ok((out, vol))
    }
}

impl Objective for ReachObjective {
    fn value(&self, p: &Matrix) -> Result<f64> {
        let (_, vol) = self.evaluate(p).map_err(|e| Error::Objective(e.to_string()))?;
        Ok(vol.value)
    }
}
