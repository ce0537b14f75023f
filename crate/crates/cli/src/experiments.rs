//! The experiments behind the CLI verbs: a single reach run, the method
//! comparison table, and the one-step reduction example.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mzreach::identify::{generate_data, identify, TrueSystem};
use mzreach::numerics::linalg::to_rows;
use mzreach::numerics::random_orthogonal;
use mzreach::projsel::{select, Method, Objective, ReachObjective, Selection, VolumeMetric};
use mzreach::propagate::{dd_step, model_reach, run, ReachRun, RunConfig};
use mzreach::reduction::{dominant_directions, girard_reduce, intersection_refine, projected_reduce};
use mzreach::volume::{exact_volume, mc_volume, projected_volume, VolumeResult, DEFAULT_SUBSET_CAP};
use mzreach::{IdentifiedModel, Matrix, ReachSet, Result, Rng, Vector, Zonotope};

use crate::scenario::{Reference, Scenario, DATA_PLAN_NOTE};

/// Monte Carlo budget for constrained sets in reports.
pub const REPORT_MC_SAMPLES: usize = 20_000;
const REPORT_MC_SEED: u64 = 2024;

/// Volume of the projection onto `basis`: exact for zonotopes, Monte Carlo
/// for constrained zonotopes.
pub fn reported_volume(set: &ReachSet, basis: &Matrix) -> Result<VolumeResult> {
    match set {
        ReachSet::Zonotope(z) => projected_volume(z, basis, DEFAULT_SUBSET_CAP),
        ReachSet::Constrained(c) => {
            let flat = ReachSet::Constrained(c.linear_map(&basis.transpose())?);
            mc_volume(&flat, REPORT_MC_SAMPLES, &mut Rng::new(REPORT_MC_SEED))
        }
    }
}

pub fn fill_volumes(run: &mut ReachRun, basis: &Matrix) -> Result<()> {
    run.volumes = Some(run.sets.iter().map(|s| reported_volume(s, basis)).collect::<Result<_>>()?);
    Ok(())
}

/// Everything derived from a scenario before a frame is chosen.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub system: TrueSystem,
    pub model: IdentifiedModel,
}

impl Prepared {
    pub fn new(scenario: &Scenario) -> Result<Prepared> {
        scenario.validate()?;
        Ok(Prepared {
            system: scenario.system()?,
            model: scenario.identify()?,
            scenario: scenario.clone(),
        })
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig::new(self.scenario.horizon, self.scenario.rho, self.scenario.use_intersection)
    }

    /// The objective optimized by the search methods: the reported volume
    /// of the final set.
    pub fn objective(&self) -> ReachObjective {
        ReachObjective {
            model: self.model.clone(),
            x0: self.scenario.x0.clone(),
            u: self.scenario.u.clone(),
            zw: self.scenario.zw.clone(),
            cfg: self.run_config(),
            metric: VolumeMetric::Projected {
                basis: self.scenario.volume_basis(),
            },
        }
    }

    pub fn truth(&self) -> Result<ReachRun> {
        let s = &self.scenario;
        let mut run = model_reach(&self.system, &s.x0, &s.u, s.horizon)?;
        fill_volumes(&mut run, &s.volume_basis())?;
        Ok(run)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectedRun {
    pub selection: Selection,
    pub select_seconds: f64,
    pub run_seconds: f64,
    pub run: ReachRun,
}

impl SelectedRun {
    pub fn total_seconds(&self) -> f64 {
        self.select_seconds + self.run_seconds
    }

    pub fn final_volume(&self) -> &VolumeResult {
        self.run.volumes.as_ref().and_then(|v| v.last()).expect("volumes filled")
    }
}

pub fn select_and_run(prep: &Prepared, method: Method) -> Result<SelectedRun> {
    let s = &prep.scenario;
    let objective = prep.objective();
    let obj: Option<&dyn Objective> = method.needs_objective().then_some(&objective as &dyn Objective);
    let t0 = Instant::now();
    let selection = select(method, &prep.model.msigma, obj, &s.select)?;
    let select_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let mut out = run(&prep.model, &s.x0, &s.u, &s.zw, &selection.p, &prep.run_config())?;
    let run_seconds = t1.elapsed().as_secs_f64();
    out.method_tag = method.label().to_string();
    fill_volumes(&mut out, &s.volume_basis())?;
    Ok(SelectedRun {
        selection,
        select_seconds,
        run_seconds,
        run: out,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareRow {
    pub method: Method,
    pub seconds: f64,
    pub select_seconds: f64,
    pub volume: VolumeResult,
    pub ratio: f64,
    /// `volume^(n/k)` for a `k`-axis projection; a rough full-dimensional scale.
    pub scaled_estimate: f64,
    #[serde(with = "mzreach::serde_matrix")]
    pub p: Matrix,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareTable {
    pub scenario: String,
    pub horizon: usize,
    pub rho: f64,
    pub volume_axes: Vec<usize>,
    pub truth: VolumeResult,
    pub truth_scaled_estimate: f64,
    pub rows: Vec<CompareRow>,
    pub reference: Reference,
    pub notes: Vec<String>,
}

impl CompareTable {
    pub fn row(&self, method: Method) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Runs every method (concurrently) plus the model-based ground truth.
pub fn compare(prep: &Prepared, methods: &[Method]) -> Result<CompareTable> {
    let s = &prep.scenario;
    let n = s.a.nrows() as f64;
    let k = s.volume_axes.len() as f64;
    let truth_run = prep.truth()?;
    let truth = truth_run.volumes.as_ref().and_then(|v| v.last()).cloned().expect("volumes filled");
    let runs: Vec<SelectedRun> = methods.par_iter().map(|&m| select_and_run(prep, m)).collect::<Result<_>>()?;
    let rows = runs
        .into_iter()
        .zip(methods)
        .map(|(r, &method)| {
            let volume = r.final_volume().clone();
            CompareRow {
                method,
                seconds: r.total_seconds(),
                select_seconds: r.select_seconds,
                ratio: volume.value / truth.value,
                scaled_estimate: volume.value.powf(n / k),
                p: r.selection.p.clone(),
                warnings: r.selection.warnings.clone(),
                volume,
            }
        })
        .collect();
    Ok(CompareTable {
        scenario: s.name.clone(),
        horizon: s.horizon,
        rho: s.rho,
        volume_axes: s.volume_axes.clone(),
        truth_scaled_estimate: truth.value.powf(n / k),
        truth,
        rows,
        reference: s.reference.clone(),
        notes: vec![DATA_PLAN_NOTE.to_string(), format!("volumes projected onto axes {:?}", s.volume_axes)],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example1Config {
    pub seed: u64,
    pub rho: f64,
    /// Identification data: `data_experiments` runs of `data_length` steps.
    pub data_experiments: usize,
    pub data_length: usize,
    /// Spread of the initial set along its two dominant directions.
    pub g0_scale: f64,
    /// Spread in the remaining directions.
    pub g0_residual: f64,
    pub mc_samples: usize,
}

impl Default for Example1Config {
    fn default() -> Self {
        Example1Config {
            seed: 1,
            rho: 1.2,
            data_experiments: 100,
            data_length: 5,
            g0_scale: 2.0,
            g0_residual: 0.02,
            mc_samples: 20_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub unreduced_below_intersection: bool,
    pub intersection_below_projected: bool,
    pub projected_below_girard: bool,
}

impl OrderingCheck {
    pub fn holds(&self) -> bool {
        self.unreduced_below_intersection && self.intersection_below_projected && self.projected_below_girard
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Example1Report {
    pub config: Example1Config,
    pub g0: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub unreduced: VolumeResult,
    pub girard: VolumeResult,
    pub projected: VolumeResult,
    pub ratio: f64,
    pub intersection: VolumeResult,
    pub ordering: OrderingCheck,
    /// Both reductions contain the unreduced set on every sampled direction.
    pub containment_directions: usize,
    pub containment_holds: bool,
    #[serde(skip)]
    pub sets: Option<Example1Sets>,
}

/// The sets of the example, kept for plotting.
#[derive(Debug, Clone)]
pub struct Example1Sets {
    pub truth: Zonotope,
    pub unreduced: Zonotope,
    pub girard: Zonotope,
    pub projected: Zonotope,
    pub intersection: mzreach::ConstrainedZonotope,
}

/// Initial generators concentrated near a random plane.
pub fn example1_g0(cfg: &Example1Config) -> Matrix {
    let mut rng = Rng::new(cfg.seed);
    let q = random_orthogonal(5, &mut rng);
    let plane = q.columns(0, 2).into_owned();
    &plane * rng.normal_matrix(2, 6) * cfg.g0_scale + rng.normal_matrix(5, 6) * cfg.g0_residual
}

pub fn example1(cfg: &Example1Config) -> Result<Example1Report> {
    let base = Scenario::five_state();
    let noise = Vector::from_vec(vec![1.0, 2.0, 1.3, 1.0, 1.5]) * 0.06;
    let zw = Zonotope::from_box(Vector::zeros(5), &noise)?;
    let g0 = example1_g0(cfg);
    let x0 = Zonotope::new(Vector::from_element(5, 3.0), g0.clone())?;
    let u = base.u.clone();
    let sys = TrueSystem::new(base.a.clone(), base.b.clone(), zw.clone())?;
    let mut rng = Rng::new(cfg.seed.wrapping_add(1));
    let plan = &base.data;
    let data_x0 = Zonotope::new(x0.center().clone(), plan.initial_set.as_ref().unwrap_or(&x0).generators().clone())?;
    let data_u = plan.input_set.as_ref().unwrap_or(&u);
    let data = generate_data(&sys, &data_x0, data_u, cfg.data_experiments, cfg.data_length, &mut rng)?;
    let model = identify(&data, &zw)?;

    let r1 = dd_step(&model, &ReachSet::Zonotope(x0.clone()), &u, &zw)?.outer_zonotope();
    let (girard, report) = girard_reduce(&r1, cfg.rho)?;
    let p = dominant_directions(&r1.select_generators(&report.discarded_indices))?;
    let (projected, _) = projected_reduce(&r1, &p, cfg.rho)?;
    let cz = intersection_refine(&r1, &p, cfg.rho)?;

    let unreduced = exact_volume(&r1.compact(1e-12), DEFAULT_SUBSET_CAP)?;
    let girard_vol = exact_volume(&girard, DEFAULT_SUBSET_CAP)?;
    let projected_vol = exact_volume(&projected, DEFAULT_SUBSET_CAP)?;
    // the rotated copy has the same volume and a tighter interval hull
    let rotated = ReachSet::Constrained(cz.linear_map(&p.transpose())?);
    let intersection = mc_volume(&rotated, cfg.mc_samples, &mut Rng::new(cfg.seed.wrapping_add(2)))?;

    let three_sigma = 3.0 * intersection.std_error();
    let ordering = OrderingCheck {
        unreduced_below_intersection: unreduced.value <= intersection.value + three_sigma,
        intersection_below_projected: intersection.value - three_sigma <= projected_vol.value,
        projected_below_girard: projected_vol.value <= girard_vol.value,
    };

    let directions = 500;
    let mut dir_rng = Rng::new(cfg.seed.wrapping_add(3));
    let mut containment = true;
    for _ in 0..directions {
        let d = dir_rng.normal_vector(5);
        let s = r1.support(&d)?;
        containment &= girard.support(&d)? >= s - 1e-8 && projected.support(&d)? >= s - 1e-8;
    }

    let truth = model_reach(&sys, &x0, &u, 1)?.last().outer_zonotope();
    Ok(Example1Report {
        config: cfg.clone(),
        g0: to_rows(&g0),
        p: to_rows(&p),
        ratio: girard_vol.value / projected_vol.value,
        unreduced,
        girard: girard_vol,
        projected: projected_vol,
        intersection,
        ordering,
        containment_directions: directions,
        containment_holds: containment,
        sets: Some(Example1Sets {
            truth,
            unreduced: r1,
            girard,
            projected,
            intersection: cz,
        }),
    })
}
