//! Scenario documents: every knob of an experiment in one JSON file.

use serde::{Deserialize, Serialize};

use mzreach::identify::{generate_data, identify, TrueSystem};
use mzreach::numerics::linalg::from_row_major;
use mzreach::projsel::{Method, SelectParams};
use mzreach::{DataSet, Error, IdentifiedModel, Matrix, Result, Rng, Vector, Zonotope};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPlan {
    pub experiments: usize,
    pub length: usize,
    pub seed: u64,
    /// Inputs drawn during data collection; the reachability input set when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_set: Option<Zonotope>,
    /// Experiment start states; the initial reachability set when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_set: Option<Zonotope>,
}

/// Published figures the run is compared against; informational only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_volume: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ratios: Vec<(String, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seconds: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(with = "mzreach::serde_matrix")]
    pub a: Matrix,
    #[serde(with = "mzreach::serde_matrix")]
    pub b: Matrix,
    pub x0: Zonotope,
    pub u: Zonotope,
    pub zw: Zonotope,
    pub data: DataPlan,
    pub horizon: usize,
    pub rho: f64,
    pub method: Method,
    #[serde(default)]
    pub use_intersection: bool,
    #[serde(default)]
    pub select: SelectParams,
    /// Axes spanned by the reported projected volumes.
    #[serde(default = "default_axes")]
    pub volume_axes: Vec<usize>,
    #[serde(default)]
    pub reference: Reference,
}

fn default_axes() -> Vec<usize> {
    vec![0, 1, 2]
}

/// Artifact choice noted in every output built on the five-state fixture.
pub const DATA_PLAN_NOTE: &str =
    "data plan (experiments, length, seed, widened excitation sets) is an artifact choice, not a published setting";

impl Scenario {
    /// The five-state benchmark: two rotating pairs and a decaying mode, a
    /// scalar input, and anisotropic box noise.
    pub fn five_state() -> Scenario {
        #[rustfmt::skip]
        let a = [
            0.9323, -0.189, 0.0, 0.0, 0.0,
            0.189, 0.9323, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.8596, 0.04302, 0.0,
            0.0, 0.0, -0.04302, 0.8596, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.9048,
        ];
        let b = [0.04363, 0.05327, 0.04754, 0.04528, 0.04758];
        let noise = Vector::from_vec(vec![1.0, 1.1, 1.3, 1.2, 1.5]) * 0.01;
        Scenario {
            name: "five_state".into(),
            a: from_row_major(5, 5, &a).expect("fixed size"),
            b: from_row_major(5, 1, &b).expect("fixed size"),
            x0: Zonotope::new(Vector::from_element(5, 1.0), Matrix::identity(5, 5) * 0.1).expect("fixed size"),
            u: Zonotope::new(Vector::from_element(1, 10.0), Matrix::from_element(1, 1, 0.25)).expect("fixed size"),
            zw: Zonotope::from_box(Vector::zeros(5), &noise).expect("fixed size"),
            data: DataPlan {
                experiments: 100,
                length: 5,
                seed: 42,
                input_set: Some(
                    Zonotope::new(Vector::from_element(1, 10.0), Matrix::from_element(1, 1, 10.0)).expect("fixed size"),
                ),
                initial_set: Some(
                    Zonotope::new(Vector::from_element(5, 1.0), Matrix::identity(5, 5) * 5.0).expect("fixed size"),
                ),
            },
            horizon: 5,
            rho: 2.0,
            method: Method::L1Svd,
            use_intersection: false,
            select: SelectParams::default(),
            volume_axes: default_axes(),
            reference: Reference {
                truth_volume: Some(1.68e-2),
                ratios: vec![
                    ("max_rotation".into(), 7.33),
                    ("l1_svd".into(), 7.34),
                    ("riemannian".into(), 7.36),
                ],
                seconds: vec![
                    ("max_rotation".into(), 1.25e-2),
                    ("l1_svd".into(), 5.17e-3),
                    ("riemannian".into(), 113.2),
                ],
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        check(n == self.a.ncols(), "A must be square")?;
        check(self.b.nrows() == n, "B must have as many rows as A")?;
        check(self.x0.dim() == n, "X0 dimension must match A")?;
        check(self.zw.dim() == n, "noise dimension must match A")?;
        check(self.u.dim() == self.b.ncols(), "input set dimension must match B")?;
        check(self.data.experiments > 0 && self.data.length > 0, "data plan must be non-empty")?;
        check(self.rho >= 1.0, "rho must be at least 1")?;
        check(!self.volume_axes.is_empty(), "volume axes must be non-empty")?;
        check(self.volume_axes.iter().all(|&i| i < n), "volume axes out of range")?;
        let mut axes = self.volume_axes.clone();
        axes.sort_unstable();
        axes.dedup();
        check(axes.len() == self.volume_axes.len(), "volume axes must be distinct")
    }

    pub fn system(&self) -> Result<TrueSystem> {
        TrueSystem::new(self.a.clone(), self.b.clone(), self.zw.clone())
    }

    pub fn generate_data(&self) -> Result<DataSet> {
        self.validate()?;
        let mut rng = Rng::new(self.data.seed);
        let x0 = self.data.initial_set.as_ref().unwrap_or(&self.x0);
        let u = self.data.input_set.as_ref().unwrap_or(&self.u);
        generate_data(&self.system()?, x0, u, self.data.experiments, self.data.length, &mut rng)
    }

    pub fn identify(&self) -> Result<IdentifiedModel> {
        identify(&self.generate_data()?, &self.zw)
    }

    /// Orthonormal basis of the reporting axes.
    pub fn volume_basis(&self) -> Matrix {
        let n = self.a.nrows();
        let mut basis = Matrix::zeros(n, self.volume_axes.len());
        for (j, &i) in self.volume_axes.iter().enumerate() {
            basis[(i, j)] = 1.0;
        }
        basis
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(msg.to_string()))
    }
}
