//! Command-line front end.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mzreach::identify::{identify, membership_diagnostic, MembershipDiagnostic};
use mzreach::projsel::{select, Method, Objective};
use mzreach::Error;

use crate::experiments::{compare, example1, select_and_run, Example1Config, Prepared};
use crate::io;
use crate::plot::{render_svg, Series};
use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "mzreach", version, about = "Data-driven reachability with basis-selected order reduction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ScenarioArgs {
    /// Scenario JSON file; the built-in five-state benchmark when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Seed of the data-generation plan.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub use_intersection: bool,
}

impl ScenarioArgs {
    pub fn load(&self) -> Result<Scenario> {
        let mut s = match &self.scenario {
            Some(path) => io::read_json::<Scenario>(path)?,
            None => Scenario::five_state(),
        };
        if let Some(m) = self.method {
            s.method = m;
        }
        if let Some(r) = self.rho {
            s.rho = r;
        }
        if let Some(h) = self.horizon {
            s.horizon = h;
        }
        if let Some(seed) = self.seed {
            s.data.seed = seed;
        }
        s.use_intersection |= self.use_intersection;
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the data plan and write one CSV per data matrix.
    GenData {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the matrix zonotope of consistent models and check the true one against it.
    Identify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Dataset directory written by gen-data; simulated when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select a basis and propagate the reachable sets.
    Reach {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select a basis only.
    SelectP {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
        /// Optimizer trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compare basis-selection methods against the model-based reachable set.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated method labels.
        #[arg(long, value_delimiter = ',', default_value = "identity,max_rotation,l1_svd,givens,riemannian")]
        methods: Vec<Method>,
        /// Output directory for compare.csv and compare.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// One-step reduction example: plain versus projected Girard reduction.
    Example1 {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Also draw the sets on the first two axes.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Draw the model-based and data-driven reachable sets on two axes.
    Plot {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        dims: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Serialize)]
pub struct IdentifySummary {
    pub samples: usize,
    pub state_dim: usize,
    pub input_dim: usize,
    pub rank_ratio: f64,
    pub rank_ok: bool,
    pub generator_count: usize,
    pub center: Vec<Vec<f64>>,
    pub true_system: MembershipDiagnostic,
}

/// Exit status for a failed command: 2 for invalid input or I/O, 3 for
/// numerical failures, 4 for exhausted budgets.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Budget { .. }) => 4,
        Some(
            Error::Numerical(_)
            | Error::Infeasible
            | Error::EmptySet
            | Error::Identifiability { .. }
            | Error::DegenerateSpectrum { .. }
            | Error::Objective(_),
        ) => 3,
        _ => 2,
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { scenario, out } => {
            let s = scenario.load()?;
            let data = s.generate_data()?;
            io::write_dataset(&out, &data, s.data.seed)?;
            println!("wrote {} samples to {}", data.len(), out.display());
        }
        Command::Identify { scenario, data, out } => {
            let s = scenario.load()?;
            let data = match data {
                Some(dir) => io::read_dataset(&dir)?.0,
                None => s.generate_data()?,
            };
            let model = identify(&data, &s.zw)?;
            let truth = mzreach::numerics::hstack(&s.a, &s.b);
            let summary = IdentifySummary {
                samples: data.len(),
                state_dim: model.state_dim(),
                input_dim: model.input_dim(),
                rank_ratio: model.rank_ratio,
                rank_ok: model.rank_ok,
                generator_count: model.gamma(),
                center: mzreach::numerics::linalg::to_rows(model.msigma.center()),
                true_system: membership_diagnostic(&model, &truth),
            };
            ensure_parent(&out)?;
            io::write_json(&out, &summary)?;
            println!(
                "identified from {} samples; true system member: {}",
                summary.samples, summary.true_system.member
            );
        }
        Command::Reach { scenario, out } => {
            let s = scenario.load()?;
            let prep = Prepared::new(&s)?;
            let result = select_and_run(&prep, s.method)?;
            ensure_parent(&out)?;
            io::write_json(&out, &result)?;
            println!(
                "{}: final volume {:.6e} in {:.3} s",
                s.method,
                result.final_volume().value,
                result.total_seconds()
            );
        }
        Command::SelectP { scenario, out, trace } => {
            let s = scenario.load()?;
            let prep = Prepared::new(&s)?;
            let objective = prep.objective();
            let obj = s.method.needs_objective().then_some(&objective as &dyn Objective);
            let selection = select(s.method, &prep.model.msigma, obj, &s.select)?;
            ensure_parent(&out)?;
            io::write_json(&out, &selection)?;
            if let Some(path) = trace {
                ensure_parent(&path)?;
                io::write_trace_csv(&path, &selection)?;
            }
            for w in &selection.warnings {
                log::warn!("{w}");
            }
            println!("{}: basis written to {}", s.method, out.display());
        }
        Command::Compare { scenario, methods, out } => {
            let s = scenario.load()?;
            let prep = Prepared::new(&s)?;
            let table = compare(&prep, &methods)?;
            std::fs::create_dir_all(&out)?;
            io::write_compare_csv(&out.join("compare.csv"), &table)?;
            io::write_json(&out.join("compare.json"), &table)?;
            println!("truth volume {:.6e}", table.truth.value);
            for row in &table.rows {
                println!("{:<13} ratio {:>9.4}  {:>10.4} s", row.method.label(), row.ratio, row.seconds);
            }
        }
        Command::Example1 { seed, rho, out, svg } => {
            let mut cfg = Example1Config::default();
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(rho) = rho {
                cfg.rho = rho;
            }
            let report = example1(&cfg)?;
            ensure_parent(&out)?;
            io::write_json(&out, &report)?;
            if let (Some(path), Some(sets)) = (svg, &report.sets) {
                let series = vec![
                    Series::from_zonotopes("model-based", [&sets.truth], (0, 1))?,
                    Series::from_zonotopes("data-driven", [&sets.unreduced], (0, 1))?,
                    Series::from_zonotopes("Girard", [&sets.girard], (0, 1))?,
                    Series::from_zonotopes("projected Girard", [&sets.projected], (0, 1))?,
                ];
                ensure_parent(&path)?;
                std::fs::write(&path, render_svg("one-step reduction", ("x1", "x2"), &series))?;
            }
            println!(
                "vol(GR) {:.6e}, vol(P GR) {:.6e}, ratio {:.2}, ordering holds: {}",
                report.girard.value,
                report.projected.value,
                report.ratio,
                report.ordering.holds()
            );
        }
        Command::Plot { scenario, dims, out } => {
            let s = scenario.load()?;
            anyhow::ensure!(dims.len() == 2, "--dims takes exactly two axes");
            let dims = (dims[0], dims[1]);
            let prep = Prepared::new(&s)?;
            let truth = prep.truth()?;
            let result = select_and_run(&prep, s.method)?;
            let outer = |sets: &[mzreach::ReachSet]| sets.iter().map(|x| x.outer_zonotope()).collect::<Vec<_>>();
            let truth_sets = outer(&truth.sets);
            let dd_sets = outer(&result.run.sets);
            let mut dd = Series::from_zonotopes(&format!("data-driven ({})", s.method), &dd_sets, dims)?;
            dd.dashed = true;
            let series = vec![Series::from_zonotopes("model-based", &truth_sets, dims)?, dd];
            let labels = (format!("x{}", dims.0 + 1), format!("x{}", dims.1 + 1));
            ensure_parent(&out)?;
            std::fs::write(&out, render_svg(&s.name, (&labels.0, &labels.1), &series))?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}
