//! Command-line flags and their translation into an [`ExperimentConfig`].

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::config::{merge_json, EvalCriterion, Experiment, ExperimentConfig, Format, OUT_DIR_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "husimi",
    version,
    about = "Husimi Q entanglement criteria and experiment runner"
)]
pub struct Cli {
    /// JSON config merged over the flags (config values win).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Print the resolved config and exit.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Witnessed regions of the moment criteria over Wigner moments.
    Regions {
        #[command(flatten)]
        frame: FrameArgs,
        #[arg(long, value_delimiter = ',')]
        sigma_r2: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        sigma_s2: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        sigma_rs: Option<Vec<f64>>,
    },
    /// Optimized Rényi–Wehrl and marginal-entropy criteria on the example state.
    ExampleSweep {
        #[arg(long, value_delimiter = ',')]
        sigma_plus: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        sigma_minus: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        sigma_ratio: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        xi: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        /// `phi:xi` pair; repeat for several settings.
        #[arg(long = "setting", value_parser = parse_setting)]
        settings: Vec<(f64, f64)>,
    },
    /// Coarse-grained criteria on the squeezed vacuum versus tile size.
    ResolutionSweep {
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<f64>>,
        /// Tile sizes scanned for the boundary.
        #[arg(long, value_delimiter = ',')]
        scan: Option<Vec<f64>>,
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Repeated finite-sample estimation of the Rényi–Wehrl witness.
    SamplingStudy {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        frame: FrameArgs,
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<f64>>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Evaluates one criterion on a named state or a sample file.
    Eval {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        frame: FrameArgs,
        #[arg(long, value_enum)]
        criterion: Option<CriterionArg>,
        /// Concave function, e.g. `wehrl`, `power:0.5`.
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// CSV with header `r,s`.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Lists states, concave functions and criteria.
    Catalogue,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum CriterionArg {
    General,
    RenyiWehrl,
    SecondMoment,
    Dgcz,
    Mgvt,
    Stw,
}

impl From<CriterionArg> for EvalCriterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::General => EvalCriterion::General,
            CriterionArg::RenyiWehrl => EvalCriterion::RenyiWehrl,
            CriterionArg::SecondMoment => EvalCriterion::SecondMoment,
            CriterionArg::Dgcz => EvalCriterion::Dgcz,
            CriterionArg::Mgvt => EvalCriterion::Mgvt,
            CriterionArg::Stw => EvalCriterion::Stw,
        }
    }
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Catalogue name (see `husimi catalogue`).
    #[arg(long)]
    pub state: Option<String>,
    /// State parameters as a JSON object.
    #[arg(long)]
    pub params: Option<String>,
    /// Shorthand for the `lambda` state parameter.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta2: Option<f64>,
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long)]
    pub a2: Option<f64>,
    #[arg(long)]
    pub b1: Option<f64>,
    #[arg(long)]
    pub b2: Option<f64>,
    /// `plus` or `minus`.
    #[arg(long)]
    pub branch: Option<String>,
}

fn parse_setting(s: &str) -> Result<(f64, f64), String> {
    let (phi, xi) = s.split_once(':').ok_or_else(|| format!("expected phi:xi, got {s}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    Ok((num(phi)?, num(xi)?))
}

struct Overrides(Map<String, Value>);

impl Overrides {
    fn set(&mut self, path: &[&str], value: Value) {
        let mut node = &mut self.0;
        for key in &path[..path.len() - 1] {
            node = node
                .entry(key.to_string())
                .or_insert_with(|| Value::Object(Map::new()))
                .as_object_mut()
                .expect("object node");
        }
        node.insert(path[path.len() - 1].to_string(), value);
    }

    fn opt<T: serde::Serialize>(&mut self, path: &[&str], value: &Option<T>) {
        if let Some(v) = value {
            self.set(path, json!(v));
        }
    }

    fn frame(&mut self, f: &FrameArgs) {
        self.opt(&["frame", "theta1"], &f.theta1);
        self.opt(&["frame", "theta2"], &f.theta2);
        self.opt(&["frame", "a1"], &f.a1);
        self.opt(&["frame", "a2"], &f.a2);
        self.opt(&["frame", "b1"], &f.b1);
        self.opt(&["frame", "b2"], &f.b2);
        self.opt(&["frame", "branch"], &f.branch);
    }

    fn state(&mut self, s: &StateArgs) -> Result<()> {
        let mut params = match &s.params {
            Some(text) => serde_json::from_str::<Value>(text).context("--params: invalid JSON")?,
            None => Value::Null,
        };
        if let Some(l) = s.lambda {
            if params.is_null() {
                params = json!({});
            }
            let Some(obj) = params.as_object_mut() else {
                bail!("--params: expected a JSON object")
            };
            obj.insert("lambda".to_string(), json!(l));
        }
        match (&s.state, params.is_null()) {
            (Some(name), _) => self.set(&["state"], json!({ "name": name, "params": params })),
            (None, false) => bail!("--params and --lambda require --state"),
            (None, true) => {}
        }
        Ok(())
    }
}

/// Experiment selected by a subcommand; `None` for `catalogue`.
pub fn experiment_of(command: &Command) -> Option<Experiment> {
    Some(match command {
        Command::Regions { .. } => Experiment::Regions,
        Command::ExampleSweep { .. } => Experiment::ExampleSweep,
        Command::ResolutionSweep { .. } => Experiment::ResolutionSweep,
        Command::SamplingStudy { .. } => Experiment::SamplingStudy,
        Command::Eval { .. } => Experiment::Eval,
        Command::Catalogue => return None,
    })
}

/// Flags, then the `--config` file on top, parsed and validated.
pub fn resolve(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    let Some(experiment) = experiment_of(&cli.command) else {
        return Ok(None);
    };
    let mut o = Overrides(Map::new());
    o.opt(&["seed"], &cli.seed);
    o.opt(&["format"], &cli.format);
    o.opt(&["output"], &cli.out);
    match &cli.command {
        Command::Regions {
            frame,
            sigma_r2,
            sigma_s2,
            sigma_rs,
        } => {
            o.frame(frame);
            o.opt(&["grids", "sigma_r2"], sigma_r2);
            o.opt(&["grids", "sigma_s2"], sigma_s2);
            o.opt(&["grids", "sigma_rs"], sigma_rs);
        }
        Command::ExampleSweep {
            sigma_plus,
            sigma_minus,
            sigma_ratio,
            xi,
            beta,
            alpha,
            settings,
        } => {
            o.opt(&["grids", "sigma_plus"], sigma_plus);
            o.opt(&["grids", "sigma_minus"], sigma_minus);
            o.opt(&["grids", "sigma_ratio"], sigma_ratio);
            o.opt(&["grids", "xi"], xi);
            o.opt(&["grids", "beta"], beta);
            o.opt(&["grids", "alpha"], alpha);
            if !settings.is_empty() {
                let list: Vec<Value> = settings
                    .iter()
                    .map(|&(phi, xi)| json!({ "phi": phi, "xi": xi }))
                    .collect();
                o.set(&["example", "settings"], Value::Array(list));
            }
        }
        Command::ResolutionSweep {
            lambda,
            delta,
            beta,
            scan,
            resolution,
        } => {
            o.opt(&["grids", "lambda"], lambda);
            o.opt(&["grids", "delta"], delta);
            o.opt(&["grids", "beta"], beta);
            o.opt(&["resolution", "scan"], scan);
            o.opt(&["resolution", "resolution"], resolution);
        }
        Command::SamplingStudy {
            state,
            frame,
            beta,
            n,
            reps,
            k,
            restarts,
        } => {
            o.state(state)?;
            o.frame(frame);
            o.opt(&["grids", "beta"], beta);
            o.opt(&["sampling", "n"], n);
            o.opt(&["sampling", "reps"], reps);
            o.opt(&["sampling", "k"], k);
            o.opt(&["sampling", "restarts"], restarts);
        }
        Command::Eval {
            state,
            frame,
            criterion,
            f,
            beta,
            alpha,
            samples,
            k,
        } => {
            o.state(state)?;
            o.frame(frame);
            o.opt(&["eval", "criterion"], &criterion.map(EvalCriterion::from));
            o.opt(&["eval", "f"], f);
            o.opt(&["eval", "beta"], beta);
            o.opt(&["eval", "alpha"], alpha);
            o.opt(&["eval", "samples"], samples);
            o.opt(&["sampling", "k"], k);
        }
        Command::Catalogue => unreachable!(),
    }
    let mut doc = serde_json::to_value(ExperimentConfig::new(experiment))?;
    merge_json(&mut doc, Value::Object(o.0));
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(e) = file.get("experiment") {
            if e != &json!(experiment) {
                bail!("experiment: config file says {e}, subcommand is {}", experiment.label());
            }
        }
        merge_json(&mut doc, file);
    }
    let config = ExperimentConfig::from_json(&doc.to_string())?;
    config.validate()?;
    Ok(Some(config))
}
