//! Experiment runners. Each returns its output files in memory.

use std::path::Path;

use anyhow::{bail, Context, Result};
use husimi_core::criteria::{
    classify_region, dgcz_witness, mgvt_witness, optimal_renyi_wehrl_example, optimal_stw_example, renyi_wehrl_witness,
    second_moment_witness, stw_witness, witness_general, ConcaveFunction, CriterionId, ExampleOptimum,
};
use husimi_core::discretize::{delta_threshold, resolution_sweep, SweepCriterion, Threshold};
use husimi_core::distribution::{covariance_of, CovarianceSummary};
use husimi_core::frame::Branch;
use husimi_core::quadrature::Quadrature;
use husimi_core::sampling::{bootstrap_confidence, witness_from_samples, GmmConfig};
use husimi_core::states::{catalogue_entries, ExampleStateParams};
use husimi_core::{QDistribution, SampleSet, WitnessReport};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{EvalCriterion, Experiment, ExperimentConfig, Format, Setting};
use crate::table::{Cell, Table};

/// One output file: name relative to the output directory, and contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    fn table(stem: &str, table: &Table, format: Format) -> Self {
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        Self {
            name: format!("{stem}.{ext}"),
            contents: table.render(format),
        }
    }
}

/// Validates `config` and runs its experiment.
pub fn run(config: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    config.validate()?;
    let quad = Quadrature::default();
    match config.experiment {
        Experiment::Regions => run_regions(config),
        Experiment::ExampleSweep => run_example_sweep(config, &quad),
        Experiment::ResolutionSweep => run_resolution_sweep(config, &quad),
        Experiment::SamplingStudy => run_sampling_study(config, &quad),
        Experiment::Eval => run_eval(config, &quad),
    }
}

/// Writes `files` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for f in files {
        let path = dir.join(&f.name);
        std::fs::write(&path, &f.contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn verdict(r: &WitnessReport) -> &'static str {
    if r.is_witnessed() {
        "witnessed"
    } else {
        "not-witnessed"
    }
}

pub fn run_regions(config: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    let frame = config.frame.build()?;
    let g = &config.grids;
    let mut table = Table::new(&[
        "sigma_r2",
        "sigma_s2",
        "sigma_rs",
        "physical",
        "dgcz",
        "mgvt",
        "second_moment",
        "label",
    ]);
    for &vr in &g.sigma_r2 {
        for &vs in &g.sigma_s2 {
            for &c in &g.sigma_rs {
                let cls = classify_region(vr, vs, c, &frame)?;
                let has = |id| Cell::Bool(cls.witnessed.contains(&id));
                table.push(vec![
                    vr.into(),
                    vs.into(),
                    c.into(),
                    cls.physical.into(),
                    has(CriterionId::Dgcz),
                    has(CriterionId::Mgvt),
                    has(CriterionId::SecondMoment),
                    cls.label.label().into(),
                ]);
            }
        }
    }
    Ok(vec![OutputFile::table("regions", &table, config.format)])
}

struct ExampleRow {
    fixed: ExampleOptimum<f64>,
    xi_opt: ExampleOptimum<f64>,
    stw: ExampleOptimum<f64>,
}

fn example_point(
    sp: f64,
    sm: f64,
    setting: Setting,
    config: &ExperimentConfig,
    quad: &Quadrature,
) -> Result<ExampleRow> {
    let g = &config.grids;
    let p = ExampleStateParams::new(sp, sm)
        .with_phi(setting.phi)
        .with_xi(setting.xi);
    Ok(ExampleRow {
        fixed: optimal_renyi_wehrl_example(&p, &[setting.xi], &g.beta, &Branch::BOTH, quad)?,
        xi_opt: optimal_renyi_wehrl_example(&p, &g.xi, &g.beta, &Branch::BOTH, quad)?,
        stw: optimal_stw_example(&p, &g.alpha, &Branch::BOTH, quad)?,
    })
}

fn optimum_cells(o: &ExampleOptimum<f64>, with_xi: bool) -> Vec<Cell> {
    let mut cells = vec![o.report.value.into(), verdict(&o.report).into()];
    if with_xi {
        cells.push(o.xi.into());
    }
    cells.push(o.order.into());
    cells.push(o.branch.label().into());
    cells
}

pub fn run_example_sweep(config: &ExperimentConfig, quad: &Quadrature) -> Result<Vec<OutputFile>> {
    let g = &config.grids;
    let mut points = Vec::new();
    for &setting in &config.example.settings {
        for &sp in &g.sigma_plus {
            for &sm in &g.sigma_minus {
                points.push((setting, sp, sm));
            }
        }
    }
    let rows: Vec<ExampleRow> = points
        .par_iter()
        .map(|&(setting, sp, sm)| example_point(sp, sm, setting, config, quad))
        .collect::<Result<_>>()?;
    let mut table = Table::new(&[
        "phi",
        "xi",
        "sigma_plus",
        "sigma_minus",
        "rw_value",
        "rw_verdict",
        "rw_beta",
        "rw_branch",
        "rw_opt_value",
        "rw_opt_verdict",
        "rw_opt_xi",
        "rw_opt_beta",
        "rw_opt_branch",
        "stw_value",
        "stw_verdict",
        "stw_alpha",
        "stw_branch",
    ]);
    for (&(setting, sp, sm), row) in points.iter().zip(&rows) {
        let mut cells: Vec<Cell> = vec![setting.phi.into(), setting.xi.into(), sp.into(), sm.into()];
        cells.extend(optimum_cells(&row.fixed, false));
        cells.extend(optimum_cells(&row.xi_opt, true));
        cells.extend(optimum_cells(&row.stw, false));
        table.push(cells);
    }

    let ratio_rows: Vec<(ExampleOptimum<f64>, ExampleOptimum<f64>)> = g
        .sigma_ratio
        .par_iter()
        .map(|&ratio| {
            let p = ExampleStateParams::new(1.0, ratio);
            Ok((
                optimal_stw_example(&p, &g.alpha, &Branch::BOTH, quad)?,
                optimal_renyi_wehrl_example(&p, &g.xi, &g.beta, &Branch::BOTH, quad)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut ratios = Table::new(&[
        "ratio",
        "stw_value",
        "stw_verdict",
        "stw_alpha",
        "stw_branch",
        "rw_opt_value",
        "rw_opt_verdict",
        "rw_opt_xi",
        "rw_opt_beta",
        "rw_opt_branch",
    ])
    .meta("sigma_plus", 1)
    .meta("phi", 0);
    for (&ratio, (stw, rw)) in g.sigma_ratio.iter().zip(&ratio_rows) {
        let mut cells: Vec<Cell> = vec![ratio.into()];
        cells.extend(optimum_cells(stw, false));
        cells.extend(optimum_cells(rw, true));
        ratios.push(cells);
    }
    Ok(vec![
        OutputFile::table("example_sweep", &table, config.format),
        OutputFile::table("example_ratio", &ratios, config.format),
    ])
}

pub fn run_resolution_sweep(config: &ExperimentConfig, quad: &Quadrature) -> Result<Vec<OutputFile>> {
    let g = &config.grids;
    let rows = resolution_sweep(&g.lambda, &g.delta, &SweepCriterion::ALL, &g.beta, quad)?;
    let mut sweep = Table::new(&["lambda", "delta", "criterion", "beta_opt", "value", "verdict"]);
    for r in &rows {
        sweep.push(vec![
            r.lambda.into(),
            r.delta.into(),
            r.criterion.label().into(),
            r.beta_opt.into(),
            r.value.into(),
            if r.verdict.is_witnessed() {
                "witnessed"
            } else {
                "not-witnessed"
            }
            .into(),
        ]);
    }
    let mut boundary =
        Table::new(&["lambda", "criterion", "delta_star", "status"]).meta("resolution", config.resolution.resolution);
    for &lambda in &g.lambda {
        for c in SweepCriterion::ALL {
            let t = delta_threshold(
                lambda,
                c,
                &config.resolution.scan,
                &g.beta,
                config.resolution.resolution,
                quad,
            )?;
            let status = match t {
                Threshold::Never => "never",
                Threshold::At(_) => "at",
                Threshold::Beyond(_) => "beyond",
            };
            boundary.push(vec![lambda.into(), c.label().into(), t.value().into(), status.into()]);
        }
    }
    Ok(vec![
        OutputFile::table("resolution_sweep", &sweep, config.format),
        OutputFile::table("resolution_boundary", &boundary, config.format),
    ])
}

fn moments_of(q: &QDistribution, quad: &Quadrature) -> Result<CovarianceSummary<f64>> {
    Ok(match q.analytic_moments() {
        Some((mean, cov)) => CovarianceSummary::husimi(mean, cov),
        None => covariance_of(q, quad)?,
    })
}

fn gmm_config(config: &ExperimentConfig) -> GmmConfig {
    GmmConfig {
        restarts: config.sampling.restarts,
        seed: config.seed,
        ..GmmConfig::default()
    }
}

pub fn run_sampling_study(config: &ExperimentConfig, quad: &Quadrature) -> Result<Vec<OutputFile>> {
    let frame = config.frame.build()?;
    let state = config.state_or_default();
    let q = state.spec()?.marginal(&frame)?;
    let s = &config.sampling;
    let exact = second_moment_witness(&moments_of(&q, quad)?, &frame)?;
    let result = bootstrap_confidence(
        &q,
        s.n,
        s.reps,
        &config.grids.beta,
        s.k,
        &frame,
        config.seed,
        &gmm_config(config),
        quad,
    )?;
    let mut table = Table::new(&["beta", "mean", "q05", "q95", "frac_witnessed"])
        .meta("state", &state.name)
        .meta("params", serde_json::to_string(&state.params)?)
        .meta("n", s.n)
        .meta("k", s.k)
        .meta("seed", config.seed)
        .meta("reps", result.reps)
        .meta("failures", result.failures)
        .meta("exact_second_moment", exact.value)
        .meta("exact_second_moment_verdict", verdict(&exact));
    for r in &result.rows {
        table.push(vec![
            r.beta.into(),
            r.mean.into(),
            r.q05.into(),
            r.q95.into(),
            r.frac_witnessed.into(),
        ]);
    }
    Ok(vec![OutputFile::table("sampling_study", &table, config.format)])
}

/// Evaluates one criterion and returns its report.
pub fn eval_report(config: &ExperimentConfig, quad: &Quadrature) -> Result<WitnessReport> {
    let frame = config.frame.build()?;
    let e = &config.eval;
    let beta = e.beta.unwrap_or(1.0);
    if let Some(path) = &e.samples {
        let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let samples = SampleSet::from_csv(file, path.display().to_string())?;
        let gmm = gmm_config(config);
        return Ok(witness_from_samples(
            &samples,
            beta,
            &frame,
            config.sampling.k,
            &gmm,
            quad,
        )?);
    }
    let state = config.state_or_default();
    let spec = state.spec()?;
    let q = spec.marginal(&frame)?;
    let criterion = e.criterion.clone().unwrap_or(if e.f.is_some() {
        EvalCriterion::General
    } else {
        EvalCriterion::RenyiWehrl
    });
    let report = match criterion {
        EvalCriterion::General => {
            let Some(f) = &e.f else {
                bail!("eval.f: required by criterion general")
            };
            let f: ConcaveFunction<f64> = f.parse()?;
            witness_general(&q, &f, &frame, quad)?
        }
        EvalCriterion::RenyiWehrl => renyi_wehrl_witness(&q, beta, &frame, quad)?,
        EvalCriterion::SecondMoment => second_moment_witness(&moments_of(&q, quad)?, &frame)?,
        EvalCriterion::Dgcz => dgcz_witness(&moments_of(&q, quad)?, &frame)?,
        EvalCriterion::Mgvt => mgvt_witness(&moments_of(&q, quad)?, &frame)?,
        EvalCriterion::Stw => {
            let Some(alpha) = e.alpha else {
                bail!("eval.alpha: required by criterion stw")
            };
            let (f, g) = spec.quadrature_marginals(&frame)?;
            stw_witness(&f, &g, alpha, &frame, quad)?
        }
    };
    Ok(report.with_param("state", json!({ "name": state.name, "params": state.params })))
}

pub fn run_eval(config: &ExperimentConfig, quad: &Quadrature) -> Result<Vec<OutputFile>> {
    let report = eval_report(config, quad)?;
    Ok(vec![OutputFile {
        name: "eval.json".to_string(),
        contents: serde_json::to_string_pretty(&report)? + "\n",
    }])
}

/// States, registered concave functions and criterion ids as JSON.
pub fn catalogue() -> OutputFile {
    let states: Vec<_> = catalogue_entries()
        .into_iter()
        .map(|(name, description, params)| json!({ "name": name, "description": description, "params": params }))
        .collect();
    let functions: Vec<_> = ConcaveFunction::<f64>::registry().iter().map(|f| f.label()).collect();
    let criteria = ["general", "renyi-wehrl", "second-moment", "dgcz", "mgvt", "stw"];
    let doc = json!({ "states": states, "functions": functions, "criteria": criteria });
    OutputFile {
        name: "catalogue.json".to_string(),
        contents: serde_json::to_string_pretty(&doc).expect("serializable catalogue") + "\n",
    }
}
