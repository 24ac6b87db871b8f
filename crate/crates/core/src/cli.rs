//! The `minpen` command line.
//!
//! Every run writes three files to the output directory: a CSV of raw
//! per-replicate results, `summary.json` with statistics and check flags, and
//! `manifest.json` describing the run. Exit status is 0 when every check
//! passes, 1 when one fails, 2 for usage or configuration errors and 3 when
//! the computation itself fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_config, ConfigSource, ExperimentConfig, Scenario};
use crate::error::{Error, Result};
use crate::experiments::{run_scenario, Check, Table};

pub const SEED_ENV: &str = "MINPEN_SEED";
pub const DEFAULT_OUT_DIR: &str = "minpen-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Cutoff,
    Slope,
    Oracle,
    LowerBound,
    Rate,
    Concentration,
    Talagrand,
    Selftest,
}

impl Command {
    pub fn scenario(self) -> Option<Scenario> {
        Some(match self {
            Command::Cutoff => Scenario::CutoffSweep,
            Command::Slope => Scenario::NormCurve,
            Command::Oracle => Scenario::OracleRatio,
            Command::LowerBound => Scenario::LowerBound,
            Command::Rate => Scenario::RateStudy,
            Command::Concentration => Scenario::ConcentrationSuite,
            Command::Talagrand => Scenario::TalagrandSuite,
            Command::Selftest => return None,
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "minpen",
    version,
    about = "Model-selection and concentration experiments",
    after_help = "The master seed may also be set through MINPEN_SEED; --seed wins over both it and the config."
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML experiment config (not needed for selftest).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to the config's `output` or `minpen-out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Worker threads for replicate parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides the config's replicate count.
    #[arg(long)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario: String,
    pub master_seed: Option<u64>,
    pub config_hash: Option<String>,
    pub config: Value,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub checks: Vec<Check>,
    pub written: Vec<PathBuf>,
    pub manifest: RunManifest,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Applies the command-line overrides and checks the result again.
pub fn apply_overrides(config: &mut ExperimentConfig, seed: Option<u64>, replicates: Option<usize>) -> Result<()> {
    if let Some(s) = seed {
        config.master_seed = s;
    }
    if let Some(r) = replicates {
        config.replicates = r;
    }
    config.validate()
}

/// Runs `command` and writes its artifacts under `out_dir`.
pub fn run(
    command: Command,
    config: Option<&ExperimentConfig>,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<RunOutcome> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let (csv_name, table, summary, checks, scenario) = match command.scenario() {
        None => {
            let checks = selftest();
            let mut table = Table::new(vec!["check", "pass"]);
            for c in &checks {
                table.push(vec![c.name.clone().into(), c.pass.into()]);
            }
            (
                "selftest",
                table,
                json!({ "count": checks.len() }),
                checks,
                "selftest".to_string(),
            )
        }
        Some(want) => {
            let config = config.ok_or_else(|| Error::Usage(format!("{} needs --config", want.name())))?;
            if config.scenario != want {
                return Err(Error::Usage(format!(
                    "config describes scenario {} but the command runs {}",
                    config.scenario.name(),
                    want.name()
                )));
            }
            let out = with_workers(workers, || run_scenario(config))?;
            (
                out.csv_name,
                out.table,
                out.summary,
                out.checks,
                want.name().to_string(),
            )
        }
    };
    let passed = checks.iter().all(|c| c.pass);

    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{csv_name}.csv"));
    std::fs::write(&csv_path, table.to_csv())?;
    let summary_path = out_dir.join("summary.json");
    let full_summary = json!({
        "scenario": scenario,
        "config_hash": config.map(ExperimentConfig::hash),
        "master_seed": config.map(|c| c.master_seed),
        "passed": passed,
        "checks": checks,
        "results": summary,
    });
    std::fs::write(&summary_path, serde_json::to_string_pretty(&full_summary)? + "\n")?;

    let manifest_path = out_dir.join("manifest.json");
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario,
        master_seed: config.map(|c| c.master_seed),
        config_hash: config.map(ExperimentConfig::hash),
        config: config.map_or(Value::Null, |c| serde_json::to_value(c).expect("config serializes")),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        outputs: [&csv_path, &summary_path, &manifest_path]
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
        passed,
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(RunOutcome {
        checks,
        written: vec![csv_path, summary_path, manifest_path],
        manifest,
    })
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(0) => Err(Error::Usage("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start {w} workers: {e}")))?
            .install(f),
    }
}

/// Exit status for an error: 2 for usage and configuration, 3 otherwise.
pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::NotFound(_) | Error::Parse { .. } | Error::Validation { .. } => 2,
        _ => 3,
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("minpen: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}

pub fn execute(cli: &Cli) -> Result<RunOutcome> {
    let config = match &cli.config {
        Some(p) => {
            let mut c = parse_config(ConfigSource::Path(p))?;
            apply_overrides(&mut c, cli.seed, cli.replicates)?;
            Some(c)
        }
        None => None,
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.output.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    run(cli.command, config.as_ref(), &out_dir, cli.workers)
}

/// The quick closed-form cases of every module.
pub fn selftest() -> Vec<Check> {
    use crate::concentration::{bound_convex_distance, bound_hoeffding, bound_sup_rademacher};
    use crate::config::{KappaGrid, PenaltySpec, SignalSpec};
    use crate::functional::{
        empirical_norm, fourier_design_matrix, functional_estimate, sobolev_signal, GridDesign, SobolevSpec,
    };
    use crate::linear::{chi_square, project, ModelCollection, ModelSpec, OrthonormalBasis};
    use crate::randomness::{rademacher_vector, Seed};
    use crate::selection::{select, PenaltyRule, PenaltyScale};
    use crate::talagrand::{convex_distance, verify_convex_distance_inequality, ConvexDistanceSolver, FinitePointSet};

    let mut out = vec![];
    let mut check = |name: &str, f: &dyn Fn() -> Result<bool>| {
        let (pass, detail) = match f() {
            Ok(p) => (p, String::new()),
            Err(e) => (false, e.to_string()),
        };
        out.push(Check::new(name, pass, detail));
    };

    check("rademacher_empty", &|| Ok(rademacher_vector(Seed(42), 0).is_empty()));
    check("rademacher_replay", &|| {
        Ok(rademacher_vector(Seed(5), 64) == rademacher_vector(Seed(5), 64))
    });
    check("null_model", &|| {
        Ok(ModelSpec::prefix(0).is_null() && ModelSpec::null().dimension() == 0)
    });
    check("complete_projection", &|| {
        let y: Vec<f64> = (0..8).map(|i| i as f64 - 3.5).collect();
        Ok(project(&y, &OrthonormalBasis::standard(8), &ModelSpec::prefix(8))?.fitted == y)
    });
    check("chi_square_complete", &|| {
        let eps = rademacher_vector(Seed(1), 16).into_inner();
        Ok(chi_square(&eps, &OrthonormalBasis::standard(16), &ModelSpec::prefix(16))? == 16.0)
    });
    check("zero_data_smallest_model", &|| {
        let basis = OrthonormalBasis::standard(10);
        let coll = ModelCollection::build_nested(&basis, 9, 1.0)?;
        let pen = PenaltyRule::linear_dim(2.0, 1.0, PenaltyScale::Unit)?;
        Ok(select(&[0.0; 10], &basis, &coll, &pen)?.chosen_dim == 1)
    });
    check("fourier_constant_column", &|| {
        let b = fourier_design_matrix(12, 5)?;
        Ok(b.vector(0).iter().all(|&v| v == 1.0) && b.norm_sq(b.vector(0)) == 1.0)
    });
    check("empirical_norm_ones", &|| Ok(empirical_norm(&[1.0; 9]) == 1.0));
    check("sobolev_single_coefficient", &|| {
        let spec = SobolevSpec::new(1, 1.0)?;
        Ok(spec.contains(&sobolev_signal(&spec, 1, Seed(3), 0.9)?.theta))
    });
    check("estimate_constant", &|| {
        let d = GridDesign::new(20)?.fourier();
        Ok(functional_estimate(&[1.0; 20], &d, &ModelSpec::prefix(1))?.theta == vec![1.0])
    });
    check("bounds_at_zero", &|| {
        Ok(bound_hoeffding(0.0) == 1.0 && bound_sup_rademacher(0.0) == 1.0 && bound_convex_distance(0.0) == 1.0)
    });
    check("convex_distance_member", &|| {
        let a = FinitePointSet::new(vec![vec![1i8, -1, 1], vec![1, 1, 1]])?;
        Ok(convex_distance(&[1i8, 1, 1], &a, 1e-8)?.value == 0.0)
    });
    check("convex_distance_singleton", &|| {
        let a = FinitePointSet::singleton(vec![1i8; 6])?;
        let r = convex_distance(&[-1i8, -1, -1, -1, 1, 1], &a, 1e-8)?;
        Ok((r.value - 2.0).abs() <= 1e-9)
    });
    check("whole_cube_no_tail", &|| {
        let a = FinitePointSet::whole_cube(5)?;
        let rep = verify_convex_distance_inequality(&a, 5, &[0.5, 1.0], &ConvexDistanceSolver::default())?;
        Ok(rep.rows.iter().all(|r| r.prob_tail.numerator == 0))
    });
    check("noiseless_cutoff_true_model", &|| {
        let mut c = ExperimentConfig::new(Scenario::CutoffSweep, 32);
        c.sigma = 0.0;
        c.replicates = 3;
        c.kappa_grid = Some(KappaGrid::List(vec![0.5, 1.0, 2.0]));
        let r = crate::experiments::cutoff_sweep(&c)?;
        Ok(r.d_hat.iter().flatten().all(|&d| d == 3))
    });
    check("zero_signal_kappa_zero_full_model", &|| {
        let mut c = ExperimentConfig::new(Scenario::CutoffSweep, 32);
        c.signal = SignalSpec::Zero;
        c.replicates = 3;
        c.kappa_grid = Some(KappaGrid::List(vec![0.0]));
        let r = crate::experiments::cutoff_sweep(&c)?;
        Ok(r.d_hat[0].iter().all(|&d| d == 31))
    });
    check("trivial_oracle", &|| {
        let mut c = ExperimentConfig::new(Scenario::OracleRatio, 64);
        c.signal = SignalSpec::Coefficients(vec![1.0]);
        c.penalty = Some(PenaltySpec::LinearDim { kappa: 20.0 });
        c.replicates = 2000;
        let r = crate::experiments::oracle_ratio(&c)?;
        // the ratio is a mean of squared noise averages, standard error near 0.03
        Ok(r.modes
            .iter()
            .all(|m| m.d_hat.iter().all(|&d| d == 1) && (m.ratio - 1.0).abs() < 0.15))
    });
    out
}
