//! Experiment configuration in TOML.
//!
//! ```toml
//! scenario = "cutoff_sweep"
//! n = 100
//! sigma = 1.0
//! signal = "figure1"
//! kappa_grid = { start = 0.2, stop = 2.0, step = 0.1 }
//! master_seed = 1
//! ```
//!
//! Unknown keys are rejected. [`parse_config`] fills every default that does
//! not depend on the run, so a parsed config echoes everything that shaped the
//! output and serializing it back reparses to an equal value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::concentration::{DEFAULT_T_GRID, DEFAULT_X_GRID};
use crate::error::{Error, Result};
use crate::functional::{figure1, sobolev_signal, FourierCoefficients, SobolevSpec};
use crate::randomness::{derive_seed, Seed};
use crate::talagrand::MAX_CUBE_DIM;

pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_FILL: f64 = 0.9;
pub const DEFAULT_N_GRID: [usize; 6] = [128, 256, 512, 1024, 2048, 4096];
pub const DEFAULT_CHI_DIMS: [usize; 3] = [5, 20, 50];
pub const CUBE_T_GRID: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    CutoffSweep,
    NormCurve,
    OracleRatio,
    LowerBound,
    RateStudy,
    ConcentrationSuite,
    TalagrandSuite,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::CutoffSweep => "cutoff_sweep",
            Scenario::NormCurve => "norm_curve",
            Scenario::OracleRatio => "oracle_ratio",
            Scenario::LowerBound => "lower_bound",
            Scenario::RateStudy => "rate_study",
            Scenario::ConcentrationSuite => "concentration_suite",
            Scenario::TalagrandSuite => "talagrand_suite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalSpec {
    Zero,
    Figure1,
    Sobolev {
        alpha: u32,
        radius: f64,
        #[serde(default = "default_fill")]
        fill: f64,
    },
    Coefficients(Vec<f64>),
}

fn default_fill() -> f64 {
    DEFAULT_FILL
}

impl SignalSpec {
    /// Coefficients of the target on a grid of `n` points. Sobolev targets are
    /// truncated at `n - 1` terms and drawn from `seed`.
    pub fn coefficients(&self, n: usize, seed: Seed) -> Result<FourierCoefficients> {
        match self {
            SignalSpec::Zero => FourierCoefficients::new(vec![]),
            SignalSpec::Figure1 => Ok(figure1()),
            SignalSpec::Sobolev { alpha, radius, fill } => {
                sobolev_signal(&SobolevSpec::new(*alpha, *radius)?, n - 1, seed, *fill)
            }
            SignalSpec::Coefficients(theta) => FourierCoefficients::new(theta.clone()),
        }
    }

    /// Seed of the single target used by scenarios that fix one signal.
    pub fn target_seed(master: Seed) -> Seed {
        derive_seed(master, u64::MAX)
    }
}

/// Dimension of the smallest nested model containing the target.
pub fn support_dimension(theta: &FourierCoefficients) -> usize {
    theta.theta.iter().rposition(|&t| t != 0.0).map_or(0, |j| j + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KappaGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl KappaGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            KappaGrid::List(v) => v.clone(),
            KappaGrid::Range { start, stop, step } => {
                if !(*step > 0.0 && start.is_finite() && stop.is_finite()) {
                    return vec![];
                }
                let count = ((stop - start) / step + 1e-9).floor();
                if !(0.0..=1e6).contains(&count) {
                    return vec![];
                }
                // round so 0.2 + 3 * 0.1 prints as 0.5
                (0..=count as usize)
                    .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltySpec {
    LinearDim {
        kappa: f64,
    },
    Mallows,
    /// `x_m = x * D_m`.
    TheoremStyle {
        k: f64,
        x: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMode {
    Vector,
    FunctionalEmpirical,
    FunctionalL2,
}

impl RiskMode {
    pub fn name(self) -> &'static str {
        match self {
            RiskMode::Vector => "vector",
            RiskMode::FunctionalEmpirical => "functional_empirical",
            RiskMode::FunctionalL2 => "functional_l2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    /// The all-ones point.
    Singleton,
    /// Points within `radius` of the all-ones point.
    HammingBall { radius: usize },
    /// `size` distinct points drawn from the master seed.
    Random { size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_signal")]
    pub signal: SignalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_grid: Option<KappaGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltySpec>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
    /// Slope of the collection weights, `x_D = alpha * D`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<RiskMode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default = "default_x_grid")]
    pub x_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetSpec>,
    /// Inclusive dimension window of the slope fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_sigma() -> f64 {
    1.0
}
fn default_signal() -> SignalSpec {
    SignalSpec::Figure1
}
fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}
fn default_seed() -> u64 {
    1
}
fn default_alpha() -> f64 {
    1.0
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_x_grid() -> Vec<f64> {
    DEFAULT_X_GRID.to_vec()
}

impl ExperimentConfig {
    /// A config with every optional key at its default.
    pub fn new(scenario: Scenario, n: usize) -> Self {
        let mut c = ExperimentConfig {
            scenario,
            n,
            sigma: default_sigma(),
            signal: default_signal(),
            kappa_grid: None,
            penalty: None,
            replicates: DEFAULT_REPLICATES,
            master_seed: default_seed(),
            max_dim: None,
            alpha: default_alpha(),
            modes: None,
            n_grid: None,
            dims: None,
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            t_grid: None,
            x_grid: default_x_grid(),
            set: None,
            window: None,
            output: None,
        };
        c.apply_defaults();
        c
    }

    pub fn seed(&self) -> Seed {
        Seed(self.master_seed)
    }

    /// Fills defaults that depend on the scenario or on `n`.
    pub fn apply_defaults(&mut self) {
        let sc = self.scenario;
        let fourier = !matches!(sc, Scenario::TalagrandSuite | Scenario::RateStudy);
        if fourier && self.max_dim.is_none() && self.n >= 2 {
            self.max_dim = Some(self.n - 1);
        }
        if self.t_grid.is_none() {
            self.t_grid = Some(match sc {
                Scenario::TalagrandSuite => CUBE_T_GRID.to_vec(),
                _ => DEFAULT_T_GRID.to_vec(),
            });
        }
        match sc {
            Scenario::OracleRatio if self.modes.is_none() => {
                self.modes = Some(vec![
                    RiskMode::Vector,
                    RiskMode::FunctionalEmpirical,
                    RiskMode::FunctionalL2,
                ]);
            }
            Scenario::LowerBound if self.modes.is_none() => {
                self.modes = Some(vec![RiskMode::FunctionalEmpirical, RiskMode::FunctionalL2]);
            }
            _ => {}
        }
        match sc {
            Scenario::OracleRatio if self.penalty.is_none() => self.penalty = Some(PenaltySpec::Mallows),
            Scenario::RateStudy if self.penalty.is_none() => {
                self.penalty = Some(PenaltySpec::TheoremStyle { k: 1.5, x: 0.1 })
            }
            _ => {}
        }
        if sc == Scenario::RateStudy && self.n_grid.is_none() {
            self.n_grid = Some(DEFAULT_N_GRID.to_vec());
        }
        if sc == Scenario::ConcentrationSuite && self.dims.is_none() {
            self.dims = Some(DEFAULT_CHI_DIMS.iter().copied().filter(|&d| d < self.n).collect());
        }
        if sc == Scenario::TalagrandSuite && self.set.is_none() {
            self.set = Some(SetSpec::HammingBall { radius: 1 });
        }
        if sc == Scenario::NormCurve && self.window.is_none() && self.n >= 2 {
            if let (Ok(theta), Some(max_dim)) = (
                self.signal.coefficients(self.n, SignalSpec::target_seed(self.seed())),
                self.max_dim,
            ) {
                self.window = Some([support_dimension(&theta) + 2, max_dim]);
            }
        }
    }

    pub fn t_grid(&self) -> &[f64] {
        self.t_grid.as_deref().unwrap_or(&DEFAULT_T_GRID)
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim.unwrap_or(self.n.saturating_sub(1))
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.kappa_grid.as_ref().map(KappaGrid::values).unwrap_or_default()
    }

    /// Every invalid key at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<(&str, String)> = Vec::new();
        let mut flag = |key: &'static str, msg: String| bad.push((key, msg));
        let sc = self.scenario;

        if sc == Scenario::TalagrandSuite {
            if self.n == 0 || self.n > MAX_CUBE_DIM {
                flag(
                    "n",
                    format!("cube dimension must be in 1..={MAX_CUBE_DIM}, got {}", self.n),
                );
            }
        } else if sc != Scenario::RateStudy && self.n < 2 {
            flag("n", format!("need at least 2 design points, got {}", self.n));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            flag("sigma", format!("must be a nonnegative real, got {}", self.sigma));
        }
        if self.replicates == 0 {
            flag("replicates", "must be at least 1".into());
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            flag("alpha", format!("must be positive, got {}", self.alpha));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            flag("tol", format!("must be positive, got {}", self.tol));
        }
        if let Some(d) = self.max_dim {
            if d == 0 || d + 1 > self.n {
                flag(
                    "max_dim",
                    format!("must be in 1..={}, got {d}", self.n.saturating_sub(1)),
                );
            }
        }
        match &self.kappa_grid {
            Some(g) => {
                let v = g.values();
                if v.is_empty() {
                    flag("kappa_grid", "is empty".into());
                } else if v.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
                    flag("kappa_grid", "entries must be nonnegative reals".into());
                } else if v.windows(2).any(|w| w[0] >= w[1]) {
                    flag("kappa_grid", "must be strictly increasing".into());
                }
            }
            None if matches!(sc, Scenario::CutoffSweep | Scenario::LowerBound) => {
                flag("kappa_grid", format!("is required by {}", sc.name()));
            }
            None => {}
        }
        match &self.signal {
            SignalSpec::Sobolev { alpha, radius, fill } => {
                if *alpha == 0 || !(radius.is_finite() && *radius > 0.0) || !(*fill > 0.0 && *fill <= 1.0) {
                    flag(
                        "signal",
                        "sobolev needs alpha >= 1, radius > 0 and fill in (0, 1]".into(),
                    );
                }
            }
            SignalSpec::Coefficients(theta) if theta.iter().any(|t| !t.is_finite()) => {
                flag("signal", "coefficients must be finite".into());
            }
            _ => {}
        }
        if sc == Scenario::RateStudy && !matches!(self.signal, SignalSpec::Sobolev { .. }) {
            flag("signal", "rate_study needs a sobolev signal".into());
        }
        if let Some(p) = &self.penalty {
            match *p {
                PenaltySpec::LinearDim { kappa } if !(kappa.is_finite() && kappa >= 0.0) => {
                    flag("penalty", format!("kappa must be nonnegative, got {kappa}"));
                }
                PenaltySpec::TheoremStyle { k, x } if !(k.is_finite() && k > 1.0 && x.is_finite() && x > 0.0) => {
                    flag(
                        "penalty",
                        format!("theorem_style needs k > 1 and x > 0, got k = {k}, x = {x}"),
                    );
                }
                _ => {}
            }
        }
        if let Some(grid) = &self.n_grid {
            if grid.len() < 2 {
                flag("n_grid", "needs at least two sample sizes".into());
            } else if grid.iter().any(|&n| n < 4) || grid.windows(2).any(|w| w[0] >= w[1]) {
                flag("n_grid", "must be strictly increasing sizes of at least 4".into());
            }
        }
        if let Some(dims) = &self.dims {
            if dims.is_empty() || dims.iter().any(|&d| d == 0 || d >= self.n) {
                flag("dims", format!("entries must be in 1..={}", self.n.saturating_sub(1)));
            }
        }
        if sc == Scenario::ConcentrationSuite && self.samples < 1000 {
            flag(
                "samples",
                format!("at least 1000 draws are needed, got {}", self.samples),
            );
        }
        if let Some(t) = &self.t_grid {
            if t.is_empty() || t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                flag("t_grid", "entries must be nonnegative reals".into());
            }
        }
        if self.x_grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            flag("x_grid", "entries must be nonnegative reals".into());
        }
        if let Some(set) = &self.set {
            let total = if self.n <= MAX_CUBE_DIM {
                1usize << self.n
            } else {
                usize::MAX
            };
            match *set {
                SetSpec::HammingBall { radius } if radius > self.n => {
                    flag("set", format!("radius {radius} exceeds the dimension {}", self.n));
                }
                SetSpec::Random { size } if size == 0 || size > total => {
                    flag("set", format!("size must be in 1..={total}"));
                }
                _ => {}
            }
        }
        if let Some([lo, hi]) = self.window {
            if lo > hi || hi > self.max_dim() || hi < lo + 2 {
                flag("window", format!("needs lo + 2 <= hi <= {}", self.max_dim()));
            }
        }

        if bad.is_empty() {
            return Ok(());
        }
        let message = bad
            .iter()
            .map(|(k, m)| format!("{k}: {m}"))
            .collect::<Vec<_>>()
            .join("; ");
        let mut keys: Vec<String> = bad.into_iter().map(|(k, _)| k.to_string()).collect();
        keys.dedup();
        Err(Error::Validation { keys, message })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(format!("cannot serialize config: {e}")))
    }

    /// JSON with sorted keys; the hashed form.
    pub fn canonical_json(&self) -> String {
        serde_json::to_value(self).expect("config serializes").to_string()
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Where [`parse_config`] reads from.
#[derive(Debug, Clone, Copy)]
pub enum ConfigSource<'a> {
    Path(&'a Path),
    Text(&'a str),
}

pub fn parse_config(source: ConfigSource<'_>) -> Result<ExperimentConfig> {
    let text;
    let body = match source {
        ConfigSource::Text(t) => t,
        ConfigSource::Path(p) => {
            text = std::fs::read_to_string(p).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => Error::NotFound(p.to_path_buf()),
                _ => Error::Io(e),
            })?;
            &text
        }
    };
    parse_config_str(body)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    config.apply_defaults();
    config.validate()?;
    Ok(config)
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"
scenario = "cutoff_sweep"
n = 100
sigma = 1.0
signal = "figure1"
kappa_grid = { start = 0.2, stop = 2.0, step = 0.1 }
master_seed = 1
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.replicates, 200);
        assert_eq!(c.alpha, 1.0);
        assert_eq!(c.tol, 1e-8);
        assert_eq!(c.max_dim, Some(99));
        assert_eq!(c.t_grid(), &DEFAULT_T_GRID);
        let k = c.kappas();
        assert_eq!(k.len(), 19);
        assert_eq!(k[3], 0.5);
        assert_eq!(*k.last().unwrap(), 2.0);
    }

    #[test]
    fn zero_n_names_the_key() {
        let text = MINIMAL.replace("n = 100", "n = 0");
        match parse_config_str(&text) {
            Err(Error::Validation { keys, .. }) => assert!(keys.contains(&"n".to_string())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn several_bad_keys_are_all_named() {
        let text = MINIMAL.replace("sigma = 1.0", "sigma = -1.0\nreplicates = 0");
        match parse_config_str(&text) {
            Err(Error::Validation { keys, .. }) => {
                assert!(keys.contains(&"sigma".to_string()));
                assert!(keys.contains(&"replicates".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_text_reports_position() {
        let text = "scenario = \"cutoff_sweep\"\nn = = 3\n";
        match parse_config_str(text) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column >= 1);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_config_str("scenario = \"cutoff_sweep\"\nn = 10\nbogus = 1\nkappa_grid = [1.0]"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn missing_file() {
        let p = Path::new("/nonexistent/minpen.toml");
        assert!(matches!(parse_config(ConfigSource::Path(p)), Err(Error::NotFound(_))));
    }

    #[test]
    fn grid_must_increase() {
        let text = MINIMAL.replace("{ start = 0.2, stop = 2.0, step = 0.1 }", "[0.5, 0.5, 1.0]");
        assert!(matches!(parse_config_str(&text), Err(Error::Validation { .. })));
    }

    #[test]
    fn hash_is_stable() {
        let a = parse_config_str(MINIMAL).unwrap();
        let b = parse_config_str(&format!("{MINIMAL}\nreplicates = 200\n")).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = parse_config_str(&MINIMAL.replace("master_seed = 1", "master_seed = 2")).unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn nested_signal_and_penalty_forms() {
        let text = r#"
scenario = "oracle_ratio"
n = 256
signal = { sobolev = { alpha = 1, radius = 1.0 } }
penalty = { kind = "theorem_style", k = 1.5, x = 0.1 }
"#;
        let c = parse_config_str(text).unwrap();
        assert_eq!(
            c.signal,
            SignalSpec::Sobolev {
                alpha: 1,
                radius: 1.0,
                fill: 0.9
            }
        );
        assert_eq!(c.penalty, Some(PenaltySpec::TheoremStyle { k: 1.5, x: 0.1 }));
        assert_eq!(c.modes.as_ref().unwrap().len(), 3);
        let rate = r#"
scenario = "rate_study"
n = 128
signal = "figure1"
"#;
        assert!(matches!(parse_config_str(rate), Err(Error::Validation { keys, .. }) if keys == ["signal"]));
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        let scenario = prop_oneof![
            Just(Scenario::CutoffSweep),
            Just(Scenario::NormCurve),
            Just(Scenario::OracleRatio),
            Just(Scenario::LowerBound),
            Just(Scenario::ConcentrationSuite),
        ];
        let signal = prop_oneof![
            Just(SignalSpec::Zero),
            Just(SignalSpec::Figure1),
            (1u32..4, 0.1f64..5.0, 0.05f64..1.0).prop_map(|(alpha, radius, fill)| SignalSpec::Sobolev {
                alpha,
                radius,
                fill
            }),
            proptest::collection::vec(-5.0f64..5.0, 1..6).prop_map(SignalSpec::Coefficients),
        ];
        let grid = prop_oneof![
            proptest::collection::btree_set(0u32..400, 1..8)
                .prop_map(|s| KappaGrid::List(s.into_iter().map(|k| f64::from(k) / 100.0).collect())),
            (0u32..10, 1u32..20, 1u32..5).prop_map(|(a, b, s)| KappaGrid::Range {
                start: f64::from(a) / 10.0,
                stop: f64::from(a + b) / 10.0,
                step: f64::from(s) / 10.0,
            }),
        ];
        (
            scenario,
            16usize..300,
            0.0f64..3.0,
            signal,
            grid,
            1usize..500,
            0..=i64::MAX as u64,
            0.1f64..3.0,
        )
            .prop_map(|(scenario, n, sigma, signal, grid, replicates, seed, alpha)| {
                let mut c = ExperimentConfig::new(scenario, n);
                c.sigma = sigma;
                c.signal = signal;
                c.kappa_grid = Some(grid);
                c.replicates = replicates;
                c.master_seed = seed;
                c.alpha = alpha;
                c.samples = 5000;
                c.window = None;
                c.apply_defaults();
                c
            })
    }

    proptest! {
        #[test]
        fn toml_round_trip(c in arb_config()) {
            prop_assume!(c.validate().is_ok());
            let text = c.to_toml_string().unwrap();
            let back = parse_config_str(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.hash(), c.hash());
        }
    }
}
