//! Replicated studies over the nested Fourier collection.
//!
//! Replicate `r` of a run draws its noise from `derive_seed(master, r)`, and
//! replicates are collected in index order, so every raw table is a pure
//! function of the config.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::concentration::{chi_suite, hoeffding_check, ChiSuite, TailReport};
use crate::config::{support_dimension, ExperimentConfig, PenaltySpec, RiskMode, Scenario, SetSpec, SignalSpec};
use crate::error::{Error, Result};
use crate::functional::{l2_and_empirical_risks, FourierCoefficients, FourierDesign, GridDesign};
use crate::linear::{exact_risk, InnerProduct, ModelCollection, ModelSpec, OrthonormalBasis};
use crate::randomness::{derive_seed, Seed};
use crate::selection::{
    select, select_cached, slope_fit, CoefficientCache, PenaltyRule, PenaltyScale, SlopeFit, Weights,
};
use crate::talagrand::{verify_convex_distance_inequality, ConvexDistanceSolver, CubeReport, FinitePointSet};

/// One named assertion of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// Integers as is, floats with 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comma-separated, header first, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// What a scenario hands to the output layer.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub scenario: Scenario,
    pub csv_name: &'static str,
    pub table: Table,
    pub summary: Value,
    pub checks: Vec<Check>,
}

impl ScenarioOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn expect_scenario(config: &ExperimentConfig, want: Scenario) -> Result<()> {
    if config.scenario != want {
        return Err(Error::invalid(format!(
            "config describes {} but {} was requested",
            config.scenario.name(),
            want.name()
        )));
    }
    Ok(())
}

/// Fixed target, grid tables and the nested collection `D = 1..=max_dim`.
struct FunctionalSetup {
    n: usize,
    sigma: f64,
    design: FourierDesign,
    theta: FourierCoefficients,
    f_grid: Vec<f64>,
    collection: ModelCollection,
    max_dim: usize,
    replicates: usize,
}

impl FunctionalSetup {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let n = config.n;
        let theta = config.signal.coefficients(n, SignalSpec::target_seed(config.seed()))?;
        let design = GridDesign::new(n)?.fourier();
        let f_grid = theta.grid_values(&design);
        Ok(FunctionalSetup {
            n,
            sigma: config.sigma,
            collection: nested_collection(config.max_dim(), config.alpha)?,
            design,
            theta,
            f_grid,
            max_dim: config.max_dim(),
            replicates: config.replicates,
        })
    }

    fn response(&self, seed: Seed) -> Vec<f64> {
        let eps = seed.sampler().next_vector(self.n);
        self.f_grid
            .iter()
            .zip(eps.as_slice())
            .map(|(f, e)| f + self.sigma * e)
            .collect()
    }

    fn cache(&self, y: &[f64]) -> Result<CoefficientCache> {
        Ok(CoefficientCache::from_coefficients(
            self.design.coefficients(y, self.max_dim)?,
        ))
    }

    fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }

    fn scale(&self) -> PenaltyScale {
        PenaltyScale::OneOverN(self.n)
    }

    /// `theta_hat` on the prefix of length `d`.
    fn estimate(&self, cache: &CoefficientCache, d: usize) -> FourierCoefficients {
        FourierCoefficients {
            theta: cache.coefficients()[..d].to_vec(),
        }
    }

    /// Empirical coefficients of the target, `<f, phi_j>_n`.
    fn target_projection(&self) -> Result<Vec<f64>> {
        self.design.coefficients(&self.f_grid, self.max_dim)
    }
}

fn nested_collection(max_dim: usize, alpha: f64) -> Result<ModelCollection> {
    ModelCollection::new(
        (1..=max_dim).map(ModelSpec::prefix).collect(),
        (1..=max_dim).map(|d| alpha * d as f64).collect(),
    )
}

fn penalty_rule(spec: PenaltySpec, sigma2: f64, scale: PenaltyScale) -> Result<PenaltyRule> {
    match spec {
        PenaltySpec::LinearDim { kappa } => PenaltyRule::linear_dim(kappa, sigma2, scale),
        PenaltySpec::Mallows => PenaltyRule::mallows(sigma2, scale),
        PenaltySpec::TheoremStyle { k, x } => PenaltyRule::theorem_style(k, sigma2, scale, Weights::PerDimension(x)),
    }
}

fn replicate_seeds(master: Seed, count: usize) -> Vec<Seed> {
    (0..count as u64).map(|r| derive_seed(master, r)).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn stderr(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0);
    (var / xs.len() as f64).sqrt()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionStats {
    pub kappa: f64,
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub min: usize,
    pub max: usize,
    pub mode: usize,
    pub mode_frequency: f64,
    /// Fraction of replicates with `D_hat >= n / 2`.
    pub frac_ge_half: f64,
}

impl DimensionStats {
    fn from_dims(kappa: f64, dims: &[usize], n: usize) -> Self {
        let mut sorted: Vec<f64> = dims.iter().map(|&d| d as f64).collect();
        sorted.sort_by(f64::total_cmp);
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &d in dims {
            *counts.entry(d).or_default() += 1;
        }
        // smallest dimension among the most frequent
        let (mode, top) = counts
            .iter()
            .fold((0, 0), |(bd, bc), (&d, &c)| if c > bc { (d, c) } else { (bd, bc) });
        let r = dims.len() as f64;
        DimensionStats {
            kappa,
            mean: mean(&sorted),
            median: quantile(&sorted, 0.5),
            q10: quantile(&sorted, 0.1),
            q90: quantile(&sorted, 0.9),
            min: *dims.iter().min().unwrap(),
            max: *dims.iter().max().unwrap(),
            mode,
            mode_frequency: top as f64 / r,
            frac_ge_half: dims.iter().filter(|&&d| 2 * d >= n).count() as f64 / r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub n: usize,
    pub d_true: usize,
    pub threshold: usize,
    pub stats: Vec<DimensionStats>,
    /// `d_hat[i][r]`: selected dimension at the `i`-th kappa, replicate `r`.
    pub d_hat: Vec<Vec<usize>>,
    pub crit_min: Vec<Vec<f64>>,
    /// Smallest kappa whose median `D_hat` is at most `threshold`.
    pub jump_location: Option<f64>,
}

impl SweepResult {
    pub fn median_nonincreasing(&self) -> bool {
        self.stats.windows(2).all(|w| w[1].median <= w[0].median)
    }

    pub fn stats_at(&self, kappa: f64) -> Option<&DimensionStats> {
        self.stats.iter().find(|s| (s.kappa - kappa).abs() < 1e-12)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["kappa", "replicate", "D_hat", "crit_min"]);
        for (i, s) in self.stats.iter().enumerate() {
            for (r, (&d, &c)) in self.d_hat[i].iter().zip(&self.crit_min[i]).enumerate() {
                t.push(vec![s.kappa.into(), r.into(), d.into(), c.into()]);
            }
        }
        t
    }
}

pub fn jump_threshold(d_true: usize) -> usize {
    (2 * d_true).max(10)
}

/// Selected dimension across a kappa grid with `pen(D) = kappa sigma^2 D / n`.
/// Each replicate's noise is shared by every kappa.
pub fn cutoff_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    expect_scenario(config, Scenario::CutoffSweep)?;
    let setup = FunctionalSetup::new(config)?;
    sweep(&setup, &config.kappas(), config.replicates, config.seed())
}

fn sweep(setup: &FunctionalSetup, kappas: &[f64], replicates: usize, master: Seed) -> Result<SweepResult> {
    let rules = kappas
        .iter()
        .map(|&k| PenaltyRule::linear_dim(k, setup.sigma2(), setup.scale()))
        .collect::<Result<Vec<_>>>()?;
    let per_rep: Vec<Vec<(usize, f64)>> = replicate_seeds(master, replicates)
        .into_par_iter()
        .map(|seed| {
            let cache = setup.cache(&setup.response(seed))?;
            rules
                .iter()
                .map(|pen| select_cached(&cache, &setup.collection, pen).map(|o| (o.chosen_dim, o.criterion_min)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let d_hat: Vec<Vec<usize>> = (0..kappas.len())
        .map(|i| per_rep.iter().map(|r| r[i].0).collect())
        .collect();
    let crit_min = (0..kappas.len())
        .map(|i| per_rep.iter().map(|r| r[i].1).collect())
        .collect();
    let stats: Vec<DimensionStats> = kappas
        .iter()
        .zip(&d_hat)
        .map(|(&k, dims)| DimensionStats::from_dims(k, dims, setup.n))
        .collect();
    let d_true = support_dimension(&setup.theta);
    let threshold = jump_threshold(d_true);
    let jump_location = stats.iter().find(|s| s.median <= threshold as f64).map(|s| s.kappa);
    Ok(SweepResult {
        n: setup.n,
        d_true,
        threshold,
        stats,
        d_hat,
        crit_min,
        jump_location,
    })
}

fn sweep_output(result: &SweepResult, config: &ExperimentConfig) -> ScenarioOutput {
    let checks = vec![Check::new(
        "median_nonincreasing",
        result.median_nonincreasing(),
        "median D_hat is nonincreasing in kappa",
    )];
    ScenarioOutput {
        scenario: config.scenario,
        csv_name: "cutoff",
        table: result.table(),
        summary: json!({
            "n": result.n,
            "d_true": result.d_true,
            "jump_threshold": result.threshold,
            "jump_location": result.jump_location,
            "per_kappa": result.stats,
        }),
        checks,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormCurveResult {
    pub n: usize,
    pub window: (usize, usize),
    /// Mean of `||f_hat_D||_n^2` for `D = 1..=max_dim`.
    pub mean_curve: BTreeMap<usize, f64>,
    pub spread: BTreeMap<usize, f64>,
    /// `curves[r][D - 1]`.
    pub curves: Vec<Vec<f64>>,
    /// Fit of the mean curve.
    pub fit: SlopeFit,
    /// Mean of the per-replicate `kappa_hat`, with its standard error.
    pub kappa_hat: f64,
    pub kappa_hat_stderr: f64,
    pub per_replicate_kappa: Vec<f64>,
    pub slope: f64,
}

impl NormCurveResult {
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["D", "replicate", "sq_norm"]);
        for d in 1..=self.mean_curve.len() {
            for (r, curve) in self.curves.iter().enumerate() {
                t.push(vec![d.into(), r.into(), curve[d - 1].into()]);
            }
        }
        t
    }
}

/// `D -> ||f_hat_D||_n^2` per replicate and the slope-heuristic estimate of
/// the critical penalty constant over the configured window.
///
/// With `sigma = 0` the slope is reported and the kappa fields are NaN.
pub fn norm_curve(config: &ExperimentConfig) -> Result<NormCurveResult> {
    expect_scenario(config, Scenario::NormCurve)?;
    let setup = FunctionalSetup::new(config)?;
    let [lo, hi] = config
        .window
        .ok_or_else(|| Error::invalid("norm_curve needs a slope window"))?;
    let curves: Vec<Vec<f64>> = replicate_seeds(config.seed(), config.replicates)
        .into_par_iter()
        .map(|seed| {
            setup
                .cache(&setup.response(seed))
                .map(|c| c.prefix_norms()[1..].to_vec())
        })
        .collect::<Result<_>>()?;
    let r = curves.len();
    let mut mean_curve = BTreeMap::new();
    let mut spread = BTreeMap::new();
    for d in 1..=setup.max_dim {
        let col: Vec<f64> = curves.iter().map(|c| c[d - 1]).collect();
        mean_curve.insert(d, mean(&col));
        spread.insert(d, stderr(&col) * (r as f64).sqrt());
    }
    let noisy = setup.sigma > 0.0;
    let sigma2 = if noisy { setup.sigma2() } else { 1.0 };
    let fit = slope_fit(&mean_curve, (lo, hi), sigma2, setup.scale())?;
    let per_replicate_kappa: Vec<f64> = curves
        .iter()
        .map(|c| {
            let curve: BTreeMap<usize, f64> = c.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect();
            slope_fit(&curve, (lo, hi), sigma2, setup.scale()).map(|f| f.kappa_hat)
        })
        .collect::<Result<_>>()?;
    let (kappa_hat, kappa_hat_stderr) = if noisy {
        (mean(&per_replicate_kappa), stderr(&per_replicate_kappa))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(NormCurveResult {
        n: setup.n,
        window: (lo, hi),
        slope: fit.slope,
        mean_curve,
        spread,
        curves,
        fit,
        kappa_hat,
        kappa_hat_stderr,
        per_replicate_kappa,
    })
}

fn norm_curve_output(result: &NormCurveResult, config: &ExperimentConfig) -> ScenarioOutput {
    let mut checks = vec![];
    if config.sigma > 0.0 {
        checks.push(Check::new(
            "kappa_hat_near_one",
            (0.9..=1.1).contains(&result.kappa_hat),
            format!("kappa_hat = {:.4} +/- {:.4}", result.kappa_hat, result.kappa_hat_stderr),
        ));
    }
    ScenarioOutput {
        scenario: config.scenario,
        csv_name: "norm_curve",
        table: result.table(),
        summary: json!({
            "n": result.n,
            "window": result.window,
            "slope": result.slope,
            "kappa_hat": finite_or_null(result.kappa_hat),
            "kappa_hat_stderr": finite_or_null(result.kappa_hat_stderr),
            "mean_curve_fit": result.fit,
            "mean_curve": result.mean_curve.values().collect::<Vec<_>>(),
        }),
        checks,
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRisk {
    pub mode: RiskMode,
    pub selected_risk: f64,
    pub selected_stderr: f64,
    pub oracle_risk: f64,
    pub oracle_dim: usize,
    pub ratio: f64,
    pub risks: Vec<f64>,
    pub d_hat: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub n: usize,
    pub penalty: PenaltySpec,
    pub modes: Vec<ModeRisk>,
}

impl OracleResult {
    pub fn mode(&self, mode: RiskMode) -> Option<&ModeRisk> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["mode", "replicate", "D_hat", "risk"]);
        for m in &self.modes {
            for (r, (&d, &risk)) in m.d_hat.iter().zip(&m.risks).enumerate() {
                t.push(vec![m.mode.name().into(), r.into(), d.into(), risk.into()]);
            }
        }
        t
    }
}

/// Per-replicate `(D_hat, risk)` for one penalty in one mode.
fn mode_risks(setup: &FunctionalSetup, mode: RiskMode, spec: PenaltySpec, master: Seed) -> Result<Vec<(usize, f64)>> {
    let seeds = replicate_seeds(master, setup.replicates);
    match mode {
        RiskMode::Vector => {
            let basis = euclidean_basis(&setup.design, setup.max_dim)?;
            let pen = penalty_rule(spec, setup.sigma2(), PenaltyScale::Unit)?;
            seeds
                .into_par_iter()
                .map(|seed| {
                    let y = setup.response(seed);
                    let out = select(&y, &basis, &setup.collection, &pen)?;
                    let fitted = basis.synthesize(&out.chosen, &out.estimator_coefficients)?;
                    let risk = fitted.iter().zip(&setup.f_grid).map(|(a, b)| (a - b).powi(2)).sum();
                    Ok((out.chosen_dim, risk))
                })
                .collect()
        }
        RiskMode::FunctionalEmpirical | RiskMode::FunctionalL2 => {
            let pen = penalty_rule(spec, setup.sigma2(), setup.scale())?;
            seeds
                .into_par_iter()
                .map(|seed| {
                    let cache = setup.cache(&setup.response(seed))?;
                    let d = select_cached(&cache, &setup.collection, &pen)?.chosen_dim;
                    let risks = l2_and_empirical_risks(&setup.estimate(&cache, d), &setup.theta, &setup.design);
                    let risk = if mode == RiskMode::FunctionalL2 {
                        risks.l2_risk
                    } else {
                        risks.empirical_risk
                    };
                    Ok((d, risk))
                })
                .collect()
        }
    }
}

/// Fourier columns rescaled by `1/sqrt(n)`: orthonormal in Euclidean `R^n`.
fn euclidean_basis(design: &FourierDesign, size: usize) -> Result<OrthonormalBasis> {
    let s = 1.0 / (design.n() as f64).sqrt();
    let vectors = (1..=size)
        .map(|j| design.column(j).into_iter().map(|v| v * s).collect())
        .collect();
    OrthonormalBasis::new(vectors, InnerProduct::Euclidean)
}

/// `min_D` of the risk of the deterministic estimator on `S_D`, with its argmin.
fn oracle(setup: &FunctionalSetup, mode: RiskMode) -> Result<(f64, usize)> {
    let mut best = (f64::INFINITY, 0);
    match mode {
        RiskMode::Vector => {
            let basis = euclidean_basis(&setup.design, setup.max_dim)?;
            for m in setup.collection.models() {
                let r = exact_risk(&setup.f_grid, &basis, m, setup.sigma)?;
                if r < best.0 {
                    best = (r, m.dimension());
                }
            }
        }
        RiskMode::FunctionalEmpirical | RiskMode::FunctionalL2 => {
            let c = setup.target_projection()?;
            let f_sq = crate::functional::empirical_norm_sq(&setup.f_grid);
            let theta = &setup.theta.theta;
            for d in 1..=setup.max_dim {
                let variance = setup.sigma2() * d as f64 / setup.n as f64;
                let bias = if mode == RiskMode::FunctionalEmpirical {
                    (f_sq - c[..d].iter().map(|v| v * v).sum::<f64>()).max(0.0)
                } else {
                    let len = theta.len().max(d);
                    (0..len)
                        .map(|i| {
                            let est = if i < d { c[i] } else { 0.0 };
                            (est - theta.get(i).copied().unwrap_or(0.0)).powi(2)
                        })
                        .sum()
                };
                if bias + variance < best.0 {
                    best = (bias + variance, d);
                }
            }
        }
    }
    Ok(best)
}

/// Monte Carlo risk of the selected estimator over the oracle risk.
pub fn oracle_ratio(config: &ExperimentConfig) -> Result<OracleResult> {
    expect_scenario(config, Scenario::OracleRatio)?;
    let spec = config.penalty.unwrap_or(PenaltySpec::Mallows);
    if let PenaltySpec::LinearDim { kappa } = spec {
        if kappa <= 1.0 {
            return Err(Error::invalid(format!(
                "oracle_ratio needs kappa > 1, got {kappa}; use lower_bound"
            )));
        }
    }
    let setup = FunctionalSetup::new(config)?;
    let modes = config.modes.clone().unwrap_or_default();
    let modes = modes
        .into_iter()
        .map(|mode| {
            let pairs = mode_risks(&setup, mode, spec, config.seed())?;
            let (d_hat, risks): (Vec<usize>, Vec<f64>) = pairs.into_iter().unzip();
            let (oracle_risk, oracle_dim) = oracle(&setup, mode)?;
            let selected_risk = mean(&risks);
            Ok(ModeRisk {
                mode,
                selected_risk,
                selected_stderr: stderr(&risks),
                oracle_risk,
                oracle_dim,
                ratio: selected_risk / oracle_risk,
                risks,
                d_hat,
            })
        })
        .collect::<Result<_>>()?;
    Ok(OracleResult {
        n: setup.n,
        penalty: spec,
        modes,
    })
}

pub const ORACLE_RATIO_LIMIT: f64 = 10.0;

fn oracle_output(result: &OracleResult, config: &ExperimentConfig) -> ScenarioOutput {
    let checks = result
        .modes
        .iter()
        .map(|m| {
            Check::new(
                format!("ratio_{}", m.mode.name()),
                m.ratio <= ORACLE_RATIO_LIMIT,
                format!("{:.4} / {:.4} = {:.3}", m.selected_risk, m.oracle_risk, m.ratio),
            )
        })
        .collect();
    let summary: Vec<Value> = result
        .modes
        .iter()
        .map(|m| {
            json!({
                "mode": m.mode,
                "selected_risk": m.selected_risk,
                "selected_stderr": m.selected_stderr,
                "oracle_risk": m.oracle_risk,
                "oracle_dim": m.oracle_dim,
                "ratio": m.ratio,
            })
        })
        .collect();
    ScenarioOutput {
        scenario: config.scenario,
        csv_name: "oracle",
        table: result.table(),
        summary: json!({ "n": result.n, "penalty": result.penalty, "modes": summary }),
        checks,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundRow {
    pub kappa: f64,
    pub mode: RiskMode,
    pub mean_risk: f64,
    pub stderr: f64,
    pub bound: f64,
    pub frac_ge_half: f64,
    pub pass: bool,
    pub risks: Vec<f64>,
    pub d_hat: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundResult {
    pub n: usize,
    pub rows: Vec<LowerBoundRow>,
    pub jump_location: Option<f64>,
}

impl LowerBoundResult {
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["kappa", "mode", "replicate", "D_hat", "risk"]);
        for row in &self.rows {
            for (r, (&d, &risk)) in row.d_hat.iter().zip(&row.risks).enumerate() {
                t.push(vec![
                    row.kappa.into(),
                    row.mode.name().into(),
                    r.into(),
                    d.into(),
                    risk.into(),
                ]);
            }
        }
        t
    }
}

/// Risk of the selected estimator for `kappa < 1`, against `sigma^2 / 4` in
/// the functional norms and `||f_{m_N} - f||^2 + sigma^2 N / 4` in `R^n`,
/// where `N` is the largest dimension.
pub fn lower_bound_check(config: &ExperimentConfig) -> Result<LowerBoundResult> {
    expect_scenario(config, Scenario::LowerBound)?;
    let kappas = config.kappas();
    if let Some(k) = kappas.iter().find(|&&k| k >= 1.0) {
        return Err(Error::invalid(format!("lower_bound needs kappa < 1, got {k}")));
    }
    let setup = FunctionalSetup::new(config)?;
    let modes = config.modes.clone().unwrap_or_default();
    let big = ModelSpec::prefix(setup.max_dim);
    let mut rows = vec![];
    for &kappa in &kappas {
        for &mode in &modes {
            let pairs = mode_risks(&setup, mode, PenaltySpec::LinearDim { kappa }, config.seed())?;
            let (d_hat, risks): (Vec<usize>, Vec<f64>) = pairs.into_iter().unzip();
            let quarter = setup.sigma2() / 4.0;
            let bound = match mode {
                RiskMode::Vector => {
                    let basis = euclidean_basis(&setup.design, setup.max_dim)?;
                    exact_risk(&setup.f_grid, &basis, &big, 0.0)? + quarter * setup.max_dim as f64
                }
                _ => quarter,
            };
            let mean_risk = mean(&risks);
            let se = stderr(&risks);
            let frac = d_hat.iter().filter(|&&d| 2 * d >= setup.n).count() as f64 / d_hat.len() as f64;
            rows.push(LowerBoundRow {
                kappa,
                mode,
                mean_risk,
                stderr: se,
                bound,
                frac_ge_half: frac,
                pass: mean_risk >= bound - 3.0 * se,
                risks,
                d_hat,
            });
        }
    }
    let sweep = sweep(&setup, &kappas, config.replicates, config.seed())?;
    Ok(LowerBoundResult {
        n: setup.n,
        rows,
        jump_location: sweep.jump_location,
    })
}

pub const LARGE_MODEL_FREQUENCY: f64 = 0.95;

fn lower_bound_output(result: &LowerBoundResult, config: &ExperimentConfig) -> ScenarioOutput {
    let mut checks = vec![];
    for row in &result.rows {
        let tag = format!("{}@{}", row.mode.name(), row.kappa);
        checks.push(Check::new(
            format!("risk_{tag}"),
            row.pass,
            format!(
                "mean {:.4} (se {:.4}) vs bound {:.4}",
                row.mean_risk, row.stderr, row.bound
            ),
        ));
        checks.push(Check::new(
            format!("large_model_{tag}"),
            row.frac_ge_half >= LARGE_MODEL_FREQUENCY,
            format!("P(D_hat >= n/2) = {:.3}", row.frac_ge_half),
        ));
    }
    let rows: Vec<Value> = result
        .rows
        .iter()
        .map(|r| {
            json!({
                "kappa": r.kappa, "mode": r.mode, "mean_risk": r.mean_risk, "stderr": r.stderr,
                "bound": r.bound, "frac_ge_half": r.frac_ge_half, "pass": r.pass,
            })
        })
        .collect();
    ScenarioOutput {
        scenario: config.scenario,
        csv_name: "lower_bound",
        table: result.table(),
        summary: json!({ "n": result.n, "rows": rows, "jump_location": result.jump_location }),
        checks,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    pub n: usize,
    pub mean_risk: f64,
    pub stderr: f64,
    pub mean_dim: f64,
    pub risks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateResult {
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// `-2 alpha / (2 alpha + 1)` for the Sobolev smoothness.
    pub target_slope: f64,
}

impl RateResult {
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["n", "replicate", "l2_risk"]);
        for p in &self.points {
            for (r, &risk) in p.risks.iter().enumerate() {
                t.push(vec![p.n.into(), r.into(), risk.into()]);
            }
        }
        t
    }
}

/// `L2` risk of the selected estimator across sample sizes, each replicate on
/// a fresh Sobolev target, with the log-log slope of the mean risk.
pub fn rate_study(config: &ExperimentConfig) -> Result<RateResult> {
    expect_scenario(config, Scenario::RateStudy)?;
    let SignalSpec::Sobolev { alpha, .. } = config.signal else {
        return Err(Error::invalid("rate_study needs a sobolev signal"));
    };
    let spec = config
        .penalty
        .ok_or_else(|| Error::invalid("rate_study needs a penalty"))?;
    let n_grid = config.n_grid.clone().unwrap_or_default();
    let mut points = vec![];
    for (i, &n) in n_grid.iter().enumerate() {
        let lane = derive_seed(config.seed(), i as u64);
        let design = GridDesign::new(n)?.fourier();
        let collection = nested_collection(n - 1, config.alpha)?;
        let sigma2 = config.sigma * config.sigma;
        let pen = penalty_rule(spec, sigma2, PenaltyScale::OneOverN(n))?;
        let pairs: Vec<(f64, usize)> = replicate_seeds(lane, config.replicates)
            .into_par_iter()
            .map(|seed| {
                let theta = config.signal.coefficients(n, derive_seed(seed, 0))?;
                let eps = derive_seed(seed, 1).sampler().next_vector(n);
                let y: Vec<f64> = theta
                    .grid_values(&design)
                    .iter()
                    .zip(eps.as_slice())
                    .map(|(f, e)| f + config.sigma * e)
                    .collect();
                let cache = CoefficientCache::from_coefficients(design.coefficients(&y, n - 1)?);
                let d = select_cached(&cache, &collection, &pen)?.chosen_dim;
                let risk: f64 = theta
                    .theta
                    .iter()
                    .enumerate()
                    .map(|(j, t)| {
                        let est = if j < d { cache.coefficients()[j] } else { 0.0 };
                        (est - t).powi(2)
                    })
                    .sum();
                Ok((risk, d))
            })
            .collect::<Result<_>>()?;
        let risks: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let dims: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        points.push(RatePoint {
            n,
            mean_risk: mean(&risks),
            stderr: stderr(&risks),
            mean_dim: mean(&dims),
            risks,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_risk.ln()).collect();
    let (slope, intercept) = ols(&xs, &ys);
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    let a = f64::from(alpha);
    Ok(RateResult {
        points,
        slope,
        intercept,
        residuals,
        target_slope: -2.0 * a / (2.0 * a + 1.0),
    })
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub const RATE_SLOPE_TOLERANCE: f64 = 0.1;

fn rate_output(result: &RateResult, config: &ExperimentConfig) -> ScenarioOutput {
    let mut checks = vec![];
    if config.sigma > 0.0 {
        checks.push(Check::new(
            "slope_matches_rate",
            (result.slope - result.target_slope).abs() <= RATE_SLOPE_TOLERANCE,
            format!("slope {:.4} vs {:.4}", result.slope, result.target_slope),
        ));
    }
    let points: Vec<Value> = result
        .points
        .iter()
        .map(|p| json!({ "n": p.n, "mean_risk": p.mean_risk, "stderr": p.stderr, "mean_dim": p.mean_dim }))
        .collect();
    ScenarioOutput {
        scenario: config.scenario,
        csv_name: "rate",
        table: result.table(),
        summary: json!({
            "points": points,
            "slope": result.slope,
            "intercept": result.intercept,
            "residuals": result.residuals,
            "target_slope": result.target_slope,
        }),
        checks,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationResult {
    pub n: usize,
    pub hoeffding: TailReport,
    pub suites: Vec<ChiSuite>,
}

impl ConcentrationResult {
    pub fn passed(&self) -> bool {
        self.hoeffding.passed() && self.suites.iter().all(ChiSuite::passed)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["statistic", "t_or_x", "empirical", "bound", "margin", "pass"]);
        let mut push = |label: String, report: &TailReport| {
            for row in &report.rows {
                t.push(vec![
                    label.clone().into(),
                    row.threshold.into(),
                    row.empirical.into(),
                    row.bound.into(),
                    row.margin.into(),
                    row.pass.into(),
                ]);
            }
        };
        push(self.hoeffding.statistic.clone(), &self.hoeffding);
        for s in &self.suites {
            for report in &s.tails {
                push(format!("{}[D={}]", report.statistic, s.dimension), report);
            }
        }
        t
    }
}

/// Tail, variance and expectation checks for `chi_D` on the Euclidean Fourier
/// basis of `R^n`, plus Hoeffding along the first cosine direction.
pub fn concentration_suite(config: &ExperimentConfig) -> Result<ConcentrationResult> {
    expect_scenario(config, Scenario::ConcentrationSuite)?;
    let n = config.n;
    let dims = config.dims.clone().unwrap_or_default();
    let top = dims.iter().copied().max().unwrap_or(2).max(2);
    let design = GridDesign::new(n)?.fourier();
    let basis = euclidean_basis(&design, top)?;
    let hoeffding = hoeffding_check(
        basis.vector(1),
        config.t_grid(),
        config.samples,
        derive_seed(config.seed(), 0),
    )?;
    let suites = dims
        .iter()
        .map(|&d| {
            chi_suite(
                &basis,
                &ModelSpec::prefix(d),
                config.t_grid(),
                &config.x_grid,
                config.samples,
                derive_seed(config.seed(), d as u64),
            )
        })
        .collect::<Result<_>>()?;
    Ok(ConcentrationResult { n, hoeffding, suites })
}

fn concentration_output(result: &ConcentrationResult, config: &ExperimentConfig) -> ScenarioOutput {
    let mut checks = vec![Check::new(
        "hoeffding",
        result.hoeffding.passed(),
        "P(<b, eps> >= t) <= exp(-t^2/2)",
    )];
    for s in &result.suites {
        for r in &s.tails {
            checks.push(Check::new(
                format!("{}[D={}]", r.statistic, s.dimension),
                r.passed(),
                format!("{} thresholds", r.rows.len()),
            ));
        }
        checks.push(Check::new(
            format!("efron_stein[D={}]", s.dimension),
            s.efron_stein.pass,
            format!("Var(chi) = {:.4}", s.efron_stein.empirical_variance),
        ));
        checks.push(Check::new(
            format!("expectation[D={}]", s.dimension),
            s.expectation.pass,
            format!(
                "E chi = {:.4} in [{:.4}, {:.4}]",
                s.expectation.mean_chi, s.expectation.lower, s.expectation.upper
            ),
        ));
        checks.push(Check::new(
            format!("median[D={}]", s.dimension),
            s.medians.iter().all(|m| m.pass),
            "chi quantile bounds bracket the median",
        ));
    }
    ScenarioOutput {
        scenario: config.scenario,
        csv_name: "concentration",
        table: result.table(),
        summary: json!({
            "n": result.n,
            "samples": config.samples,
            "hoeffding": result.hoeffding,
            "suites": result.suites,
        }),
        checks,
    }
}

pub fn talagrand_set(config: &ExperimentConfig) -> Result<FinitePointSet<i8>> {
    let n = config.n;
    let ones = vec![1i8; n];
    match config.set.unwrap_or(SetSpec::HammingBall { radius: 1 }) {
        SetSpec::Singleton => FinitePointSet::singleton(ones),
        SetSpec::HammingBall { radius } => FinitePointSet::hamming_ball(&ones, radius),
        SetSpec::Random { size } => FinitePointSet::random_subset(n, size, config.seed()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TalagrandResult {
    pub report: CubeReport,
    pub lipschitz_violations: usize,
}

impl TalagrandResult {
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec![
            "t",
            "prob_A",
            "prob_tail",
            "product",
            "bound",
            "pass",
            "prob_A_exact",
            "prob_tail_exact",
            "product_exact",
        ]);
        for row in &self.report.rows {
            t.push(vec![
                row.t.into(),
                row.prob_a.to_f64().into(),
                row.prob_tail.to_f64().into(),
                row.product.into(),
                row.bound.into(),
                row.pass.into(),
                row.prob_a.to_string().into(),
                row.prob_tail.to_string().into(),
                row.prob_a.product(row.prob_tail).to_string().into(),
            ]);
        }
        t
    }
}

/// Exhaustive check of the convex distance inequality on `{-1, 1}^n`.
pub fn talagrand_suite(config: &ExperimentConfig) -> Result<TalagrandResult> {
    expect_scenario(config, Scenario::TalagrandSuite)?;
    let set = talagrand_set(config)?;
    let solver = ConvexDistanceSolver::with_tol(config.tol);
    let report = verify_convex_distance_inequality(&set, config.n, config.t_grid(), &solver)?;
    let lipschitz_violations = report.lipschitz_violations();
    Ok(TalagrandResult {
        report,
        lipschitz_violations,
    })
}

fn talagrand_output(result: &TalagrandResult, config: &ExperimentConfig) -> ScenarioOutput {
    let rep = &result.report;
    let checks = vec![
        Check::new("inequality", rep.passed(), format!("max ratio {:.4}", rep.max_ratio)),
        Check::new(
            "duality_gap",
            rep.max_duality_gap <= config.tol,
            format!("max gap {:.3e}", rep.max_duality_gap),
        ),
        Check::new(
            "lipschitz",
            result.lipschitz_violations == 0,
            format!("{} violating pairs", result.lipschitz_violations),
        ),
    ];
    ScenarioOutput {
        scenario: config.scenario,
        csv_name: "talagrand",
        table: result.table(),
        summary: json!({
            "n": rep.n,
            "set": config.set,
            "set_size": rep.set_size,
            "rows": rep.rows,
            "max_ratio": rep.max_ratio,
            "max_duality_gap": rep.max_duality_gap,
            "lipschitz_violations": result.lipschitz_violations,
        }),
        checks,
    }
}

/// Runs the scenario named by the config.
pub fn run_scenario(config: &ExperimentConfig) -> Result<ScenarioOutput> {
    Ok(match config.scenario {
        Scenario::CutoffSweep => sweep_output(&cutoff_sweep(config)?, config),
        Scenario::NormCurve => norm_curve_output(&norm_curve(config)?, config),
        Scenario::OracleRatio => oracle_output(&oracle_ratio(config)?, config),
        Scenario::LowerBound => lower_bound_output(&lower_bound_check(config)?, config),
        Scenario::RateStudy => rate_output(&rate_study(config)?, config),
        Scenario::ConcentrationSuite => concentration_output(&concentration_suite(config)?, config),
        Scenario::TalagrandSuite => talagrand_output(&talagrand_suite(config)?, config),
    })
}
