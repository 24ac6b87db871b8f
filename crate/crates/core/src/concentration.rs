//! Closed-form tail bounds for Rademacher processes and chi-type statistics,
//! and Monte Carlo reports that confront them with empirical frequencies.
//!
//! All comparisons are one-sided: a threshold fails only when the empirical
//! frequency exceeds the bound by more than three binomial standard errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{ModelSpec, OrthonormalBasis};
use crate::randomness::{derive_seed, Seed};

/// Draws per independently seeded chunk of a Monte Carlo loop.
const CHUNK: usize = 2048;

pub const DEFAULT_T_GRID: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];
pub const DEFAULT_X_GRID: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    Hoeffding,
    SupRademacher,
    ChiUpper,
    ChiLower,
    ConvexDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub form: BoundForm,
    /// Bounded-differences constant of the sub-Gaussian forms.
    pub v: f64,
}

impl TailBound {
    pub const HOEFFDING: TailBound = TailBound {
        form: BoundForm::Hoeffding,
        v: 1.0,
    };
    pub const SUP_RADEMACHER: TailBound = TailBound {
        form: BoundForm::SupRademacher,
        v: 4.0,
    };
    pub const CHI_UPPER: TailBound = TailBound {
        form: BoundForm::ChiUpper,
        v: 4.0,
    };
    pub const CHI_LOWER: TailBound = TailBound {
        form: BoundForm::ChiLower,
        v: 4.0,
    };
    pub const CONVEX_DISTANCE: TailBound = TailBound {
        form: BoundForm::ConvexDistance,
        v: 2.0,
    };

    /// Probability bound at deviation `t` (or at level `x` for the chi forms).
    pub fn evaluate(&self, t: f64) -> f64 {
        match self.form {
            BoundForm::Hoeffding | BoundForm::SupRademacher | BoundForm::ConvexDistance => {
                (-t * t / (2.0 * self.v)).exp()
            }
            BoundForm::ChiUpper | BoundForm::ChiLower => (-t).exp(),
        }
    }
}

/// `P{<b, eps> >= t} <= exp(-t^2/2)` for `||b|| <= 1`.
pub fn bound_hoeffding(t: f64) -> f64 {
    TailBound::HOEFFDING.evaluate(t)
}

/// Each tail of `sup_{b in B} <b, eps>` around its mean, `B` in the unit ball.
pub fn bound_sup_rademacher(t: f64) -> f64 {
    TailBound::SUP_RADEMACHER.evaluate(t)
}

pub fn bound_convex_distance(t: f64) -> f64 {
    TailBound::CONVEX_DISTANCE.evaluate(t)
}

/// `sqrt(D) + 2 sqrt(2x)`: `chi` exceeds this with probability at most `e^-x`.
pub fn chi_upper_quantile(d: usize, x: f64) -> f64 {
    (d as f64).sqrt() + 2.0 * (2.0 * x).sqrt()
}

/// `sqrt((D-2)_+) - 2 sqrt(2x)`, possibly negative.
pub fn chi_lower_quantile(d: usize, x: f64) -> f64 {
    (d.saturating_sub(2) as f64).sqrt() - 2.0 * (2.0 * x).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub threshold: f64,
    pub empirical: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub statistic: String,
    pub n_samples: usize,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    fn from_frequencies(statistic: &str, n_samples: usize, rows: impl IntoIterator<Item = (f64, usize, f64)>) -> Self {
        let n = n_samples as f64;
        let rows = rows
            .into_iter()
            .map(|(threshold, hits, bound)| {
                let p = hits as f64 / n;
                let margin = 3.0 * (p * (1.0 - p) / n).sqrt();
                TailRow {
                    threshold,
                    empirical: p,
                    bound,
                    margin,
                    pass: p <= bound + margin,
                }
            })
            .collect();
        TailReport {
            statistic: statistic.to_string(),
            n_samples,
            rows,
        }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn violations(&self) -> impl Iterator<Item = &TailRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

/// Evaluates `stat` on `n_samples` Rademacher vectors of length `n`.
///
/// Chunk `k` draws from `derive_seed(seed, k)`, so the output does not depend
/// on the thread pool.
pub fn sample_statistic<F>(n: usize, n_samples: usize, seed: Seed, stat: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let chunks = n_samples.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut sampler = derive_seed(seed, k as u64).sampler();
            let mut eps = vec![0.0; n];
            let count = CHUNK.min(n_samples - k * CHUNK);
            (0..count)
                .map(|_| {
                    sampler.fill(&mut eps);
                    stat(&eps)
                })
                .collect()
        })
        .collect();
    per_chunk.into_iter().flatten().collect()
}

/// Samples of `chi = ||Pi_m eps||`.
pub fn chi_samples(basis: &OrthonormalBasis, model: &ModelSpec, n_samples: usize, seed: Seed) -> Result<Vec<f64>> {
    basis.check_model(model)?;
    let cols: Vec<&[f64]> = model.indices().map(|j| basis.vector(j)).collect();
    Ok(sample_statistic(basis.ambient_dim(), n_samples, seed, |eps| {
        cols.iter().map(|c| basis.dot(eps, c).powi(2)).sum::<f64>().sqrt()
    }))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn hoeffding_check(b: &[f64], t_grid: &[f64], n_samples: usize, seed: Seed) -> Result<TailReport> {
    let norm: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1.0 + 1e-12 {
        return Err(Error::invalid(format!("Hoeffding direction has norm {norm} > 1")));
    }
    let samples = sample_statistic(b.len(), n_samples, seed, |eps| crate::linear::dot(b, eps));
    Ok(TailReport::from_frequencies(
        "hoeffding",
        n_samples,
        t_grid
            .iter()
            .map(|&t| (t, samples.iter().filter(|&&s| s >= t).count(), bound_hoeffding(t))),
    ))
}

/// Both tails of `Z = sup over the unit ball of S_m of <b, eps>` (that is `chi`)
/// around its empirical mean.
pub fn sup_rademacher_check(
    basis: &OrthonormalBasis,
    model: &ModelSpec,
    t_grid: &[f64],
    n_samples: usize,
    seed: Seed,
) -> Result<(TailReport, TailReport)> {
    let z = chi_samples(basis, model, n_samples, seed)?;
    let zbar = mean(&z);
    let upper = TailReport::from_frequencies(
        "sup_rademacher_upper",
        n_samples,
        t_grid
            .iter()
            .map(|&t| (t, z.iter().filter(|&&s| s - zbar >= t).count(), bound_sup_rademacher(t))),
    );
    let lower = TailReport::from_frequencies(
        "sup_rademacher_lower",
        n_samples,
        t_grid.iter().map(|&t| {
            (
                t,
                z.iter().filter(|&&s| s - zbar <= -t).count(),
                bound_sup_rademacher(t),
            )
        }),
    );
    Ok((upper, lower))
}

pub fn chi_upper_check(
    basis: &OrthonormalBasis,
    model: &ModelSpec,
    x_grid: &[f64],
    n_samples: usize,
    seed: Seed,
) -> Result<TailReport> {
    let chi = chi_samples(basis, model, n_samples, seed)?;
    chi_upper_report(&chi, model.dimension(), x_grid)
}

fn chi_upper_report(chi: &[f64], d: usize, x_grid: &[f64]) -> Result<TailReport> {
    Ok(TailReport::from_frequencies(
        "chi_upper",
        chi.len(),
        x_grid.iter().map(|&x| {
            let q = chi_upper_quantile(d, x);
            (x, chi.iter().filter(|&&c| c > q).count(), (-x).exp())
        }),
    ))
}

pub fn chi_lower_check(
    basis: &OrthonormalBasis,
    model: &ModelSpec,
    x_grid: &[f64],
    n_samples: usize,
    seed: Seed,
) -> Result<TailReport> {
    let chi = chi_samples(basis, model, n_samples, seed)?;
    chi_lower_report(&chi, model.dimension(), x_grid)
}

fn chi_lower_report(chi: &[f64], d: usize, x_grid: &[f64]) -> Result<TailReport> {
    Ok(TailReport::from_frequencies(
        "chi_lower",
        chi.len(),
        x_grid.iter().map(|&x| {
            let q = chi_lower_quantile(d, x);
            (x, chi.iter().filter(|&&c| c < q).count(), (-x).exp())
        }),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfronSteinReport {
    pub empirical_variance: f64,
    pub variance_stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

fn require_samples(n_samples: usize) -> Result<()> {
    if n_samples < 1000 {
        return Err(Error::invalid(format!(
            "{n_samples} samples; at least 1000 are required"
        )));
    }
    Ok(())
}

/// `Var(chi) <= 2`.
pub fn efron_stein_check(
    basis: &OrthonormalBasis,
    model: &ModelSpec,
    n_samples: usize,
    seed: Seed,
) -> Result<EfronSteinReport> {
    require_samples(n_samples)?;
    let chi = chi_samples(basis, model, n_samples, seed)?;
    Ok(efron_stein_report(&chi))
}

fn efron_stein_report(chi: &[f64]) -> EfronSteinReport {
    let n = chi.len() as f64;
    let m = mean(chi);
    let var = chi.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = chi.iter().map(|c| (c - m).powi(4)).sum::<f64>() / n;
    let variance_stderr = ((m4 - var * var).max(0.0) / n).sqrt();
    EfronSteinReport {
        empirical_variance: var,
        variance_stderr,
        bound: 2.0,
        pass: var <= 2.0 + 3.0 * variance_stderr,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub mean_chi: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// `sqrt((D-2)_+) <= E chi <= sqrt(D)`.
pub fn chi_expectation_check(
    basis: &OrthonormalBasis,
    model: &ModelSpec,
    n_samples: usize,
    seed: Seed,
) -> Result<ExpectationReport> {
    require_samples(n_samples)?;
    let chi = chi_samples(basis, model, n_samples, seed)?;
    Ok(expectation_report(&chi, model.dimension()))
}

fn expectation_report(chi: &[f64], d: usize) -> ExpectationReport {
    let n = chi.len() as f64;
    let m = mean(chi);
    let sd = (chi.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let stderr = sd / n.sqrt();
    let lower = (d.saturating_sub(2) as f64).sqrt();
    let upper = (d as f64).sqrt();
    ExpectationReport {
        mean_chi: m,
        stderr,
        lower,
        upper,
        pass: lower - 3.0 * stderr <= m && m <= upper + 3.0 * stderr,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianRow {
    pub x: f64,
    pub lower_quantile: f64,
    pub median: f64,
    pub upper_quantile: f64,
    pub pass: bool,
}

/// For `x >= log 2` both quantile bounds bracket the median.
pub fn median_sandwich(chi: &[f64], d: usize, x_grid: &[f64]) -> Vec<MedianRow> {
    let mut sorted = chi.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    x_grid
        .iter()
        .filter(|&&x| x >= std::f64::consts::LN_2)
        .map(|&x| {
            let lo = chi_lower_quantile(d, x);
            let hi = chi_upper_quantile(d, x);
            MedianRow {
                x,
                lower_quantile: lo,
                median,
                upper_quantile: hi,
                pass: lo <= median && median <= hi,
            }
        })
        .collect()
}

/// Every check for one `(basis, model)` pair from a single batch of draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSuite {
    pub dimension: usize,
    pub ambient: usize,
    pub tails: Vec<TailReport>,
    pub efron_stein: EfronSteinReport,
    pub expectation: ExpectationReport,
    pub medians: Vec<MedianRow>,
}

impl ChiSuite {
    pub fn passed(&self) -> bool {
        self.tails.iter().all(TailReport::passed)
            && self.efron_stein.pass
            && self.expectation.pass
            && self.medians.iter().all(|m| m.pass)
    }
}

pub fn chi_suite(
    basis: &OrthonormalBasis,
    model: &ModelSpec,
    t_grid: &[f64],
    x_grid: &[f64],
    n_samples: usize,
    seed: Seed,
) -> Result<ChiSuite> {
    require_samples(n_samples)?;
    let chi = chi_samples(basis, model, n_samples, seed)?;
    let d = model.dimension();
    let zbar = mean(&chi);
    let upper = TailReport::from_frequencies(
        "sup_rademacher_upper",
        n_samples,
        t_grid.iter().map(|&t| {
            (
                t,
                chi.iter().filter(|&&s| s - zbar >= t).count(),
                bound_sup_rademacher(t),
            )
        }),
    );
    let lower = TailReport::from_frequencies(
        "sup_rademacher_lower",
        n_samples,
        t_grid.iter().map(|&t| {
            (
                t,
                chi.iter().filter(|&&s| s - zbar <= -t).count(),
                bound_sup_rademacher(t),
            )
        }),
    );
    Ok(ChiSuite {
        dimension: d,
        ambient: basis.ambient_dim(),
        tails: vec![
            chi_upper_report(&chi, d, x_grid)?,
            chi_lower_report(&chi, d, x_grid)?,
            upper,
            lower,
        ],
        efron_stein: efron_stein_report(&chi),
        expectation: expectation_report(&chi, d),
        medians: median_sandwich(&chi, d, x_grid),
    })
}
