//! Penalized least-squares model selection.
//!
//! The criterion is `crit(m) = -||f_hat_m||^2 + pen(m)`, which differs from
//! `||Y - f_hat_m||^2 + pen(m)` by the constant `||Y||^2`. Ties in the
//! criterion go to the smaller dimension, then the lexicographically smaller
//! index set.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{ModelCollection, ModelSpec, OrthonormalBasis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyScale {
    Unit,
    /// Functional setting: every penalty is divided by the sample size.
    OneOverN(usize),
}

impl PenaltyScale {
    fn factor(self) -> f64 {
        match self {
            PenaltyScale::Unit => 1.0,
            PenaltyScale::OneOverN(n) => 1.0 / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyKind {
    /// `kappa * sigma^2 * D_m`
    LinearDim { kappa: f64 },
    /// `K * sigma^2 * (sqrt(D_m) + 2 sqrt(2 x_m))^2`, `K > 1`
    TheoremStyle { k: f64 },
    /// `2 * sigma^2 * D_m`
    Mallows,
}

/// Source of the weights `x_m` used by theorem-style penalties.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    /// `x_m = x * D_m`
    PerDimension(f64),
    Explicit(BTreeMap<ModelSpec, f64>),
}

impl Weights {
    pub fn from_collection(collection: &ModelCollection) -> Self {
        Weights::Explicit(collection.iter().map(|(m, w)| (m.clone(), w)).collect())
    }

    fn weight(&self, model: &ModelSpec) -> Option<f64> {
        match self {
            Weights::PerDimension(x) => Some(x * model.dimension() as f64),
            Weights::Explicit(map) => map.get(model).copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyRule {
    kind: PenaltyKind,
    sigma2: f64,
    scale: PenaltyScale,
    weights: Option<Weights>,
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::invalid(format!("sigma^2 = {sigma2} must be nonnegative")));
    }
    Ok(())
}

impl PenaltyRule {
    pub fn linear_dim(kappa: f64, sigma2: f64, scale: PenaltyScale) -> Result<Self> {
        check_sigma2(sigma2)?;
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::invalid(format!("kappa = {kappa} must be nonnegative")));
        }
        Ok(PenaltyRule {
            kind: PenaltyKind::LinearDim { kappa },
            sigma2,
            scale,
            weights: None,
        })
    }

    pub fn mallows(sigma2: f64, scale: PenaltyScale) -> Result<Self> {
        check_sigma2(sigma2)?;
        Ok(PenaltyRule {
            kind: PenaltyKind::Mallows,
            sigma2,
            scale,
            weights: None,
        })
    }

    pub fn theorem_style(k: f64, sigma2: f64, scale: PenaltyScale, weights: Weights) -> Result<Self> {
        check_sigma2(sigma2)?;
        if !(k.is_finite() && k > 1.0) {
            return Err(Error::invalid(format!("theorem-style penalty needs K > 1, got {k}")));
        }
        if let Weights::PerDimension(x) = weights {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid(format!("weight slope x = {x} must be positive")));
            }
        }
        Ok(PenaltyRule {
            kind: PenaltyKind::TheoremStyle { k },
            sigma2,
            scale,
            weights: Some(weights),
        })
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn scale(&self) -> PenaltyScale {
        self.scale
    }

    /// Multiplier of `sigma^2 * D` for the dimension-linear rules.
    pub fn effective_kappa(&self) -> Option<f64> {
        match self.kind {
            PenaltyKind::LinearDim { kappa } => Some(kappa),
            PenaltyKind::Mallows => Some(2.0),
            PenaltyKind::TheoremStyle { .. } => None,
        }
    }

    pub fn penalty(&self, model: &ModelSpec) -> Result<f64> {
        let d = model.dimension() as f64;
        let base = match self.kind {
            PenaltyKind::LinearDim { kappa } => kappa * d,
            PenaltyKind::Mallows => 2.0 * d,
            PenaltyKind::TheoremStyle { k } => {
                let x = self
                    .weights
                    .as_ref()
                    .and_then(|w| w.weight(model))
                    .ok_or_else(|| Error::invalid(format!("no weight x_m for model {model}")))?;
                let root = d.sqrt() + 2.0 * (2.0 * x).sqrt();
                k * root * root
            }
        };
        Ok(base * self.sigma2 * self.scale.factor())
    }
}

/// `-||f_hat_m||^2 + pen(m)` in the basis's inner product.
pub fn criterion(y: &[f64], basis: &OrthonormalBasis, model: &ModelSpec, pen: &PenaltyRule) -> Result<f64> {
    let coeffs = basis.coefficients(y, model)?;
    let fit_sq: f64 = coeffs.iter().map(|c| c * c).sum();
    Ok(-fit_sq + pen.penalty(model)?)
}

/// Coefficients `<Y, phi_j>` for `j < len`, with running sums of squares.
#[derive(Debug, Clone)]
pub struct CoefficientCache {
    coefficients: Vec<f64>,
    prefix_sq: Vec<f64>,
}

impl CoefficientCache {
    pub fn new(y: &[f64], basis: &OrthonormalBasis, len: usize) -> Result<Self> {
        basis.check_ambient(y, "response")?;
        if len > basis.len() {
            return Err(Error::invalid(format!(
                "requested {len} coefficients from a basis of {}",
                basis.len()
            )));
        }
        let coefficients = basis.vectors()[..len].iter().map(|v| basis.dot(y, v)).collect();
        Ok(Self::from_coefficients(coefficients))
    }

    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        let mut prefix_sq = Vec::with_capacity(coefficients.len() + 1);
        let mut acc = 0.0;
        prefix_sq.push(acc);
        for c in &coefficients {
            acc += c * c;
            prefix_sq.push(acc);
        }
        CoefficientCache {
            coefficients,
            prefix_sq,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `||f_hat_m||^2`.
    pub fn fit_sq(&self, model: &ModelSpec) -> Result<f64> {
        if let Some(j) = model.max_index() {
            if j >= self.coefficients.len() {
                return Err(Error::invalid(format!("model index {j} beyond cached coefficients")));
            }
        }
        Ok(match model.prefix_len() {
            Some(d) => self.prefix_sq[d],
            None => model.indices().map(|j| self.coefficients[j].powi(2)).sum(),
        })
    }

    /// `||f_hat_D||^2` for `D = 0..=len`.
    pub fn prefix_norms(&self) -> &[f64] {
        &self.prefix_sq
    }
}

#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    pub chosen: ModelSpec,
    pub chosen_dim: usize,
    pub criterion_min: f64,
    pub criterion_trace: Vec<(ModelSpec, f64)>,
    /// Coefficients of `f_hat` on the chosen model's indices, in order.
    pub estimator_coefficients: Vec<f64>,
}

fn tie_broken(a: (&ModelSpec, f64), b: (&ModelSpec, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then(a.0.dimension().cmp(&b.0.dimension()))
        .then_with(|| a.0.cmp(b.0))
}

pub fn select(
    y: &[f64],
    basis: &OrthonormalBasis,
    collection: &ModelCollection,
    pen: &PenaltyRule,
) -> Result<SelectionOutcome> {
    for m in collection.models() {
        basis.check_model(m)?;
    }
    let needed = collection
        .models()
        .iter()
        .filter_map(ModelSpec::max_index)
        .max()
        .map_or(0, |j| j + 1);
    let cache = CoefficientCache::new(y, basis, needed)?;
    select_cached(&cache, collection, pen)
}

/// [`select`] on precomputed coefficients, for sweeping penalties over one data set.
pub fn select_cached(
    cache: &CoefficientCache,
    collection: &ModelCollection,
    pen: &PenaltyRule,
) -> Result<SelectionOutcome> {
    if collection.is_empty() {
        return Err(Error::invalid("cannot select from an empty collection"));
    }
    let mut trace = Vec::with_capacity(collection.len());
    for m in collection.models() {
        let crit = -cache.fit_sq(m)? + pen.penalty(m)?;
        trace.push((m.clone(), crit));
    }
    let (chosen, criterion_min) = trace
        .iter()
        .min_by(|a, b| tie_broken((&a.0, a.1), (&b.0, b.1)))
        .map(|(m, c)| (m.clone(), *c))
        .expect("nonempty trace");
    let estimator_coefficients = chosen.indices().map(|j| cache.coefficients[j]).collect();
    Ok(SelectionOutcome {
        chosen_dim: chosen.dimension(),
        chosen,
        criterion_min,
        criterion_trace: trace,
        estimator_coefficients,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub kappa_hat: f64,
    pub kappa_stderr: f64,
    pub points: usize,
}

/// OLS slope of `D -> ||f_hat_D||^2` over `window` (inclusive), converted to
/// the penalty constant it implies.
pub fn slope_fit(
    norm_curve: &BTreeMap<usize, f64>,
    window: (usize, usize),
    sigma2: f64,
    scale: PenaltyScale,
) -> Result<SlopeFit> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::invalid(format!("sigma^2 = {sigma2} must be positive")));
    }
    let pts: Vec<(f64, f64)> = norm_curve
        .range(window.0..=window.1)
        .map(|(&d, &v)| (d as f64, v))
        .collect();
    if pts.len() < 3 {
        return Err(Error::invalid(format!(
            "window [{}, {}] holds {} dimensions; at least 3 are needed",
            window.0,
            window.1,
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let slope_stderr = if pts.len() > 2 {
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let to_kappa = match scale {
        PenaltyScale::Unit => 1.0 / sigma2,
        PenaltyScale::OneOverN(n) => n as f64 / sigma2,
    };
    Ok(SlopeFit {
        slope,
        intercept,
        slope_stderr,
        kappa_hat: slope * to_kappa,
        kappa_stderr: slope_stderr * to_kappa,
        points: pts.len(),
    })
}
