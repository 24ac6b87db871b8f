//! Fourier regression on the regular grid `t_k = k/n`.
//!
//! Fourier indices are 1-based as in the usual convention
//! (`phi_1 = 1`, `phi_{2j} = sqrt2 cos(2 pi j t)`, `phi_{2j+1} = sqrt2 sin(2 pi j t)`),
//! while [`ModelSpec`] indices stay 0-based: model index `i` is `phi_{i+1}`.
//!
//! On the grid the argument `2 pi j k / n` is reduced modulo `n` in integers
//! before any floating point work, which keeps the empirical Gram matrix
//! orthonormal to about `1e-13` even at `n = 4096`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{InnerProduct, ModelSpec, OrthonormalBasis};
use crate::randomness::Seed;

/// `phi_j(t)` for a 1-based index `j`.
pub fn fourier_value(j: usize, t: f64) -> f64 {
    assert!(j >= 1, "Fourier indices start at 1");
    let freq = (j / 2) as f64;
    match j {
        1 => 1.0,
        _ if j.is_multiple_of(2) => SQRT_2 * (2.0 * PI * freq * t).cos(),
        _ => SQRT_2 * (2.0 * PI * freq * t).sin(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDesign {
    n: usize,
}

impl GridDesign {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("grid needs at least one point"));
        }
        Ok(GridDesign { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn point(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    /// `t_1, ..., t_n`.
    pub fn points(&self) -> Vec<f64> {
        (1..=self.n).map(|k| self.point(k)).collect()
    }

    pub fn fourier(&self) -> FourierDesign {
        FourierDesign::new(*self)
    }
}

/// Cosine and sine tables of the grid, shared by every Fourier evaluation on it.
#[derive(Debug, Clone)]
pub struct FourierDesign {
    grid: GridDesign,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FourierDesign {
    pub fn new(grid: GridDesign) -> Self {
        let n = grid.n;
        let (cos, sin) = (0..n)
            .map(|m| {
                let a = 2.0 * PI * m as f64 / n as f64;
                (SQRT_2 * a.cos(), SQRT_2 * a.sin())
            })
            .unzip();
        FourierDesign { grid, cos, sin }
    }

    pub fn grid(&self) -> GridDesign {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// `phi_j(t_k)` for 1-based `j` and `k` in `1..=n`.
    pub fn value(&self, j: usize, k: usize) -> f64 {
        let n = self.grid.n;
        if j == 1 {
            return 1.0;
        }
        let m = ((j / 2) % n) * (k % n) % n;
        if j.is_multiple_of(2) {
            self.cos[m]
        } else {
            self.sin[m]
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (1..=self.grid.n).map(|k| self.value(j, k)).collect()
    }

    /// `<y, phi_j>_n` for `j = 1..=count`.
    pub fn coefficients(&self, y: &[f64], count: usize) -> Result<Vec<f64>> {
        let n = self.grid.n;
        if y.len() != n {
            return Err(Error::invalid(format!(
                "response has length {}, grid has {n} points",
                y.len()
            )));
        }
        let inv = 1.0 / n as f64;
        let mut out = Vec::with_capacity(count);
        for j in 1..=count {
            if j == 1 {
                out.push(y.iter().sum::<f64>() * inv);
                continue;
            }
            let table = if j % 2 == 0 { &self.cos } else { &self.sin };
            let step = (j / 2) % n;
            // index of t_k is freq * k mod n, advanced one k at a time
            let mut m = step;
            let mut acc = 0.0;
            for yk in y {
                acc += yk * table[m];
                m += step;
                if m >= n {
                    m -= n;
                }
            }
            out.push(acc * inv);
        }
        Ok(out)
    }

    /// `sum_j theta_j phi_j(t_k)` for `k = 1..=n`.
    pub fn synthesize(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let mut out = vec![theta.first().copied().unwrap_or(0.0); n];
        for (i, &th) in theta.iter().enumerate().skip(1) {
            if th == 0.0 {
                continue;
            }
            let j = i + 1;
            let table = if j % 2 == 0 { &self.cos } else { &self.sin };
            let step = (j / 2) % n;
            let mut m = step;
            for o in out.iter_mut() {
                *o += th * table[m];
                m += step;
                if m >= n {
                    m -= n;
                }
            }
        }
        out
    }
}

/// The first `size` Fourier columns on the grid, orthonormal for the empirical
/// inner product. Requires `1 <= size <= n - 1`.
pub fn fourier_design_matrix(n: usize, size: usize) -> Result<OrthonormalBasis> {
    if size == 0 || size >= n {
        return Err(Error::invalid(format!(
            "Fourier design on {n} points supports 1..={} columns, got {size}",
            n.saturating_sub(1)
        )));
    }
    let design = GridDesign::new(n)?.fourier();
    let vectors = (1..=size).map(|j| design.column(j)).collect();
    Ok(OrthonormalBasis::from_trusted(n, vectors, InnerProduct::Empirical))
}

pub fn empirical_norm_sq(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    InnerProduct::Empirical.norm_sq(values)
}

pub fn empirical_norm(values: &[f64]) -> f64 {
    empirical_norm_sq(values).sqrt()
}

/// `f = sum_j theta_j phi_j`; `theta[0]` is the coefficient of `phi_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FourierCoefficients {
    pub theta: Vec<f64>,
}

impl FourierCoefficients {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("Fourier coefficients must be finite"));
        }
        Ok(FourierCoefficients { theta })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.theta
            .iter()
            .enumerate()
            .map(|(i, th)| th * fourier_value(i + 1, t))
            .sum()
    }

    pub fn grid_values(&self, design: &FourierDesign) -> Vec<f64> {
        design.synthesize(&self.theta)
    }

    /// `||f||^2` by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum()
    }

    /// `2 sum_{j >= n} |theta_j|`, which bounds how far any `<f, phi_j>_n`
    /// with `j <= n - 1` can drift from `theta_j`.
    pub fn aliasing_bound(&self, n: usize) -> f64 {
        2.0 * self
            .theta
            .iter()
            .skip(n.saturating_sub(1))
            .map(|t| t.abs())
            .sum::<f64>()
    }
}

/// `theta = (2, 0.7, 0.5)`: `f(x) = 2 + 0.7 sqrt2 cos(2 pi x) + 0.5 sqrt2 sin(2 pi x)`.
pub fn figure1() -> FourierCoefficients {
    FourierCoefficients {
        theta: vec![2.0, 0.7, 0.5],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevSpec {
    pub alpha: u32,
    pub radius: f64,
}

impl SobolevSpec {
    pub fn new(alpha: u32, radius: f64) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::invalid("Sobolev smoothness must be a positive integer"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("Sobolev radius {radius} must be positive")));
        }
        Ok(SobolevSpec { alpha, radius })
    }

    /// `r = R / pi^alpha`.
    pub fn r(&self) -> f64 {
        self.radius / PI.powi(self.alpha as i32)
    }

    /// `c_j` for 1-based `j`: `j^alpha` when `j` is even, `(j-1)^alpha` when odd.
    pub fn c(&self, j: usize) -> f64 {
        let base = if j.is_multiple_of(2) { j } else { j - 1 };
        (base as f64).powi(self.alpha as i32)
    }

    pub fn ellipsoid_sum(&self, theta: &[f64]) -> f64 {
        theta
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let c = self.c(i + 1);
                c * c * t * t
            })
            .sum()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        let r = self.r();
        self.ellipsoid_sum(theta) <= r * r * (1.0 + 1e-12)
    }
}

/// Random member of the ellipsoid with `sum c_j^2 theta_j^2 = fill * r^2`.
///
/// Magnitudes decay like `j^{-(alpha+1)}` with independent signs. `theta_1`
/// has `c_1 = 0` and is drawn uniformly from `[-1, 1]`.
pub fn sobolev_signal(spec: &SobolevSpec, len: usize, seed: Seed, fill: f64) -> Result<FourierCoefficients> {
    if len == 0 {
        return Err(Error::invalid("signal needs at least one coefficient"));
    }
    if !(fill > 0.0 && fill <= 1.0) {
        return Err(Error::invalid(format!("fill fraction {fill} outside (0, 1]")));
    }
    let mut sampler = seed.sampler();
    let mut theta = vec![sampler.uniform(-1.0, 1.0)];
    if len > 1 {
        let mut signs = vec![0.0; len - 1];
        sampler.fill(&mut signs);
        theta.extend(
            signs
                .iter()
                .zip(2..=len)
                .map(|(s, j)| s * (j as f64).powi(-(spec.alpha as i32 + 1))),
        );
        let target = fill * spec.r() * spec.r();
        let scale = (target / spec.ellipsoid_sum(&theta[..])).sqrt();
        theta[1..].iter_mut().for_each(|t| *t *= scale);
    }
    Ok(FourierCoefficients { theta })
}

/// Projection estimator: `theta_hat_j = <Y, phi_j>_n` on the model, zero off it.
/// The output has one slot per Fourier index up to the largest in the model.
pub fn functional_estimate(y: &[f64], design: &FourierDesign, model: &ModelSpec) -> Result<FourierCoefficients> {
    let n = design.n();
    if let Some(top) = model.max_index() {
        if top + 1 > n.saturating_sub(1) {
            return Err(Error::invalid(format!(
                "model uses Fourier index {} but the grid has only {} usable",
                top + 1,
                n.saturating_sub(1)
            )));
        }
    }
    if y.len() != n {
        return Err(Error::invalid(format!(
            "response has length {}, grid has {n} points",
            y.len()
        )));
    }
    let len = model.max_index().map_or(0, |m| m + 1);
    let inv = 1.0 / n as f64;
    let mut theta = vec![0.0; len];
    for i in model.indices() {
        theta[i] = (1..=n).zip(y).map(|(k, yk)| yk * design.value(i + 1, k)).sum::<f64>() * inv;
    }
    Ok(FourierCoefficients { theta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRisks {
    /// `||g_hat - g||^2` in `L2([0,1])`, by Parseval.
    pub l2_risk: f64,
    /// `||g_hat - g||_n^2` on the grid.
    pub empirical_risk: f64,
}

pub fn l2_and_empirical_risks(
    theta_hat: &FourierCoefficients,
    theta_true: &FourierCoefficients,
    design: &FourierDesign,
) -> FunctionalRisks {
    let len = theta_hat.len().max(theta_true.len());
    let diff: Vec<f64> = (0..len)
        .map(|i| theta_hat.theta.get(i).unwrap_or(&0.0) - theta_true.theta.get(i).unwrap_or(&0.0))
        .collect();
    FunctionalRisks {
        l2_risk: diff.iter().map(|d| d * d).sum(),
        empirical_risk: empirical_norm_sq(&design.synthesize(&diff)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::rademacher_vector;

    /// Midpoint rule for `int_0^1 f(t)^2 dt`.
    fn quadrature_l2_sq(f: &FourierCoefficients, points: usize) -> f64 {
        let h = 1.0 / points as f64;
        (0..points)
            .map(|i| {
                let v = f.value_at((i as f64 + 0.5) * h);
                v * v
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn constant_column_and_rejections() {
        let b = fourier_design_matrix(10, 5).unwrap();
        assert!(b.vector(0).iter().all(|&v| v == 1.0));
        assert_eq!(b.norm_sq(b.vector(0)), 1.0);
        assert!(fourier_design_matrix(10, 10).is_err());
        assert!(fourier_design_matrix(10, 0).is_err());
        assert!(fourier_design_matrix(10, 9).is_ok());
    }

    #[test]
    fn orthonormal_up_to_nyquist() {
        for n in [16, 50, 100, 256] {
            let b = fourier_design_matrix(n, n - 1).unwrap();
            assert!(b.gram_deviation() <= 1e-10, "n = {n}: {}", b.gram_deviation());
        }
    }

    #[test]
    fn hand_evaluated_n4() {
        let b = fourier_design_matrix(4, 3).unwrap();
        let s = SQRT_2;
        // t = 1/4, 1/2, 3/4, 1
        let cos = [0.0, -s, 0.0, s];
        let sin = [s, 0.0, -s, 0.0];
        for k in 0..4 {
            assert_eq!(b.vector(0)[k], 1.0);
            assert!((b.vector(1)[k] - cos[k]).abs() < 1e-15);
            assert!((b.vector(2)[k] - sin[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_table_matches_direct_evaluation() {
        let d = GridDesign::new(37).unwrap().fourier();
        for j in 1..37 {
            for k in 1..=37 {
                let direct = fourier_value(j, k as f64 / 37.0);
                assert!((d.value(j, k) - direct).abs() < 1e-12);
            }
        }
        let y: Vec<f64> = (0..37).map(|k| (k as f64 * 0.37).sin()).collect();
        let fast = d.coefficients(&y, 36).unwrap();
        for (j, c) in fast.iter().enumerate() {
            let slow = (1..=37)
                .zip(&y)
                .map(|(k, v)| v * fourier_value(j + 1, k as f64 / 37.0))
                .sum::<f64>()
                / 37.0;
            assert!((c - slow).abs() < 1e-12);
        }
        let theta = [0.5, -1.0, 0.0, 2.0, 0.25];
        let synth = d.synthesize(&theta);
        for (k, v) in synth.iter().enumerate() {
            let t = (k + 1) as f64 / 37.0;
            let slow: f64 = theta
                .iter()
                .enumerate()
                .map(|(i, th)| th * fourier_value(i + 1, t))
                .sum();
            assert!((v - slow).abs() < 1e-12);
        }
        let pts = GridDesign::new(5).unwrap().points();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(pts[4], 1.0);
        assert!(pts[0] > 0.0);
    }

    #[test]
    fn empirical_norms() {
        assert_eq!(empirical_norm(&[1.0; 7]), 1.0);
        let d = GridDesign::new(100).unwrap().fourier();
        assert!((empirical_norm(&d.column(2)) - 1.0).abs() < 1e-10);
        let v = rademacher_vector(Seed(3), 30).into_inner();
        let w: Vec<f64> = v.iter().enumerate().map(|(i, s)| s * i as f64 * 0.1).collect();
        let direct = (w.iter().map(|x| x * x).sum::<f64>() / 30.0).sqrt();
        assert!((empirical_norm(&w) - direct).abs() < 1e-15);
    }

    #[test]
    fn sobolev_generation() {
        let spec = SobolevSpec::new(1, 1.0).unwrap();
        let one = sobolev_signal(&spec, 1, Seed(1), 0.9).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(spec.c(1), 0.0);
        assert!(spec.contains(&one.theta));

        let full = sobolev_signal(&spec, 50, Seed(1), 1.0).unwrap();
        assert!((spec.ellipsoid_sum(&full.theta) - 1.0 / (PI * PI)).abs() < 1e-10);
        assert!(spec.contains(&full.theta));

        let a = sobolev_signal(&spec, 50, Seed(2), 0.9).unwrap();
        let b = sobolev_signal(&spec, 50, Seed(3), 0.9).unwrap();
        assert_ne!(a, b);
        assert!(spec.contains(&a.theta) && spec.contains(&b.theta));
        assert!(!spec.contains(&full.theta.iter().map(|t| t * 1.01).collect::<Vec<_>>()));

        assert_eq!(SobolevSpec::new(2, 1.0).unwrap().c(5), 16.0);
        assert_eq!(SobolevSpec::new(2, 1.0).unwrap().c(4), 16.0);
        assert!(SobolevSpec::new(0, 1.0).is_err());
    }

    #[test]
    fn estimates_recover_coefficients() {
        let d = GridDesign::new(64).unwrap().fourier();
        let ones = vec![1.0; 64];
        assert_eq!(
            functional_estimate(&ones, &d, &ModelSpec::prefix(1)).unwrap().theta,
            vec![1.0]
        );

        let f = figure1();
        let y = f.grid_values(&d);
        let est = functional_estimate(&y, &d, &ModelSpec::prefix(3)).unwrap();
        for (a, b) in est.theta.iter().zip(&f.theta) {
            assert!((a - b).abs() < 1e-12);
        }

        let theta = sobolev_signal(&SobolevSpec::new(1, 1.0).unwrap(), 63, Seed(8), 0.9).unwrap();
        let y = theta.grid_values(&d);
        let est = functional_estimate(&y, &d, &ModelSpec::prefix(63)).unwrap();
        for (a, b) in est.theta.iter().zip(&theta.theta) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(functional_estimate(&y, &d, &ModelSpec::prefix(64)).is_err());
    }

    #[test]
    fn risks_agree_below_nyquist() {
        let d = GridDesign::new(50).unwrap().fourier();
        let f = sobolev_signal(&SobolevSpec::new(2, 1.0).unwrap(), 49, Seed(4), 0.9).unwrap();
        let zero = l2_and_empirical_risks(&f, &f, &d);
        assert_eq!(zero.l2_risk, 0.0);
        assert!(zero.empirical_risk < 1e-28);
        let g = FourierCoefficients::new(vec![0.3, -0.1, 0.0, 0.2]).unwrap();
        let r = l2_and_empirical_risks(&g, &f, &d);
        assert!((r.l2_risk - r.empirical_risk).abs() < 1e-8);
    }

    #[test]
    fn super_nyquist_component_aliases() {
        let n = 16;
        let d = GridDesign::new(n).unwrap().fourier();
        let mut theta = vec![0.0; 34];
        theta[1] = 0.4;
        theta[33] = 0.3; // phi_34 = sqrt2 cos(2 pi 17 t) equals phi_2 on the grid
        let f = FourierCoefficients::new(theta).unwrap();
        let zero = FourierCoefficients::new(vec![0.0]).unwrap();
        let risks = l2_and_empirical_risks(&zero, &f, &d);
        let quad = quadrature_l2_sq(&f, 100_000);
        assert!((quad - risks.l2_risk).abs() < 1e-9);
        assert!((risks.l2_risk - risks.empirical_risk).abs() > 1e-3);

        let y = f.grid_values(&d);
        let est = functional_estimate(&y, &d, &ModelSpec::prefix(n - 1)).unwrap();
        let drift = est
            .theta
            .iter()
            .zip(&f.theta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(drift > 0.1);
        assert!(
            drift <= f.aliasing_bound(n) + 1e-12,
            "{drift} vs {}",
            f.aliasing_bound(n)
        );
    }

    #[test]
    fn parseval_on_grid_space() {
        for n in [16, 100, 256] {
            let d = GridDesign::new(n).unwrap().fourier();
            let f = sobolev_signal(&SobolevSpec::new(1, 2.0).unwrap(), n - 1, Seed(n as u64), 0.9).unwrap();
            let emp = empirical_norm_sq(&f.grid_values(&d));
            let l2 = f.l2_norm_sq();
            assert!((emp - l2).abs() <= 1e-8 * l2);
        }
    }
}
