//! Orthonormal bases, linear models spanned by subsets of a basis, and the
//! least-squares quantities built on them.
//!
//! Basis indices are zero-based positions in the basis: the model `{0, 1, 2}`
//! is spanned by the first three basis vectors.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::randomness::Seed;

/// Entrywise tolerance of the Gram-identity check.
pub const GRAM_TOL: f64 = 1e-10;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerProduct {
    /// `<a, b> = sum a_i b_i`
    Euclidean,
    /// `<a, b>_n = (1/n) sum a_i b_i`
    Empirical,
}

impl InnerProduct {
    pub fn dot(self, a: &[f64], b: &[f64]) -> f64 {
        let s = dot(a, b);
        match self {
            InnerProduct::Euclidean => s,
            InnerProduct::Empirical => s / a.len() as f64,
        }
    }

    pub fn norm_sq(self, a: &[f64]) -> f64 {
        self.dot(a, a)
    }
}

#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    ambient: usize,
    vectors: Vec<Vec<f64>>,
    inner: InnerProduct,
}

impl OrthonormalBasis {
    /// Accepts `vectors` only if their Gram matrix is the identity to [`GRAM_TOL`].
    pub fn new(vectors: Vec<Vec<f64>>, inner: InnerProduct) -> Result<Self> {
        let basis = Self::assemble(vectors, inner)?;
        let dev = basis.gram_deviation();
        if dev > GRAM_TOL {
            return Err(Error::invalid(format!(
                "basis is not orthonormal: max |G - I| = {dev:e}"
            )));
        }
        Ok(basis)
    }

    /// Modified Gram-Schmidt on `vectors`, in order.
    pub fn orthonormalize(vectors: Vec<Vec<f64>>, inner: InnerProduct) -> Result<Self> {
        let mut basis = Self::assemble(vectors, inner)?;
        for j in 0..basis.vectors.len() {
            let (done, rest) = basis.vectors.split_at_mut(j);
            let v = &mut rest[0];
            for q in done.iter() {
                let c = inner.dot(v, q);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
            let norm = inner.norm_sq(v).sqrt();
            if norm < 1e-12 {
                return Err(Error::invalid(format!(
                    "vector {j} is linearly dependent on its predecessors"
                )));
            }
            v.iter_mut().for_each(|vi| *vi /= norm);
        }
        Ok(basis)
    }

    fn assemble(vectors: Vec<Vec<f64>>, inner: InnerProduct) -> Result<Self> {
        let ambient = vectors.first().map_or(0, Vec::len);
        if vectors.iter().any(|v| v.len() != ambient) {
            return Err(Error::invalid("basis vectors have unequal lengths"));
        }
        if vectors.len() > ambient {
            return Err(Error::invalid(format!(
                "{} vectors cannot be orthonormal in dimension {ambient}",
                vectors.len()
            )));
        }
        Ok(OrthonormalBasis {
            ambient,
            vectors,
            inner,
        })
    }

    /// Orthonormal by construction; callers are responsible for the guarantee.
    pub(crate) fn from_trusted(ambient: usize, vectors: Vec<Vec<f64>>, inner: InnerProduct) -> Self {
        debug_assert!(vectors.iter().all(|v| v.len() == ambient));
        OrthonormalBasis {
            ambient,
            vectors,
            inner,
        }
    }

    pub fn standard(n: usize) -> Self {
        let vectors = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        Self::from_trusted(n, vectors, InnerProduct::Euclidean)
    }

    /// First `size` columns of a Haar-like random rotation of `R^n`
    /// (Gram-Schmidt on Gaussian vectors).
    pub fn random_rotation(n: usize, size: usize, seed: Seed) -> Result<Self> {
        if size > n {
            return Err(Error::invalid(format!("cannot take {size} frame vectors in R^{n}")));
        }
        let mut rng = seed.rng();
        let vectors = (0..size)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        Self::orthonormalize(vectors, InnerProduct::Euclidean)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn inner(&self) -> InnerProduct {
        self.inner
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.inner.dot(a, b)
    }

    pub fn norm_sq(&self, a: &[f64]) -> f64 {
        self.inner.norm_sq(a)
    }

    /// `max |<phi_i, phi_j> - delta_ij|`.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.vectors.len() {
            for j in i..self.vectors.len() {
                let g = self.dot(&self.vectors[i], &self.vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    pub(crate) fn check_ambient(&self, y: &[f64], what: &str) -> Result<()> {
        if y.len() != self.ambient {
            return Err(Error::invalid(format!(
                "{what} has length {} but the basis lives in dimension {}",
                y.len(),
                self.ambient
            )));
        }
        Ok(())
    }

    pub(crate) fn check_model(&self, model: &ModelSpec) -> Result<()> {
        match model.max_index() {
            Some(j) if j >= self.len() => Err(Error::invalid(format!(
                "model index {j} out of range for a basis of {} vectors",
                self.len()
            ))),
            _ => Ok(()),
        }
    }

    /// `<y, phi_j>` for every basis vector.
    pub fn all_coefficients(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_ambient(y, "input vector")?;
        Ok(self.vectors.iter().map(|v| self.dot(y, v)).collect())
    }

    pub fn coefficients(&self, y: &[f64], model: &ModelSpec) -> Result<Vec<f64>> {
        self.check_ambient(y, "input vector")?;
        self.check_model(model)?;
        Ok(model.indices().map(|j| self.dot(y, &self.vectors[j])).collect())
    }

    /// `sum_j coeffs[k] * phi_{model[k]}`.
    pub fn synthesize(&self, model: &ModelSpec, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_model(model)?;
        if coeffs.len() != model.dimension() {
            return Err(Error::invalid("coefficient count differs from model dimension"));
        }
        let mut out = vec![0.0; self.ambient];
        for (j, &c) in model.indices().zip(coeffs) {
            out.iter_mut().zip(&self.vectors[j]).for_each(|(o, p)| *o += c * p);
        }
        Ok(out)
    }
}

/// A set of basis indices. Prefix models `{0, .., D-1}` are stored compactly.
#[derive(Clone)]
pub struct ModelSpec {
    repr: Repr,
}

#[derive(Clone)]
enum Repr {
    Prefix(usize),
    Explicit(Vec<usize>),
}

impl ModelSpec {
    /// Strictly increasing, nonempty index list.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("model indices are empty; use ModelSpec::null()"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("model indices must be strictly increasing"));
        }
        if indices.iter().enumerate().all(|(k, &j)| k == j) {
            return Ok(ModelSpec::prefix(indices.len()));
        }
        Ok(ModelSpec {
            repr: Repr::Explicit(indices),
        })
    }

    pub fn null() -> Self {
        ModelSpec::prefix(0)
    }

    /// The nested model `S_D` spanned by the first `d` basis vectors.
    pub fn prefix(d: usize) -> Self {
        ModelSpec { repr: Repr::Prefix(d) }
    }

    pub fn dimension(&self) -> usize {
        match &self.repr {
            Repr::Prefix(d) => *d,
            Repr::Explicit(v) => v.len(),
        }
    }

    pub fn is_null(&self) -> bool {
        self.dimension() == 0
    }

    /// `Some(D)` when the model is `{0, .., D-1}`.
    pub fn prefix_len(&self) -> Option<usize> {
        match &self.repr {
            Repr::Prefix(d) => Some(*d),
            Repr::Explicit(_) => None,
        }
    }

    pub fn indices(&self) -> Indices<'_> {
        match &self.repr {
            Repr::Prefix(d) => Indices::Range(0..*d),
            Repr::Explicit(v) => Indices::Slice(v.iter()),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.indices().collect()
    }

    pub fn max_index(&self) -> Option<usize> {
        match &self.repr {
            Repr::Prefix(0) => None,
            Repr::Prefix(d) => Some(d - 1),
            Repr::Explicit(v) => v.last().copied(),
        }
    }

    pub fn contains(&self, j: usize) -> bool {
        match &self.repr {
            Repr::Prefix(d) => j < *d,
            Repr::Explicit(v) => v.binary_search(&j).is_ok(),
        }
    }

    pub fn is_subset_of(&self, other: &ModelSpec) -> bool {
        self.indices().all(|j| other.contains(j))
    }
}

pub enum Indices<'a> {
    Range(std::ops::Range<usize>),
    Slice(std::slice::Iter<'a, usize>),
}

impl Iterator for Indices<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            Indices::Range(r) => r.next(),
            Indices::Slice(s) => s.next().copied(),
        }
    }
}

impl PartialEq for ModelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.dimension() == other.dimension() && self.indices().eq(other.indices())
    }
}

impl Eq for ModelSpec {}

impl Hash for ModelSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.dimension().hash(state);
        for j in self.indices() {
            j.hash(state);
        }
    }
}

/// Lexicographic on the index lists.
impl Ord for ModelSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices().cmp(other.indices())
    }
}

impl PartialOrd for ModelSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelSpec{self}")
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Prefix(d) if *d > 8 => write!(f, "{{0..{}}}", d - 1),
            _ => {
                let parts: Vec<String> = self.indices().map(|j| j.to_string()).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.indices())
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(deserializer)?;
        if v.is_empty() {
            return Ok(ModelSpec::null());
        }
        ModelSpec::new(v).map_err(serde::de::Error::custom)
    }
}

/// Models with their weights `x_m` and `Sigma = sum exp(-x_m)`.
#[derive(Debug, Clone)]
pub struct ModelCollection {
    models: Vec<ModelSpec>,
    weights: Vec<f64>,
    sigma_value: f64,
}

impl ModelCollection {
    pub fn new(models: Vec<ModelSpec>, weights: Vec<f64>) -> Result<Self> {
        if models.len() != weights.len() {
            return Err(Error::invalid("one weight per model is required"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid(format!("weight {w} is not a positive real")));
        }
        let mut seen = HashSet::with_capacity(models.len());
        if let Some(dup) = models.iter().find(|m| !seen.insert(*m)) {
            return Err(Error::invalid(format!("model {dup} appears twice")));
        }
        let sigma_value = weights.iter().map(|w| (-w).exp()).sum();
        Ok(ModelCollection {
            models,
            weights,
            sigma_value,
        })
    }

    /// `S_D = {0..D-1}` for `D = 1..=max_dim` with `x_D = alpha * D`.
    pub fn build_nested(basis: &OrthonormalBasis, max_dim: usize, alpha: f64) -> Result<Self> {
        if max_dim == 0 || max_dim > basis.len() {
            return Err(Error::invalid(format!("max_dim {max_dim} outside 1..={}", basis.len())));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(format!("alpha {alpha} must be positive")));
        }
        let models = (1..=max_dim).map(ModelSpec::prefix).collect();
        let weights = (1..=max_dim).map(|d| alpha * d as f64).collect();
        Self::new(models, weights)
    }

    pub fn models(&self) -> &[ModelSpec] {
        &self.models
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_of(&self, model: &ModelSpec) -> Option<f64> {
        self.models.iter().position(|m| m == model).map(|k| self.weights[k])
    }

    pub fn sigma_value(&self) -> f64 {
        self.sigma_value
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModelSpec, f64)> {
        self.models.iter().zip(self.weights.iter().copied())
    }

    pub fn max_dimension(&self) -> usize {
        self.models.iter().map(ModelSpec::dimension).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub fitted: Vec<f64>,
    pub coefficients: Vec<f64>,
}

/// Orthogonal projection of `y` onto `S_m`.
pub fn project(y: &[f64], basis: &OrthonormalBasis, model: &ModelSpec) -> Result<Projection> {
    let coefficients = basis.coefficients(y, model)?;
    let fitted = basis.synthesize(model, &coefficients)?;
    Ok(Projection { fitted, coefficients })
}

/// `chi^2_m = sum_{j in m} <eps, phi_j>^2`.
pub fn chi_square(eps: &[f64], basis: &OrthonormalBasis, model: &ModelSpec) -> Result<f64> {
    Ok(basis.coefficients(eps, model)?.iter().map(|c| c * c).sum())
}

/// `E ||f_hat_m - f||^2 = ||f_m - f||^2 + sigma^2 D_m`.
pub fn exact_risk(f: &[f64], basis: &OrthonormalBasis, model: &ModelSpec, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(format!("sigma {sigma} must be nonnegative")));
    }
    let fm = project(f, basis, model)?.fitted;
    let resid: Vec<f64> = f.iter().zip(&fm).map(|(a, b)| a - b).collect();
    Ok(basis.norm_sq(&resid) + sigma * sigma * model.dimension() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{derive_seed, rademacher_vector};
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = Seed(seed).rng();
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    /// Solves the normal equations `(B^T B) c = B^T y` by Gaussian elimination.
    fn normal_equations_projection(y: &[f64], cols: &[&[f64]]) -> Vec<f64> {
        let k = cols.len();
        let mut a = vec![vec![0.0; k + 1]; k];
        for i in 0..k {
            for j in 0..k {
                a[i][j] = dot(cols[i], cols[j]);
            }
            a[i][k] = dot(cols[i], y);
        }
        for p in 0..k {
            let piv = (p..k).max_by(|&r, &s| a[r][p].abs().total_cmp(&a[s][p].abs())).unwrap();
            a.swap(p, piv);
            let pivot = a[p].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != p {
                    let factor = row[p] / pivot[p];
                    for (x, y) in row[p..].iter_mut().zip(&pivot[p..]) {
                        *x -= factor * y;
                    }
                }
            }
        }
        let coef: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
        let mut out = vec![0.0; y.len()];
        for (c, col) in coef.iter().zip(cols) {
            out.iter_mut().zip(col.iter()).for_each(|(o, v)| *o += c * v);
        }
        out
    }

    #[test]
    fn nested_collection_sigma() {
        let basis = OrthonormalBasis::standard(5);
        let c = ModelCollection::build_nested(&basis, 3, 1.0).unwrap();
        assert_eq!(c.models()[2].to_vec(), vec![0, 1, 2]);
        let direct: f64 = (1..=3).map(|d| (-(d as f64)).exp()).sum();
        assert!((c.sigma_value() - direct).abs() < 1e-12);
        assert!((c.sigma_value() - 0.5530).abs() < 1e-4);

        let one = ModelCollection::build_nested(&basis, 1, 1.0).unwrap();
        assert!((one.sigma_value() - (-1.0f64).exp()).abs() < 1e-15);

        let big = ModelCollection::build_nested(&OrthonormalBasis::standard(100), 99, 1.0).unwrap();
        assert!(big.sigma_value() < 1.0 / (1f64.exp() - 1.0));
        assert!(1.0 / (1f64.exp() - 1.0) < 0.582);
    }

    #[test]
    fn nested_rejects_bad_max_dim() {
        let basis = OrthonormalBasis::standard(5);
        assert!(ModelCollection::build_nested(&basis, 0, 1.0).is_err());
        assert!(ModelCollection::build_nested(&basis, 6, 1.0).is_err());
    }

    #[test]
    fn collection_rejects_duplicates() {
        let m = ModelSpec::new(vec![0, 1]).unwrap();
        assert!(ModelCollection::new(vec![m.clone(), ModelSpec::prefix(2)], vec![1.0, 2.0]).is_err());
        assert!(ModelCollection::new(vec![m], vec![0.0]).is_err());
    }

    #[test]
    fn model_spec_normalizes_prefixes() {
        let a = ModelSpec::new(vec![0, 1, 2]).unwrap();
        assert_eq!(a.prefix_len(), Some(3));
        assert_eq!(a, ModelSpec::prefix(3));
        let b = ModelSpec::new(vec![0, 2]).unwrap();
        assert!(b < ModelSpec::new(vec![1]).unwrap());
        assert!(ModelSpec::new(vec![2, 1]).is_err());
        assert!(ModelSpec::new(vec![]).is_err());
        assert!(b.is_subset_of(&ModelSpec::prefix(3)));
    }

    #[test]
    fn projection_edge_cases() {
        let basis = OrthonormalBasis::random_rotation(6, 4, Seed(1)).unwrap();
        let m1 = ModelSpec::prefix(1);
        let p = project(basis.vector(0), &basis, &m1).unwrap();
        let resid: f64 = p.fitted.iter().zip(basis.vector(0)).map(|(a, b)| (a - b).powi(2)).sum();
        assert!(resid < 1e-24);
        let q = project(basis.vector(1), &basis, &m1).unwrap();
        assert!(q.fitted.iter().all(|v| v.abs() < 1e-12));
        assert!(project(&[1.0; 5], &basis, &m1).is_err());
    }

    #[test]
    fn projection_matches_normal_equations() {
        let basis = OrthonormalBasis::random_rotation(8, 5, Seed(11)).unwrap();
        let y = gaussian(8, 5);
        let model = ModelSpec::prefix(3);
        let p = project(&y, &basis, &model).unwrap();
        let cols: Vec<&[f64]> = (0..3).map(|j| basis.vector(j)).collect();
        let oracle = normal_equations_projection(&y, &cols);
        for (a, b) in p.fitted.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
        let resid: Vec<f64> = y.iter().zip(&p.fitted).map(|(a, b)| a - b).collect();
        assert!(rel_close(
            basis.norm_sq(&y),
            basis.norm_sq(&p.fitted) + basis.norm_sq(&resid),
            1e-8
        ));
    }

    #[test]
    fn chi_square_complete_and_coordinate() {
        let n = 16;
        let full = OrthonormalBasis::random_rotation(n, n, Seed(2)).unwrap();
        let std = OrthonormalBasis::standard(n);
        for r in 0..20 {
            let eps = rademacher_vector(derive_seed(Seed(4), r), n);
            let c = chi_square(eps.as_slice(), &full, &ModelSpec::prefix(n)).unwrap();
            assert!((c - n as f64).abs() < 1e-10);
            let e = chi_square(eps.as_slice(), &std, &ModelSpec::prefix(1)).unwrap();
            assert_eq!(e, 1.0);
        }
    }

    #[test]
    fn chi_square_monte_carlo_mean() {
        let n = 16;
        let basis = OrthonormalBasis::random_rotation(n, 4, Seed(8)).unwrap();
        let model = ModelSpec::prefix(4);
        let mut sampler = Seed(99).sampler();
        let mut eps = vec![0.0; n];
        let draws = 100_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            sampler.fill(&mut eps);
            sum += chi_square(&eps, &basis, &model).unwrap();
        }
        let mean = sum / draws as f64;
        assert!((mean - 4.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn exact_risk_cases_and_monte_carlo() {
        let n = 8;
        let basis = OrthonormalBasis::random_rotation(n, n, Seed(21)).unwrap();
        let model = ModelSpec::prefix(2);
        assert_eq!(
            exact_risk(&vec![0.0; n], &basis, &ModelSpec::prefix(5), 1.0).unwrap(),
            5.0
        );
        let inside = basis.synthesize(&model, &[0.3, -1.2]).unwrap();
        assert!((exact_risk(&inside, &basis, &model, 1.0).unwrap() - 2.0).abs() < 1e-12);

        let f = gaussian(n, 77);
        let sigma = 0.5;
        let expected = exact_risk(&f, &basis, &model, sigma).unwrap();
        let mut sampler = Seed(13).sampler();
        let mut eps = vec![0.0; n];
        let draws = 100_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            sampler.fill(&mut eps);
            let y: Vec<f64> = f.iter().zip(&eps).map(|(a, e)| a + sigma * e).collect();
            let fit = project(&y, &basis, &model).unwrap().fitted;
            let loss: f64 = fit.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum();
            s1 += loss;
            s2 += loss * loss;
        }
        let d = draws as f64;
        let mean = s1 / d;
        let se = ((s2 / d - mean * mean) / d).sqrt();
        assert!((mean - expected).abs() <= 3.0 * se, "mc {mean} vs {expected} (se {se})");
    }

    #[test]
    fn supplied_basis_must_be_orthonormal() {
        let bad = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        assert!(OrthonormalBasis::new(bad.clone(), InnerProduct::Euclidean).is_err());
        let fixed = OrthonormalBasis::orthonormalize(bad, InnerProduct::Euclidean).unwrap();
        assert!(fixed.gram_deviation() <= GRAM_TOL);
        assert!(
            OrthonormalBasis::orthonormalize(vec![vec![1.0, 1.0], vec![2.0, 2.0]], InnerProduct::Euclidean).is_err()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decompositions_hold(seed in any::<u64>(), sigma in 0.1f64..3.0, d in 1usize..6) {
            let n = 10;
            let basis = OrthonormalBasis::random_rotation(n, 7, Seed(seed)).unwrap();
            prop_assert!(basis.gram_deviation() <= GRAM_TOL);
            let f = gaussian(n, seed ^ 0xABCD);
            let eps = rademacher_vector(Seed(seed.wrapping_add(1)), n);
            let model = ModelSpec::prefix(d);
            let y: Vec<f64> = f.iter().zip(eps.as_slice()).map(|(a, e)| a + sigma * e).collect();
            let fit = project(&y, &basis, &model).unwrap().fitted;
            let fm = project(&f, &basis, &model).unwrap().fitted;
            let chi2 = chi_square(eps.as_slice(), &basis, &model).unwrap();

            // ||f_hat - f||^2 = ||f_m - f||^2 + ||f_hat - f_m||^2
            let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            let lhs = sq(&fit, &f);
            let rhs = sq(&fm, &f) + sq(&fit, &fm);
            prop_assert!(rel_close(lhs, rhs, 1e-8));

            // ||f_hat||^2 = ||f_m||^2 + sigma^2 chi^2 + 2 sigma <f_m, eps>
            let lhs = basis.norm_sq(&fit);
            let rhs = basis.norm_sq(&fm) + sigma * sigma * chi2 + 2.0 * sigma * dot(&fm, eps.as_slice());
            prop_assert!(rel_close(lhs, rhs, 1e-8));

            // chi^2 is monotone along nested models
            let bigger = chi_square(eps.as_slice(), &basis, &ModelSpec::prefix(d + 1)).unwrap();
            prop_assert!(chi2 <= bigger + 1e-12);
            prop_assert!(rel_close(chi2, basis.norm_sq(&project(eps.as_slice(), &basis, &model).unwrap().fitted), 1e-8));
        }
    }
}
