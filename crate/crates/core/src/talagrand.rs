//! Talagrand's convex distance for finite sets, and exact verification of the
//! convex distance inequality on the binary cube.
//!
//! `d_T(x, A) = sup_{alpha >= 0, ||alpha|| <= 1} min_{y in A} sum_i alpha_i 1[x_i != y_i]`.
//! With `M` the mismatch matrix (one 0/1 column per point of `A`), minimax
//! duality gives `d_T(x, A) = min_{nu in simplex} ||M nu||`. The solver works
//! on that dual with away-step Frank-Wolfe and exact line search. Its iterate
//! `nu` also yields a primal certificate `alpha = M nu / ||M nu||`, and the
//! difference between the two values bounds the error.

use std::fmt;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::concentration::bound_convex_distance;
use crate::error::{Error, Result};
use crate::randomness::Seed;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Largest cube handled by exhaustive enumeration.
pub const MAX_CUBE_DIM: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct FinitePointSet<T = i8> {
    points: Vec<Vec<T>>,
    dim: usize,
}

impl<T: PartialEq> FinitePointSet<T> {
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("point set is empty"))?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("points have unequal dimensions"));
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(Error::invalid(format!("point {i} is repeated")));
            }
        }
        Ok(FinitePointSet { points, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.points.iter().any(|p| p.as_slice() == x)
    }

    pub fn position(&self, x: &[T]) -> Option<usize> {
        self.points.iter().position(|p| p.as_slice() == x)
    }
}

/// Cube point with index `code`: coordinate `i` is `-1` when bit `i` is set.
pub fn cube_point(n: usize, code: u32) -> Vec<i8> {
    (0..n).map(|i| if (code >> i) & 1 == 1 { -1 } else { 1 }).collect()
}

fn cube_code(p: &[i8]) -> u32 {
    p.iter()
        .enumerate()
        .fold(0, |acc, (i, &s)| if s < 0 { acc | (1 << i) } else { acc })
}

impl FinitePointSet<i8> {
    pub fn singleton(point: Vec<i8>) -> Result<Self> {
        Self::new(vec![point])
    }

    /// All cube points within Hamming distance `radius` of `center`.
    pub fn hamming_ball(center: &[i8], radius: usize) -> Result<Self> {
        let n = center.len();
        check_cube_dim(n)?;
        let c = cube_code(center);
        let points = (0..1u32 << n)
            .filter(|code| (code ^ c).count_ones() as usize <= radius)
            .map(|code| cube_point(n, code))
            .collect();
        Self::new(points)
    }

    /// `size` distinct cube points chosen uniformly.
    pub fn random_subset(n: usize, size: usize, seed: Seed) -> Result<Self> {
        check_cube_dim(n)?;
        let total = 1usize << n;
        if size == 0 || size > total {
            return Err(Error::invalid(format!(
                "cannot draw {size} points from a cube of {total}"
            )));
        }
        let mut rng = seed.rng();
        let mut codes: Vec<usize> = sample(&mut rng, total, size).into_vec();
        codes.sort_unstable();
        Self::new(codes.into_iter().map(|c| cube_point(n, c as u32)).collect())
    }

    pub fn whole_cube(n: usize) -> Result<Self> {
        check_cube_dim(n)?;
        Self::new((0..1u32 << n).map(|c| cube_point(n, c)).collect())
    }
}

fn check_cube_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_CUBE_DIM {
        return Err(Error::Unsupported(format!(
            "cube dimension {n} outside 1..={MAX_CUBE_DIM}"
        )));
    }
    Ok(())
}

/// `n x |A|` indicator matrix of coordinate mismatches, stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchMatrix {
    rows: usize,
    columns: Vec<Vec<f64>>,
}

impl MismatchMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn entry(&self, i: usize, k: usize) -> u8 {
        self.columns[k][i] as u8
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }

    /// `M nu`.
    pub fn apply(&self, nu: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.rows];
        for (col, &weight) in self.columns.iter().zip(nu) {
            if weight != 0.0 {
                w.iter_mut().zip(col).for_each(|(wi, c)| *wi += weight * c);
            }
        }
        w
    }
}

pub fn mismatch_matrix<T: PartialEq>(x: &[T], set: &FinitePointSet<T>) -> Result<MismatchMatrix> {
    if x.len() != set.dim() {
        return Err(Error::invalid(format!(
            "point has dimension {} but the set lives in dimension {}",
            x.len(),
            set.dim()
        )));
    }
    let columns = set
        .points()
        .iter()
        .map(|y| x.iter().zip(y).map(|(a, b)| if a != b { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(MismatchMatrix { rows: x.len(), columns })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexDistanceResult {
    /// Dual value `||M nu||`, an upper bound on `d_T(x, A)`.
    pub value: f64,
    /// `min_y <alpha, 1[x != y]>`, a lower bound on `d_T(x, A)`.
    pub primal_value: f64,
    pub dual_weights: Vec<f64>,
    pub primal_alpha: Vec<f64>,
    pub duality_gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexDistanceSolver {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ConvexDistanceSolver {
    fn default() -> Self {
        ConvexDistanceSolver {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl ConvexDistanceSolver {
    pub fn with_tol(tol: f64) -> Self {
        ConvexDistanceSolver { tol, ..Self::default() }
    }

    pub fn solve<T: PartialEq>(&self, x: &[T], set: &FinitePointSet<T>) -> Result<ConvexDistanceResult> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance {} must be positive", self.tol)));
        }
        let m = mismatch_matrix(x, set)?;
        if let Some(k) = set.position(x) {
            let mut nu = vec![0.0; set.len()];
            nu[k] = 1.0;
            return Ok(ConvexDistanceResult {
                value: 0.0,
                primal_value: 0.0,
                dual_weights: nu,
                primal_alpha: vec![0.0; m.rows()],
                duality_gap: 0.0,
                iterations: 0,
            });
        }
        self.away_step_frank_wolfe(&m)
    }

    fn away_step_frank_wolfe(&self, m: &MismatchMatrix) -> Result<ConvexDistanceResult> {
        let k = m.cols();
        let col_sq: Vec<f64> = m.columns.iter().map(|c| c.iter().sum()).collect();
        // start at the nearest point in Hamming distance
        let start = (0..k)
            .min_by(|&a, &b| col_sq[a].total_cmp(&col_sq[b]))
            .expect("nonempty set");
        let mut nu = vec![0.0; k];
        nu[start] = 1.0;
        let mut active = vec![start];
        let mut grad = vec![0.0; k];

        let mut best: Option<ConvexDistanceResult> = None;
        for iter in 0..=self.max_iter {
            let w = m.apply(&nu);
            let qv: f64 = w.iter().map(|v| v * v).sum();
            for (g, col) in grad.iter_mut().zip(&m.columns) {
                *g = crate::linear::dot(col, &w);
            }
            let fw = (0..k).min_by(|&a, &b| grad[a].total_cmp(&grad[b])).unwrap();
            let value = qv.sqrt();
            let primal_value = grad[fw] / value;
            let gap = (value - primal_value).max(0.0);

            if best.as_ref().is_none_or(|b| gap < b.duality_gap) || gap <= self.tol || iter == self.max_iter {
                let certificate = ConvexDistanceResult {
                    value,
                    primal_value,
                    dual_weights: nu.clone(),
                    primal_alpha: w.iter().map(|v| v / value).collect(),
                    duality_gap: gap,
                    iterations: iter,
                };
                if gap <= self.tol {
                    return Ok(certificate);
                }
                best = Some(certificate);
            }
            if iter == self.max_iter {
                break;
            }

            let away = *active.iter().max_by(|&&a, &&b| grad[a].total_cmp(&grad[b])).unwrap();
            let fw_gap = qv - grad[fw];
            let away_gap = grad[away] - qv;
            if fw_gap >= away_gap {
                // nu <- nu + gamma (e_fw - nu)
                let slope = grad[fw] - qv;
                let curv = col_sq[fw] - 2.0 * grad[fw] + qv;
                let gamma = if curv > 0.0 {
                    (-slope / curv).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                if gamma == 0.0 {
                    continue;
                }
                nu.iter_mut().for_each(|v| *v *= 1.0 - gamma);
                nu[fw] += gamma;
                if gamma == 1.0 {
                    active.clear();
                    nu.iter_mut().enumerate().for_each(|(j, v)| {
                        if j != fw {
                            *v = 0.0
                        }
                    });
                }
                if !active.contains(&fw) {
                    active.push(fw);
                }
            } else {
                // nu <- nu + gamma (nu - e_away)
                let weight = nu[away];
                let gamma_max = weight / (1.0 - weight);
                let slope = qv - grad[away];
                let curv = qv - 2.0 * grad[away] + col_sq[away];
                let gamma = if curv > 0.0 {
                    (-slope / curv).clamp(0.0, gamma_max)
                } else {
                    gamma_max
                };
                if gamma == 0.0 {
                    continue;
                }
                nu.iter_mut().for_each(|v| *v *= 1.0 + gamma);
                nu[away] -= gamma;
                if gamma >= gamma_max {
                    nu[away] = 0.0;
                    active.retain(|&j| j != away);
                }
            }
            let total: f64 = nu.iter().sum();
            nu.iter_mut().for_each(|v| *v /= total);
        }
        let best = best.expect("at least one iterate");
        Err(Error::ConvergenceFailure {
            iterations: self.max_iter,
            gap: best.duality_gap,
            best: Box::new(best),
        })
    }
}

pub fn convex_distance<T: PartialEq>(x: &[T], set: &FinitePointSet<T>, tol: f64) -> Result<ConvexDistanceResult> {
    ConvexDistanceSolver::with_tol(tol).solve(x, set)
}

/// Minimum of `||M nu||` over the simplex grid `{nu : resolution * nu in N^k}`.
/// Independent of the solver; limited to `|A| <= 4`.
pub fn convex_distance_grid_oracle<T: PartialEq>(x: &[T], set: &FinitePointSet<T>, resolution: usize) -> Result<f64> {
    if set.len() > 4 {
        return Err(Error::Unsupported(format!(
            "grid oracle enumerates at most 4 points, got {}",
            set.len()
        )));
    }
    if resolution == 0 {
        return Err(Error::invalid("grid resolution must be positive"));
    }
    let m = mismatch_matrix(x, set)?;
    let k = m.cols();
    let r = resolution as f64;
    let mut counts = vec![0usize; k];
    let mut best = f64::INFINITY;
    let mut nu = vec![0.0; k];
    grid_recurse(&m, &mut counts, 0, resolution, r, &mut nu, &mut best);
    Ok(best)
}

fn grid_recurse(
    m: &MismatchMatrix,
    counts: &mut [usize],
    pos: usize,
    remaining: usize,
    r: f64,
    nu: &mut [f64],
    best: &mut f64,
) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        for (v, &c) in nu.iter_mut().zip(counts.iter()) {
            *v = c as f64 / r;
        }
        let w = m.apply(nu);
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < *best {
            *best = norm;
        }
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        grid_recurse(m, counts, pos + 1, remaining - c, r, nu, best);
    }
}

/// Worst-case overestimate of [`convex_distance_grid_oracle`]:
/// `2 (k - 1) / resolution * max_k ||M_k||`.
pub fn grid_modulus<T: PartialEq>(x: &[T], set: &FinitePointSet<T>, resolution: usize) -> Result<f64> {
    let m = mismatch_matrix(x, set)?;
    let widest = m
        .columns
        .iter()
        .map(|c| c.iter().sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(2.0 * (m.cols() as f64 - 1.0) / resolution as f64 * widest)
}

/// The exact probability `numerator / 2^log2_denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicProb {
    pub numerator: u64,
    pub log2_denominator: u32,
}

impl DyadicProb {
    pub fn denominator(&self) -> u64 {
        1u64 << self.log2_denominator
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator() as f64
    }

    /// Exact product; both denominators are powers of two.
    pub fn product(self, other: DyadicProb) -> DyadicProb {
        DyadicProb {
            numerator: self.numerator * other.numerator,
            log2_denominator: self.log2_denominator + other.log2_denominator,
        }
    }
}

impl fmt::Display for DyadicProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator())
    }
}

impl Serialize for DyadicProb {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeRow {
    pub t: f64,
    pub prob_a: DyadicProb,
    pub prob_tail: DyadicProb,
    /// Points whose certificate interval `[primal, dual]` straddles `t`.
    pub ambiguous: u64,
    pub product: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeReport {
    pub n: usize,
    pub set_size: usize,
    pub rows: Vec<CubeRow>,
    pub max_ratio: f64,
    pub max_duality_gap: f64,
    /// `(lower, upper)` certificate for each cube point, indexed by [`cube_point`] code.
    #[serde(skip)]
    pub distances: Vec<(f64, f64)>,
}

impl CubeReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Pairs `(x, y)` with `d_T(x,A) - d_T(y,A) > sqrt(Hamming(x,y))` beyond
    /// the certificate slack.
    pub fn lipschitz_violations(&self) -> usize {
        let total = self.distances.len() as u32;
        (0..total)
            .into_par_iter()
            .map(|a| {
                let (_, ua) = self.distances[a as usize];
                (0..total)
                    .filter(|&b| {
                        let (lb, _) = self.distances[b as usize];
                        let h = f64::from((a ^ b).count_ones());
                        ua - lb > h.sqrt() + 1e-9
                    })
                    .count()
            })
            .sum()
    }
}

/// Enumerates `{-1, 1}^n` under the uniform measure and checks
/// `P(A) P(d_T(X, A) >= t) <= exp(-t^2/4)` at every `t`.
///
/// Probabilities are integer counts over `2^n`. The tail count uses the dual
/// upper bound of each distance, so it never undercounts.
pub fn verify_convex_distance_inequality(
    set: &FinitePointSet<i8>,
    n: usize,
    t_grid: &[f64],
    solver: &ConvexDistanceSolver,
) -> Result<CubeReport> {
    check_cube_dim(n)?;
    if set.dim() != n {
        return Err(Error::invalid(format!("set lives in dimension {}, not {n}", set.dim())));
    }
    let total = 1u32 << n;
    let results: Vec<Result<ConvexDistanceResult>> = (0..total)
        .into_par_iter()
        .map(|code| solver.solve(&cube_point(n, code), set))
        .collect();
    let mut distances = Vec::with_capacity(total as usize);
    let mut max_gap: f64 = 0.0;
    for r in results {
        let r = r?;
        max_gap = max_gap.max(r.duality_gap);
        distances.push((r.primal_value.min(r.value), r.value));
    }
    let log2 = n as u32;
    let prob_a = DyadicProb {
        numerator: set.len() as u64,
        log2_denominator: log2,
    };
    let rows: Vec<CubeRow> = t_grid
        .iter()
        .map(|&t| {
            let tail = distances.iter().filter(|d| d.1 >= t).count() as u64;
            let ambiguous = distances.iter().filter(|d| d.0 < t && d.1 >= t).count() as u64;
            let prob_tail = DyadicProb {
                numerator: tail,
                log2_denominator: log2,
            };
            let product = prob_a.product(prob_tail).to_f64();
            let bound = bound_convex_distance(t);
            CubeRow {
                t,
                prob_a,
                prob_tail,
                ambiguous,
                product,
                bound,
                ratio: product / bound,
                pass: product <= bound,
            }
        })
        .collect();
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(CubeReport {
        n,
        set_size: set.len(),
        rows,
        max_ratio,
        max_duality_gap: max_gap,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hamming(a: &[i8], b: &[i8]) -> usize {
        a.iter().zip(b).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn mismatch_small_cases() {
        let a = FinitePointSet::new(vec![vec![-1i8, 1], vec![1, -1]]).unwrap();
        let m = mismatch_matrix(&[1i8, 1], &a).unwrap();
        assert_eq!(m.column(0), &[1.0, 0.0]);
        assert_eq!(m.column(1), &[0.0, 1.0]);
        let m = mismatch_matrix(&[-1i8, 1], &a).unwrap();
        assert!(m.column(0).iter().all(|&v| v == 0.0));
        assert!(mismatch_matrix(&[1i8, 1, 1], &a).is_err());
    }

    #[test]
    fn mismatch_matches_recomputation() {
        let set = FinitePointSet::random_subset(12, 5, Seed(4)).unwrap();
        let x = Seed(5).sampler().next_signs_i8(12);
        let m = mismatch_matrix(&x, &set).unwrap();
        for (k, y) in set.points().iter().enumerate() {
            for i in 0..12 {
                assert_eq!(m.entry(i, k) == 1, x[i] != y[i]);
            }
        }
    }

    #[test]
    fn point_set_validation() {
        assert!(FinitePointSet::<i8>::new(vec![]).is_err());
        assert!(FinitePointSet::new(vec![vec![1i8], vec![1, 1]]).is_err());
        assert!(FinitePointSet::new(vec![vec![1i8, 1], vec![1, 1]]).is_err());
        assert_eq!(FinitePointSet::hamming_ball(&[1; 10], 1).unwrap().len(), 11);
        assert!(FinitePointSet::whole_cube(15).is_err());
    }

    #[test]
    fn member_and_singleton() {
        let a = FinitePointSet::new(vec![vec![1i8, -1, 1], vec![-1, -1, -1]]).unwrap();
        let r = convex_distance(&[1i8, -1, 1], &a, 1e-8).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.dual_weights, vec![1.0, 0.0]);

        let y = vec![1i8; 9];
        let single = FinitePointSet::singleton(y.clone()).unwrap();
        for h in 0..=9 {
            let mut x = y.clone();
            x.iter_mut().take(h).for_each(|v| *v = -1);
            let r = convex_distance(&x, &single, 1e-8).unwrap();
            assert!((r.value - (h as f64).sqrt()).abs() <= 1e-9);
            let norm: f64 = r.primal_alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(h == 0 || (norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_instance() {
        let a = FinitePointSet::new(vec![vec![-1i8, 1], vec![1, -1]]).unwrap();
        let r = convex_distance(&[1i8, 1], &a, 1e-10).unwrap();
        assert!((r.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((r.dual_weights[0] - 0.5).abs() < 1e-6);
        let grid = convex_distance_grid_oracle(&[1i8, 1], &a, 10_000).unwrap();
        assert!((grid - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
        // both grid nodes adjacent to 1/2 are exact at even resolution
        assert!((grid - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn grid_oracle_singleton_and_limits() {
        let y = vec![1i8; 6];
        let x = vec![-1i8, -1, 1, -1, 1, 1];
        let single = FinitePointSet::singleton(y).unwrap();
        for res in [1, 7, 50] {
            assert!((convex_distance_grid_oracle(&x, &single, res).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        }
        let five = FinitePointSet::random_subset(6, 5, Seed(1)).unwrap();
        assert!(matches!(
            convex_distance_grid_oracle(&x, &five, 10),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn three_point_grid_agreement() {
        for s in 0..10 {
            let set = FinitePointSet::random_subset(9, 3, Seed(100 + s)).unwrap();
            let x = Seed(200 + s).sampler().next_signs_i8(9);
            let r = convex_distance(&x, &set, 1e-9).unwrap();
            let g = convex_distance_grid_oracle(&x, &set, 200).unwrap();
            let modulus = grid_modulus(&x, &set, 200).unwrap();
            assert!(g >= r.value - 1e-9 - r.duality_gap, "grid below solver");
            assert!(
                g - r.value <= modulus + 1e-9,
                "grid {g} vs {} (modulus {modulus})",
                r.value
            );
        }
    }

    #[test]
    fn convergence_failure_is_reported() {
        let set = FinitePointSet::random_subset(10, 12, Seed(3)).unwrap();
        let x = (0..1u32 << 10)
            .map(|c| cube_point(10, c))
            .find(|p| !set.contains(p))
            .unwrap();
        let solver = ConvexDistanceSolver {
            tol: 1e-300,
            max_iter: 5,
        };
        match solver.solve(&x, &set) {
            Err(Error::ConvergenceFailure { best, iterations, .. }) => {
                assert_eq!(iterations, 5);
                assert!(best.value > 0.0);
            }
            // a lucky vertex can certify exactly
            Ok(r) => assert_eq!(r.duality_gap, 0.0),
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn whole_cube_and_singleton_enumeration() {
        let t_grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
        let solver = ConvexDistanceSolver::default();
        let whole = FinitePointSet::whole_cube(6).unwrap();
        let rep = verify_convex_distance_inequality(&whole, 6, &t_grid, &solver).unwrap();
        assert!(rep.rows.iter().all(|r| r.prob_tail.numerator == 0 && r.pass));

        let ones = vec![1i8; 10];
        let single = FinitePointSet::singleton(ones.clone()).unwrap();
        let rep = verify_convex_distance_inequality(&single, 10, &t_grid, &solver).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.rows[0].prob_a.to_string(), "1/1024");
        for row in &rep.rows {
            let exact = (0..1024u32)
                .filter(|&c| (hamming(&cube_point(10, c), &ones) as f64).sqrt() >= row.t)
                .count() as u64;
            assert_eq!(row.prob_tail.numerator, exact, "t = {}", row.t);
            assert_eq!(row.ambiguous, 0);
        }
        assert!(verify_convex_distance_inequality(&single, 15, &t_grid, &solver).is_err());
    }

    #[test]
    fn ball_enumeration_and_lipschitz() {
        let ball = FinitePointSet::hamming_ball(&[1; 10], 1).unwrap();
        let rep = verify_convex_distance_inequality(
            &ball,
            10,
            &[0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            &ConvexDistanceSolver::default(),
        )
        .unwrap();
        assert!(rep.passed(), "{:?}", rep.rows);
        assert!(rep.max_duality_gap <= 1e-8);
        assert_eq!(rep.lipschitz_violations(), 0);
        // distance 2 from the centre: nearest ball points mismatch in one coordinate each
        let mut x = vec![1i8; 10];
        x[0] = -1;
        x[1] = -1;
        let r = convex_distance(&x, &ball, 1e-10).unwrap();
        assert!((r.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    fn arb_instance() -> impl Strategy<Value = (usize, Vec<u32>, u32)> {
        (2usize..=8).prop_flat_map(|n| {
            let total = 1u32 << n;
            (
                Just(n),
                proptest::collection::btree_set(0..total, 1..=6).prop_map(|s| s.into_iter().collect()),
                0..total,
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn certificate_invariants((n, codes, xc) in arb_instance()) {
            let set = FinitePointSet::new(codes.iter().map(|&c| cube_point(n, c)).collect()).unwrap();
            let x = cube_point(n, xc);
            let r = convex_distance(&x, &set, 1e-9).unwrap();

            let total: f64 = r.dual_weights.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(r.dual_weights.iter().all(|&v| v >= 0.0));
            let norm: f64 = r.primal_alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
            prop_assert!(norm <= 1.0 + 1e-9);
            prop_assert!(r.primal_alpha.iter().all(|&a| a >= 0.0));
            prop_assert!(r.duality_gap <= 1e-9);

            // recompute the primal objective directly from alpha
            let primal = set
                .points()
                .iter()
                .map(|y| x.iter().zip(y).zip(&r.primal_alpha).filter(|((a, b), _)| a != b).map(|(_, al)| al).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            prop_assert!((r.value - primal).abs() <= r.duality_gap + 1e-12);

            prop_assert_eq!(r.value == 0.0, set.contains(&x));
            prop_assert!(r.value <= (n as f64).sqrt() + 1e-12);

            // growing A can only shrink the distance
            let mut bigger = codes.clone();
            let extra = (xc + 1) % (1 << n);
            if !bigger.contains(&extra) {
                bigger.push(extra);
                let big = FinitePointSet::new(bigger.iter().map(|&c| cube_point(n, c)).collect()).unwrap();
                let rb = convex_distance(&x, &big, 1e-9).unwrap();
                prop_assert!(rb.value <= r.value + 2e-9);
            }
        }
    }
}
