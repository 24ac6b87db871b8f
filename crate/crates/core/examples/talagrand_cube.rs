//! Exact check of P(A) P(d_T(X, A) >= t) <= exp(-t^2/4) on {-1, 1}^10.

use minpen::randomness::Seed;
use minpen::talagrand::{verify_convex_distance_inequality, ConvexDistanceSolver, FinitePointSet};

fn main() -> minpen::Result<()> {
    let n = 10;
    let t_grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let sets = [
        ("singleton", FinitePointSet::singleton(vec![1; n])?),
        ("ball r=1", FinitePointSet::hamming_ball(&vec![1; n], 1)?),
        ("random 16", FinitePointSet::random_subset(n, 16, Seed(1))?),
    ];
    let solver = ConvexDistanceSolver::default();
    for (name, set) in &sets {
        let report = verify_convex_distance_inequality(set, n, &t_grid, &solver)?;
        println!("{name}: |A| = {}, max gap {:.1e}", set.len(), report.max_duality_gap);
        for row in &report.rows {
            println!(
                "  t = {:.1}  P(A) = {:>7}  P(d >= t) = {:>9}  product {:.5} <= {:.5}  {}",
                row.t,
                row.prob_a.to_string(),
                row.prob_tail.to_string(),
                row.product,
                row.bound,
                if row.pass { "ok" } else { "VIOLATED" }
            );
        }
    }
    Ok(())
}
