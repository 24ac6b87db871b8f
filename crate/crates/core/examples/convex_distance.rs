//! One convex distance computation with its primal and dual certificates.

use minpen::talagrand::{convex_distance, convex_distance_grid_oracle, grid_modulus, FinitePointSet};

fn main() -> minpen::Result<()> {
    let a = FinitePointSet::new(vec![vec![-1i8, 1, 1, 1], vec![1, -1, 1, 1], vec![1, 1, -1, -1]])?;
    let x = [1i8, 1, 1, 1];
    let r = convex_distance(&x, &a, 1e-10)?;
    println!(
        "d_T(x, A) in [{:.10}, {:.10}] after {} iterations",
        r.primal_value, r.value, r.iterations
    );
    println!(
        "weights on A:    {:?}",
        r.dual_weights.iter().map(|w| format!("{w:.4}")).collect::<Vec<_>>()
    );
    println!(
        "alpha:           {:?}",
        r.primal_alpha.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
    );
    let grid = convex_distance_grid_oracle(&x, &a, 300)?;
    println!("grid oracle:     {grid:.6} (modulus {:.4})", grid_modulus(&x, &a, 300)?);
    Ok(())
}
