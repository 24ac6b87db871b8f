//! Empirical tails of chi = ||Pi_D eps|| against the closed-form bounds.

use minpen::concentration::{chi_suite, DEFAULT_T_GRID, DEFAULT_X_GRID};
use minpen::functional::fourier_design_matrix;
use minpen::linear::{InnerProduct, ModelSpec, OrthonormalBasis};
use minpen::randomness::Seed;

fn main() -> minpen::Result<()> {
    let n = 100;
    let design = fourier_design_matrix(n, 50)?;
    let s = 1.0 / (n as f64).sqrt();
    let basis = OrthonormalBasis::new(
        design
            .vectors()
            .iter()
            .map(|v| v.iter().map(|x| x * s).collect())
            .collect(),
        InnerProduct::Euclidean,
    )?;
    for d in [5, 20, 50] {
        let suite = chi_suite(
            &basis,
            &ModelSpec::prefix(d),
            &DEFAULT_T_GRID,
            &DEFAULT_X_GRID,
            100_000,
            Seed(d as u64),
        )?;
        println!(
            "D = {d}: Var(chi) = {:.4}, E chi = {:.4} in [{:.4}, {:.4}]",
            suite.efron_stein.empirical_variance,
            suite.expectation.mean_chi,
            suite.expectation.lower,
            suite.expectation.upper
        );
        for report in &suite.tails {
            for row in &report.rows {
                println!(
                    "  {:<22} {:>4}  empirical {:.5}  bound {:.5}  {}",
                    report.statistic,
                    row.threshold,
                    row.empirical,
                    row.bound,
                    if row.pass { "ok" } else { "FAIL" }
                );
            }
        }
    }
    Ok(())
}
