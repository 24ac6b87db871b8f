//! The slope of `D -> ||f_hat_D||_n^2` beyond the true dimension estimates the
//! minimal penalty constant; twice it is the usual data-driven choice.
//!
//! cargo run --release --example slope_heuristic [replicates]

use minpen::config::{ExperimentConfig, Scenario};
use minpen::experiments::norm_curve;

fn main() -> minpen::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let mut config = ExperimentConfig::new(Scenario::NormCurve, 100);
    config.replicates = replicates;
    config.apply_defaults();
    config.validate()?;

    let curve = norm_curve(&config)?;
    for d in [1, 2, 3, 5, 10, 25, 50, 75, 99] {
        println!("D = {d:>2}   mean ||f_hat_D||_n^2 = {:.5}", curve.mean_curve[&d]);
    }
    println!("window {:?}", curve.window);
    println!(
        "kappa_hat = {:.4} (se {:.4}, {} replicates)",
        curve.kappa_hat, curve.kappa_hat_stderr, replicates
    );
    println!("first replicate alone: {:.4}", curve.per_replicate_kappa[0]);
    println!(
        "suggested penalty constant 2 * kappa_hat = {:.4}",
        2.0 * curve.kappa_hat
    );
    Ok(())
}
