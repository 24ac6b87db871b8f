//! Risk decay over Sobolev ellipsoids with a theorem-style penalty.
//!
//! cargo run --release --example minimax_rate [alpha] [replicates]

use minpen::config::{ExperimentConfig, Scenario, SignalSpec};
use minpen::experiments::rate_study;

fn main() -> minpen::Result<()> {
    let mut args = std::env::args().skip(1);
    let alpha = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let replicates = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let mut config = ExperimentConfig::new(Scenario::RateStudy, 128);
    config.signal = SignalSpec::Sobolev {
        alpha,
        radius: 1.0,
        fill: 0.9,
    };
    config.replicates = replicates;

    let result = rate_study(&config)?;
    for p in &result.points {
        println!(
            "n = {:>5}  risk {:.3e} (se {:.1e})  mean D_hat {:.1}",
            p.n, p.mean_risk, p.stderr, p.mean_dim
        );
    }
    println!(
        "log-log slope {:.4}, rate exponent {:.4}",
        result.slope, result.target_slope
    );
    Ok(())
}
