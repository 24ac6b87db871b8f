//! Below the critical constant the selected model is huge and the risk stays
//! above sigma^2 / 4.

use minpen::config::{ExperimentConfig, KappaGrid, RiskMode, Scenario};
use minpen::experiments::lower_bound_check;

fn main() -> minpen::Result<()> {
    let mut config = ExperimentConfig::new(Scenario::LowerBound, 500);
    config.kappa_grid = Some(KappaGrid::List(vec![0.25, 0.5, 0.75]));
    config.modes = Some(vec![
        RiskMode::FunctionalEmpirical,
        RiskMode::FunctionalL2,
        RiskMode::Vector,
    ]);
    let result = lower_bound_check(&config)?;
    for row in &result.rows {
        println!(
            "kappa {:.2} {:<22} mean risk {:>9.4} (se {:.4}) bound {:>9.4}  P(D >= n/2) = {:.3}",
            row.kappa,
            row.mode.name(),
            row.mean_risk,
            row.stderr,
            row.bound,
            row.frac_ge_half
        );
    }
    Ok(())
}
