//! Risk of the Mallows-selected estimator relative to the best fixed model.

use minpen::config::{ExperimentConfig, PenaltySpec, Scenario, SignalSpec};
use minpen::experiments::oracle_ratio;

fn main() -> minpen::Result<()> {
    let targets = [
        (100, SignalSpec::Figure1),
        (
            256,
            SignalSpec::Sobolev {
                alpha: 1,
                radius: 1.0,
                fill: 0.9,
            },
        ),
    ];
    for (n, signal) in targets {
        let mut config = ExperimentConfig::new(Scenario::OracleRatio, n);
        config.signal = signal.clone();
        config.penalty = Some(PenaltySpec::Mallows);
        let result = oracle_ratio(&config)?;
        println!("{signal:?}, n = {n}");
        for m in &result.modes {
            println!(
                "  {:<22} selected {:.5} (se {:.5})  oracle {:.5} at D = {}  ratio {:.3}",
                m.mode.name(),
                m.selected_risk,
                m.selected_stderr,
                m.oracle_risk,
                m.oracle_dim,
                m.ratio
            );
        }
    }
    Ok(())
}
