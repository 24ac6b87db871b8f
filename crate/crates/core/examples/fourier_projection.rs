//! Projection estimates on the Fourier design and their two risks.

use minpen::functional::{figure1, functional_estimate, l2_and_empirical_risks, GridDesign};
use minpen::linear::ModelSpec;
use minpen::randomness::rademacher_vector;
use minpen::randomness::Seed;

fn main() -> minpen::Result<()> {
    let n = 100;
    let design = GridDesign::new(n)?.fourier();
    let f = figure1();
    let eps = rademacher_vector(Seed(7), n);
    let y: Vec<f64> = f
        .grid_values(&design)
        .iter()
        .zip(eps.as_slice())
        .map(|(a, e)| a + e)
        .collect();
    for d in [1, 3, 10, 50, 99] {
        let est = functional_estimate(&y, &design, &ModelSpec::prefix(d))?;
        let r = l2_and_empirical_risks(&est, &f, &design);
        println!(
            "D = {d:>2}  theta_hat[..3] = {:.3?}  L2 risk {:.4}  empirical risk {:.4}",
            &est.theta[..3.min(d)],
            r.l2_risk,
            r.empirical_risk
        );
    }
    Ok(())
}
