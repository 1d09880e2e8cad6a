//! Extreme quantile `F⁻¹(1 − ε)` of the lifetime law from censored data,
//! compared with the exact value of the simulating model.
//!
//! ```text
//! cargo run --example extreme_quantile
//! ```

use censored_evt::estimators::{EstimatorKind, PPolicy};
use censored_evt::quantile::extreme_quantile;
use censored_evt::FamilyPair;

fn main() -> censored_evt::Result<()> {
    let pair = FamilyPair::example_burr();
    let sorted = pair.sample_censored(2000, 3).sorted();
    for eps in [0.01, 0.001] {
        let exact = pair.f.quantile(1.0 - eps)?;
        println!("eps = {eps}: exact quantile {exact:.4}");
        for kind in [EstimatorKind::Moment, EstimatorKind::UH, EstimatorKind::ML] {
            for k in [100, 200] {
                let q = extreme_quantile(&sorted, k, eps, kind, PPolicy::PerK)?;
                println!(
                    "  {:>6} k = {k}: estimate {:.4} (gamma {:.3}, scale {:.4}, p_hat {:.3})",
                    kind.label(),
                    q.value,
                    q.gamma_adapted,
                    q.scale,
                    q.p_hat
                );
            }
        }
    }
    Ok(())
}
