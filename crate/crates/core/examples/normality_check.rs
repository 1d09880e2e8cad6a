//! Replicates `√k(γ̂ − γ₁)` at one `k` and compares its spread with the
//! asymptotic normal law.
//!
//! ```text
//! cargo run --release --example normality_check
//! ```

use censored_evt::estimators::EstimatorKind;
use censored_evt::montecarlo::{normality_experiment, KRule, SimConfig};
use censored_evt::FamilyPair;

fn main() -> censored_evt::Result<()> {
    let config = SimConfig { n: 5000, reps: 300, k_grid: vec![100], ..SimConfig::standard_study(FamilyPair::example_burr(), 11) };
    for (kind, rule) in [(EstimatorKind::Hill, KRule::Fixed(100)), (EstimatorKind::Moment, KRule::Power(0.6))] {
        let r = normality_experiment(&config, kind, rule)?;
        println!(
            "{} at n = {}, k = {}: mean {:.3} (theory {}), variance {:.4} (theory {}), KS distance {:.3}, failures {}",
            kind.label(),
            r.n,
            r.k,
            r.mean.unwrap_or(f64::NAN),
            r.theory_mean.map_or("n/a".into(), |v| format!("{v:.3}")),
            r.variance.unwrap_or(f64::NAN),
            r.theory_variance.map_or("n/a".into(), |v| format!("{v:.4}")),
            r.ks_distance.unwrap_or(f64::NAN),
            r.failures.values().sum::<usize>()
        );
    }
    Ok(())
}
