//! Tail cases, limiting censoring proportion, asymptotic variances and
//! Wald intervals for the adapted estimators.
//!
//! ```text
//! cargo run --example asymptotic_laws
//! ```

use censored_evt::asymptotics::{
    classify_case, combined_index, confidence_interval, limit_p, uncensored_variance, variance_censored,
};
use censored_evt::estimators::EstimatorKind;

fn main() -> censored_evt::Result<()> {
    for (g1, g2, same_endpoint) in [(0.25, 2.0, false), (-0.25, -2.0, true), (0.5, 0.5, false)] {
        let case = classify_case(g1, g2, same_endpoint)?;
        let g = combined_index(g1, g2, case);
        let p = limit_p(g1, g2, case, None)?;
        println!("gamma1 = {g1}, gamma2 = {g2}: case {}, gamma = {g:.4}, p = {p:.4}", case.number());
        for kind in EstimatorKind::ALL {
            match (variance_censored(kind, case, g1, g, p), uncensored_variance(kind, case, g1)) {
                (Ok(v), Ok(v0)) => println!("  {:>6}: variance {v:.4} (uncensored {v0:.4})", kind.label()),
                (Err(e), _) | (_, Err(e)) => println!("  {:>6}: {e}", kind.label()),
            }
        }
    }
    // a case-1 interval around an adapted estimate of 0.27 at k = 150
    let v = variance_censored(EstimatorKind::Moment, classify_case(0.25, 2.0, false)?, 0.27, 0.24, 0.89)?;
    let (lo, hi) = confidence_interval(0.27, 150, v, 0.95)?;
    println!("95% interval at k = 150: [{lo:.3}, {hi:.3}]");
    Ok(())
}
