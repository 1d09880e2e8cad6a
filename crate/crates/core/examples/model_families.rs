//! The built-in lifetime/censoring pairs: exact parameters, survival of the
//! observed minimum and a JSON round trip of a pair description.
//!
//! ```text
//! cargo run --example model_families
//! ```

use censored_evt::families::{theoretical_bias_example, BurrParams, Family};
use censored_evt::estimators::EstimatorKind;
use censored_evt::FamilyPair;

fn main() -> censored_evt::Result<()> {
    for (name, pair) in [
        ("burr", FamilyPair::example_burr()),
        ("reverse burr", FamilyPair::example_reverse_burr()),
        ("logistic", FamilyPair::example_logistic()),
    ] {
        let t = pair.truth_values()?;
        println!(
            "{name}: case {}, gamma1 {}, gamma2 {}, gamma {:.4}, p {:.4}, rho {:?}",
            t.case.number(),
            t.gamma1,
            t.gamma2,
            t.gamma,
            t.p,
            t.rho
        );
        let z = pair.f.quantile(0.9)?;
        println!("  P(Z > {z:.3}) = {:.4}, P(uncensored | Z = {z:.3}) = {:.4}", pair.z_survival(z), pair.p_of_z(z)?);
        if let Ok(b) = theoretical_bias_example(&pair, EstimatorKind::Moment, 500, 100) {
            println!("  leading-order mean of sqrt(k)(adapted moment - gamma1) at n = 500, k = 100: {:.4}", b.adapted_mean(&t));
        }
    }

    let custom = FamilyPair::new(
        Family::Burr(BurrParams::new(1.0, 2.0, 1.0)?),
        Family::Burr(BurrParams::new(1.0, 1.0, 1.0)?),
    )?;
    let json = serde_json::to_string(&custom)?;
    println!("custom pair as JSON: {json}");
    let back: FamilyPair = serde_json::from_str(&json)?;
    println!("index of the minimum: {:.4}", back.truth_values()?.gamma);
    Ok(())
}
