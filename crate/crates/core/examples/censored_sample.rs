//! Build a censored sample, inspect its order statistics, the uncensored
//! proportion among the top `k` and the Kaplan–Meier estimate.
//!
//! ```text
//! cargo run --example censored_sample
//! ```

use censored_evt::CensoredSample;

fn main() -> censored_evt::Result<()> {
    let csv = "z,delta\n3.1,1\n0.7,1\n5.4,0\n2.2,1\n9.8,1\n4.0,0\n1.5,1\n6.6,1\n";
    let sample = CensoredSample::from_csv_reader(csv.as_bytes())?;
    let sorted = sample.sorted();
    println!("n = {}", sorted.len());
    println!("ascending z: {:?}", sorted.times());

    for k in 1..sorted.len() {
        println!(
            "k = {k}: threshold Z(n-k) = {:.1}, p_hat = {:.3}, KM survival at threshold = {:.4}",
            sorted.threshold(k),
            sorted.uncensored_proportion(k)?,
            sorted.km_survival_at_threshold(k)?,
        );
    }

    let km = sorted.kaplan_meier();
    for t in [1.0, 3.0, 5.0, 10.0] {
        println!("KM F({t}) = {:.4}", km.eval(t));
    }
    Ok(())
}
