//! Survival of male AIDS patients: prepares durations from the `Aids2`
//! records (MASS package, exported as CSV), then estimates the uncensored
//! proportion, the adapted UH index and the 0.1% extreme survival time.
//!
//! ```text
//! cargo run --release --example aids_analysis -- path/to/Aids2.csv
//! ```

use censored_evt::commands::{prepare_survival, PrepareOptions, DAYS_PER_YEAR};
use censored_evt::estimators::{adapted_index, EstimatorKind, PPolicy};
use censored_evt::quantile::extreme_quantile;
use censored_evt::CensoredSample;

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn main() -> censored_evt::Result<()> {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: aids_analysis <Aids2.csv>");
        std::process::exit(1);
    };
    // same-day diagnosis and death records are genuine zero survival times
    let options = PrepareOptions { sex_filter: Some("M".into()), keep_zero: true, ..PrepareOptions::default() };
    let rows = prepare_survival(std::fs::File::open(path)?, &options)?;
    let sample = CensoredSample::from_records(rows.iter().map(|&(z, d)| (z as f64, d)))?;
    let sorted = sample.sorted();
    let deaths = rows.iter().filter(|r| r.1 == 1).count();
    println!("{} patients, {deaths} deaths", sorted.len());

    let p = mean((75..=175).map(|k| sorted.uncensored_proportion(k).unwrap()));
    println!("uncensored proportion in the tail (k in [75, 175]): {p:.3}");

    let policy = PPolicy::Fixed(0.28);
    let gamma = mean((200..=300).map(|k| adapted_index(&sorted, EstimatorKind::UH, k, policy).unwrap()));
    println!("adapted UH index with p = 0.28 (k in [200, 300]): {gamma:.3}");

    for (lo, hi) in [(200, 300), (250, 500)] {
        let years = mean((lo..=hi).map(|k| {
            extreme_quantile(&sorted, k, 0.001, EstimatorKind::UH, policy).unwrap().value / DAYS_PER_YEAR
        }));
        println!("0.1% survival time, k in [{lo}, {hi}]: {years:.1} years");
    }
    Ok(())
}
