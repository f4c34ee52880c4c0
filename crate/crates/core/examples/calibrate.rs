//! Prints null acceptance and far rejection for every tester on the desk corpora.
//!
//! Usage: `cargo run --release --example calibrate -- [constants.json|-] [trials] [tester]`
//! Set `NO_PREFILTER=1` to skip the learn-then-test localization prefilter.

use isingtest::calibration::desk_corpus;
use isingtest::harness::TesterKind;
use isingtest::Constants;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let constants: Constants = match args.next() {
        Some(path) if path != "-" => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        _ => Constants::default(),
    };
    let trials: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let only: Option<TesterKind> = args.next().map(|s| s.parse()).transpose()?;
    for kind in TesterKind::ALL.into_iter().filter(|k| only.is_none_or(|o| o == *k)) {
        let mut corpus = desk_corpus(kind, constants)?;
        corpus.config.prefilter = std::env::var_os("NO_PREFILTER").is_none();
        let r = corpus.run(trials, 2024)?;
        println!(
            "{:<11} null_accept {:.2}  far_reject {:.2}  samples {:>10.0}  {:>7.2}s",
            kind.name(),
            r.null_accept,
            r.far_reject,
            r.mean_samples,
            r.elapsed.as_secs_f64()
        );
    }
    Ok(())
}
