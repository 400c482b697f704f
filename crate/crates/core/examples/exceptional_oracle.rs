//! Prints |E(N, ε)| on a power-of-ten grid for the default ε values.
//!
//!     cargo run --release -p abc-core --example exceptional_oracle -- 100000 naive
//!
//! The second argument selects `naive` (unpruned double loop) or `pruned`.
//! Output rows are `N,epsilon,count_canonical,source` and feed
//! `tests/fixtures/exceptional_counts.csv`.

use std::time::Instant;

use abc_core::search::{default_grid, enumerate_exceptional, enumerate_exceptional_naive};
use abc_core::{BoundParams, Ratio};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n_max: u64 = args.next().as_deref().unwrap_or("10000").parse()?;
    let mode = args.next().unwrap_or_else(|| "naive".into());
    for eps in ["1/20", "1/10", "1/5", "3/10"] {
        let params = BoundParams::new(eps.parse::<Ratio>()?, n_max)?;
        let start = Instant::now();
        let triples = match mode.as_str() {
            "naive" => enumerate_exceptional_naive(&params)?,
            "pruned" => enumerate_exceptional(&params)?,
            other => return Err(format!("unknown mode {other}").into()),
        };
        eprintln!("eps = {eps}: {} triples in {:.1?}", triples.len(), start.elapsed());
        for n in default_grid(n_max) {
            let count = triples.partition_point(|t| t.c <= n);
            println!("{n},{eps},{count},{mode}");
        }
    }
    Ok(())
}
