//! Mean NMSE of the Kaczmarz inverse against the iteration count on the
//! 64 x 4 subarray systems, for all three row-selection laws.
//!
//! cargo run --release --example nmse_convergence [trials]

use xlmp::harness::nmse_ensemble;
use xlmp::{Method, Streams, SystemConfig};

fn main() -> xlmp::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(100);
    let config = SystemConfig::default();
    let checkpoints = [1usize, 5, 10, 20, 50, 100, 150];
    let streams = Streams::new(config.seed);
    let methods = [Method::Rka, Method::SworRka, Method::RkaPermutation];

    let curves = methods
        .iter()
        .map(|&m| nmse_ensemble(&config, m, &checkpoints, trials, &streams))
        .collect::<xlmp::Result<Vec<_>>>()?;

    print!("{:>5}", "t");
    for m in methods {
        print!(" {:>12}", m.label());
    }
    println!();
    for (i, t) in checkpoints.iter().enumerate() {
        print!("{t:>5}");
        for c in &curves {
            print!(" {:>12.3e}", c[i].1);
        }
        println!();
    }
    Ok(())
}
