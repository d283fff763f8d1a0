//! Average sum spectral efficiency against SNR for the three precoders,
//! with perfect and imperfect CSI.
//!
//! cargo run --release --example se_vs_snr [trials]

use xlmp::metrics::LinkSimulation;
use xlmp::precoding::CsiSource;
use xlmp::{Method, Streams, SystemConfig};

fn main() -> xlmp::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(200);
    let streams = Streams::new(1);
    println!("snr_db,tau,method,se_total");
    for tau in [0.0, 0.3] {
        for snr_db in [5.0, 10.0, 15.0, 20.0] {
            let config = SystemConfig {
                snr_db,
                tau,
                ..SystemConfig::default()
            };
            for method in Method::REFERENCE {
                let sim = LinkSimulation {
                    method,
                    csi: if tau > 0.0 {
                        CsiSource::Estimated
                    } else {
                        CsiSource::Perfect
                    },
                    trials,
                    slots_per_trial: 0,
                };
                let point = sim.run(&config, &streams)?;
                println!("{snr_db},{tau},{method},{:.4}", point.se_total);
            }
        }
    }
    Ok(())
}
