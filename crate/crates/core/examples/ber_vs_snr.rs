//! Monte-Carlo QPSK bit-error rate of the RZF precoder and its Kaczmarz
//! approximations, perfect against imperfect CSI.
//!
//! cargo run --release --example ber_vs_snr [symbols_per_point]

use xlmp::metrics::ber_mc;
use xlmp::{Method, Streams, SystemConfig};

fn main() -> xlmp::Result<()> {
    let symbols = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(200_000);
    let streams = Streams::new(1);
    println!("snr_db,tau,method,ber,std_err,bits");
    for tau in [0.0, 0.3] {
        for snr_db in [5.0, 10.0, 15.0, 20.0] {
            let config = SystemConfig {
                snr_db,
                tau,
                ..SystemConfig::default()
            };
            for method in Method::REFERENCE {
                let b = ber_mc(&config, method, symbols, &streams)?;
                println!(
                    "{snr_db},{tau},{method},{:.5},{:.1e},{}",
                    b.ber, b.std_err, b.bits
                );
            }
        }
    }
    Ok(())
}
