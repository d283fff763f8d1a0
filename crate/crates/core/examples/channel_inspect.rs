//! Draw one non-stationary channel realization, list every user's visibility
//! region and dump one subarray block as CSV.
//!
//! cargo run --release --example channel_inspect [out.csv]

use std::fs::File;

use xlmp::channel::ChannelModel;
use xlmp::{Streams, SystemConfig};

fn main() -> xlmp::Result<()> {
    let config = SystemConfig::small();
    let model = ChannelModel::new(&config)?;
    let real = model.sample_trial(&Streams::new(config.seed), 0);

    for j in 0..real.subarrays() {
        for k in 0..real.users_in(j) {
            let spans: Vec<String> = real.vr[j][k]
                .iter()
                .map(|vr| format!("[{:>2},{:>2})", vr.range().start, vr.range().end))
                .collect();
            let energy: Vec<String> = (0..real.subarrays())
                .map(|s| format!("{:6.1}", real.h[j][s].column(k).norm_squared()))
                .collect();
            println!(
                "group {j} user {k}: VR {}  |h|^2 {}",
                spans.join(" "),
                energy.join(" ")
            );
        }
    }

    // Local channel of group 0 at subarray 0: one row per antenna.
    match std::env::args().nth(1) {
        Some(path) => {
            real.write_csv(0, 0, false, File::create(&path)?)?;
            println!("wrote {path}");
        }
        None => real.write_csv(0, 0, false, std::io::stdout().lock())?,
    }
    Ok(())
}
