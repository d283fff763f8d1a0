//! One channel draw, all three precoders, and the sum SE of a short ensemble.
//!
//! cargo run --release --example quick_start

use xlmp::channel::ChannelModel;
use xlmp::metrics::LinkSimulation;
use xlmp::precoding::{build_all_precoders, CsiSource};
use xlmp::{Method, Streams, SystemConfig};

fn main() -> xlmp::Result<()> {
    let config = SystemConfig::default();
    config.validate()?;
    println!(
        "M = {}, S = {}, K = {}, SNR = {} dB, xi = {}, T = {}",
        config.m,
        config.s,
        config.k,
        config.snr_db,
        config.xi(),
        config.iterations
    );

    let streams = Streams::new(config.seed);
    let model = ChannelModel::new(&config)?;
    let channel = model.sample_trial(&streams, 0);
    for method in Method::REFERENCE {
        let pre = build_all_precoders(
            &channel,
            &config,
            method,
            CsiSource::Estimated,
            &streams.child(0),
        )?;
        println!("{method:>9}: beta per subarray {:.3?}", pre.beta);
    }

    for method in Method::REFERENCE {
        let point = LinkSimulation {
            method,
            csi: CsiSource::Estimated,
            trials: 100,
            slots_per_trial: 0,
        }
        .run(&config, &streams)?;
        println!(
            "{method:>9}: sum SE {:.3} bit/s/Hz over {} realizations",
            point.se_total, point.trials
        );
    }
    Ok(())
}
