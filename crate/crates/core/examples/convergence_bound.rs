//! Normalized minimum gain and the expected-error bound of norm-weighted
//! Kaczmarz on one subarray system, against the empirical mean error.
//!
//! cargo run --release --example convergence_bound

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use xlmp::channel::ChannelModel;
use xlmp::kaczmarz::{convergence_bound, kchi, KaczmarzRun, RegularizedSystem, SolveOptions};
use xlmp::{SelectionMode, Streams, SystemConfig};

fn main() -> xlmp::Result<()> {
    let config = SystemConfig::default();
    let real = ChannelModel::new(&config)?.sample_trial(&Streams::new(3), 0);
    let h = &real.h[0][0];
    let xi = config.xi();
    let sys = RegularizedSystem::new(h, xi)?;
    let k_chi = kchi(&sys.augmented_matrix())?;
    println!(
        "{}x{} system, xi = {xi}, kchi = {k_chi:.4}",
        h.nrows(),
        h.ncols()
    );

    let col = 0;
    let w = sys.exact_column(col)?;
    let mut exact = KaczmarzRun::new(h.nrows(), h.ncols(), col);
    exact.m = h * &w;
    exact.n = w;
    let z_star = exact.augmented(xi);
    let init = z_star.norm_squared();

    let logged = [5usize, 10, 20, 40, 80];
    let runs = 500;
    let mut mean = vec![0.0; logged.len()];
    let opts = SolveOptions::new(80, SelectionMode::NormWeighted);
    for r in 0..runs {
        sys.solve_observed(col, &opts, &mut ChaCha8Rng::seed_from_u64(r), |run| {
            if let Some(i) = logged.iter().position(|&t| t == run.t) {
                mean[i] += (run.augmented(xi) - &z_star).norm_squared() / runs as f64;
            }
        })?;
    }
    println!("{:>4} {:>12} {:>12}", "t", "mean err", "bound");
    for (i, &t) in logged.iter().enumerate() {
        println!(
            "{t:>4} {:>12.3e} {:>12.3e}",
            mean[i],
            convergence_bound(k_chi, t, init)
        );
    }
    Ok(())
}
