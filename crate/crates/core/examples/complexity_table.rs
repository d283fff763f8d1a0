//! Complex-multiplication counts: both columns of the reference table and
//! the growth with K and M.
//!
//! cargo run --example complexity_table

use xlmp::harness::table2;
use xlmp::metrics::complexity_count;
use xlmp::Method;

fn main() {
    println!("XL-MIMO (M_sub = 64, K_sub = 16, S = 4, T = 200)");
    print!("{}", table2(64, 16, 4, 200));
    println!("\nM-MIMO (M = 64, K = 8, S = 1, T = 200)");
    print!("{}", table2(64, 8, 1, 200));

    println!("\nM = 100, S = 1, T = 200, growing K");
    println!(
        "{:>4} {:>10} {:>10} {:>10} {:>8}",
        "K", "RZF", "rKA", "SwoR-rKA", "saving"
    );
    for k in (10..=100).step_by(10) {
        let [rzf, rka, swor] = [Method::RzfDirect, Method::Rka, Method::SworRka]
            .map(|m| complexity_count(m, 100, k, 1, 200));
        let saving = 100.0 * (1.0 - swor as f64 / rzf as f64);
        println!("{k:>4} {rzf:>10} {rka:>10} {swor:>10} {saving:>7.1}%");
    }
}
