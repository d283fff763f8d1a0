//! Drive the harness from code: parse an experiment document, run it and
//! print where the CSV and manifest went.
//!
//! cargo run --release --example run_experiment [out_dir]

use xlmp::harness::{parse_spec, run_experiment, to_toml};

const DOC: &str = r#"
scenario = "se_vs_snr"
trials = 50
methods = ["RZF", "SwoR-rKA"]
taus = [0.3]

[base]
m = 64
s = 2
k = 8
seed = 5

[sweep]
axis = "snr_db"
values = [0.0, 10.0, 20.0]
"#;

fn main() -> xlmp::Result<()> {
    let mut spec = parse_spec(DOC)?;
    spec.out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("xlmp-example"));
    println!("resolved spec:\n{}", to_toml(&spec)?);

    let out = run_experiment(&spec)?;
    for p in &out.points {
        match &p.result {
            Ok(r) => println!(
                "{:>9} snr {:>4}: sum SE {:.3}",
                p.method, r.snr_db, r.se_total
            ),
            Err(e) => println!("{:>9} at {}: {e}", p.method, p.value),
        }
    }
    println!(
        "csv: {}\nmanifest: {}",
        out.csv_path.display(),
        out.manifest_path.display()
    );
    Ok(())
}
