//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::run::{execute, write_outputs};
use crate::harness::spec::{parse_spec, to_toml, ExperimentSpec};
use crate::metrics::complexity_count;
use crate::precoding::Method;

pub const THREADS_ENV: &str = "XLMP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "xlmp",
    about = "Kaczmarz-based RZF precoding experiments for subarray XL-MIMO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment document and write CSV results.
    Run {
        /// Experiment document, or `defaults`.
        #[arg(long)]
        spec: String,
        /// Root seed (overrides `base.seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Realizations per point (overrides `trials`).
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads; wins over XLMP_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse a document and print the resolved experiment.
    Validate {
        #[arg(long)]
        spec: String,
    },
    /// Print operation counts of the three precoding schemes.
    Table2 {
        /// Antennas per subarray.
        #[arg(long, default_value_t = 64)]
        m: u64,
        /// Users per subarray.
        #[arg(long, default_value_t = 16)]
        k: u64,
        #[arg(long, default_value_t = 4)]
        s: u64,
        #[arg(long, default_value_t = 200)]
        t: u64,
    },
    /// Print the tool version.
    Version,
}

/// Thread count: the flag wins, then `XLMP_THREADS`, then rayon's default.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>> {
    let n = match (flag, env) {
        (Some(n), _) => n,
        (None, Some(v)) => v.trim().parse().map_err(|_| Error::InvalidParameter {
            key: THREADS_ENV.into(),
            reason: format!("`{v}` is not a thread count"),
        })?,
        (None, None) => return Ok(None),
    };
    if n == 0 {
        return Err(Error::InvalidParameter {
            key: "threads".into(),
            reason: "must be >= 1".into(),
        });
    }
    Ok(Some(n))
}

/// Load `defaults` or a document from disk.
pub fn load_spec(arg: &str) -> Result<ExperimentSpec> {
    if arg == "defaults" {
        return Ok(ExperimentSpec::default());
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| Error::Io(e).with_context(format!("reading {arg}")))?;
    parse_spec(&text).map_err(|e| e.with_context(arg.to_string()))
}

/// Complexity table as CSV text.
pub fn table2(m: u64, k: u64, s: u64, t: u64) -> String {
    let mut out = String::from("scheme,M,K,S,T,ops\n");
    for method in Method::REFERENCE {
        let ops = complexity_count(method, m, k, s, t);
        out.push_str(&format!("{},{m},{k},{s},{t},{ops}\n", method.label()));
    }
    out
}

/// Entry point with explicit streams; returns the process exit code.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Entry point used by the binary.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Run {
            spec,
            seed,
            out,
            trials,
            threads,
        } => {
            let mut spec = load_spec(&spec)?;
            if let Some(seed) = seed {
                spec.base.seed = seed;
            }
            if let Some(out) = out {
                spec.out = out;
            }
            if let Some(trials) = trials {
                spec.trials = trials;
            }
            spec.validate()?;
            let env = std::env::var(THREADS_ENV).ok();
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = resolve_threads(threads, env.as_deref())? {
                pool = pool.num_threads(n);
            }
            let pool = pool.build().map_err(|e| Error::InvalidParameter {
                key: "threads".into(),
                reason: e.to_string(),
            })?;
            std::fs::create_dir_all(&spec.out).map_err(|e| {
                Error::Io(e).with_context(format!("creating {}", spec.out.display()))
            })?;
            let points = pool.install(|| execute(&spec))?;
            let (csv, manifest) = write_outputs(&spec, &points, &spec.out)?;
            let failed = points.iter().filter(|p| p.result.is_err()).count();
            writeln!(stdout, "{} points ({failed} failed)", points.len())?;
            writeln!(stdout, "wrote {}", csv.display())?;
            writeln!(stdout, "wrote {}", manifest.display())?;
        }
        Command::Validate { spec } => {
            let spec = load_spec(&spec)?;
            stdout.write_all(to_toml(&spec)?.as_bytes())?;
        }
        Command::Table2 { m, k, s, t } => stdout.write_all(table2(m, k, s, t).as_bytes())?,
        Command::Version => writeln!(
            stdout,
            "{} {}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION")
        )?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("xlmp").chain(args.iter().copied());
        let code = run_cli(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn table2_prints_reference_integers() {
        let (code, out, _) = call(&["table2", "--m", "64", "--k", "16", "--s", "4", "--t", "200"]);
        assert_eq!(code, 0);
        assert!(out.contains("RZF,64,16,4,200,109888"));
        assert!(out.contains("rKA,64,16,4,200,51456"));
        assert!(out.contains("SwoR-rKA,64,16,4,200,59392"));
    }

    #[test]
    fn validate_defaults() {
        let (code, out, _) = call(&["validate", "--spec", "defaults"]);
        assert_eq!(code, 0);
        assert_eq!(parse_spec(&out).unwrap(), ExperimentSpec::default());
    }

    #[test]
    fn usage_errors_are_nonzero() {
        let (code, _, err) = call(&["run"]);
        assert_ne!(code, 0);
        assert!(err.contains("--spec"), "{err}");
        assert_ne!(call(&["table2", "--m", "many"]).0, 0);
        assert_ne!(call(&["frobnicate"]).0, 0);
        let (code, _, err) = call(&["validate", "--spec", "/nonexistent/spec.toml"]);
        assert_eq!(code, 1);
        assert!(err.contains("/nonexistent/spec.toml"), "{err}");
    }

    #[test]
    fn version_prints() {
        let (code, out, _) = call(&["version"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("xlmp "));
    }

    #[test]
    fn thread_precedence() {
        assert_eq!(resolve_threads(None, None).unwrap(), None);
        assert_eq!(resolve_threads(None, Some("3")).unwrap(), Some(3));
        assert_eq!(resolve_threads(Some(2), Some("3")).unwrap(), Some(2));
        assert!(resolve_threads(None, Some("lots")).is_err());
        assert!(resolve_threads(Some(0), None).is_err());
    }
}
