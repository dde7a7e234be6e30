//! Command-line front end. Every subcommand resolves its inputs, calls the
//! library, and renders one deterministic blob (JSON for reports, CSV for
//! scans, plain lines for selfcheck) to `--out` or stdout.
//!
//! Exit codes: 0 success, 2 input/validation failure (the diagnostic names
//! the violated invariant), 1 internal error (failed selfcheck, or a panic
//! caught in `main`).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::criteria::{classify_with_eps, theorem1_with_eps};
use crate::io;
use crate::measurement::{estimated_report, settings_plan, simulate_shots};
use crate::probes::{Probe, catalog, catalog_with_random};
use crate::scan::{ScanFamily, ScanSpec, analytic_w_threshold, bisect_threshold, grid_scan, write_csv};
use crate::selfcheck::run_selfcheck;
use crate::states::{FamilyPoint, family_state};
use crate::tensor::{DensityOperator, SystemDims};

#[derive(Parser)]
#[command(
    name = "ksep",
    version,
    about = "Detect k-nonseparability of multipartite density matrices and plan the local measurements that certify it",
    propagate_version = true
)]
struct Cli {
    /// Base seed for anything randomized (probes, drawn states, shots)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Detection threshold on the margin
    #[arg(long, global = true, default_value_t = 1e-9)]
    eps: f64,

    /// Write the output here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the level-k separability inequality and print the report
    Evaluate {
        #[command(flatten)]
        source: StateSource,
        /// Partition count k (2..=n)
        #[arg(long)]
        k: usize,
        /// Probe: computational | 45 | phase-flip | random:<seed> | file:<path>
        #[arg(long, default_value = "computational")]
        probe: String,
    },
    /// Find the smallest detectable k per probe and overall
    Classify {
        #[command(flatten)]
        source: StateSource,
        /// Probe set: catalog | catalog+random | comma-separated probe specs
        #[arg(long, default_value = "catalog")]
        probes: String,
        /// How many seeded probes `catalog+random` appends
        #[arg(long, default_value_t = 32, value_name = "N")]
        random_probes: usize,
    },
    /// Sweep a state family over its parameter grid and emit CSV rows
    Scan {
        /// Family: gw | w-noise | w-antiw
        #[arg(long, value_name = "ID")]
        family: String,
        /// Number of sites
        #[arg(long)]
        n: usize,
        /// Levels to evaluate, comma separated; default 2..=n
        #[arg(long, value_delimiter = ',', value_name = "K,...")]
        k: Vec<usize>,
        /// Grid resolution per parameter axis
        #[arg(long, default_value_t = 201)]
        res: usize,
        /// First-parameter range as lo:hi
        #[arg(long, default_value = "0:1", value_name = "LO:HI")]
        range1: String,
        /// Second-parameter range as lo:hi (two-parameter families)
        #[arg(long, default_value = "0:1", value_name = "LO:HI")]
        range2: String,
        /// Probe set: catalog | catalog+random | comma-separated probe specs
        #[arg(long, default_value = "catalog")]
        probes: String,
        /// How many seeded probes `catalog+random` appends
        #[arg(long, default_value_t = 32, value_name = "N")]
        random_probes: usize,
    },
    /// Bisect the detection threshold on the w-noise mixing axis
    Threshold {
        /// Family: only w-noise has a mixing axis with a closed form
        #[arg(long, value_name = "ID")]
        family: String,
        /// Number of sites
        #[arg(long)]
        n: usize,
        /// Partition count k (2..=n)
        #[arg(long)]
        k: usize,
        /// Probe: computational | 45 | phase-flip | random:<seed> | file:<path>
        #[arg(long, default_value = "computational")]
        probe: String,
        /// Bisection stops when the bracket is narrower than this
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Emit the local measurement plan for a probe as JSON
    Plan {
        /// Number of qubit sites (omit when the probe comes from a file)
        #[arg(long)]
        n: Option<usize>,
        /// Probe: computational | 45 | phase-flip | random:<seed> | file:<path>
        #[arg(long, default_value = "computational")]
        probe: String,
    },
    /// Sample the plan with finite shots and print the estimated report
    Simulate {
        #[command(flatten)]
        source: StateSource,
        /// Probe: computational | 45 | phase-flip | random:<seed> | file:<path>
        #[arg(long, default_value = "computational")]
        probe: String,
        /// Shots per measurement setting
        #[arg(long)]
        shots: u64,
        /// Partition count k (2..=n)
        #[arg(long)]
        k: usize,
        /// Confidence factor: detected only when margin - z*SE > eps
        #[arg(long, default_value_t = 3.0)]
        z: f64,
    },
    /// Run reduced-scale internal consistency checks
    Selfcheck,
}

/// Exactly one of a state file or a named family point.
#[derive(Args)]
struct StateSource {
    /// JSON state file (dims plus a dense matrix or a pure-state ensemble)
    #[arg(long, value_name = "FILE", conflicts_with_all = ["family", "n", "alpha", "beta", "a", "b"])]
    state: Option<PathBuf>,
    /// Built-in family: gw | w-noise | w-antiw
    #[arg(long, value_name = "ID", requires = "n")]
    family: Option<String>,
    /// Number of sites for --family
    #[arg(long)]
    n: Option<usize>,
    /// GHZ weight (gw family)
    #[arg(long)]
    alpha: Option<f64>,
    /// W weight (gw and w-noise families)
    #[arg(long)]
    beta: Option<f64>,
    /// W weight (w-antiw family)
    #[arg(long)]
    a: Option<f64>,
    /// anti-W weight (w-antiw family)
    #[arg(long)]
    b: Option<f64>,
}

impl StateSource {
    fn resolve(&self) -> Result<DensityOperator, String> {
        match (&self.state, &self.family) {
            (Some(path), None) => io::load_state(path).map_err(|e| e.to_string()),
            (None, Some(family)) => {
                let n = self.n.ok_or("--family requires --n")?;
                let point = family_point(
                    family, n, self.alpha, self.beta, self.a, self.b,
                )?;
                family_state(&point).map_err(|e| e.to_string())
            }
            _ => Err("pass exactly one state source: --state <file> or --family <id>".into()),
        }
    }
}

fn family_point(
    family: &str,
    n: usize,
    alpha: Option<f64>,
    beta: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
) -> Result<FamilyPoint, String> {
    let reject = |flag: &str| format!("--{flag} is not a parameter of the {family} family");
    match family {
        "gw" => {
            if a.is_some() || b.is_some() {
                return Err(reject(if a.is_some() { "a" } else { "b" }));
            }
            Ok(FamilyPoint::GhzW {
                n,
                alpha: alpha.ok_or("the gw family needs --alpha and --beta")?,
                beta: beta.ok_or("the gw family needs --alpha and --beta")?,
            })
        }
        "w-noise" => {
            if alpha.is_some() || a.is_some() || b.is_some() {
                return Err(reject(if alpha.is_some() {
                    "alpha"
                } else if a.is_some() {
                    "a"
                } else {
                    "b"
                }));
            }
            Ok(FamilyPoint::WNoise {
                n,
                beta: beta.ok_or("the w-noise family needs --beta")?,
            })
        }
        "w-antiw" => {
            if alpha.is_some() || beta.is_some() {
                return Err(reject(if alpha.is_some() { "alpha" } else { "beta" }));
            }
            Ok(FamilyPoint::WAntiW {
                n,
                a: a.ok_or("the w-antiw family needs --a and --b")?,
                b: b.ok_or("the w-antiw family needs --a and --b")?,
            })
        }
        other => Err(format!(
            "unknown family {other:?}; expected gw, w-noise, or w-antiw"
        )),
    }
}

fn parse_probe(spec: &str, dims: &SystemDims) -> Result<Probe, String> {
    let probe = match spec {
        "computational" => Probe::computational(dims),
        "45" => Probe::diagonal_45(dims),
        "phase-flip" => Probe::phase_flip(dims),
        _ => {
            if let Some(seed) = spec.strip_prefix("random:") {
                let seed: u64 = seed
                    .parse()
                    .map_err(|_| format!("probe seed {seed:?} is not an unsigned integer"))?;
                Probe::random(dims, seed)
            } else if let Some(path) = spec.strip_prefix("file:") {
                let probe = io::load_probe(path.as_ref()).map_err(|e| e.to_string())?;
                if probe.dims() != dims {
                    return Err(format!(
                        "probe file {path} is for dimensions {:?}, the state has {:?}",
                        probe.dims().dims(),
                        dims.dims()
                    ));
                }
                Ok(probe)
            } else {
                return Err(format!(
                    "unknown probe {spec:?}; expected computational, 45, phase-flip, random:<seed>, or file:<path>"
                ));
            }
        }
    };
    probe.map_err(|e| e.to_string())
}

fn parse_probe_set(
    spec: &str,
    dims: &SystemDims,
    seed: u64,
    random_count: usize,
) -> Result<Vec<Probe>, String> {
    match spec {
        "catalog" => catalog(dims).map_err(|e| e.to_string()),
        "catalog+random" => {
            catalog_with_random(dims, random_count, seed).map_err(|e| e.to_string())
        }
        list => list.split(',').map(|one| parse_probe(one, dims)).collect(),
    }
}

#[derive(Serialize)]
struct ThresholdReport<'a> {
    family: &'a str,
    n: usize,
    k: usize,
    probe: &'a str,
    analytic: f64,
    analytic_fraction: String,
    bisected: f64,
    tol: f64,
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut line = serde_json::to_string(value).expect("report serialization cannot fail");
    line.push('\n');
    line
}

fn run_command(cli: &Cli) -> Result<String, String> {
    let err = |e: crate::Error| e.to_string();
    match &cli.command {
        Command::Evaluate { source, k, probe } => {
            let rho = source.resolve()?;
            let probe = parse_probe(probe, rho.dims())?;
            let report = theorem1_with_eps(&rho, &probe, *k, cli.eps).map_err(err)?;
            Ok(json_line(&report))
        }
        Command::Classify {
            source,
            probes,
            random_probes,
        } => {
            let rho = source.resolve()?;
            let probes = parse_probe_set(probes, rho.dims(), cli.seed, *random_probes)?;
            let classification = classify_with_eps(&rho, &probes, cli.eps).map_err(err)?;
            Ok(json_line(&classification))
        }
        Command::Scan {
            family,
            n,
            k,
            res,
            range1,
            range2,
            probes,
            random_probes,
        } => {
            let family = ScanFamily::from_id(family).map_err(err)?;
            let dims = SystemDims::qubits(*n).map_err(err)?;
            let probes = parse_probe_set(probes, &dims, cli.seed, *random_probes)?;
            let ks = if k.is_empty() {
                (2..=*n).collect()
            } else {
                k.clone()
            };
            let ranges = match family.param_count() {
                1 => vec![parse_range(range1)?],
                _ => vec![parse_range(range1)?, parse_range(range2)?],
            };
            let spec = ScanSpec {
                family,
                n: *n,
                ks,
                ranges,
                resolution: *res,
                eps: cli.eps,
            };
            let result = grid_scan(&spec, &probes).map_err(err)?;
            let mut csv = Vec::new();
            write_csv(&result, &mut csv).map_err(err)?;
            String::from_utf8(csv).map_err(|e| e.to_string())
        }
        Command::Threshold {
            family,
            n,
            k,
            probe,
            tol,
        } => {
            if family != "w-noise" {
                return Err(format!(
                    "threshold bisection runs on the w-noise mixing axis; family {family:?} has no single mixing parameter"
                ));
            }
            let dims = SystemDims::qubits(*n).map_err(err)?;
            let probe = parse_probe(probe, &dims)?;
            let analytic = analytic_w_threshold(*n, *k).map_err(err)?;
            let n_sites = *n;
            let curve = move |beta: f64| family_state(&FamilyPoint::WNoise { n: n_sites, beta });
            let bisected =
                bisect_threshold(curve, 0.0, 1.0, *k, &probe, *tol, cli.eps).map_err(err)?;
            Ok(json_line(&ThresholdReport {
                family,
                n: *n,
                k: *k,
                probe: probe.label(),
                analytic: analytic.value(),
                analytic_fraction: format!("{}/{}", analytic.numerator, analytic.denominator),
                bisected,
                tol: *tol,
            }))
        }
        Command::Plan { n, probe } => {
            let probe = if let Some(path) = probe.strip_prefix("file:") {
                let loaded = io::load_probe(path.as_ref()).map_err(err)?;
                if let Some(n) = n {
                    if loaded.dims().n() != *n {
                        return Err(format!(
                            "probe file {path} has {} sites, --n says {n}",
                            loaded.dims().n()
                        ));
                    }
                }
                loaded
            } else {
                let n = n.ok_or("--n is required unless the probe comes from a file")?;
                let dims = SystemDims::qubits(n).map_err(err)?;
                parse_probe(probe, &dims)?
            };
            let mut text = io::plan_to_json(&settings_plan(&probe));
            text.push('\n');
            Ok(text)
        }
        Command::Simulate {
            source,
            probe,
            shots,
            k,
            z,
        } => {
            let rho = source.resolve()?;
            let probe = parse_probe(probe, rho.dims())?;
            let plan = settings_plan(&probe);
            let estimate = simulate_shots(&rho, &plan, *shots, cli.seed).map_err(err)?;
            let report = estimated_report(&estimate, *k, *z, cli.eps).map_err(err)?;
            Ok(json_line(&report))
        }
        Command::Selfcheck => {
            let checks = run_selfcheck(cli.seed);
            let mut text = String::new();
            for check in &checks {
                let _ = writeln!(
                    text,
                    "{} {}: {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            let passed = checks.iter().filter(|c| c.passed).count();
            let _ = writeln!(text, "selfcheck: {passed}/{} checks passed", checks.len());
            if passed < checks.len() {
                // report via stdout but fail the process as an internal error
                print!("{text}");
                return Err(String::new());
            }
            Ok(text)
        }
    }
}

fn parse_range(text: &str) -> Result<(f64, f64), String> {
    let bad = || format!("range {text:?} is not of the form lo:hi");
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

/// Parse argv, run the subcommand, write its output, and return the exit
/// code. Identical argv and seed produce byte-identical output.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version exit 0; usage problems exit 2
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let selfcheck = matches!(cli.command, Command::Selfcheck);
    match run_command(&cli) {
        Ok(text) => match &cli.out {
            Some(path) => match std::fs::write(path, text) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    2
                }
            },
            None => {
                print!("{text}");
                let _ = std::io::stdout().flush();
                0
            }
        },
        Err(message) => {
            if !message.is_empty() {
                eprintln!("error: {message}");
            }
            if selfcheck { 1 } else { 2 }
        }
    }
}
