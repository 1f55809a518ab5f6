//! `kron`: reduce, simulate and cross-check generalized electrical networks.
//!
//! Exit codes: 0 ok, 1 validation failure or failed check, 2 not reducible,
//! 3 file or parse error, 4 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode as ProcessExit;

use clap::{Parser, Subcommand};
use kron_core::io::{
    self, to_pretty_json, trace_to_csv, ExcitationDocument, NetlistDocument, ReduceReport,
    ValidationSummary,
};
use kron_core::simulation::{frequency_certificate, FrequencyReport};
use kron_core::{
    compare_equivalence, kron_reduce, simulate_original, simulate_series_chain, Error, ExitCode,
    Network, Scalar, TransientSkip,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "kron",
    version,
    about = "Kron reduction of generalized linear electrical networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a netlist against the network invariants.
    Validate { netlist: PathBuf },
    /// Eliminate the internal vertices and write the reduced netlist.
    Reduce {
        netlist: PathBuf,
        /// Reduced netlist destination; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Reduction report destination; stdout (or stderr with no -o) when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = f64::default_rank_rtol())]
        rtol: f64,
    },
    /// Simulate the original network and write boundary currents and internal potentials.
    Simulate {
        netlist: PathBuf,
        excitation: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Use direct elimination along a two-terminal series chain; needs no homogeneity.
        #[arg(long)]
        series_chain: bool,
        #[arg(long, default_value_t = f64::default_rank_rtol())]
        rtol: f64,
    },
    /// Simulate original and reduced networks and compare their boundary currents.
    Compare {
        netlist: PathBuf,
        excitation: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Transient window in seconds, or `auto`.
        #[arg(long, default_value = "auto", value_parser = parse_skip)]
        skip: TransientSkip<f64>,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write `<prefix>.original.csv` and `<prefix>.reduced.csv`.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long, default_value_t = f64::default_rank_rtol())]
        rtol: f64,
    },
    /// Compare original and reduced admittance matrices at random complex frequencies.
    Freqresp {
        netlist: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest accepted entrywise relative error.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = f64::default_rank_rtol())]
        rtol: f64,
    },
}

fn parse_skip(s: &str) -> Result<TransientSkip<f64>, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(TransientSkip::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(TransientSkip::Fixed(v)),
        _ => Err(format!("`{s}` is neither `auto` nor a nonnegative number")),
    }
}

fn load_network(path: &Path) -> Result<Network, Error> {
    Ok(io::parse_netlist(&io::read_file(path)?)?)
}

fn emit(text: &str, dest: Option<&Path>) -> Result<(), Error> {
    match dest {
        Some(p) => io::write_file(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Serialize)]
struct FrequencyOutcome {
    passed: bool,
    tolerance: f64,
    #[serde(flatten)]
    report: FrequencyReport,
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate { netlist } => {
            let net: Network =
                NetlistDocument::from_json(&io::read_file(&netlist)?)?.to_network()?;
            let report = net.validate();
            print!("{}", to_pretty_json(&ValidationSummary::from(&report)));
            Ok(if report.is_valid() {
                ExitCode::Ok
            } else {
                ExitCode::Validation
            })
        }
        Command::Reduce {
            netlist,
            output,
            report,
            rtol,
        } => {
            let net = load_network(&netlist)?;
            let red = kron_reduce(&net, rtol)?;
            let summary = to_pretty_json(&ReduceReport::from(&red));
            let doc = NetlistDocument::from_reduced(&red).to_json();
            match (&output, &report) {
                (Some(out), _) => {
                    io::write_file(out, &doc)?;
                    emit(&summary, report.as_deref())?;
                }
                (None, Some(rep)) => {
                    print!("{doc}");
                    io::write_file(rep, &summary)?;
                }
                (None, None) => {
                    print!("{doc}");
                    eprint!("{summary}");
                }
            }
            Ok(ExitCode::Ok)
        }
        Command::Simulate {
            netlist,
            excitation,
            output,
            series_chain,
            rtol,
        } => {
            let net = load_network(&netlist)?;
            let doc = ExcitationDocument::from_json(&io::read_file(&excitation)?)?;
            let exc = doc.excitation(net.partition())?;
            let grid = doc.grid()?;
            let out = if series_chain {
                simulate_series_chain(&net, &exc, &grid)?
            } else {
                simulate_original(&net, &exc, &grid, rtol)?
            };
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            io::write_file(&output, &trace_to_csv(&out.combined()?))?;
            Ok(ExitCode::Ok)
        }
        Command::Compare {
            netlist,
            excitation,
            tol,
            skip,
            report,
            traces,
            rtol,
        } => {
            let net = load_network(&netlist)?;
            let doc = ExcitationDocument::from_json(&io::read_file(&excitation)?)?;
            let exc = doc.excitation(net.partition())?;
            let grid = doc.grid()?;
            let run = compare_equivalence(&net, &exc, &grid, tol, skip, rtol)?;
            for w in &run.report.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(prefix) = traces {
                io::write_file(
                    suffixed(&prefix, ".original.csv"),
                    &trace_to_csv(&run.original.boundary_currents),
                )?;
                io::write_file(
                    suffixed(&prefix, ".reduced.csv"),
                    &trace_to_csv(&run.reduced.boundary_currents),
                )?;
            }
            emit(&to_pretty_json(&run.report), report.as_deref())?;
            Ok(if run.report.passed {
                ExitCode::Ok
            } else {
                ExitCode::Validation
            })
        }
        Command::Freqresp {
            netlist,
            samples,
            seed,
            tol,
            rtol,
        } => {
            let net = load_network(&netlist)?;
            let red = kron_reduce(&net, rtol)?;
            let report = frequency_certificate(&net, &red, samples, seed, rtol)?;
            let passed = report.max_relative_error <= tol;
            print!(
                "{}",
                to_pretty_json(&FrequencyOutcome {
                    passed,
                    tolerance: tol,
                    report,
                })
            );
            Ok(if passed {
                ExitCode::Ok
            } else {
                ExitCode::Validation
            })
        }
    }
}

fn main() -> ProcessExit {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2, which here means not reducible.
            let code = if e.use_stderr() {
                ExitCode::Io
            } else {
                ExitCode::Ok
            };
            let _ = e.print();
            return ProcessExit::from(code.code());
        }
    };
    match run(cli) {
        Ok(code) => ProcessExit::from(code.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ProcessExit::from(e.exit_code().code())
        }
    }
}
