//! `strucnet`: structural analysis, topology design, gain synthesis and
//! simulation of networked estimators from JSON system files.
//!
//! Exit codes: 0 success, 1 parse/usage error, 2 not observable,
//! 3 structural impossibility, 4 gain synthesis failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use strucnet::fusion::{design_topology, local_minimality_check, verify_design, DesignStrategy};
use strucnet::io::{write_trace_csv, GainFile, SystemDescription, TopologyFile};
use strucnet::numerics::{
    simulate_nke, summarize, synthesize_gain, EstimatorInit, GainConfig, NumericSystem, SimConfig,
};
use strucnet::report::{analyze, render_edges, render_verification};
use strucnet::Error;

#[derive(Parser)]
#[command(name = "strucnet", version, about = "Structural observability of networked estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural report: S-ranks, SCCs, cover family, agent types.
    Analyze {
        system: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Design a communication topology.
    Design {
        system: PathBuf,
        #[arg(long, value_enum)]
        mode: DesignMode,
        /// Topology file to write (printed to stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check generic observability of the distributed estimator.
    Verify { system: PathBuf, topology: PathBuf },
    /// Synthesize a block-diagonal estimator gain.
    Gain {
        system: PathBuf,
        topology: PathBuf,
        #[arg(long, env = "STRUCNET_SEED", default_value_t = 0)]
        seed: u64,
        /// Gain file to write (printed to stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the estimator and export squared errors as CSV.
    Simulate {
        system: PathBuf,
        topology: PathBuf,
        gain: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, env = "STRUCNET_SEED", default_value_t = 0)]
        seed: u64,
        /// CSV file to write (printed to stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Initial estimates of every agent.
        #[arg(long, value_enum, default_value_t = InitMode::Zero)]
        init: InitMode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignMode {
    Output,
    Main,
    FullSrank,
}

impl From<DesignMode> for DesignStrategy {
    fn from(m: DesignMode) -> Self {
        match m {
            DesignMode::Output => DesignStrategy::OutputFusion,
            DesignMode::Main => DesignStrategy::Main,
            DesignMode::FullSrank => DesignStrategy::FullSRank,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitMode {
    Zero,
    Truth,
}

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_UNOBSERVABLE: u8 = 2;
const EXIT_IMPOSSIBLE: u8 = 3;
const EXIT_GAIN: u8 = 4;

/// A failed command: message and exit code.
struct Failure(String, u8);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Dimension(_) => EXIT_USAGE,
            Error::NotObservable(_) | Error::Placement { .. } | Error::Structural(_) => EXIT_UNOBSERVABLE,
            Error::SRankDeficient { .. } => EXIT_IMPOSSIBLE,
            Error::NoStabilizingGainFound { .. } => EXIT_GAIN,
        };
        Failure(e.to_string(), code)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(e.to_string(), EXIT_USAGE)
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display()), EXIT_USAGE))
}

fn write_or_print(path: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()), EXIT_USAGE)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_system(path: &Path) -> std::result::Result<SystemDescription, Failure> {
    Ok(SystemDescription::parse(&read(path)?)?)
}

fn load_numeric(
    system: &Path,
    topology: &Path,
) -> std::result::Result<(SystemDescription, NumericSystem), Failure> {
    let desc = load_system(system)?;
    let topo = TopologyFile::parse(&read(topology)?)?.to_design(&desc.ids())?;
    let numeric = desc.numeric.as_ref().ok_or_else(|| {
        Failure(
            format!("{}: a \"numeric\" block is required", system.display()),
            EXIT_USAGE,
        )
    })?;
    let sys = NumericSystem::from_structure(&desc.a, &desc.cs(), &topo, &numeric.params())?;
    Ok((desc, sys))
}

fn run(cli: Cli) -> std::result::Result<u8, Failure> {
    match cli.command {
        Command::Analyze { system, json } => {
            let desc = load_system(&system)?;
            let report = analyze(&desc)?;
            print!("{}", report.render_text());
            if let Some(path) = json {
                write_or_print(Some(&path), &report.to_json())?;
            }
            Ok(if report.observability.observable {
                EXIT_OK
            } else {
                EXIT_UNOBSERVABLE
            })
        }
        Command::Design { system, mode, out } => {
            let desc = load_system(&system)?;
            let strategy = DesignStrategy::from(mode);
            let topo = design_topology(&desc.a, &desc.cs(), strategy)?;
            let ids = desc.ids();
            let removable = local_minimality_check(&desc.a, &desc.cs(), &topo)?;
            let mut summary = format!(
                "{strategy} design, mode {}, {} flow edges:\n{}",
                topo.mode,
                topo.edge_count(),
                render_edges(&topo, &ids)
            );
            if removable.is_empty() {
                summary.push_str("locally minimal: no edge can be removed\n");
            } else {
                let list: Vec<String> = removable
                    .iter()
                    .map(|&(u, v)| format!("{} -> {}", ids[u], ids[v]))
                    .collect();
                summary.push_str(&format!("individually removable edges: {}\n", list.join(", ")));
            }
            let file = TopologyFile::from_design(&topo, &ids).to_json() + "\n";
            match out {
                Some(path) => {
                    print!("{summary}");
                    write_or_print(Some(&path), &file)?;
                }
                None => {
                    eprint!("{summary}");
                    print!("{file}");
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify { system, topology } => {
            let desc = load_system(&system)?;
            let ids = desc.ids();
            let topo = TopologyFile::parse(&read(&topology)?)?.to_design(&ids)?;
            let r = verify_design(&desc.a, &desc.cs(), &topo)?;
            print!("{}", render_verification(&r, &topo, &ids));
            Ok(if r.observable() { EXIT_OK } else { EXIT_UNOBSERVABLE })
        }
        Command::Gain {
            system,
            topology,
            seed,
            out,
        } => {
            let (desc, sys) = load_numeric(&system, &topology)?;
            let config = GainConfig {
                seed,
                ..GainConfig::default()
            };
            // An unobservable structure is reported as a gain failure here.
            let res = synthesize_gain(&sys, &config).map_err(|e| match e {
                Error::Structural(_) => Failure(e.to_string(), EXIT_GAIN),
                e => Failure::from(e),
            })?;
            let file = GainFile::new(&desc.ids(), desc.n, &res);
            let summary = format!(
                "rho = {:.6}\nmethod = {}\niterations = {}\n",
                res.rho, res.method, res.iterations
            );
            match out {
                Some(path) => {
                    print!("{summary}");
                    write_or_print(Some(&path), &(file.to_json() + "\n"))?;
                }
                None => {
                    eprint!("{summary}");
                    println!("{}", file.to_json());
                }
            }
            Ok(EXIT_OK)
        }
        Command::Simulate {
            system,
            topology,
            gain,
            steps,
            seed,
            out,
            init,
        } => {
            let (desc, sys) = load_numeric(&system, &topology)?;
            let ids = desc.ids();
            let k = GainFile::parse(&read(&gain)?)?.gain_for(&ids, desc.n)?;
            let config = SimConfig {
                steps,
                seed,
                x0_range: desc.numeric.as_ref().map_or((0.0, 3.0), |n| n.x0_range),
                init: match init {
                    InitMode::Zero => EstimatorInit::Zero,
                    InitMode::Truth => EstimatorInit::Truth,
                },
            };
            let trace = simulate_nke(&sys, &k, &config)?;
            let mut summary = String::from("agent  last-half mean  growth ratio  status\n");
            for (id, s) in ids.iter().zip(summarize(&trace)) {
                summary.push_str(&format!(
                    "{id:<6} {:<15.6e} {:<13.6} {}\n",
                    s.last_half_mean,
                    s.growth_ratio,
                    if s.diverging { "DIVERGING" } else { "bounded" }
                ));
            }
            match out {
                Some(path) => {
                    let file = fs::File::create(&path)
                        .map_err(|e| Failure(format!("{}: {e}", path.display()), EXIT_USAGE))?;
                    let mut w = io::BufWriter::new(file);
                    write_trace_csv(&trace, &ids, &mut w)?;
                    w.flush()?;
                    print!("{summary}");
                }
                None => {
                    let stdout = io::stdout();
                    write_trace_csv(&trace, &ids, stdout.lock())?;
                    eprint!("{summary}");
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg, code)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
