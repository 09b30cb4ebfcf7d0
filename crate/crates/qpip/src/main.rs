use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use qpip::error::{Error, Result};
use qpip::experiments::{self, protocol_for, QasSpec, RunSpec, Scheme};
use qpip::format::{fixture, parse_circuit};
use qpip::record::{write_records, OutputFormat, ResultRecord};
use qpip::transcript::{write_transcript, Header};
use qpip_core::protocol::{ProtocolVerdict, RunConfig};

#[derive(Parser)]
#[command(name = "qpip", version, about = "Simulated quantum prover interactive proofs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Attack sweeps against an authentication scheme.
    QasSecurity {
        #[arg(long, value_enum, default_value_t = Scheme::Poly)]
        scheme: Scheme,
        /// Field size; 2 for the Clifford scheme.
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Clifford: `pauli:X0,Z1` or `random-unitary`. Polynomial: `sweep`,
        /// `pad-necessity`, `random-unitary` or `pauli:X..:Z..`.
        #[arg(long, default_value = "sweep")]
        adversary: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the protocol on a circuit, or serve as prover with --listen.
    QpipRun {
        /// Circuit file (JSON).
        #[arg(long, conflicts_with = "fixture")]
        circuit: Option<PathBuf>,
        /// Built-in circuit: shift, toffoli-demo, fourier-cycle, sum-toffoli, qubit-parity.
        #[arg(long)]
        fixture: Option<String>,
        /// Checked against the circuit's field size when given.
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// honest, output-flip, random-report, state-swap[:ROUND] or pauli:ROUND:X..:Z..
        #[arg(long, default_value = "honest")]
        adversary: String,
        /// Depolarizing strength on transmitted registers.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Withhold interpreted values from the prover.
        #[arg(long)]
        blind: bool,
        /// Remote prover as HOST:PORT.
        #[arg(long, conflicts_with = "listen")]
        network: Option<String>,
        /// Act as prover on this address instead of running a verifier.
        #[arg(long)]
        listen: Option<String>,
        /// Stop serving after this many connections.
        #[arg(long, requires = "listen")]
        max_connections: Option<u64>,
        /// Transcript of the first run, as JSON lines.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Prover-view distances and instruction-stream comparison.
    Blindness {
        #[arg(long, default_value_t = 5)]
        q: u32,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Numerical checks of the twirl and decomposition lemmas.
    LemmaSuite {
        #[command(flatten)]
        common: Common,
    },
}

fn emit(common: &Common, records: &[ResultRecord]) -> Result<()> {
    match &common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_records(&mut w, records, common.format)?;
            w.flush()?;
        }
        None => write_records(std::io::stdout().lock(), records, common.format)?,
    }
    Ok(())
}

fn bounds_code(records: &[ResultRecord]) -> u8 {
    if records.iter().all(|r| r.holds != Some(false)) {
        0
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::QasSecurity { scheme, q, d, trials, adversary, common } => {
            let q = q.unwrap_or(if scheme == Scheme::Clifford { 2 } else { 5 });
            let records = experiments::qas_security(&QasSpec { scheme, q, d, trials, seed: common.seed, adversary })?;
            emit(&common, &records)?;
            Ok(bounds_code(&records))
        }
        Command::QpipRun { circuit, fixture: name, q, d, trials, adversary, noise, blind, network, listen, max_connections, transcript, common } => {
            if let Some(addr) = listen {
                let strategy = experiments::parse_strategy(&adversary)?;
                let listener = TcpListener::bind(&addr).map_err(|e| Error::Network(format!("cannot listen on {addr}: {e}")))?;
                println!("listening on {}", listener.local_addr()?);
                std::io::stdout().flush()?;
                qpip::net::serve(&listener, &strategy, common.seed, max_connections)?;
                return Ok(0);
            }
            let (circuit, circuit_name) = match (circuit, name) {
                (Some(path), _) => (parse_circuit(&std::fs::read_to_string(&path)?)?, path.display().to_string()),
                (None, Some(n)) => (fixture(&n).ok_or_else(|| Error::Usage(format!("no fixture named {n:?}")))?, n),
                (None, None) => return Err(Error::Usage("give --circuit or --fixture".into())),
            };
            if q.is_some_and(|q| q != circuit.q) {
                return Err(Error::Usage(format!("--q {} does not match the circuit's field size {}", q.unwrap_or(0), circuit.q)));
            }
            if !(0.0..=1.0).contains(&noise) {
                return Err(Error::Usage("noise must lie in [0, 1]".into()));
            }
            let config = RunConfig { d, noise, blind };
            let spec = RunSpec { circuit, circuit_name, config, trials, seed: common.seed, adversary, network };
            let outcome = experiments::qpip_run(&spec)?;
            if let Some(path) = transcript {
                let header = Header::new(common.seed, &spec.circuit, d, protocol_for(&spec.circuit));
                let mut w = BufWriter::new(File::create(path)?);
                write_transcript(&mut w, &header, &outcome.first)?;
                w.flush()?;
            }
            emit(&common, &outcome.records)?;
            if trials == 1 {
                let t = &outcome.first;
                match &t.abort_reason {
                    Some(reason) => eprintln!("verdict: {:?} ({reason})", t.verdict),
                    None => eprintln!("verdict: {:?}", t.verdict),
                }
                return Ok(match t.verdict {
                    ProtocolVerdict::Accept => 0,
                    ProtocolVerdict::Reject => 2,
                    ProtocolVerdict::Abort => 3,
                });
            }
            Ok(if outcome.bounds_hold { 0 } else { 2 })
        }
        Command::Blindness { q, d, common } => {
            let records = experiments::blindness(q, d, common.seed)?;
            emit(&common, &records)?;
            Ok(bounds_code(&records))
        }
        Command::LemmaSuite { common } => {
            let records = experiments::lemmas(common.seed)?;
            emit(&common, &records)?;
            Ok(bounds_code(&records))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("QPIP_MAX_AMPS") {
        match v.parse::<u64>() {
            Ok(limit) => qpip_core::qsim::set_amplitude_ceiling(limit),
            Err(_) => {
                eprintln!("error: QPIP_MAX_AMPS must be a positive integer");
                return ExitCode::from(1);
            }
        }
    }
    let start = Instant::now();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    ExitCode::from(code)
}
