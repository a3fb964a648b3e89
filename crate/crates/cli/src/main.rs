//! obfx: extract, verify, attack, bound, sweep, and fixture generation.
//!
//! Exit status contract:
//!   0  success; when the command checks a property, the property holds
//!   1  the checked property fails (a valid scientific result; the payload
//!      carries the witness)
//!   2  usage, parse, or precondition errors
//!   3  the requested exhaustive computation exceeds the work budget
//!
//! Every command is a pure function of its flags, input files, and declared
//! seeds; repeated invocations produce byte-identical output.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use obfx_core::analysis::{self, ThresholdConstants};
use obfx_core::bits::BitString;
use obfx_core::dyadic::{Dyadic, Ratio};
use obfx_core::error::Error;
use obfx_core::experiments::{self, SweepConfig};
use obfx_core::extractors;
use obfx_core::streaming::{self, StreamingProgram};
use obfx_core::table::{TruthTableFunction, TT_MAGIC};
use obfx_core::verify::{self, Property, DEFAULT_WORK_BUDGET};

#[derive(Parser)]
#[command(name = "obfx", version, about = "Exact toolkit for bit-fixing extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the payload to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a builtin construction on one input.
    Extract {
        /// cycle | parity | pm-cycle
        #[arg(long)]
        construction: String,
        /// Input bits: a plain 01-string, or hex with an 0x prefix.
        #[arg(long)]
        input: String,
        /// Output length for the cycle construction.
        #[arg(long)]
        m: Option<u32>,
        /// Cycle size for the pm-cycle construction (odd, >= 3).
        #[arg(long)]
        cycle_size: Option<u64>,
    },
    /// Exhaustively verify a property of a truth table.
    Verify {
        /// rf | serf | aerf
        #[arg(long)]
        property: String,
        #[arg(long)]
        k: usize,
        /// Truth table file (binary or hex format).
        #[arg(long)]
        table: PathBuf,
        /// Threshold to compare against; with it the exit status reports
        /// whether the property holds.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
        budget: u128,
    },
    /// Run the small-support attack against a streaming program.
    Attack {
        /// Program file in the JSON program format.
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Closed-form bounds, exact oracles, grids, and predictions.
    Bound(BoundArgs),
    /// Seeded sweep over random truth tables; emits CSV.
    Sweep {
        /// rf | serf | aerf
        #[arg(long)]
        property: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        /// Exact threshold, e.g. 1/4, 0.25, or 2^-2.
        #[arg(long)]
        eps: String,
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
        budget: u128,
        /// Thread-count hint; results are identical for every value.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Materialize builtin tables and programs.
    Gen {
        /// parity | cycle | cycle-add | fp-chord
        #[arg(long)]
        what: String,
        #[arg(long)]
        n: u32,
        /// Output length for cycle tables.
        #[arg(long)]
        m: Option<u32>,
        /// Modulus for cycle-add programs (power of two).
        #[arg(long)]
        modulus: Option<u64>,
        /// Prime for fp-chord programs.
        #[arg(long)]
        p: Option<u64>,
        /// bin | hex (tables only)
        #[arg(long, default_value = "bin")]
        format: String,
    },
}

#[derive(Args)]
struct BoundArgs {
    /// Exact walk distance and its closed forms: --walk K M
    #[arg(long, num_args = 2, value_names = ["K", "M"])]
    walk: Option<Vec<u64>>,
    /// Exact binomial tail and its upper bound: --chernoff T EPS
    #[arg(long, num_args = 2, value_names = ["T", "EPS"])]
    chernoff: Option<Vec<String>>,
    /// CSV grid of walk bounds over the given moduli.
    #[arg(long)]
    walk_grid: bool,
    #[arg(long, default_value = "2,4,8,16", value_delimiter = ',')]
    moduli: Vec<u64>,
    #[arg(long, default_value_t = 1 << 20)]
    k_max: u64,
    /// CSV report of the tail lower-bound cases and the fitted constant.
    #[arg(long)]
    converse: bool,
    #[arg(long, default_value = "8,16,32,64,128,256,512,1024", value_delimiter = ',')]
    t_grid: Vec<u64>,
    #[arg(long, default_value = "1/16,1/8,1/4,1/2", value_delimiter = ',')]
    eps_grid: Vec<String>,
    /// Threshold predictions: --predict N EPS
    #[arg(long, num_args = 2, value_names = ["N", "EPS"])]
    predict: Option<Vec<String>>,
    /// Additive constant for predictions.
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    /// Output length assumed by the static prediction.
    #[arg(long, default_value_t = 1)]
    pred_m: u32,
}

/// Payload bytes plus the exit status they imply.
struct Outcome {
    payload: Vec<u8>,
    status: u8,
}

fn ok(payload: String) -> Result<Outcome, Error> {
    Ok(Outcome { payload: payload.into_bytes(), status: 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(outcome) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &outcome.payload) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(&outcome.payload);
                if !outcome.payload.ends_with(b"\n") {
                    let _ = stdout.write_all(b"\n");
                }
            }
            ExitCode::from(outcome.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let status = match e {
                Error::BudgetExceeded { .. } => 3,
                Error::SweepTrial { ref source, .. }
                    if matches!(**source, Error::BudgetExceeded { .. }) =>
                {
                    3
                }
                _ => 2,
            };
            ExitCode::from(status)
        }
    }
}

fn run(command: &Command) -> Result<Outcome, Error> {
    match command {
        Command::Extract { construction, input, m, cycle_size } => {
            extract(construction, input, *m, *cycle_size)
        }
        Command::Verify { property, k, table, eps, budget } => {
            cmd_verify(property, *k, table, eps.as_deref(), *budget)
        }
        Command::Attack { program, k } => attack(program, *k),
        Command::Bound(args) => bound(args),
        Command::Sweep { property, n, m, eps, k_min, k_max, trials, seed, budget, parallelism } => {
            let config = SweepConfig {
                property: parse_property(property)?,
                n: *n,
                m: *m,
                epsilon: Ratio::parse(eps)?,
                k_min: *k_min,
                k_max: *k_max,
                trials: *trials,
                master_seed: *seed,
                work_budget: *budget,
                parallelism: *parallelism,
            };
            let result = experiments::run_sweep(&config)?;
            ok(result.to_csv())
        }
        Command::Gen { what, n, m, modulus, p, format } => gen(what, *n, *m, *modulus, *p, format),
    }
}

fn parse_property(s: &str) -> Result<Property, Error> {
    match s {
        "rf" => Ok(Property::Rf),
        "serf" => Ok(Property::StaticErf),
        "aerf" => Ok(Property::AdaptiveErf),
        _ => Err(Error::InvalidParameter(format!(
            "unknown property {s:?}; expected rf, serf, or aerf"
        ))),
    }
}

fn parse_input_bits(input: &str) -> Result<BitString, Error> {
    if let Some(hex) = input.strip_prefix("0x") {
        BitString::from_hex_str(hex)
    } else {
        BitString::from_binary_str(input)
    }
}

#[derive(Serialize)]
struct ExtractOutcome<'a> {
    command: &'a str,
    construction: &'a str,
    input: String,
    output: Option<String>,
    endpoint: Option<u64>,
}

fn extract(
    construction: &str,
    input: &str,
    m: Option<u32>,
    cycle_size: Option<u64>,
) -> Result<Outcome, Error> {
    let w = parse_input_bits(input)?;
    let (output, endpoint) = match construction {
        "cycle" => {
            let m = m.ok_or_else(|| Error::InvalidParameter("cycle needs --m".into()))?;
            (Some(extractors::cycle_walk_extract(&w, m)?.to_string()), None)
        }
        "parity" => (Some(extractors::parity(&w).to_string()), None),
        "pm-cycle" => {
            let c = cycle_size
                .ok_or_else(|| Error::InvalidParameter("pm-cycle needs --cycle-size".into()))?;
            (None, Some(extractors::plusminus_cycle_extract(&w, c)?))
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown construction {construction:?}; expected cycle, parity, or pm-cycle"
            )))
        }
    };
    ok(pretty(&ExtractOutcome {
        command: "extract",
        construction,
        input: w.to_string(),
        output,
        endpoint,
    }))
}

fn load_table(path: &Path) -> Result<TruthTableFunction, Error> {
    let data = std::fs::read(path)?;
    if data.len() >= 4 && data[..4] == TT_MAGIC.to_le_bytes() {
        return TruthTableFunction::from_binary(&data);
    }
    let text = String::from_utf8(data)
        .map_err(|_| Error::Format("table file is neither binary nor hex format".into()))?;
    TruthTableFunction::from_hex(&text)
}

#[derive(Serialize)]
struct VerifyOutcome<'a> {
    command: &'a str,
    table: String,
    eps: Option<Ratio>,
    holds: Option<bool>,
    report: verify::VerificationReport,
}

fn cmd_verify(
    property: &str,
    k: usize,
    table: &Path,
    eps: Option<&str>,
    budget: u128,
) -> Result<Outcome, Error> {
    let f = load_table(table)?;
    let report = verify::verify(&f, parse_property(property)?, k, budget)?;
    let eps = eps.map(Ratio::parse).transpose()?;
    let holds = eps.map(|e| e.cmp_dyadic(&report.worst_distance) != std::cmp::Ordering::Less);
    let status = match holds {
        Some(false) => 1,
        _ => 0,
    };
    let payload_str = pretty(&VerifyOutcome {
        command: "verify",
        table: table.display().to_string(),
        eps,
        holds,
        report,
    });
    Ok(Outcome { payload: payload_str.into_bytes(), status })
}

#[derive(Serialize)]
struct AttackOutcome<'a> {
    command: &'a str,
    program: String,
    k: usize,
    space: f64,
    space_limit: f64,
    result: streaming::AttackResult,
    achieved_distance: Dyadic,
    output_support: usize,
    /// The program cannot be a (k, eps)-extractor for any eps below this.
    not_extractor_below: Dyadic,
}

fn attack(path: &Path, k: usize) -> Result<Outcome, Error> {
    let text = std::fs::read_to_string(path)?;
    let program = StreamingProgram::from_json_str(&text)?;
    let result = streaming::attack_source(&program, k)?;
    let dist = program.output_distribution_on(&result.source)?;
    let big_m = 1u64 << program.output_bits();
    let not_below = if big_m > (k + 1) as u64 {
        Dyadic::from_u64(big_m - (k + 1) as u64, program.output_bits())
    } else {
        Dyadic::zero()
    };
    ok(pretty(&AttackOutcome {
        command: "attack",
        program: path.display().to_string(),
        k,
        space: program.space(),
        space_limit: streaming::attack_space_limit(program.n(), k),
        result,
        achieved_distance: dist.distance_from_uniform(),
        output_support: dist.support_size(),
        not_extractor_below: not_below,
    }))
}

#[derive(Serialize)]
struct WalkBoundOutcome<'a> {
    command: &'a str,
    report: analysis::WalkBoundsRow,
}

#[derive(Serialize)]
struct ChernoffOutcome<'a> {
    command: &'a str,
    t: u64,
    eps: Ratio,
    exact_tail: Dyadic,
    bound: f64,
    satisfied: bool,
}

fn bound(args: &BoundArgs) -> Result<Outcome, Error> {
    let modes = [
        args.walk.is_some(),
        args.chernoff.is_some(),
        args.walk_grid,
        args.converse,
        args.predict.is_some(),
    ];
    if modes.iter().filter(|&&b| b).count() != 1 {
        return Err(Error::InvalidParameter(
            "choose exactly one of --walk, --chernoff, --walk-grid, --converse, --predict".into(),
        ));
    }
    if let Some(kv) = &args.walk {
        let row = analysis::walk_bounds(kv[0], kv[1])?;
        let status = u8::from(!row.satisfied);
        let payload = pretty(&WalkBoundOutcome { command: "bound", report: row });
        return Ok(Outcome { payload: payload.into_bytes(), status });
    }
    if let Some(tv) = &args.chernoff {
        let t: u64 = tv[0]
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad t {:?}", tv[0])))?;
        let eps = Ratio::parse(&tv[1])?;
        let tail = analysis::binomial_tail_exact(t, eps)?;
        let bound = analysis::chernoff_upper(t, eps.to_f64());
        let satisfied = tail.le_f64_bound(bound, analysis::chernoff_upper_log2(t, eps.to_f64()));
        let status = u8::from(!satisfied);
        let payload = pretty(&ChernoffOutcome {
            command: "bound",
            t,
            eps,
            exact_tail: tail,
            bound,
            satisfied,
        });
        return Ok(Outcome { payload: payload.into_bytes(), status });
    }
    if args.walk_grid {
        let rows = analysis::walk_bounds_grid(&args.moduli, args.k_max)?;
        return ok(analysis::walk_bounds_csv(&rows));
    }
    if args.converse {
        let eps: Vec<Ratio> =
            args.eps_grid.iter().map(|s| Ratio::parse(s)).collect::<Result<_, _>>()?;
        let report = analysis::converse_regime_report(&args.t_grid, &eps)?;
        let status = u8::from(!report.verify());
        return Ok(Outcome { payload: analysis::converse_csv(&report).into_bytes(), status });
    }
    let pv = args.predict.as_ref().expect("mode checked above");
    let n: u64 =
        pv[0].parse().map_err(|_| Error::InvalidParameter(format!("bad n {:?}", pv[0])))?;
    let eps: f64 =
        pv[1].parse().map_err(|_| Error::InvalidParameter(format!("bad eps {:?}", pv[1])))?;
    let predictions =
        analysis::threshold_predictions(n, eps, ThresholdConstants { c: args.c, m: args.pred_m })?;
    ok(pretty(&predictions))
}

fn gen(
    what: &str,
    n: u32,
    m: Option<u32>,
    modulus: Option<u64>,
    p: Option<u64>,
    format: &str,
) -> Result<Outcome, Error> {
    let table_payload = |t: &TruthTableFunction| -> Result<Vec<u8>, Error> {
        match format {
            "bin" => Ok(t.to_binary()),
            "hex" => Ok(t.to_hex().into_bytes()),
            _ => Err(Error::InvalidParameter(format!("unknown format {format:?}"))),
        }
    };
    let payload = match what {
        "parity" => table_payload(&TruthTableFunction::parity(n)?)?,
        "cycle" => {
            let m = m.ok_or_else(|| Error::InvalidParameter("cycle needs --m".into()))?;
            table_payload(&TruthTableFunction::cycle_walk(n, m)?)?
        }
        "cycle-add" => {
            let modulus =
                modulus.ok_or_else(|| Error::InvalidParameter("cycle-add needs --modulus".into()))?;
            streaming::cycle_add_program(n as usize, modulus)?.to_json_string().into_bytes()
        }
        "fp-chord" => {
            let p = p.ok_or_else(|| Error::InvalidParameter("fp-chord needs --p".into()))?;
            streaming::fp_chord_program(n as usize, p)?.to_json_string().into_bytes()
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown builtin {what:?}; expected parity, cycle, cycle-add, or fp-chord"
            )))
        }
    };
    // The payload is the artifact itself; pair with --out to write a file.
    Ok(Outcome { payload, status: 0 })
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("payload serializes")
}
