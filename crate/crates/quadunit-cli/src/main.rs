//! Command-line front end: record checks, interval search, reference-table
//! reproduction, counterexample certification, and conductor analysis.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::json;

use quadunit::{
    arith, classgroup, conjectures, pell, search, Config, Conjecture, Error, Status,
};

#[derive(Parser)]
#[command(
    name = "quadunit",
    version,
    about = "Fundamental units of real quadratic orders: divisibility records, searches, and certificates"
)]
struct Cli {
    /// Emit machine-readable JSON instead of the human layout.
    #[arg(long, global = true)]
    json: bool,
    /// Continued-fraction step budget per period traversal.
    #[arg(long, global = true)]
    work_budget: Option<u64>,
    /// Prime bound for powerfulness refutation scans.
    #[arg(long, global = true)]
    prime_bound: Option<u64>,
    /// Odd exponent bound for the power-shape scan.
    #[arg(long, global = true)]
    k_bound: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the full record (divisibilities, residues, class number) and
    /// all verdicts for one squarefree d.
    Check { d: String },
    /// Scan [lo, hi] for squarefree d with d | Y, confirming every hit with
    /// both engines.
    Search {
        lo: String,
        hi: String,
        /// Engine for the first pass; hits are confirmed by the other one.
        #[arg(long, value_enum, default_value_t = EngineArg::Large)]
        engine: EngineArg,
        /// Worker threads for the shard pool.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Append shard events here and resume from it when present.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Write the final records here, one JSON object per line.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Override the shard width.
        #[arg(long)]
        shard_width: Option<u64>,
    },
    /// Recompute the 22 embedded reference rows and diff every cell.
    Table,
    /// Certify d as a counterexample to one of the two prime residue-class
    /// conjectures; exits 0 exactly when the certificate holds.
    Certify {
        d: String,
        #[arg(value_enum)]
        conjecture: ConjectureArg,
    },
    /// List the unusual conductors of d up to f_bound.
    Conductors { d: String, f_bound: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Small,
    Large,
}

impl From<EngineArg> for search::Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Small => search::Engine::Small,
            EngineArg::Large => search::Engine::Large,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConjectureArg {
    Aac,
    Mordell,
}

impl From<ConjectureArg> for Conjecture {
    fn from(c: ConjectureArg) -> Self {
        match c {
            ConjectureArg::Aac => Conjecture::Aac,
            ConjectureArg::Mordell => Conjecture::Mordell,
        }
    }
}

/// Decimal-only arbitrary-precision parse, then a range check against u64.
fn parse_num(what: &str, s: &str) -> Result<u64, Error> {
    let big = BigUint::from_str(s)
        .map_err(|_| Error::Precondition(format!("{what} must be a decimal integer, got {s:?}")))?;
    u64::try_from(&big)
        .map_err(|_| Error::Precondition(format!("{what} = {s} is out of the supported range")))
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        // invalid input: usage
        Error::NotSquarefree(_)
        | Error::DTooSmall(_)
        | Error::DTooLarge(..)
        | Error::NotRamified { .. }
        | Error::Precondition(_) => 2,
        // resource limits and environment
        Error::WorkBudget { .. }
        | Error::FactorBudget(_)
        | Error::RegulatorVerification(_)
        | Error::AmbiguousClassNumber { .. }
        | Error::Io(_) => 3,
        // broken internal cross-checks and serialization
        Error::SoftwareFault(_) | Error::Json(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = Config::default();
    if let Some(b) = cli.work_budget {
        cfg.max_cf_steps = b;
    }
    if let Some(b) = cli.prime_bound {
        cfg.prime_bound = b;
    }
    if let Some(b) = cli.k_bound {
        cfg.k_bound = b;
    }
    match run(&cli, &cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: &Cli, cfg: &Config) -> Result<u8, Error> {
    match &cli.cmd {
        Cmd::Check { d } => check(parse_num("d", d)?, cli.json, cfg),
        Cmd::Search {
            lo,
            hi,
            engine,
            workers,
            checkpoint,
            results,
            shard_width,
        } => {
            let mut cfg = cfg.clone();
            if let Some(w) = shard_width {
                cfg.shard_width = *w;
            }
            search_cmd(
                parse_num("lo", lo)?,
                parse_num("hi", hi)?,
                (*engine).into(),
                *workers,
                checkpoint.as_deref(),
                results.as_deref(),
                cli.json,
                &cfg,
            )
        }
        Cmd::Table => table(cli.json, cfg),
        Cmd::Certify { d, conjecture } => {
            certify(parse_num("d", d)?, (*conjecture).into(), cli.json, cfg)
        }
        Cmd::Conductors { d, f_bound } => conductors(
            parse_num("d", d)?,
            parse_num("f_bound", f_bound)?,
            cli.json,
            cfg,
        ),
    }
}

fn render_record_human(rec: &search::DRecord) {
    println!("d            = {}", rec.d);
    println!("d | Y        = {}", rec.d_divides_big_y);
    println!("d | y        = {}", rec.d_divides_y);
    println!("rc           = {}", rec.rc);
    println!("alpha        = {}", rec.alpha);
    println!("beta         = {}", rec.beta);
    println!("s            = {}", rec.s);
    println!("norm         = {}", rec.norm);
    println!(
        "h            = {}{}",
        rec.h,
        if rec.h_heuristic { " (heuristic)" } else { "" }
    );
}

fn check(d: u64, as_json: bool, cfg: &Config) -> Result<u8, Error> {
    let field = pell::QField::new(d, cfg)?;
    let mut rec = search::build_record(&field, cfg)?;
    let rc = conjectures::check_rc(&field, cfg)?;
    let sc = conjectures::check_sc(&field, cfg.prime_bound, cfg)?;
    let c = conjectures::check_c(&field, cfg.k_bound, cfg.prime_bound, cfg)?;
    let mut certs = json!({ "rc": rc, "sc": sc, "c": c });
    if arith::is_prime(d) && d % 4 != 2 {
        let which = if d % 4 == 1 {
            Conjecture::Aac
        } else {
            Conjecture::Mordell
        };
        let cert = conjectures::certify_counterexample(&field, which, cfg)?;
        certs["counterexample"] = serde_json::to_value(&cert)?;
    }
    rec.certs = Some(certs);
    if as_json {
        println!("{}", serde_json::to_string(&rec)?);
    } else {
        render_record_human(&rec);
        let certs = rec.certs.as_ref().unwrap();
        for key in ["rc", "sc", "c", "counterexample"] {
            if let Some(v) = certs.get(key) {
                let status = v["status"].as_str().unwrap_or("?");
                println!("verdict {:12} {status}", format!("{key}:"));
            }
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn search_cmd(
    lo: u64,
    hi: u64,
    engine: search::Engine,
    workers: usize,
    checkpoint: Option<&std::path::Path>,
    results: Option<&std::path::Path>,
    as_json: bool,
    cfg: &Config,
) -> Result<u8, Error> {
    let shards = search::plan_shards(lo, hi, cfg.shard_width);
    let total = shards.len();
    let mut all = Vec::new();
    let mut shard_errors = Vec::new();
    let mut done = 0usize;
    // chunked execution so hits stream out and the counter moves while the
    // checkpoint still sees one coherent shard layout
    for chunk in shards.chunks(workers.max(1)) {
        let (clo, chi) = (chunk[0].0, chunk[chunk.len() - 1].1);
        let out = search::scan_interval(clo, chi, engine, workers, checkpoint, cfg)?;
        for rec in &out.records {
            if as_json {
                println!("{}", serde_json::to_string(rec)?);
            } else {
                println!(
                    "hit d = {} (dY = {}, dy = {}, rc = {}, h = {}{})",
                    rec.d,
                    rec.d_divides_big_y,
                    rec.d_divides_y,
                    rec.rc,
                    rec.h,
                    if rec.h_heuristic { "~" } else { "" }
                );
            }
        }
        all.extend(out.records);
        shard_errors.extend(out.errors);
        done += chunk.len();
        eprintln!("shards {done}/{total}");
    }
    if let Some(path) = results {
        search::write_results(&all, path)?;
    }
    if !shard_errors.is_empty() {
        for (a, b, msg) in &shard_errors {
            eprintln!("shard [{a}, {b}] failed: {msg}");
        }
        return Ok(3);
    }
    if !as_json {
        println!("{} hit(s) in [{lo}, {hi}]", all.len());
    }
    Ok(0)
}

fn table(as_json: bool, cfg: &Config) -> Result<u8, Error> {
    let report = search::reproduce_tables(cfg)?;
    if as_json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        for rec in &report.rows {
            println!(
                "{:>16}  dY={} dy={} rc={} alpha={} beta={} s={} norm={:>2} h={}{}",
                rec.d,
                rec.d_divides_big_y as u8,
                rec.d_divides_y as u8,
                rec.rc as u8,
                rec.alpha,
                rec.beta,
                rec.s,
                rec.norm,
                rec.h,
                if rec.h_heuristic { "~" } else { "" }
            );
        }
        if report.mismatches.is_empty() {
            println!("all {} rows match", report.rows.len());
        } else {
            for m in &report.mismatches {
                println!(
                    "MISMATCH d = {}: {} expected {}, got {}",
                    m.d, m.field, m.expected, m.got
                );
            }
        }
    }
    Ok(if report.mismatches.is_empty() { 0 } else { 1 })
}

fn certify(d: u64, which: Conjecture, as_json: bool, cfg: &Config) -> Result<u8, Error> {
    let field = pell::QField::new(d, cfg)?;
    let verdict = conjectures::certify_counterexample(&field, which, cfg)?;
    if as_json {
        println!("{}", serde_json::to_string(&verdict)?);
    } else {
        println!("certification for d = {d}: {:?}", verdict.status);
        if let Some(w) = &verdict.witness {
            println!("witness: {w}");
        }
    }
    Ok(if verdict.status == Status::Holds { 0 } else { 1 })
}

fn conductors(d: u64, f_bound: u64, as_json: bool, cfg: &Config) -> Result<u8, Error> {
    let field = pell::QField::new(d, cfg)?;
    let list = classgroup::unusual_conductors(&field, f_bound, cfg)?;
    if as_json {
        println!("{}", serde_json::to_string(&list)?);
    } else if list.is_empty() {
        println!("no unusual conductors of {d} up to {f_bound}");
    } else {
        for c in &list {
            println!(
                "f = {} (pic order {}, unit index {})",
                c.f, c.pic_order, c.unit_index
            );
        }
    }
    Ok(0)
}
