//! Interval search for squarefree d whose fundamental solution over Z[√d]
//! satisfies d | Y, with two-engine confirmation of every hit, sharded
//! checkpointed execution, and reproduction of the embedded reference rows.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::pell::{self, QField, UnitResidue};
use crate::{arith, classgroup, infra, Config, Error, Result};

/// Which modular-unit engine drives the first pass of a scan. `Small` is the
/// linear continued-fraction walk, `Large` the infrastructure ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Engine {
    Small,
    Large,
}

impl Engine {
    /// The confirming engine paired with this one.
    pub fn other(self) -> Engine {
        match self {
            Engine::Small => Engine::Large,
            Engine::Large => Engine::Small,
        }
    }
}

/// Unit residues via the chosen engine. The large-step engine signals when
/// its regulator verification fails; that is not an error in d, so the walk
/// silently degrades to the small-step engine.
fn residues_by_engine(field: &QField, m: u64, engine: Engine, cfg: &Config) -> Result<UnitResidue> {
    match engine {
        Engine::Small => pell::unit_residue(field, m, cfg),
        Engine::Large => match infra::unit_residue_fast(field, m, cfg) {
            Err(Error::RegulatorVerification(_)) => pell::unit_residue(field, m, cfg),
            other => other,
        },
    }
}

/// One fully-populated result row for a squarefree d.
///
/// Serialized keys follow the results-file schema: `dY` is "d divides the
/// Y of the fundamental solution of X² − dY² = ±4 over Z[√d]" and `dy` is
/// "d divides the y of the fundamental unit x + yω".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DRecord {
    pub d: u64,
    #[serde(rename = "dY")]
    pub d_divides_big_y: bool,
    #[serde(rename = "dy")]
    pub d_divides_y: bool,
    /// The four-condition residue criterion: norm +1, d ≢ 1 mod 8, y even,
    /// d | y.
    pub rc: bool,
    /// y mod 2.
    pub alpha: u8,
    /// d mod 8.
    pub beta: u8,
    /// Number of distinct prime factors of d.
    pub s: u32,
    /// Norm of the fundamental unit, +1 or −1.
    pub norm: i8,
    /// Class number of Q(√d).
    pub h: u64,
    /// True when h comes from the analytic estimate rather than an
    /// unconditional cycle count.
    pub h_heuristic: bool,
    /// Optional attached verdicts (populated by callers, never by scans).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certs: Option<Value>,
}

/// Computes every DRecord field for one d, running both engines at modulus
/// 2d and insisting they agree before anything is reported.
pub fn build_record(field: &QField, cfg: &Config) -> Result<DRecord> {
    let d = field.d;
    let m = 2 * d;
    let small = residues_by_engine(field, m, Engine::Small, cfg)?;
    let large = residues_by_engine(field, m, Engine::Large, cfg)?;
    let same = small.x_mod == large.x_mod
        && small.y_mod == large.y_mod
        && small.zx_mod == large.zx_mod
        && small.zy_mod == large.zy_mod
        && small.norm_sign == large.norm_sign;
    if !same {
        return Err(Error::SoftwareFault(format!(
            "engines disagree at d = {d}: small ({}, {}, {}, {}, {}), large ({}, {}, {}, {}, {})",
            small.x_mod,
            small.y_mod,
            small.zx_mod,
            small.zy_mod,
            small.norm_sign,
            large.x_mod,
            large.y_mod,
            large.zx_mod,
            large.zy_mod,
            large.norm_sign
        )));
    }
    let d_divides_y = small.y_mod % d == 0;
    let d_divides_big_y = small.zy_mod % d == 0;
    let alpha = (small.y_mod % 2) as u8;
    let rc = small.norm_sign == 1 && field.beta != 1 && alpha == 0 && d_divides_y;
    if d_divides_y && !d_divides_big_y {
        return Err(Error::SoftwareFault(format!(
            "d = {d}: d | y without d | Y"
        )));
    }
    if d_divides_big_y && !d_divides_y && !(field.beta == 5 && d % 3 == 0) {
        return Err(Error::SoftwareFault(format!(
            "d = {d}: d | Y alone outside the beta = 5, 3 | d corner"
        )));
    }
    let cn = classgroup::class_number(field, cfg)?;
    Ok(DRecord {
        d,
        d_divides_big_y,
        d_divides_y,
        rc,
        alpha,
        beta: field.beta,
        s: field.primes.len() as u32,
        norm: small.norm_sign,
        h: cn.h,
        h_heuristic: cn.heuristic,
        certs: None,
    })
}

/// The squarefree integers in [lo, hi], ascending, by a segmented sieve
/// crossing out multiples of p² for every prime p² ≤ hi.
pub fn sieve_squarefree(lo: u64, hi: u64, cfg: &Config) -> Result<Vec<u64>> {
    if lo < 2 || lo > hi {
        return Err(Error::Precondition(format!(
            "need 2 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let width = hi - lo + 1;
    if width > cfg.segment_budget {
        return Err(Error::WorkBudget {
            what: "squarefree sieve segment",
            budget: cfg.segment_budget,
        });
    }
    let mut free = vec![true; width as usize];
    let root = arith::isqrt(hi as u128) as u64;
    for p in arith::primes_up_to(root) {
        let pp = p * p;
        let mut mult = lo.div_ceil(pp) * pp;
        while mult <= hi {
            free[(mult - lo) as usize] = false;
            mult += pp;
        }
    }
    Ok((lo..=hi).zip(free).filter_map(|(d, f)| f.then_some(d)).collect())
}

/// Closed intervals of width at most `width` covering [lo, hi], in order.
pub fn plan_shards(lo: u64, hi: u64, width: u64) -> Vec<(u64, u64)> {
    let width = width.max(1);
    let mut out = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = hi.min(a.saturating_add(width - 1));
        out.push((a, b));
        match b.checked_add(1) {
            Some(next) => a = next,
            None => break,
        }
    }
    out
}

/// Lifecycle of one shard in the checkpoint log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ShardStatus {
    Pending,
    Running,
    Done,
    Error,
}

/// One checkpoint line: a shard is logged `Running` when picked up, then
/// `Done` with its stage-1 hit list or `Error` with a message. Replaying the
/// log keeps the last event per (lo, hi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardEvent {
    pub lo: u64,
    pub hi: u64,
    pub status: ShardStatus,
    pub hits: Vec<u64>,
    pub engine: Engine,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Parses a checkpoint log into the surviving event per shard. Blank, torn,
/// or foreign lines are skipped: an append cut short by a crash must not
/// poison the resume.
pub fn replay_checkpoint(path: &Path) -> Result<Vec<ShardEvent>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut last: BTreeMap<(u64, u64), ShardEvent> = BTreeMap::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Ok(ev) = serde_json::from_str::<ShardEvent>(trimmed) {
            last.insert((ev.lo, ev.hi), ev);
        }
    }
    Ok(last.into_values().collect())
}

/// What a scan produced: fully-confirmed records for every stage-1 hit, plus
/// any shard failures (also present in the checkpoint as `Error` events).
#[derive(Debug, Clone)]
pub struct ScanOutcome {
    /// One record per hit, sorted by d; every record passed the two-engine
    /// cross-check.
    pub records: Vec<DRecord>,
    /// Shards planned for this interval.
    pub shards_total: usize,
    /// Shards skipped because the checkpoint already had them `Done` under
    /// the same engine.
    pub shards_resumed: usize,
    /// (lo, hi, message) for shards whose engine calls failed.
    pub errors: Vec<(u64, u64, String)>,
}

/// Stage 1 for one shard: walk the squarefree d in [lo, hi] and keep those
/// whose fundamental solution has Y ≡ 0 mod d under the selected engine.
fn scan_shard(lo: u64, hi: u64, engine: Engine, cfg: &Config) -> Result<Vec<u64>> {
    let mut hits = Vec::new();
    for d in sieve_squarefree(lo, hi, cfg)? {
        let field = QField::new(d, cfg)?;
        let r = residues_by_engine(&field, d, engine, cfg)?;
        if r.zy_mod == 0 {
            hits.push(d);
        }
    }
    Ok(hits)
}

/// Scans [lo, hi] with a worker pool over shards.
///
/// Stage 1 finds d | Y with `engine`; every hit is then rebuilt from scratch
/// by [`build_record`], which runs both engines and cross-checks them, so a
/// hit is only reported once the other engine confirms it. With a checkpoint
/// path the scan appends shard events as it goes and on a rerun skips shards
/// already `Done` under the same engine; hit records are always recomputed,
/// never deserialized from the checkpoint. Output is deterministic for any
/// worker count.
pub fn scan_interval(
    lo: u64,
    hi: u64,
    engine: Engine,
    workers: usize,
    checkpoint: Option<&Path>,
    cfg: &Config,
) -> Result<ScanOutcome> {
    if lo < 2 || lo > hi {
        return Err(Error::Precondition(format!(
            "need 2 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let workers = workers.max(1);
    let shards = plan_shards(lo, hi, cfg.shard_width);

    let mut done: BTreeMap<(u64, u64), Vec<u64>> = BTreeMap::new();
    if let Some(path) = checkpoint {
        for ev in replay_checkpoint(path)? {
            if ev.status == ShardStatus::Done && ev.engine == engine {
                done.insert((ev.lo, ev.hi), ev.hits);
            }
        }
    }
    let mut candidates: Vec<u64> = Vec::new();
    let mut shards_resumed = 0usize;
    let mut todo: Vec<(u64, u64)> = Vec::new();
    for &(a, b) in &shards {
        match done.get(&(a, b)) {
            Some(hits) => {
                shards_resumed += 1;
                candidates.extend_from_slice(hits);
            }
            None => todo.push((a, b)),
        }
    }

    let mut log = match checkpoint {
        Some(path) => Some(OpenOptions::new().create(true).append(true).open(path)?),
        None => None,
    };
    let mut errors: Vec<(u64, u64, String)> = Vec::new();

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<ShardEvent>();
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..workers.min(todo.len().max(1)) {
            let tx = tx.clone();
            let todo = &todo;
            let next = &next;
            scope.spawn(move || {
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(a, b)) = todo.get(i) else { break };
                    let started = ShardEvent {
                        lo: a,
                        hi: b,
                        status: ShardStatus::Running,
                        hits: Vec::new(),
                        engine,
                        elapsed_ms: 0,
                        error: None,
                    };
                    if tx.send(started).is_err() {
                        break;
                    }
                    let t0 = Instant::now();
                    let ev = match scan_shard(a, b, engine, cfg) {
                        Ok(hits) => ShardEvent {
                            lo: a,
                            hi: b,
                            status: ShardStatus::Done,
                            hits,
                            engine,
                            elapsed_ms: t0.elapsed().as_millis() as u64,
                            error: None,
                        },
                        Err(e) => ShardEvent {
                            lo: a,
                            hi: b,
                            status: ShardStatus::Error,
                            hits: Vec::new(),
                            engine,
                            elapsed_ms: t0.elapsed().as_millis() as u64,
                            error: Some(e.to_string()),
                        },
                    };
                    if tx.send(ev).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        // Sole writer: the coordinating thread appends each event as one
        // line and flushes, so a kill can tear at most the final line.
        for ev in rx {
            if let Some(f) = log.as_mut() {
                let line = serde_json::to_string(&ev)?;
                writeln!(f, "{line}")?;
                f.flush()?;
            }
            match ev.status {
                ShardStatus::Done => candidates.extend_from_slice(&ev.hits),
                ShardStatus::Error => {
                    errors.push((ev.lo, ev.hi, ev.error.unwrap_or_default()));
                }
                _ => {}
            }
        }
        Ok(())
    })?;

    candidates.sort_unstable();
    candidates.dedup();
    let mut records = Vec::with_capacity(candidates.len());
    for d in candidates {
        let field = QField::new(d, cfg)?;
        let rec = build_record(&field, cfg)?;
        if !rec.d_divides_big_y {
            return Err(Error::SoftwareFault(format!(
                "stage-1 hit d = {d} not reproduced on confirmation"
            )));
        }
        records.push(rec);
    }
    Ok(ScanOutcome {
        records,
        shards_total: shards.len(),
        shards_resumed,
        errors,
    })
}

/// Writes records as a results file: one JSON object per line, sorted by d,
/// with the fixed ten-key schema (attached verdicts are stripped).
pub fn write_results(records: &[DRecord], path: &Path) -> Result<()> {
    let mut sorted: Vec<DRecord> = records.to_vec();
    sorted.sort_unstable_by_key(|r| r.d);
    let mut f = File::create(path)?;
    for rec in &mut sorted {
        rec.certs = None;
        let line = serde_json::to_string(rec)?;
        writeln!(f, "{line}")?;
    }
    f.flush()?;
    Ok(())
}

/// Reads a results file back into records.
pub fn read_results(path: &Path) -> Result<Vec<DRecord>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Expected row: (d, dY, dy, rc, alpha, beta, s, norm, h). The class number
/// is heuristic exactly when d is past the unconditional-method range.
const EXPECTED_ROWS: [(u64, bool, bool, bool, u8, u8, u32, i8, u64); 22] = [
    (46, true, true, true, 0, 6, 2, 1, 1),
    (430, true, true, true, 0, 6, 3, 1, 2),
    (1817, true, true, false, 0, 1, 2, 1, 1),
    (58254, true, true, true, 0, 6, 5, 1, 8),
    (209991, true, true, true, 0, 7, 2, 1, 2),
    (1752299, true, true, true, 0, 3, 3, 1, 4),
    (3124318, true, true, true, 0, 6, 2, 1, 1),
    (4099215, true, true, false, 1, 7, 3, 1, 4),
    (5374184665, true, true, false, 0, 1, 2, -1, 2),
    (6459560882, true, true, true, 0, 2, 4, 1, 4),
    (16466394154, true, true, true, 0, 2, 4, 1, 32),
    (17451248829, true, false, false, 1, 5, 4, 1, 4),
    (20565608894, true, true, true, 0, 6, 3, 1, 2),
    (25666082990, true, true, true, 0, 6, 4, 1, 8),
    (117477414815, true, true, true, 0, 7, 4, 1, 8),
    (125854178626, true, true, true, 0, 2, 4, 1, 8),
    (1004569189366, true, true, true, 0, 6, 2, 1, 1),
    (1188580642033, true, true, false, 0, 1, 3, 1, 2),
    (15826129757609, true, true, false, 0, 1, 2, 1, 1),
    (18803675974841, true, true, false, 0, 1, 3, 1, 2),
    (20256129307923, true, true, false, 1, 3, 4, 1, 16),
    (39028039587479, true, true, false, 1, 7, 1, 1, 1),
];

/// One field-level difference between a computed row and its expectation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableMismatch {
    pub d: u64,
    pub field: &'static str,
    pub expected: String,
    pub got: String,
}

/// Result of recomputing the embedded reference rows.
#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub rows: Vec<DRecord>,
    pub mismatches: Vec<TableMismatch>,
}

/// Recomputes all 22 reference rows from scratch and diffs them against the
/// embedded expectations, field by field.
pub fn reproduce_tables(cfg: &Config) -> Result<TableReport> {
    let mut rows = Vec::with_capacity(EXPECTED_ROWS.len());
    let mut mismatches = Vec::new();
    for &(d, e_dy_big, e_dy, e_rc, e_alpha, e_beta, e_s, e_norm, e_h) in &EXPECTED_ROWS {
        let field = QField::new(d, cfg)?;
        let rec = build_record(&field, cfg)?;
        let e_heur = field.d_k > cfg.exact_class_number_max_disc;
        let checks: [(&'static str, String, String); 10] = [
            ("d", d.to_string(), rec.d.to_string()),
            ("dY", e_dy_big.to_string(), rec.d_divides_big_y.to_string()),
            ("dy", e_dy.to_string(), rec.d_divides_y.to_string()),
            ("rc", e_rc.to_string(), rec.rc.to_string()),
            ("alpha", e_alpha.to_string(), rec.alpha.to_string()),
            ("beta", e_beta.to_string(), rec.beta.to_string()),
            ("s", e_s.to_string(), rec.s.to_string()),
            ("norm", e_norm.to_string(), rec.norm.to_string()),
            ("h", e_h.to_string(), rec.h.to_string()),
            ("h_heuristic", e_heur.to_string(), rec.h_heuristic.to_string()),
        ];
        for (field_name, expected, got) in checks {
            if expected != got {
                mismatches.push(TableMismatch {
                    d,
                    field: field_name,
                    expected,
                    got,
                });
            }
        }
        rows.push(rec);
    }
    Ok(TableReport { rows, mismatches })
}
