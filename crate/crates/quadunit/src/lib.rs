//! Fundamental units of real quadratic orders, exactly and modulo m.
//!
//! The library is organized around a [`QField`] value (a squarefree `d >= 2`
//! with its derived discriminant) and two independent engines that compute
//! the fundamental unit's coordinates modulo m:
//!
//! * [`pell`] — the continued-fraction "small step" engine. Linear in the
//!   period length, carries convergents modulo m, and is the ground truth.
//! * [`infra`] — the "large step" engine on reduced binary quadratic forms
//!   with fixed-point distances: baby-step/giant-step regulator computation
//!   followed by a doubling ladder. Step count is roughly `O(d^(1/4))`-ish
//!   instead of linear in the period, at the price of more machinery.
//!
//! On top of those sit class-number and Picard-order computations
//! ([`classgroup`]), the conjecture predicates and certifiers
//! ([`conjectures`]), and an interval-search driver with checkpointing
//! ([`search`]).

pub mod arith;
pub mod classgroup;
pub mod conjectures;
pub mod fixed;
pub mod infra;
pub mod pell;
pub mod search;

pub use classgroup::{
    class_number, conductor_preserves_class_number, pic_order, represents_pm4, unit_index_mod_f,
    unusual_conductors, ClassNumber, ConductorAnalysis,
};
pub use conjectures::{
    certify_counterexample, check_c, check_rc, check_sc, empty_unusual_criterion,
    small_norm_representations, small_norm_solvability, split_pair_unusual_criteria, Conjecture,
    EmptyUnusualReport, PowerWitness, SmallNormReport, SmallNormSolvability, SplitPairReport,
    Status, UnusualShape, Verdict,
};
pub use fixed::Dist;
pub use search::{
    build_record, plan_shards, read_results, replay_checkpoint, reproduce_tables, scan_interval,
    sieve_squarefree, write_results, DRecord, Engine, ScanOutcome, ShardEvent, ShardStatus,
    TableMismatch, TableReport,
};
pub use infra::{compose_reduce, principal_form, regulator_bsgs, rho_step, unit_residue_fast, ReducedForm};
pub use pell::{cf_expand, fundamental_unit_exact, unit_residue, y_parity, CfPeriod, CfStep, OmegaShape, QField, UnitData, UnitResidue};

use thiserror::Error;

/// All library failure modes. Resource limits are typed so callers can
/// distinguish "raise the budget" from "the input is invalid".
#[derive(Debug, Error)]
pub enum Error {
    #[error("d = {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("d = {0} is below 2")]
    DTooSmall(u64),
    #[error("d = {0} exceeds the supported range (max {1})")]
    DTooLarge(u64, u64),
    #[error("work budget exhausted in {what} (budget {budget})")]
    WorkBudget { what: &'static str, budget: u64 },
    #[error("factorization of {0} exceeded the rho iteration budget")]
    FactorBudget(u64),
    #[error("regulator verification failed for d = {0}; use the small-step engine")]
    RegulatorVerification(u64),
    #[error("class number estimate {estimate} for d = {d} is within the guard band of a half-integer")]
    AmbiguousClassNumber { d: u64, estimate: f64 },
    #[error("p = {p} is not ramified in Q(sqrt {d})")]
    NotRamified { p: u64, d: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal consistency check failed: {0}")]
    SoftwareFault(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Tunable limits and knobs. `Config::default()` is suitable for everything
/// in the acceptance range (d up to ~5.3e13); raise budgets for bigger jobs.
#[derive(Debug, Clone)]
pub struct Config {
    /// Hard cap on continued-fraction steps in one period traversal.
    pub max_cf_steps: u64,
    /// Pollard-rho iteration budget for one factorization.
    pub factor_rho_budget: u64,
    /// Largest d for which `fundamental_unit_exact` will run (exact big-int
    /// convergents; beyond this use the modular engines).
    pub exact_unit_max_d: u64,
    /// Multiplication budget for `unit_index_mod_f`.
    pub unit_index_budget: u64,
    /// Scale factor c for the baby-step table (size ~ Delta^(1/4) * c).
    pub bsgs_table_scale: f64,
    /// Euler-product truncation: primes up to this bound enter L(1, chi).
    pub euler_prime_bound: u64,
    /// Reject a rounded analytic class number whose estimate sits closer
    /// than this to a half-integer.
    pub class_number_guard: f64,
    /// Largest discriminant for the unconditional (cycle-enumeration)
    /// class number method; larger discriminants get the analytic estimate.
    pub exact_class_number_max_disc: u64,
    /// Default prime scan bound for powerfulness refutation.
    pub prime_bound: u64,
    /// Default odd-exponent bound for the counterexample-shape scan.
    pub k_bound: u64,
    /// Largest supported d (the fast engine carries residues in u128).
    pub max_d: u64,
    /// Widest interval `sieve_squarefree` will materialize at once.
    pub segment_budget: u64,
    /// Shard width for checkpointed interval scans.
    pub shard_width: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_cf_steps: 100_000_000,
            factor_rho_budget: 10_000_000,
            exact_unit_max_d: 10_000_000_000,
            unit_index_budget: 1_000_000,
            bsgs_table_scale: 1.0,
            euler_prime_bound: 1_000_000,
            class_number_guard: 0.25,
            exact_class_number_max_disc: 40_000_000,
            prime_bound: 10_000,
            k_bound: 9,
            max_d: 1 << 52,
            segment_budget: 100_000_000,
            shard_width: 1_000_000,
        }
    }
}
