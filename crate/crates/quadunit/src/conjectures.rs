//! Predicates on fundamental units: the `rc` invariant, refutation of the
//! powerful-coordinate conditions, counterexample certification for the two
//! prime residue-class conjectures, and criteria for unusual-conductor sets.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{self, mulmod, PRIMALITY_METHOD};
use crate::pell::{self, OmegaShape, QField, UnitResidue};
use crate::{classgroup, infra, Config, Error, Result};

/// Outcome of a predicate check. Bounded refutation scans that exhaust their
/// budget without a decision end in `RefutedUpToBound` or `Unknown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Holds,
    Fails,
    RefutedUpToBound,
    Unknown,
}

/// A predicate outcome plus structured evidence. `witness` is present exactly
/// when the status is decisive (a certificate for `Holds`, counter-evidence
/// for `Fails`); `bounds_used` is present for the two bounded outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bounds_used: Option<Value>,
}

impl Verdict {
    fn holds(witness: Value) -> Verdict {
        Verdict {
            status: Status::Holds,
            witness: Some(witness),
            bounds_used: None,
        }
    }

    fn fails(witness: Value) -> Verdict {
        Verdict {
            status: Status::Fails,
            witness: Some(witness),
            bounds_used: None,
        }
    }

    fn refuted_up_to(bounds: Value) -> Verdict {
        Verdict {
            status: Status::RefutedUpToBound,
            witness: None,
            bounds_used: Some(bounds),
        }
    }

    fn unknown(bounds: Value) -> Verdict {
        Verdict {
            status: Status::Unknown,
            witness: None,
            bounds_used: Some(bounds),
        }
    }
}

/// Single-prime refutation of "the first coordinate of ε^k is powerful":
/// p divides it exactly once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerWitness {
    /// Odd exponent of the unit power under test.
    pub k: u64,
    pub p: u64,
    pub u_mod_p: u64,
    pub u_mod_p2: u64,
}

/// Which prime residue-class conjecture a certified d would contradict:
/// d ≡ 1 mod 4 (`Aac`) or d ≡ 3 mod 4 (`Mordell`), both asserting d ∤ y
/// for prime d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Conjecture {
    Aac,
    Mordell,
}

/// Unit residues mod m by whichever engine suits the size of d: the full
/// period walk below `exact_unit_max_d`, the subexponential engine above it
/// (falling back to the walk if its verification fails).
fn residues(field: &QField, m: u64, cfg: &Config) -> Result<UnitResidue> {
    if field.d <= cfg.exact_unit_max_d {
        pell::unit_residue(field, m, cfg)
    } else {
        match infra::unit_residue_fast(field, m, cfg) {
            Err(Error::RegulatorVerification(_)) => pell::unit_residue(field, m, cfg),
            other => other,
        }
    }
}

/// (x + yω)^k mod m in the module basis {1, ω}, where ω² = n₀ + tω with
/// t = 0, n₀ = d (shape √d) or t = 1, n₀ = (d−1)/4 (half shape).
fn unit_pow_mod(field: &QField, x: u64, y: u64, k: u64, m: u64) -> (u64, u64) {
    let n0 = match field.omega_shape {
        OmegaShape::SqrtD => field.d % m,
        OmegaShape::Half => ((field.d - 1) / 4) % m,
    };
    let mul = |a: (u64, u64), b: (u64, u64)| -> (u64, u64) {
        let cross = (mulmod(a.0, b.1, m) + mulmod(a.1, b.0, m)) % m;
        let yy = mulmod(a.1, b.1, m);
        let xr = (mulmod(a.0, b.0, m) + mulmod(yy, n0, m)) % m;
        match field.omega_shape {
            OmegaShape::SqrtD => (xr, cross),
            OmegaShape::Half => (xr, (cross + yy) % m),
        }
    };
    let mut acc = (1 % m, 0);
    let mut base = (x % m, y % m);
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    acc
}

/// Decides the `rc` predicate: N(ε) = 1, d ≢ 1 mod 8, y even and d | y.
/// Holds exactly when no conductor f ≥ 2 yields an order whose Picard group
/// is as large as the class group.
pub fn check_rc(field: &QField, cfg: &Config) -> Result<Verdict> {
    let r = residues(field, 2 * field.d, cfg)?;
    let alpha = (r.y_mod % 2) as u8;
    let y_mod_d = r.y_mod % field.d;
    let mut failed = Vec::new();
    if r.norm_sign != 1 {
        failed.push("norm");
    }
    if field.beta == 1 {
        failed.push("beta");
    }
    if alpha != 0 {
        failed.push("parity");
    }
    if y_mod_d != 0 {
        failed.push("divisibility");
    }
    let detail = json!({
        "norm": r.norm_sign,
        "beta": field.beta,
        "alpha": alpha,
        "y_mod_d": y_mod_d,
    });
    Ok(if failed.is_empty() {
        Verdict::holds(detail)
    } else {
        Verdict::fails(json!({ "failed": failed, "observed": detail }))
    })
}

/// Attempts to refute "x is powerful, y is odd and d | y" for the
/// fundamental unit ε = x + y√d. The outer conditions are decided outright
/// (d ≡ 7 mod 8 is necessary); powerfulness of x is only ever refuted, by a
/// prime p ≤ prime_bound dividing x exactly once.
pub fn check_sc(field: &QField, prime_bound: u64, cfg: &Config) -> Result<Verdict> {
    if field.beta != 7 {
        return Ok(Verdict::fails(json!({
            "condition": "d mod 8 = 7",
            "beta": field.beta,
        })));
    }
    let r = residues(field, 2 * field.d, cfg)?;
    if r.y_mod % 2 == 0 {
        return Ok(Verdict::fails(json!({
            "condition": "y odd",
            "alpha": 0,
        })));
    }
    let y_mod_d = r.y_mod % field.d;
    if y_mod_d != 0 {
        return Ok(Verdict::fails(json!({
            "condition": "d divides y",
            "y_mod_d": y_mod_d,
        })));
    }
    for p in arith::primes_up_to(prime_bound) {
        let rp = residues(field, p * p, cfg)?;
        if rp.x_mod % p == 0 && rp.x_mod != 0 {
            let witness = PowerWitness {
                k: 1,
                p,
                u_mod_p: 0,
                u_mod_p2: rp.x_mod,
            };
            return Ok(Verdict::fails(serde_json::to_value(witness)?));
        }
    }
    Ok(Verdict::unknown(json!({ "prime_bound": prime_bound })))
}

/// Attempts to refute, for every odd k ≤ k_bound, that ε^k = u + v√d has
/// u powerful, v odd and d | v. Parity and divisibility refute outright;
/// powerfulness only by a single-power prime p ≤ prime_bound. Never holds:
/// confirming powerfulness would require factoring u.
pub fn check_c(field: &QField, k_bound: u64, prime_bound: u64, cfg: &Config) -> Result<Verdict> {
    if k_bound == 0 || k_bound % 2 == 0 {
        return Err(Error::Precondition(format!(
            "exponent bound must be odd, got {k_bound}"
        )));
    }
    if field.beta != 7 {
        return Ok(Verdict::fails(json!({
            "condition": "d mod 8 = 7",
            "beta": field.beta,
        })));
    }
    let d = field.d;
    let base = residues(field, 2 * d, cfg)?;
    if base.y_mod % 2 == 0 {
        return Ok(Verdict::fails(json!({
            "condition": "y odd",
            "alpha": 0,
        })));
    }
    let primes = arith::primes_up_to(prime_bound);
    // Residues mod p² per prime, filled on demand and shared across exponents.
    let mut cache: Vec<UnitResidue> = Vec::new();
    let mut all_refuted = true;
    for k in (1..=k_bound).step_by(2) {
        let (_, v) = unit_pow_mod(field, base.x_mod, base.y_mod, k, 2 * d);
        if v % 2 == 0 || v % d != 0 {
            continue; // v even, or d ∤ v: this exponent is refuted
        }
        let mut refuted = false;
        for (i, &p) in primes.iter().enumerate() {
            if cache.len() == i {
                cache.push(residues(field, p * p, cfg)?);
            }
            let rp = &cache[i];
            let (u, _) = unit_pow_mod(field, rp.x_mod, rp.y_mod, k, p * p);
            if u % p == 0 && u != 0 {
                refuted = true;
                break;
            }
        }
        if !refuted {
            all_refuted = false;
        }
    }
    let bounds = json!({ "k_bound": k_bound, "prime_bound": prime_bound });
    Ok(if all_refuted {
        Verdict::refuted_up_to(bounds)
    } else {
        Verdict::unknown(bounds)
    })
}

/// Certifies d as a counterexample to the chosen residue-class conjecture:
/// d prime (deterministic test), d in the stated class mod 4, and d | y.
/// The period walk is always used here so the certificate can quote the
/// period length.
pub fn certify_counterexample(
    field: &QField,
    which: Conjecture,
    cfg: &Config,
) -> Result<Verdict> {
    let d = field.d;
    if !arith::is_prime(d) {
        return Ok(Verdict::fails(json!({
            "condition": "d prime",
            "primality": PRIMALITY_METHOD,
        })));
    }
    let want = match which {
        Conjecture::Aac => 1,
        Conjecture::Mordell => 3,
    };
    if d % 4 != want {
        return Ok(Verdict::fails(json!({
            "condition": format!("d mod 4 = {want}"),
            "d_mod_4": d % 4,
        })));
    }
    let r = pell::unit_residue(field, d, cfg)?;
    if r.y_mod != 0 {
        return Ok(Verdict::fails(json!({
            "condition": "d divides y",
            "y_mod_d": r.y_mod,
        })));
    }
    Ok(Verdict::holds(json!({
        "conjecture": which,
        "primality": PRIMALITY_METHOD,
        "beta": field.beta,
        "period_len": r.period_len,
        "norm": r.norm_sign,
        "y_mod_d": 0,
    })))
}

/// Bounded solvability of three small-norm equations attached to d = pq with
/// p ≡ 1 mod 4 and q ≡ 3 mod 4. Each entry is the first (a, b) with both
/// coordinates ≤ bound, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SmallNormReport {
    pub p: u64,
    pub q: u64,
    pub d: u64,
    pub bound: u64,
    /// |p·a² − q·b²| = 1.
    pub mixed_one: Option<(u64, u64)>,
    /// |p·a² − q·b²| = 2.
    pub mixed_two: Option<(u64, u64)>,
    /// |a² − d·b²| = 2.
    pub principal_two: Option<(u64, u64)>,
}

/// Searches the box a, b ≤ bound for representations of ±1 and ±2 by the
/// form pa² − qb² and of ±2 by a² − db². Absence within the box is reported
/// as such, never as proof of unsolvability.
pub fn small_norm_representations(p: u64, q: u64, bound: u64) -> Result<SmallNormReport> {
    if !arith::is_prime(p) || !arith::is_prime(q) || p % 4 != 1 || q % 4 != 3 {
        return Err(Error::Precondition(format!(
            "need distinct primes p = 1 mod 4 and q = 3 mod 4, got p = {p}, q = {q}"
        )));
    }
    let d = p * q;
    // b² = (p·a² ∓ e)/q when that quotient is integral and square.
    let solve_mixed = |e: u64| -> Option<(u64, u64)> {
        for a in 0..=bound {
            let t = p as u128 * (a as u128) * (a as u128);
            for cand in [t.checked_sub(e as u128), Some(t + e as u128)] {
                let Some(c) = cand else { continue };
                if c % q as u128 != 0 {
                    continue;
                }
                let sq = c / q as u128;
                let b = arith::isqrt(sq);
                if b * b == sq && b <= bound as u128 {
                    return Some((a, b as u64));
                }
            }
        }
        None
    };
    let principal_two = (0..=bound).find_map(|b| {
        let t = d as u128 * (b as u128) * (b as u128);
        for cand in [t.checked_sub(2), Some(t + 2)] {
            let Some(c) = cand else { continue };
            let a = arith::isqrt(c);
            if a * a == c && a <= bound as u128 {
                return Some((a as u64, b));
            }
        }
        None
    });
    Ok(SmallNormReport {
        p,
        q,
        d,
        bound,
        mixed_one: solve_mixed(1),
        mixed_two: solve_mixed(2),
        principal_two,
    })
}

/// Exact solvability of the three small-norm equations attached to d = pq,
/// decided on cycles of reduced indefinite forms of discriminant 4d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SmallNormSolvability {
    pub p: u64,
    pub q: u64,
    pub d: u64,
    /// |p·a² − q·b²| = 1 has an integer solution.
    pub mixed_one: bool,
    /// |p·a² − q·b²| = 2 has an integer solution.
    pub mixed_two: bool,
    /// |a² − d·b²| = 2 has an integer solution.
    pub principal_two: bool,
}

/// Decides |pa² − qb²| ∈ {1, 2} and |a² − db²| = 2 with no search box. A
/// form of discriminant 4d represents n with |n| < √d exactly when ±n occurs
/// as a leading coefficient on its reduction cycle, so walking one period of
/// the cycle settles each equation; minimal solutions themselves can be far
/// too large for any direct search.
pub fn small_norm_solvability(p: u64, q: u64, cfg: &Config) -> Result<SmallNormSolvability> {
    if !arith::is_prime(p) || !arith::is_prime(q) || p % 4 != 1 || q % 4 != 3 {
        return Err(Error::Precondition(format!(
            "need distinct primes p = 1 mod 4 and q = 3 mod 4, got p = {p}, q = {q}"
        )));
    }
    let d = p * q;
    // (p, 0, -q) and the principal form (1, 0, -d); both of discriminant 4d.
    let (mixed_one, mixed_two) = cycle_coefficient_hits(d, 2 * p as i64, cfg)?;
    let (_, principal_two) = cycle_coefficient_hits(d, 2, cfg)?;
    Ok(SmallNormSolvability {
        p,
        q,
        d,
        mixed_one,
        mixed_two,
        principal_two,
    })
}

/// Reduces the form with state (0, q0) at discriminant 4d, then walks its
/// full cycle recording whether a state with Q = 2 (leading coefficient ±1)
/// or Q = 4 (±2) appears. The state Q-sequence runs through twice the
/// absolute leading coefficient of every form on the cycle.
fn cycle_coefficient_hits(d: u64, q0: i64, cfg: &Config) -> Result<(bool, bool)> {
    let delta = 4 * d as i64;
    let s = arith::isqrt(delta as u128) as i64;
    let (mut ps, mut qs) = (0i64, q0);
    let mut steps = 0u64;
    while !infra::is_reduced(ps, qs, s) {
        let (pn, qn) = infra::rho_state(delta, s, ps, qs);
        ps = pn;
        qs = qn;
        steps += 1;
        if steps > 10_000 {
            return Err(Error::SoftwareFault(format!(
                "state (0, {q0}) at discriminant {delta} failed to reduce"
            )));
        }
    }
    let anchor = (ps, qs);
    let (mut one, mut two) = (false, false);
    loop {
        one |= qs == 2;
        two |= qs == 4;
        let (pn, qn) = infra::rho_state(delta, s, ps, qs);
        ps = pn;
        qs = qn;
        steps += 1;
        if steps > cfg.max_cf_steps {
            return Err(Error::WorkBudget {
                what: "small-norm representability cycle",
                budget: cfg.max_cf_steps,
            });
        }
        if (ps, qs) == anchor {
            return Ok((one, two));
        }
    }
}

/// Two equivalent residue criteria for "the unusual conductors of d are
/// exactly {2}", evaluated independently, for d = pq with p ≡ 1 mod 4,
/// q ≡ 3 mod 4 and h(d) = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitPairReport {
    pub d: u64,
    /// The prime factor ≡ 1 mod 4.
    pub p: u64,
    /// The prime factor ≡ 3 mod 4.
    pub q: u64,
    pub h: u64,
    pub alpha: u8,
    pub kronecker_pq: i32,
    pub d_divides_y: bool,
    /// p ≡ 5 mod 8, y odd and d | y.
    pub only_two_via_parity: bool,
    /// p ≡ 5 mod 8, (p|q) = −1 and d | y.
    pub only_two_via_kronecker: bool,
    /// When p ≡ 5 mod 8, y is odd exactly when (p|q) = −1.
    pub parity_kronecker_agree: bool,
    /// Set when the criteria disagree; must never happen.
    pub software_fault: bool,
}

/// Evaluates both criteria of `SplitPairReport` from one residue pass and
/// flags any internal disagreement.
pub fn split_pair_unusual_criteria(field: &QField, cfg: &Config) -> Result<SplitPairReport> {
    let [p, q] = field.primes[..] else {
        return Err(Error::Precondition(format!(
            "d = {} is not a product of two primes",
            field.d
        )));
    };
    let (p, q) = if p % 4 == 1 { (p, q) } else { (q, p) };
    if p % 4 != 1 || q % 4 != 3 {
        return Err(Error::Precondition(format!(
            "need p = 1 mod 4 and q = 3 mod 4, got {p} and {q}"
        )));
    }
    let h = classgroup::class_number(field, cfg)?.h;
    if h != 2 {
        return Err(Error::Precondition(format!(
            "need class number 2, got {h} for d = {}",
            field.d
        )));
    }
    let r = residues(field, 2 * field.d, cfg)?;
    let alpha = (r.y_mod % 2) as u8;
    let dy = r.y_mod % field.d == 0;
    let kr = arith::kronecker(p as i64, q as i64);
    let via_parity = p % 8 == 5 && alpha == 1 && dy;
    let via_kronecker = p % 8 == 5 && kr == -1 && dy;
    let agree = p % 8 != 5 || (alpha == 1) == (kr == -1);
    Ok(SplitPairReport {
        d: field.d,
        p,
        q,
        h,
        alpha,
        kronecker_pq: kr,
        d_divides_y: dy,
        only_two_via_parity: via_parity,
        only_two_via_kronecker: via_kronecker,
        parity_kronecker_agree: agree,
        software_fault: via_parity != via_kronecker || !agree,
    })
}

/// Factorization shapes of class-number-2 radicands for which "no unusual
/// conductors ⇔ d | y" is a proved criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnusualShape {
    /// d = pq, p ≡ q ≡ 1 mod 4, N(ε) = −1.
    OddPairNegativeNorm,
    /// d = pq, p ≡ 1 mod 8, q ≡ 3 mod 4, y odd.
    OddPairOneMod8,
    /// d = 2pq, p ≡ q ≡ 3 mod 8 distinct.
    EvenPairThreeMod8,
    /// d = 2pq, p ≡ 1 mod 8, q ≡ 3 mod 4, (p|q) = −1.
    EvenPairOneMod8,
}

/// The emptiness criterion for the unusual-conductor set of a shaped d,
/// optionally cross-checked against direct enumeration up to a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmptyUnusualReport {
    pub d: u64,
    pub shape: UnusualShape,
    pub h: u64,
    pub d_divides_y: bool,
    /// The criterion's prediction: the set is empty iff d | y.
    pub predicts_empty: bool,
    /// (f_bound, emptiness up to f_bound) from direct enumeration.
    pub direct_empty_up_to: Option<(u64, bool)>,
    /// Whether prediction and direct enumeration agree, when both exist.
    pub agreement: Option<bool>,
}

/// Detects which shape (if any) d matches, predicts emptiness of its
/// unusual-conductor set from d | y, and optionally verifies directly.
pub fn empty_unusual_criterion(
    field: &QField,
    f_bound: Option<u64>,
    cfg: &Config,
) -> Result<EmptyUnusualReport> {
    let h = classgroup::class_number(field, cfg)?.h;
    if h != 2 {
        return Err(Error::Precondition(format!(
            "need class number 2, got {h} for d = {}",
            field.d
        )));
    }
    let r = residues(field, 2 * field.d, cfg)?;
    let alpha = (r.y_mod % 2) as u8;
    let dy = r.y_mod % field.d == 0;
    let shape = match field.primes[..] {
        [p, q] if p % 2 == 1 => {
            if p % 4 == 1 && q % 4 == 1 && r.norm_sign == -1 {
                Some(UnusualShape::OddPairNegativeNorm)
            } else {
                let (p, q) = if p % 4 == 1 { (p, q) } else { (q, p) };
                if p % 8 == 1 && q % 4 == 3 && alpha == 1 {
                    Some(UnusualShape::OddPairOneMod8)
                } else {
                    None
                }
            }
        }
        [2, p, q] => {
            if p % 8 == 3 && q % 8 == 3 {
                Some(UnusualShape::EvenPairThreeMod8)
            } else {
                let (p, q) = if p % 8 == 1 { (p, q) } else { (q, p) };
                if p % 8 == 1 && q % 4 == 3 && arith::kronecker(p as i64, q as i64) == -1 {
                    Some(UnusualShape::EvenPairOneMod8)
                } else {
                    None
                }
            }
        }
        _ => None,
    };
    let Some(shape) = shape else {
        return Err(Error::Precondition(format!(
            "d = {} matches no supported factorization shape",
            field.d
        )));
    };
    let direct = match f_bound {
        Some(b) => Some((b, classgroup::unusual_conductors(field, b, cfg)?.is_empty())),
        None => None,
    };
    Ok(EmptyUnusualReport {
        d: field.d,
        shape,
        h,
        d_divides_y: dy,
        predicts_empty: dy,
        direct_empty_up_to: direct,
        agreement: direct.map(|(_, e)| e == dy),
    })
}
