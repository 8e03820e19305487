//! Class numbers, Picard orders of non-maximal orders, the ±4
//! representability test on ramified primes, and unusual-conductor
//! enumeration.
//!
//! Exact class numbers come from counting ρ-cycles among all reduced forms
//! of the field discriminant — unconditional but linear-ish in √Δ, so gated
//! by a configurable discriminant bound. Beyond it the analytic class number
//! formula with a truncated Euler product takes over, and every such result
//! is flagged heuristic.

use std::collections::HashSet;

use serde::Serialize;

use crate::arith;
use crate::infra;
use crate::pell::{self, OmegaShape, QField};
use crate::{Config, Error, Result};

/// h(d) together with how it was obtained. `heuristic` results come from a
/// truncated L(1, χ) Euler product and the BSGS regulator; exact results
/// from complete cycle enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassNumber {
    pub h: u64,
    pub heuristic: bool,
}

/// One conductor's invariants for a fixed d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConductorAnalysis {
    pub d: u64,
    pub f: u64,
    /// |Pic(O_f)|.
    pub pic_order: u64,
    /// Smallest k ≥ 1 with ε^k ∈ O_f.
    pub unit_index: u64,
    pub is_unusual: bool,
}

/// Splitting character χ(p) = Kronecker symbol (d_K | p): 0 ramified,
/// +1 split, −1 inert.
fn chi(field: &QField, p: u64) -> i32 {
    arith::kronecker(field.d_k as i64, p as i64)
}

/// |Pic(O_K)| by enumerating every reduced form of discriminant d_K and
/// counting ρ-cycles.
fn class_number_exact(delta: i64) -> u64 {
    let s = arith::isqrt(delta as u128) as i64;
    let mut states: Vec<(i64, i64)> = Vec::new();
    let mut b = if delta % 2 == 0 { 2 } else { 1 };
    while b <= s {
        let rem = delta - b * b;
        let a_min = (s - b) / 2 + 1;
        let a_max = (s + b) / 2;
        for a in a_min..=a_max {
            if rem % (4 * a) == 0 {
                states.push((b, 2 * a));
            }
        }
        b += 2;
    }
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    let mut cycles = 0u64;
    for &st in &states {
        if seen.contains(&st) {
            continue;
        }
        cycles += 1;
        let mut cur = st;
        while seen.insert(cur) {
            cur = infra::rho_state(delta, s, cur.0, cur.1);
        }
    }
    cycles
}

/// Truncated Euler product for L(1, χ_{d_K}).
fn l_one_chi(field: &QField, cfg: &Config) -> f64 {
    let mut l = 1.0f64;
    for p in arith::primes_up_to(cfg.euler_prime_bound) {
        let c = chi(field, p);
        if c != 0 {
            l /= 1.0 - c as f64 / p as f64;
        }
    }
    l
}

/// h(d). Unconditional (cycle enumeration) while d_K stays below the
/// configured gate; otherwise the analytic estimate h ≈ √Δ·L(1,χ)/(2R),
/// rounded, with a guard band: an estimate too far from every integer is a
/// typed error rather than a silent guess.
pub fn class_number(field: &QField, cfg: &Config) -> Result<ClassNumber> {
    if field.d_k <= cfg.exact_class_number_max_disc {
        return Ok(ClassNumber {
            h: class_number_exact(field.d_k as i64),
            heuristic: false,
        });
    }
    let r = match infra::regulator_bsgs(field, 64, cfg) {
        Ok(r) => r,
        Err(Error::RegulatorVerification(_)) => infra::regulator_by_cycle(field, cfg)?,
        Err(e) => return Err(e),
    };
    let estimate = (field.d_k as f64).sqrt() * l_one_chi(field, cfg) / (2.0 * r.to_f64());
    let rounded = estimate.round();
    if (estimate - rounded).abs() >= cfg.class_number_guard || rounded < 1.0 {
        return Err(Error::AmbiguousClassNumber {
            d: field.d,
            estimate,
        });
    }
    Ok(ClassNumber {
        h: rounded as u64,
        heuristic: true,
    })
}

/// #(O_K/fO_K)* / #(Z/fZ)* = f·∏_{p|f}(1 − χ(p)/p); the unit index divides
/// this, which is what makes the divisor descent below complete.
pub(crate) fn phi_f(field: &QField, f: u64, cfg: &Config) -> Result<u64> {
    let mut phi = f;
    for (p, _) in arith::factor(f, cfg)? {
        phi /= p;
        phi *= match chi(field, p) {
            0 => p,
            1 => p - 1,
            _ => p + 1,
        };
    }
    Ok(phi)
}

/// ω-pair multiplication mod f, using ω² = t·ω + n₀.
fn unit_mul(a: (u64, u64), b: (u64, u64), f: u64, t: u64, n0: u64) -> (u64, u64) {
    let yy = arith::mulmod(a.1, b.1, f);
    let x = (arith::mulmod(a.0, b.0, f) + arith::mulmod(yy, n0, f)) % f;
    let mut y = (arith::mulmod(a.0, b.1, f) + arith::mulmod(a.1, b.0, f)) % f;
    if t == 1 {
        y = (y + yy) % f;
    }
    (x, y)
}

fn unit_pow(base: (u64, u64), mut k: u64, f: u64, t: u64, n0: u64, budget: &mut u64) -> Result<(u64, u64)> {
    let mut acc = (1 % f, 0);
    let mut sq = base;
    while k > 0 {
        if *budget < 2 {
            return Err(Error::WorkBudget {
                what: "unit-index multiplications",
                budget: 0,
            });
        }
        *budget -= 2;
        if k & 1 == 1 {
            acc = unit_mul(acc, sq, f, t, n0);
        }
        sq = unit_mul(sq, sq, f, t, n0);
        k >>= 1;
    }
    Ok(acc)
}

/// Smallest k ≥ 1 such that ε^k lies in the order of conductor f — i.e. f
/// divides the ω-coordinate of ε^k. Computed by reducing ε mod f and
/// testing the divisors of φ(f) in ascending order.
pub fn unit_index_mod_f(field: &QField, f: u64, cfg: &Config) -> Result<u64> {
    if f == 0 {
        return Err(Error::Precondition("conductor must be >= 1".into()));
    }
    if f == 1 {
        return Ok(1);
    }
    let ur = pell::unit_residue(field, f, cfg)?;
    if ur.y_mod == 0 {
        return Ok(1);
    }
    let (t, n0) = match field.omega_shape {
        OmegaShape::SqrtD => (0, field.d % f),
        OmegaShape::Half => (1, ((field.d - 1) / 4) % f),
    };
    let base = (ur.x_mod, ur.y_mod);
    let mut budget = cfg.unit_index_budget;
    for k in arith::divisors(phi_f(field, f, cfg)?, cfg)? {
        if k == 1 {
            continue;
        }
        let (_, yk) = unit_pow(base, k, f, t, n0, &mut budget)?;
        if yk == 0 {
            return Ok(k);
        }
    }
    Err(Error::SoftwareFault(format!(
        "unit index of d={} mod f={f} does not divide phi(f)",
        field.d
    )))
}

/// True iff the order of conductor f has the same class number as O_K,
/// which by the index formula happens exactly when the unit index equals
/// φ(f).
pub fn conductor_preserves_class_number(
    field: &QField,
    f: u64,
    cfg: &Config,
) -> Result<bool> {
    Ok(unit_index_mod_f(field, f, cfg)? == phi_f(field, f, cfg)?)
}

/// |Pic(O_f)| = h(d)·φ(f)/unit_index(f).
pub fn pic_order(field: &QField, f: u64, cfg: &Config) -> Result<u64> {
    let h = class_number(field, cfg)?.h;
    let phi = phi_f(field, f, cfg)?;
    let k = unit_index_mod_f(field, f, cfg)?;
    if phi % k != 0 {
        return Err(Error::SoftwareFault(format!(
            "unit index {k} does not divide phi({f}) = {phi} for d={}",
            field.d
        )));
    }
    Ok(h * (phi / k))
}

/// Decides whether |p·a² − (d_K/p)·b²| = 4 has an integer solution, for a
/// ramified prime p. The form (p, 0, −d_K/p) has discriminant 4·d_K; ±4 is
/// representable iff its reduction cycle contains a form with leading
/// coefficient 1 (an imprimitive ±4) or 4 (a primitive one). The cycle
/// criterion needs |leading| < √(4·d_K)/2, so the handful of fields with
/// d_K ≤ 16 fall back to a direct scan, where any solution is tiny.
pub fn represents_pm4(field: &QField, p: u64, cfg: &Config) -> Result<bool> {
    if !arith::is_prime(p) || field.d_k % p != 0 {
        return Err(Error::NotRamified { p, d: field.d });
    }
    let dkp = (field.d_k / p) as i64;
    if field.d_k <= 16 {
        for a in 0..=100i64 {
            for b in 0..=100i64 {
                if (p as i64 * a * a - dkp * b * b).abs() == 4 {
                    return Ok(true);
                }
            }
        }
        return Ok(false);
    }
    let delta = 4 * field.d_k as i64;
    let s = arith::isqrt(delta as u128) as i64;
    let (mut ps, mut qs) = (0i64, 2 * p as i64);
    let mut steps = 0u64;
    while !infra::is_reduced(ps, qs, s) {
        let (pn, qn) = infra::rho_state(delta, s, ps, qs);
        ps = pn;
        qs = qn;
        steps += 1;
        if steps > 10_000 {
            return Err(Error::SoftwareFault(format!(
                "form ({p}, 0, -{dkp}) failed to reduce"
            )));
        }
    }
    let anchor = (ps, qs);
    loop {
        if qs == 2 || qs == 8 {
            return Ok(true);
        }
        let (pn, qn) = infra::rho_state(delta, s, ps, qs);
        ps = pn;
        qs = qn;
        steps += 1;
        if steps > cfg.max_cf_steps {
            return Err(Error::WorkBudget {
                what: "±4 representability cycle",
                budget: cfg.max_cf_steps,
            });
        }
        if (ps, qs) == anchor {
            return Ok(false);
        }
    }
}

/// All unusual conductors of d up to f_bound: f squarefree, divisible by a
/// ramified prime and by no split prime, with h(d) = |Pic(O_f)| = 2, such
/// that no ramified p | f represents ±4. Empty whenever h(d) ≠ 2.
pub fn unusual_conductors(
    field: &QField,
    f_bound: u64,
    cfg: &Config,
) -> Result<Vec<ConductorAnalysis>> {
    let mut out = Vec::new();
    if class_number(field, cfg)?.h != 2 {
        return Ok(out);
    }
    'next_f: for f in 2..=f_bound {
        let fac = arith::factor(f, cfg)?;
        if fac.iter().any(|&(_, e)| e > 1) {
            continue;
        }
        let mut has_ramified = false;
        for &(q, _) in &fac {
            match chi(field, q) {
                0 => has_ramified = true,
                1 => continue 'next_f,
                _ => {}
            }
        }
        if !has_ramified {
            continue;
        }
        let unit_index = unit_index_mod_f(field, f, cfg)?;
        let phi = phi_f(field, f, cfg)?;
        let pic = 2 * (phi / unit_index);
        if pic != 2 {
            continue;
        }
        for &(q, _) in &fac {
            if chi(field, q) == 0 && represents_pm4(field, q, cfg)? {
                continue 'next_f;
            }
        }
        out.push(ConductorAnalysis {
            d: field.d,
            f,
            pic_order: pic,
            unit_index,
            is_unusual: true,
        });
    }
    Ok(out)
}
