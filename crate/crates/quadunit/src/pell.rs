//! Continued-fraction engine ("small step"): exact fundamental units for
//! moderate d, and modular units for arbitrary d by carrying the convergents
//! mod 64·m through one full period.
//!
//! All expansions run in discriminant coordinates: the state (P, Q) stands for
//! the complete quotient (P + √Δ)/Q with Δ the field discriminant. The start
//! state (t, 2) with t = d mod 2 equals √d for d ≡ 2,3 (mod 4) (Δ = 4d) and
//! (1+√d)/2 for d ≡ 1 (mod 4) (Δ = d), so a single code path serves both
//! shapes of ω.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{self, mulmod};
use crate::{Config, Error, Result};

/// Shape of the module generator ω of the maximal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaShape {
    /// ω = √d (d ≡ 2,3 mod 4, discriminant 4d).
    SqrtD,
    /// ω = (1+√d)/2 (d ≡ 1 mod 4, discriminant d).
    Half,
}

/// A real quadratic field Q(√d) for squarefree d ≥ 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QField {
    /// The radicand (squarefree, ≥ 2).
    pub d: u64,
    pub omega_shape: OmegaShape,
    /// Field discriminant: 4d or d depending on the shape.
    pub d_k: u64,
    /// d mod 8.
    pub beta: u8,
    /// Distinct prime factors of d, ascending.
    pub primes: Vec<u64>,
}

impl QField {
    /// Validates d (range, squarefreeness) and fixes the ω shape.
    pub fn new(d: u64, cfg: &Config) -> Result<QField> {
        if d < 2 {
            return Err(Error::DTooSmall(d));
        }
        if d > cfg.max_d {
            return Err(Error::DTooLarge(d, cfg.max_d));
        }
        let fac = arith::factor(d, cfg)?;
        if fac.iter().any(|&(_, e)| e > 1) {
            return Err(Error::NotSquarefree(d));
        }
        let omega_shape = if d % 4 == 1 {
            OmegaShape::Half
        } else {
            OmegaShape::SqrtD
        };
        let d_k = match omega_shape {
            OmegaShape::SqrtD => 4 * d,
            OmegaShape::Half => d,
        };
        Ok(QField {
            d,
            omega_shape,
            d_k,
            beta: (d % 8) as u8,
            primes: fac.into_iter().map(|(p, _)| p).collect(),
        })
    }

    /// 1 for the half-integer shape, else 0; the start state is (t, 2).
    pub fn t(&self) -> u64 {
        match self.omega_shape {
            OmegaShape::SqrtD => 0,
            OmegaShape::Half => 1,
        }
    }

    /// ⌊√Δ⌋ for the field discriminant Δ.
    pub fn sqrt_disc(&self) -> u64 {
        arith::isqrt(self.d_k as u128) as u64
    }

    /// Number of distinct prime factors of d.
    pub fn num_prime_factors(&self) -> u32 {
        self.primes.len() as u32
    }
}

/// One step of a continued-fraction expansion, as seen by an observer.
/// `(p, q)` is the state before the step: the complete quotient (p + √Δ)/q
/// whose floor is the partial quotient `a`. `index` 0 is the integer part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CfStep {
    pub index: u64,
    pub a: u64,
    pub p: i64,
    pub q: i64,
}

/// Period summary of an expansion of ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CfPeriod {
    pub period_len: u64,
    /// (−1)^period_len = norm of the fundamental unit of the maximal order.
    pub norm_sign: i8,
}

/// Exact fundamental unit ε = x + yω, plus the fundamental unit
/// (zx, zy) of Z[√d] with zx + zy·√d = ε^index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitData {
    pub x: BigUint,
    pub y: BigUint,
    /// X-coordinate of the fundamental solution over Z[√d].
    pub zx: BigUint,
    /// Y-coordinate of the fundamental solution over Z[√d].
    pub zy: BigUint,
    pub norm_sign: i8,
    /// y mod 2.
    pub alpha: u8,
    /// 1 or 3; 3 exactly when d ≡ 1 mod 4 and y is odd.
    pub index: u8,
    /// β̃₀: y for shape √d, y/2 for half shape with even y, y for half shape
    /// with odd y. Divides y, and y divides 2β̃₀.
    pub beta_tilde: BigUint,
    pub period_len: u64,
}

/// Fundamental unit coordinates reduced mod m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitResidue {
    pub m: u64,
    pub x_mod: u64,
    pub y_mod: u64,
    pub zx_mod: u64,
    pub zy_mod: u64,
    pub norm_sign: i8,
    /// Length of the period traversed; None when produced by an engine that
    /// never walks the full period.
    pub period_len: Option<u64>,
}

/// Convergent accumulator threaded through a continued-fraction walk.
trait Carrier {
    fn push(&mut self, a: u64);
}

struct NullCarrier;

impl Carrier for NullCarrier {
    fn push(&mut self, _a: u64) {}
}

/// Exact big-integer convergents A_i, B_i (numerators/denominators).
struct ExactCarrier {
    a2: BigUint,
    a1: BigUint,
    b2: BigUint,
    b1: BigUint,
}

impl ExactCarrier {
    fn new() -> Self {
        ExactCarrier {
            a2: BigUint::zero(),
            a1: BigUint::one(),
            b2: BigUint::one(),
            b1: BigUint::zero(),
        }
    }
}

impl Carrier for ExactCarrier {
    fn push(&mut self, a: u64) {
        let an = &self.a1 * a + &self.a2;
        self.a2 = std::mem::replace(&mut self.a1, an);
        let bn = &self.b1 * a + &self.b2;
        self.b2 = std::mem::replace(&mut self.b1, bn);
    }
}

/// Convergents mod a modulus that fits comfortably in u128
/// (partial quotients are < 2^28 for d ≤ 2^52, so a·A1 + A2 never overflows
/// as long as the modulus stays below 2^63).
struct ModCarrier {
    m: u128,
    a2: u128,
    a1: u128,
    b2: u128,
    b1: u128,
}

impl ModCarrier {
    fn new(m: u128) -> Self {
        ModCarrier {
            m,
            a2: 0,
            a1: 1,
            b2: 1,
            b1: 0,
        }
    }
}

impl Carrier for ModCarrier {
    fn push(&mut self, a: u64) {
        let a = a as u128;
        let an = (a * self.a1 + self.a2) % self.m;
        self.a2 = self.a1;
        self.a1 = an;
        let bn = (a * self.b1 + self.b2) % self.m;
        self.b2 = self.b1;
        self.b1 = bn;
    }
}

/// Convergents mod an arbitrary-precision modulus.
struct BigModCarrier {
    m: BigUint,
    a2: BigUint,
    a1: BigUint,
    b2: BigUint,
    b1: BigUint,
}

impl BigModCarrier {
    fn new(m: BigUint) -> Self {
        BigModCarrier {
            m,
            a2: BigUint::zero(),
            a1: BigUint::one(),
            b2: BigUint::one(),
            b1: BigUint::zero(),
        }
    }
}

impl Carrier for BigModCarrier {
    fn push(&mut self, a: u64) {
        let an = (&self.a1 * a + &self.a2) % &self.m;
        self.a2 = std::mem::replace(&mut self.a1, an);
        let bn = (&self.b1 * a + &self.b2) % &self.m;
        self.b2 = std::mem::replace(&mut self.b1, bn);
    }
}

/// Divides by 8, asserting exactness (the cubing numerators are always ≡ 0
/// mod 8 and the moduli in play are multiples of 64).
fn exact_div8(n: BigUint) -> BigUint {
    debug_assert!(n.is_zero() || n.trailing_zeros().unwrap() >= 3);
    n >> 3u32
}

/// Core walk: expands ω until the state first recurs, feeding every computed
/// partial quotient to the observer (the integer part plus the whole period)
/// and every quotient except the closing one to the carrier, so the carrier
/// ends holding the convergent pair of index period_len − 1.
fn cf_walk(
    field: &QField,
    cfg: &Config,
    carrier: &mut dyn Carrier,
    mut observer: Option<&mut dyn FnMut(&CfStep)>,
) -> Result<CfPeriod> {
    let delta = field.d_k as i64;
    let s = field.sqrt_disc() as i64;
    let (mut p, mut q) = (field.t() as i64, 2i64);
    let mut anchor = (0i64, 0i64);
    let mut steps: u64 = 0;
    loop {
        steps += 1;
        if steps > cfg.max_cf_steps {
            return Err(Error::WorkBudget {
                what: "continued-fraction steps",
                budget: cfg.max_cf_steps,
            });
        }
        let a = (p + s) / q;
        let pn = a * q - p;
        let qn = (delta - pn * pn) / q;
        debug_assert_eq!((delta - pn * pn) % q, 0, "inexact CF division");
        debug_assert!(qn > 0, "left the principal cycle");
        if let Some(obs) = observer.as_deref_mut() {
            obs(&CfStep {
                index: steps - 1,
                a: a as u64,
                p,
                q,
            });
        }
        if steps == 1 {
            anchor = (pn, qn);
        } else if (pn, qn) == anchor {
            let period_len = steps - 1;
            let norm_sign = if period_len % 2 == 0 { 1 } else { -1 };
            return Ok(CfPeriod {
                period_len,
                norm_sign,
            });
        }
        carrier.push(a as u64);
        p = pn;
        q = qn;
    }
}

/// Expands ω, reporting each partial quotient, and returns the period length
/// together with the norm sign (−1)^period_len of the fundamental unit.
pub fn cf_expand(
    field: &QField,
    cfg: &Config,
    observer: &mut dyn FnMut(&CfStep),
) -> Result<CfPeriod> {
    cf_walk(field, cfg, &mut NullCarrier, Some(observer))
}

/// Computes ε = x + yω exactly with big-integer convergents, then the
/// fundamental solution over Z[√d] (cubing when ε itself has half-integer
/// √d-coordinates, which happens exactly for d ≡ 1 mod 4 with y odd).
pub fn fundamental_unit_exact(field: &QField, cfg: &Config) -> Result<UnitData> {
    if field.d > cfg.exact_unit_max_d {
        return Err(Error::WorkBudget {
            what: "exact big-integer convergents (exact_unit_max_d)",
            budget: cfg.exact_unit_max_d,
        });
    }
    let mut car = ExactCarrier::new();
    let per = cf_walk(field, cfg, &mut car, None)?;
    let y = car.b1;
    let x = if field.t() == 1 {
        &car.a1 - &y
    } else {
        car.a1
    };
    let alpha = u8::from(y.bit(0));
    let (zx, zy, index, beta_tilde) = match field.omega_shape {
        OmegaShape::SqrtD => (x.clone(), y.clone(), 1u8, y.clone()),
        OmegaShape::Half if alpha == 0 => {
            let half: BigUint = &y >> 1u32;
            (&x + &half, half.clone(), 1, half)
        }
        OmegaShape::Half => {
            // ε = (a + b√d)/2 with a, b odd; ε³ lands in Z[√d].
            let a = (&x << 1) + &y;
            let b = &y;
            let d = BigUint::from(field.d);
            let a2 = &a * &a;
            let b2d = b * b * &d;
            let num_zx = &a * (&a2 + &b2d * 3u32);
            let num_zy = b * (&a2 * 3u32 + &b2d);
            (exact_div8(num_zx), exact_div8(num_zy), 3, y.clone())
        }
    };
    Ok(UnitData {
        x,
        y,
        zx,
        zy,
        norm_sign: per.norm_sign,
        alpha,
        index,
        beta_tilde,
        period_len: per.period_len,
    })
}

/// Unit coordinates mod m from a walk whose convergents are carried mod 64m,
/// making the divisions by 2 (ω shape) and 8 (cubing) exact on residues.
pub(crate) struct ResidueParts {
    pub x: BigUint,
    pub y: BigUint,
    pub zx: BigUint,
    pub zy: BigUint,
    pub norm_sign: i8,
    pub period_len: u64,
}

pub(crate) fn unit_residue_parts(
    field: &QField,
    m: &BigUint,
    cfg: &Config,
) -> Result<ResidueParts> {
    let m64 = m * 64u32;
    let mut car = BigModCarrier::new(m64.clone());
    let per = cf_walk(field, cfg, &mut car, None)?;
    let y64 = car.b1;
    let x64 = if field.t() == 1 {
        ((&car.a1 + &m64) - &y64) % &m64
    } else {
        car.a1
    };
    let (zx, zy) = match field.omega_shape {
        OmegaShape::SqrtD => (&x64 % m, &y64 % m),
        OmegaShape::Half if !y64.bit(0) => {
            let half: BigUint = &y64 >> 1u32;
            ((&x64 + &half) % m, half % m)
        }
        OmegaShape::Half => {
            let a = ((&x64 << 1) + &y64) % &m64;
            let b = &y64;
            let dd = BigUint::from(field.d) % &m64;
            let a2 = &a * &a % &m64;
            let b2d = b * b % &m64 * &dd % &m64;
            let num_zx = &a * ((&a2 + &b2d * 3u32) % &m64) % &m64;
            let num_zy = b * ((&a2 * 3u32 + &b2d) % &m64) % &m64;
            (exact_div8(num_zx) % m, exact_div8(num_zy) % m)
        }
    };
    Ok(ResidueParts {
        x: &x64 % m,
        y: &y64 % m,
        zx,
        zy,
        norm_sign: per.norm_sign,
        period_len: per.period_len,
    })
}

/// u128-backed variant of [`unit_residue_parts`] for 64m < 2^63; returns
/// (x, y, zx, zy) mod m.
pub(crate) fn unit_residue_parts_u64(
    field: &QField,
    m: u64,
    cfg: &Config,
) -> Result<(u64, u64, u64, u64, CfPeriod)> {
    let m64 = m as u128 * 64;
    debug_assert!(m64 < 1 << 63);
    let mut car = ModCarrier::new(m64);
    let per = cf_walk(field, cfg, &mut car, None)?;
    let y64 = car.b1 as u64;
    let x64 = if field.t() == 1 {
        ((car.a1 + m64 - car.b1) % m64) as u64
    } else {
        car.a1 as u64
    };
    let mu = m64 as u64;
    let (zx, zy) = match field.omega_shape {
        OmegaShape::SqrtD => (x64 % m, y64 % m),
        OmegaShape::Half if y64 % 2 == 0 => ((x64 + y64 / 2) % m, (y64 / 2) % m),
        OmegaShape::Half => {
            let a = ((2 * x64 as u128 + y64 as u128) % m64) as u64;
            let b = y64;
            let a2 = mulmod(a, a, mu);
            let b2d = mulmod(mulmod(b, b, mu), field.d % mu, mu);
            let num_zx = mulmod(a, ((a2 as u128 + 3 * b2d as u128) % m64) as u64, mu);
            let num_zy = mulmod(b, ((3 * a2 as u128 + b2d as u128) % m64) as u64, mu);
            debug_assert!(num_zx % 8 == 0 && num_zy % 8 == 0);
            ((num_zx / 8) % m, (num_zy / 8) % m)
        }
    };
    Ok((x64 % m, y64 % m, zx, zy, per))
}

/// Walks one full period carrying convergents mod 64m and returns all four
/// unit coordinates mod m plus the exact norm sign.
pub fn unit_residue(field: &QField, m: u64, cfg: &Config) -> Result<UnitResidue> {
    if m < 2 {
        return Err(Error::Precondition(format!(
            "unit_residue needs modulus ≥ 2, got {m}"
        )));
    }
    if (m as u128) < (1 << 57) {
        let (x_mod, y_mod, zx_mod, zy_mod, per) = unit_residue_parts_u64(field, m, cfg)?;
        Ok(UnitResidue {
            m,
            x_mod,
            y_mod,
            zx_mod,
            zy_mod,
            norm_sign: per.norm_sign,
            period_len: Some(per.period_len),
        })
    } else {
        let parts = unit_residue_parts(field, &BigUint::from(m), cfg)?;
        Ok(UnitResidue {
            m,
            x_mod: parts.x.to_u64().unwrap(),
            y_mod: parts.y.to_u64().unwrap(),
            zx_mod: parts.zx.to_u64().unwrap(),
            zy_mod: parts.zy.to_u64().unwrap(),
            norm_sign: parts.norm_sign,
            period_len: Some(parts.period_len),
        })
    }
}

/// α = y mod 2, via a walk mod 4 (no exact unit needed).
pub fn y_parity(field: &QField, cfg: &Config) -> Result<u8> {
    Ok((unit_residue(field, 4, cfg)?.y_mod % 2) as u8)
}
