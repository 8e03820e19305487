//! Infrastructure ("large step") engine: arithmetic on reduced indefinite
//! binary quadratic forms with fixed-point distances.
//!
//! A form (a, b, c) of discriminant Δ corresponds to the state (P, Q) =
//! (b, 2a); the reduction step ρ maps it to its successor on the cycle and
//! multiplies the relative generator θ by ψ = (P' + √Δ)/Q. Composition of
//! two forms multiplies generators and distances add (up to the bounded
//! reduction correction), which is what makes baby-step/giant-step regulator
//! computation and the distance-doubling unit ladder possible.
//!
//! Two generator representations coexist:
//!
//! * the public [`ReducedForm`] carries the generator exactly (big integers,
//!   coordinate growth e^distance) — honest and simple, meant for moderate
//!   walks and differential tests;
//! * [`unit_residue_fast`] never materializes the generator. It runs the
//!   ladder twice with identical control flow: pass one records every
//!   divisor the generator updates would need, pass two carries residues
//!   modulo 16m times that divisor product, dividing the modulus down as it
//!   goes. The final residues are exact mod 16m, enough to undo the ω-shape
//!   halving and the index-3 cubing.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{self, ext_gcd};
use crate::fixed::{ln_q96, ln_ratio, sqrt_q96, Dist, LN2_Q96};
use crate::pell::{QField, UnitResidue};
use crate::{Config, Error, Result};

/// A reduced indefinite form with discriminant Δ = b² − 4ac, its distance
/// from the principal form, and the relative generator θ (the product of the
/// ψ's of every step that produced this form) — exactly, plus reduced to
/// ω-coordinate residues mod m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    /// ln θ, in 96-fractional-bit fixed point.
    pub distance: Dist,
    /// ω-coordinates of θ, reduced mod m.
    pub generator_residue: (u64, u64),
    /// Modulus for `generator_residue`.
    pub m: u64,
    delta: i64,
    s: i64,
    /// 2θ = gu + gv·√Δ, exactly.
    gu: BigInt,
    gv: BigInt,
    norm_sign: i8,
}

impl ReducedForm {
    pub fn discriminant(&self) -> i64 {
        self.delta
    }

    /// Sign of the norm of the relative generator.
    pub fn norm_sign(&self) -> i8 {
        self.norm_sign
    }

    /// The (P, Q) state of this form.
    fn state(&self) -> (i64, i64) {
        (self.b, 2 * self.a)
    }

    fn assert_reduced(&self) {
        assert!(
            is_reduced(self.b, 2 * self.a, self.s),
            "form ({}, {}, {}) is not reduced",
            self.a,
            self.b,
            self.c
        );
    }
}

/// Classical reducedness for positive discriminant, in state coordinates:
/// 0 < P ≤ ⌊√Δ⌋ and ⌊√Δ⌋ − P < Q ≤ ⌊√Δ⌋ + P.
pub(crate) fn is_reduced(p: i64, q: i64, s: i64) -> bool {
    0 < p && p <= s && s - p < q && q <= s + p
}

/// One ρ step on a (P, Q) state. Handles the transiently huge, possibly
/// negative states that appear while reducing a freshly composed form.
pub(crate) fn rho_state(delta: i64, s: i64, p: i64, q: i64) -> (i64, i64) {
    debug_assert!(q != 0);
    let num = p as i128 + s as i128 + i128::from(q < 0);
    let a = Integer::div_floor(&num, &(q as i128));
    let p1 = a * q as i128 - p as i128;
    let num_q = delta as i128 - p1 * p1;
    debug_assert_eq!(num_q % q as i128, 0, "inexact rho division");
    let q1 = num_q / q as i128;
    (
        i64::try_from(p1).expect("rho state overflow"),
        i64::try_from(q1).expect("rho state overflow"),
    )
}

/// Sign of ψ = (P₁ + √Δ)/Q as a real number.
fn psi_sign(delta: i64, p1: i64, q: i64) -> i8 {
    let num: i8 = if p1 >= 0 || (p1 as i128) * (p1 as i128) < delta as i128 {
        1
    } else {
        -1
    };
    if q > 0 {
        num
    } else {
        -num
    }
}

/// Principal start state: (b₀, 2) with b₀ ∈ {⌊√Δ⌋, ⌊√Δ⌋−1} matching Δ's
/// parity, so that the form (1, b₀, (b₀²−Δ)/4) is integral and reduced.
fn start_state(delta: i64) -> (i64, i64) {
    let s = arith::isqrt(delta as u128) as i64;
    let b0 = if (s - delta) % 2 == 0 { s } else { s - 1 };
    (b0, 2)
}

/// ω-coordinate residues mod m of θ given 2θ = u + v√Δ. The coordinates are
/// always integral: u is even for even Δ, and u ≡ v (mod 2) for odd Δ.
fn omega_residue(u: &BigInt, v: &BigInt, delta: i64, m: u64) -> (u64, u64) {
    let x2 = if delta % 2 == 0 {
        u.clone()
    } else {
        u - v
    };
    debug_assert!(x2.is_even(), "generator left the ω lattice");
    let x: BigInt = x2 >> 1;
    let mb = BigInt::from(m);
    (
        x.mod_floor(&mb).to_u64().unwrap(),
        v.mod_floor(&mb).to_u64().unwrap(),
    )
}

/// The principal form (distance 0, generator 1) with residues mod m.
pub fn principal_form(field: &QField, m: u64) -> ReducedForm {
    let delta = field.d_k as i64;
    let s = arith::isqrt(delta as u128) as i64;
    let (b0, q0) = start_state(delta);
    let gu = BigInt::from(2);
    let gv = BigInt::zero();
    let generator_residue = omega_residue(&gu, &gv, delta, m);
    let f = ReducedForm {
        a: q0 / 2,
        b: b0,
        c: (b0 * b0 - delta) / 4,
        distance: Dist::ZERO,
        generator_residue,
        m,
        delta,
        s,
        gu,
        gv,
        norm_sign: 1,
    };
    f.assert_reduced();
    f
}

/// Exact generator update for one ρ step: θ ← θ·ψ, dividing by the old Q.
fn gen_rho(gu: &BigInt, gv: &BigInt, delta: i64, q: i64, p1: i64) -> (BigInt, BigInt) {
    let nu = gu * p1 + gv * delta;
    let nv = gu + gv * p1;
    let qb = BigInt::from(q);
    debug_assert!(
        (&nu % &qb).is_zero() && (&nv % &qb).is_zero(),
        "inexact generator division"
    );
    (nu / &qb, nv / qb)
}

/// Successor of a reduced form on its cycle. Distance grows by ln ψ; the
/// generator (exact and as residues) is multiplied by ψ; the norm sign flips
/// because every reduced step has N(ψ) < 0.
pub fn rho_step(f: &ReducedForm) -> ReducedForm {
    f.assert_reduced();
    let (p, q) = f.state();
    let (p1, q1) = rho_state(f.delta, f.s, p, q);
    let (gu, gv) = gen_rho(&f.gu, &f.gv, f.delta, q, p1);
    let distance = f.distance + ln_ratio(p1 as i128, q as i128, sqrt_q96(f.delta as u128));
    let norm_sign = f.norm_sign * if (q1 > 0) == (q > 0) { -1 } else { 1 };
    let generator_residue = omega_residue(&gu, &gv, f.delta, f.m);
    let out = ReducedForm {
        a: q1 / 2,
        b: p1,
        c: -q / 2,
        distance,
        generator_residue,
        m: f.m,
        delta: f.delta,
        s: f.s,
        gu,
        gv,
        norm_sign,
    };
    debug_assert_eq!(
        out.b as i128 * out.b as i128 - 4 * out.a as i128 * out.c as i128,
        f.delta as i128
    );
    out.assert_reduced();
    out
}

/// Ideal product in HNF. Takes the two (P, Q) states (reduced, so all
/// quantities fit i128 with room to spare) and returns (P₃, Q₃, γ) where γ
/// is the content divisor: θ₃ = θ₁θ₂·(2/γ) in generator terms. P₃ is
/// normalized into (⌊√Δ⌋ − Q₃, ⌊√Δ⌋] — the reduced window — so composing
/// with the principal form is the identity on states.
fn compose_states(delta: i64, s: i64, p1: i64, q1: i64, p2: i64, q2: i64) -> (i64, i64, i128) {
    let (p1, q1, p2, q2) = (p1 as i128, q1 as i128, p2 as i128, q2 as i128);
    let delta = delta as i128;
    let q1q2 = q1 * q2;
    let r = delta & 1;
    // Z-module generators (e + f√Δ)/2 of the product ideal: the four obvious
    // products and ω times each.
    let mut gens = [(0i128, 0i128); 8];
    gens[0] = (q1 * q2, 0);
    gens[1] = (q1 * p2, q1);
    gens[2] = (q2 * p1, q2);
    gens[3] = (p1 * p2 + delta, p1 + p2);
    for i in 0..4 {
        let (e, f) = gens[i];
        debug_assert!((e * r + f * delta) % 2 == 0 && (e + f * r) % 2 == 0);
        gens[i + 4] = ((e * r + f * delta) / 2, (e + f * r) / 2);
    }
    // e-parts only matter modulo Q₁Q₂ (the module contains (Q₁Q₂, 0)), and
    // reducing them keeps every later product inside i128.
    for g in gens.iter_mut() {
        g.0 = g.0.rem_euclid(q1q2);
    }
    // gcd of the f-parts, tracking the paired e-combination.
    let (mut ce, mut cf) = gens[0];
    for &(e, f) in &gens[1..] {
        if f == 0 {
            continue;
        }
        if cf == 0 {
            ce = e;
            cf = f;
            continue;
        }
        let (g, x, y) = ext_gcd(cf, f);
        ce = (x * ce + y * e).rem_euclid(q1q2);
        cf = g;
    }
    let gamma = cf.abs();
    if cf < 0 {
        ce = -ce;
    }
    let j = ce;
    let mut n = q1q2;
    for &(e, f) in &gens {
        debug_assert_eq!(f % gamma, 0);
        n = arith::ext_gcd(n, e - (f / gamma) * j).0;
    }
    assert_eq!(gamma * n, 2 * q1q2, "composition index mismatch");
    let q3 = n / gamma;
    debug_assert_eq!(j % gamma, 0);
    let r0 = (j / gamma).rem_euclid(q3);
    let p3 = r0 + q3 * Integer::div_floor(&(s as i128 - r0), &q3);
    debug_assert!(s as i128 - q3 < p3 && p3 <= s as i128);
    debug_assert!(q3 % 2 == 0 && (delta - p3 * p3) % (2 * q3) == 0);
    (
        i64::try_from(p3).expect("compose overflow"),
        i64::try_from(q3).expect("compose overflow"),
        gamma,
    )
}

/// Gauss composition followed by reduction. Distances add up to the
/// correction ln(2/γ) minus the reduction ψ's, which keeps the result
/// within 2·ln Δ of distance(f) + distance(g). Generator residues multiply
/// and get corrected by the same steps. Panics if the discriminants or
/// residue moduli differ.
pub fn compose_reduce(f: &ReducedForm, g: &ReducedForm) -> ReducedForm {
    assert_eq!(f.delta, g.delta, "discriminant mismatch");
    assert_eq!(f.m, g.m, "residue modulus mismatch");
    f.assert_reduced();
    g.assert_reduced();
    let (p1, q1) = f.state();
    let (p2, q2) = g.state();
    let (mut p3, mut q3, gamma) = compose_states(f.delta, f.s, p1, q1, p2, q2);
    let mut gu = &f.gu * &g.gu + &f.gv * &g.gv * f.delta;
    let mut gv = &f.gu * &g.gv + &f.gv * &g.gu;
    let gb = BigInt::from(gamma);
    debug_assert!((&gu % &gb).is_zero() && (&gv % &gb).is_zero());
    gu /= &gb;
    gv /= gb;
    let mut distance =
        f.distance + g.distance + Dist(LN2_Q96) - Dist(ln_q96((gamma as u128) << 96));
    let mut norm_sign = f.norm_sign * g.norm_sign;
    let sq = sqrt_q96(f.delta as u128);
    let mut steps = 0;
    while !is_reduced(p3, q3, f.s) {
        let (pn, qn) = rho_state(f.delta, f.s, p3, q3);
        let (nu, nv) = gen_rho(&gu, &gv, f.delta, q3, pn);
        distance += ln_ratio(pn as i128, q3 as i128, sq);
        norm_sign *= if (qn > 0) == (q3 > 0) { -1 } else { 1 };
        gu = nu;
        gv = nv;
        p3 = pn;
        q3 = qn;
        steps += 1;
        assert!(steps < 300, "composition failed to reduce");
    }
    let generator_residue = omega_residue(&gu, &gv, f.delta, f.m);
    ReducedForm {
        a: q3 / 2,
        b: p3,
        c: ((p3 as i128 * p3 as i128 - f.delta as i128) / (2 * q3 as i128)) as i64,
        distance,
        generator_residue,
        m: f.m,
        delta: f.delta,
        s: f.s,
        gu,
        gv,
        norm_sign,
    }
}

// ---------------------------------------------------------------------------
// Internal engine: nodes without exact generators, used by BSGS and the
// two-pass modular ladder.

struct Ctx {
    delta: i64,
    s: i64,
    sq96: u128,
    p0: i64,
    q0: i64,
}

impl Ctx {
    fn new(field: &QField) -> Ctx {
        let delta = field.d_k as i64;
        let (p0, q0) = start_state(delta);
        Ctx {
            delta,
            s: arith::isqrt(delta as u128) as i64,
            sq96: sqrt_q96(delta as u128),
            p0,
            q0,
        }
    }

    fn start(&self, mode: &Mode) -> Node {
        let u = match mode {
            Mode::Track { .. } => BigUint::from(2u32),
            _ => BigUint::zero(),
        };
        Node {
            p: self.p0,
            q: self.q0,
            dist: Dist::ZERO,
            sg: 1,
            nu: 1,
            u,
            v: BigUint::zero(),
        }
    }
}

#[derive(Clone)]
struct Node {
    p: i64,
    q: i64,
    dist: Dist,
    sg: i8,
    nu: i8,
    u: BigUint,
    v: BigUint,
}

/// What the walk does with generator information. `Plain` ignores it
/// (BSGS), `Collect` multiplies up every divisor the updates would need
/// (ladder pass one), `Track` carries residues modulo a shrinking N
/// (ladder pass two).
enum Mode {
    Plain,
    Collect { prod: BigUint },
    Track { n: BigUint },
}

/// Reduces a possibly negative i128 mod n (BigUint, n ≥ 1).
fn mod_big(x: i128, n: &BigUint) -> BigUint {
    if x >= 0 {
        BigUint::from(x as u128) % n
    } else {
        let r = BigUint::from((-x) as u128) % n;
        if r.is_zero() {
            r
        } else {
            n - r
        }
    }
}

fn g_rho(ctx: &Ctx, mode: &mut Mode, g: &Node) -> Node {
    let (p1, q1) = rho_state(ctx.delta, ctx.s, g.p, g.q);
    let qa = g.q.unsigned_abs();
    let dist = g.dist + ln_ratio(p1 as i128, g.q as i128, ctx.sq96);
    let sg = g.sg * psi_sign(ctx.delta, p1, g.q);
    let nu = g.nu * if (q1 > 0) == (g.q > 0) { -1 } else { 1 };
    let (u, v) = match mode {
        Mode::Plain => (BigUint::zero(), BigUint::zero()),
        Mode::Collect { prod } => {
            *prod *= qa;
            (BigUint::zero(), BigUint::zero())
        }
        Mode::Track { n } => {
            let pm = mod_big(p1 as i128, n);
            let dm = BigUint::from(ctx.delta as u64) % &*n;
            let nu_ = (&g.u * &pm + &g.v * &dm) % &*n;
            let nv_ = (&g.u + &g.v * &pm) % &*n;
            let qb = BigUint::from(qa);
            assert!(
                (&nu_ % &qb).is_zero() && (&nv_ % &qb).is_zero(),
                "residue division not exact"
            );
            *n /= &qb;
            let mut u = (nu_ / &qb) % &*n;
            let mut v = (nv_ / &qb) % &*n;
            if g.q < 0 {
                // dividing by the signed Q also flips the generator's sign
                if !u.is_zero() {
                    u = &*n - u;
                }
                if !v.is_zero() {
                    v = &*n - v;
                }
            }
            (u, v)
        }
    };
    Node {
        p: p1,
        q: q1,
        dist,
        sg,
        nu,
        u,
        v,
    }
}

fn g_mul(ctx: &Ctx, mode: &mut Mode, g1: &Node, g2: &Node) -> Node {
    let (p3, q3, gamma) = compose_states(ctx.delta, ctx.s, g1.p, g1.q, g2.p, g2.q);
    let dist = g1.dist + g2.dist + Dist(LN2_Q96) - Dist(ln_q96((gamma as u128) << 96));
    let (u, v) = match mode {
        Mode::Plain => (BigUint::zero(), BigUint::zero()),
        Mode::Collect { prod } => {
            *prod *= gamma as u128;
            (BigUint::zero(), BigUint::zero())
        }
        Mode::Track { n } => {
            let dm = BigUint::from(ctx.delta as u64) % &*n;
            let nu_ = (&g1.u * &g2.u + &g1.v * &g2.v * &dm) % &*n;
            let nv_ = (&g1.u * &g2.v + &g1.v * &g2.u) % &*n;
            let gb = BigUint::from(gamma as u128);
            assert!(
                (&nu_ % &gb).is_zero() && (&nv_ % &gb).is_zero(),
                "gamma residue division not exact"
            );
            *n /= &gb;
            ((nu_ / &gb) % &*n, (nv_ / &gb) % &*n)
        }
    };
    let mut g3 = Node {
        p: p3,
        q: q3,
        dist,
        sg: g1.sg * g2.sg,
        nu: g1.nu * g2.nu,
        u,
        v,
    };
    let mut steps = 0;
    while !is_reduced(g3.p, g3.q, ctx.s) {
        g3 = g_rho(ctx, mode, &g3);
        steps += 1;
        assert!(steps < 300, "composition failed to reduce");
    }
    g3
}

/// Regulator candidate via baby-step/giant-step; no verification here.
/// Returns the full-cycle distance directly when the cycle closes inside
/// the baby walk.
fn bsgs_raw(field: &QField, cfg: &Config) -> Result<Dist> {
    let ctx = Ctx::new(field);
    let mut mode = Mode::Plain;
    let lnd = Dist(ln_q96((ctx.delta as u128) << 96));
    let guard = Dist(3 * lnd.0 + (6i128 << 96));
    let t_quarter = arith::isqrt(arith::isqrt(ctx.delta as u128) as u128);
    let t = std::cmp::max(16, (t_quarter as f64 * cfg.bsgs_table_scale) as u64);
    let mut baby: HashMap<(i64, i64), Dist> = HashMap::new();
    let mut order: Vec<((i64, i64), Dist)> = Vec::new();
    let mut cur = ctx.start(&mode);
    baby.insert((cur.p, cur.q), Dist::ZERO);
    order.push(((cur.p, cur.q), Dist::ZERO));
    let mut i: u64 = 0;
    let mut t_max = Dist::ZERO;
    while i < t || t_max.0 < 2 * guard.0 {
        cur = g_rho(&ctx, &mut mode, &cur);
        i += 1;
        if i > 10_000_000 {
            return Err(Error::RegulatorVerification(field.d));
        }
        if (cur.p, cur.q) == (ctx.p0, ctx.q0) {
            return Ok(cur.dist); // cycle closed inside the baby walk
        }
        if !baby.contains_key(&(cur.p, cur.q)) {
            baby.insert((cur.p, cur.q), cur.dist);
            order.push(((cur.p, cur.q), cur.dist));
        }
        t_max = cur.dist;
    }
    // Giant base: the farthest baby at least one guard short of the span,
    // so a giant step can never leap over the whole baby strip.
    let limit = t_max - guard;
    let mut base: Option<Node> = None;
    for &(st, dd) in &order {
        if dd <= limit {
            base = Some(Node {
                p: st.0,
                q: st.1,
                dist: dd,
                sg: 1,
                nu: 1,
                u: BigUint::zero(),
                v: BigUint::zero(),
            });
        }
    }
    let base = base.expect("baby table spans less than one guard");
    let mut cur = base.clone();
    let mut iters: u64 = 0;
    loop {
        if let Some(&dd) = baby.get(&(cur.p, cur.q)) {
            let diff = cur.dist - dd;
            if diff.0 > (1i128 << 96) / 10 {
                return Ok(diff);
            }
        }
        cur = g_mul(&ctx, &mut mode, &cur, &base);
        iters += 1;
        if iters > 10_000_000 {
            return Err(Error::RegulatorVerification(field.d));
        }
    }
}

/// End-to-end ladder at target distance r: either a plain cycle walk (small
/// r) or a base piece, repeated squarings, greedy fill, and a ρ tail back to
/// the principal state. Either way the walk lands exactly on the principal
/// state having traversed distance r (checked against `tol`), which is what
/// verifies r is a regulator multiple… in practice the regulator itself.
fn ladder_run(field: &QField, r: Dist, mut mode: Mode, tol: i128) -> Result<(Node, Mode)> {
    let ctx = Ctx::new(field);
    let lnd = Dist(ln_q96((ctx.delta as u128) << 96));
    let base_target = Dist(2 * lnd.0 + (4i128 << 96));
    let margin = Dist(base_target.0 + 2 * lnd.0 + (8i128 << 96));
    let finish = |g: Node, mode: Mode| -> Result<(Node, Mode)> {
        if (g.dist - r).abs().0 > tol {
            return Err(Error::RegulatorVerification(field.d));
        }
        Ok((g, mode))
    };
    let pure_walk = |mode: &mut Mode| -> Result<Node> {
        let mut g = g_rho(&ctx, mode, &ctx.start(mode));
        let mut steps: u64 = 0;
        while (g.p, g.q) != (ctx.p0, ctx.q0) {
            g = g_rho(&ctx, mode, &g);
            steps += 1;
            if steps > 10_000_000 {
                return Err(Error::RegulatorVerification(field.d));
            }
        }
        Ok(g)
    };
    if r < margin + base_target + Dist(10i128 << 96) {
        let g = pure_walk(&mut mode)?;
        return finish(g, mode);
    }
    let mut b = ctx.start(&mode);
    while b.dist < base_target {
        b = g_rho(&ctx, &mut mode, &b);
    }
    let fill_limit = r - margin;
    if b.dist > fill_limit {
        // base piece overshot the whole fill budget (r barely above the
        // cutoff): the plain walk is short here anyway
        let g = pure_walk(&mut mode)?;
        return finish(g, mode);
    }
    let mut pieces = vec![b];
    while Dist(2 * pieces.last().unwrap().dist.0) <= fill_limit {
        let last = pieces.last().unwrap().clone();
        let sq = g_mul(&ctx, &mut mode, &last, &last);
        pieces.push(sq);
    }
    let mut acc: Option<Node> = None;
    loop {
        let mut took = false;
        for pc in pieces.iter().rev() {
            let pd = match &acc {
                None => pc.dist,
                Some(a) => a.dist + pc.dist,
            };
            if pd <= fill_limit {
                acc = Some(match acc.take() {
                    None => pc.clone(),
                    Some(a) => g_mul(&ctx, &mut mode, &a, pc),
                });
                took = true;
                break;
            }
        }
        if !took {
            break;
        }
    }
    let mut g = acc.expect("greedy fill took nothing despite fitting base");
    let mut tail: u64 = 0;
    while (g.p, g.q) != (ctx.p0, ctx.q0) {
        g = g_rho(&ctx, &mut mode, &g);
        tail += 1;
        if tail > 1_000_000 {
            return Err(Error::RegulatorVerification(field.d));
        }
    }
    finish(g, mode)
}

/// Regulator by summing ln ψ over one full ρ cycle — linear in the period,
/// used as the unconditional fallback when BSGS verification fails and by
/// the analytic class number cross-checks.
pub(crate) fn regulator_by_cycle(field: &QField, cfg: &Config) -> Result<Dist> {
    let ctx = Ctx::new(field);
    let mut mode = Mode::Plain;
    let start = ctx.start(&mode);
    let mut g = g_rho(&ctx, &mut mode, &start);
    let mut steps: u64 = 1;
    while (g.p, g.q) != (ctx.p0, ctx.q0) {
        g = g_rho(&ctx, &mut mode, &g);
        steps += 1;
        if steps > cfg.max_cf_steps {
            return Err(Error::WorkBudget {
                what: "reduced-form cycle walk",
                budget: cfg.max_cf_steps,
            });
        }
    }
    Ok(g.dist)
}

fn tol_raw(precision: u32) -> i128 {
    let p = precision.min(88);
    std::cmp::max(1i128 << (96 - p), 1i128 << 46)
}

/// Regulator of the maximal order to the requested precision (bits after
/// the binary point, honored up to the engine's own error floor), computed
/// by BSGS and then verified: a distance ladder from the principal form must
/// land back on it having traversed exactly the claimed distance. A failed
/// verification is a typed error; callers fall back to walking the period.
pub fn regulator_bsgs(field: &QField, precision: u32, cfg: &Config) -> Result<Dist> {
    let r = bsgs_raw(field, cfg)?;
    let (end, _) = ladder_run(field, r, Mode::Plain, tol_raw(precision))?;
    Ok(end.dist)
}

/// Fundamental-unit residues mod m with BSGS-plus-ladder step counts
/// (≈ Δ^(1/4) plus polylog), instead of walking the full period. Same
/// output contract as [`crate::pell::unit_residue`] except that the period
/// length is unknown here.
pub fn unit_residue_fast(field: &QField, m: u64, cfg: &Config) -> Result<UnitResidue> {
    if m < 2 {
        return Err(Error::Precondition(format!(
            "unit_residue_fast needs modulus ≥ 2, got {m}"
        )));
    }
    let r = bsgs_raw(field, cfg)?;
    let tol = tol_raw(64);
    // Pass one: same control flow as below, recording the divisor product.
    let (_, mode) = ladder_run(field, r, Mode::Collect { prod: BigUint::from(1u32) }, tol)?;
    let prod = match mode {
        Mode::Collect { prod } => prod,
        _ => unreachable!(),
    };
    let m16 = BigUint::from(16u64) * m;
    let n0 = &m16 * &prod;
    // Pass two: identical decisions, residues mod a modulus that shrinks by
    // exactly the recorded divisors, ending at 16m.
    let (end, mode) = ladder_run(field, r, Mode::Track { n: n0 }, tol)?;
    let n = match mode {
        Mode::Track { n } => n,
        _ => unreachable!(),
    };
    if n != m16 {
        return Err(Error::SoftwareFault(format!(
            "ladder modulus ended at {n}, expected 16m = {m16}"
        )));
    }
    let (mut u, mut v) = (end.u, end.v);
    if end.sg < 0 {
        // the tracked generator is -2ε; negate to the positive unit
        if !u.is_zero() {
            u = &m16 - u;
        }
        if !v.is_zero() {
            v = &m16 - v;
        }
    }
    // u ≡ 2x (√d shape) or 2x+y (half shape), v ≡ y — all mod 16m, so the
    // halvings and the cubing's division by 8 are exact on residues.
    let mb = BigUint::from(m);
    let y_mod = (&v % &mb).to_u64().unwrap();
    let (x_mod, zx_mod, zy_mod);
    if field.d_k == 4 * field.d {
        debug_assert!(u.is_even());
        let x: BigUint = &u >> 1u32;
        x_mod = (&x % &mb).to_u64().unwrap();
        zx_mod = x_mod;
        zy_mod = y_mod;
    } else {
        let twox = (&u + &m16 - &v) % &m16;
        debug_assert!(twox.is_even());
        let x: BigUint = &twox >> 1u32;
        x_mod = (&x % &mb).to_u64().unwrap();
        if v.is_even() {
            let half: BigUint = &v >> 1u32;
            zx_mod = ((&x + &half) % &mb).to_u64().unwrap();
            zy_mod = (half % &mb).to_u64().unwrap();
        } else {
            let dm = BigUint::from(field.d) % &m16;
            let u2 = &u * &u % &m16;
            let v2d = &v * &v % &m16 * &dm % &m16;
            let num_zx = &u * ((&u2 + &v2d * 3u32) % &m16) % &m16;
            let num_zy = &v * ((&u2 * 3u32 + &v2d) % &m16) % &m16;
            debug_assert!(
                num_zx.trailing_zeros().map_or(true, |z| z >= 3)
                    && num_zy.trailing_zeros().map_or(true, |z| z >= 3)
            );
            zx_mod = ((num_zx >> 3u32) % &mb).to_u64().unwrap();
            zy_mod = ((num_zy >> 3u32) % &mb).to_u64().unwrap();
        }
    }
    Ok(UnitResidue {
        m,
        x_mod,
        y_mod,
        zx_mod,
        zy_mod,
        norm_sign: end.nu,
        period_len: None,
    })
}
