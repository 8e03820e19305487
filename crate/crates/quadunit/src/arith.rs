//! Integer primitives: isqrt, Kronecker symbol, deterministic primality,
//! factorization with a work budget, and a few modular helpers.

use crate::{Config, Error, Result};
use num_integer::Roots;

/// How `is_prime` decides. Recorded in certificates so a verdict names its
/// primality method explicitly.
pub const PRIMALITY_METHOD: &str = "deterministic Miller-Rabin (bases 2..41) + strong Lucas (Selfridge)";

/// Floor square root. `r` satisfies `r^2 <= n < (r+1)^2`.
pub fn isqrt(n: u128) -> u128 {
    n.sqrt()
}

/// Kronecker symbol (a|n), the full extension of Jacobi/Legendre to all
/// integer pairs. `kronecker(a, 0) = 1` iff `|a| = 1`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    let mut a = a as i128;
    let mut n = n as i128;
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut res = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            res = -res;
        }
    }
    while n % 2 == 0 {
        n /= 2;
        if a % 2 == 0 {
            return 0;
        }
        let r = a.rem_euclid(8);
        if r == 3 || r == 5 {
            res = -res;
        }
    }
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n.rem_euclid(8);
            if r == 3 || r == 5 {
                res = -res;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            res = -res;
        }
        a = a.rem_euclid(n);
    }
    if n == 1 {
        res
    } else {
        0
    }
}

pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

fn miller_rabin_witness(n: u64, a: u64) -> bool {
    // returns true if a proves n composite
    let a = a % n;
    if a == 0 {
        return false;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = powmod(a, d, n);
    if x == 1 || x == n - 1 {
        return false;
    }
    for _ in 1..s {
        x = mulmod(x, x, n);
        if x == n - 1 {
            return false;
        }
    }
    true
}

/// Strong Lucas probable-prime test with Selfridge's parameter choice.
/// `n` must be odd, > 2, and not a perfect square.
fn strong_lucas(n: u64) -> bool {
    // find D in 5, -7, 9, -11, ... with kronecker(D, n) == -1
    let mut dd: i64 = 5;
    loop {
        match kronecker(dd, n as i64) {
            -1 => break,
            0 => {
                // shares a factor with n
                return dd.unsigned_abs() == n;
            }
            _ => {}
        }
        dd = if dd > 0 { -(dd + 2) } else { -(dd - 2) };
    }
    // P = 1, Q = (1 - D) / 4
    let qq: i64 = (1 - dd) / 4;
    let nn = n as i128;
    let to_mod = |v: i128| -> u64 { v.rem_euclid(nn) as u64 };
    let q_mod = to_mod(qq as i128);
    let d_mod = to_mod(dd as i128);
    // binary ladder for U_k, V_k, Q^k on k = (n+1) >> s, then the strong checks
    let s = (n + 1).trailing_zeros();
    let k = (n + 1) >> s;
    let (mut u, mut v, mut qk) = (1u64, 1u64, q_mod); // U_1, V_1, Q^1
    let half = |x: u64| -> u64 {
        if x & 1 == 0 {
            x >> 1
        } else {
            // (x + n) / 2 without overflow
            (x >> 1) + (n >> 1) + 1
        }
    };
    let bits = 64 - k.leading_zeros();
    for i in (0..bits - 1).rev() {
        // double: U_2m = U V, V_2m = V^2 - 2 Q^m
        u = mulmod(u, v, n);
        v = {
            let v2 = mulmod(v, v, n);
            let t = mulmod(2, qk, n);
            (v2 + n - t) % n
        };
        qk = mulmod(qk, qk, n);
        if (k >> i) & 1 == 1 {
            // increment: U' = (U + V)/2, V' = (D U + V)/2 mod n
            let nu = half((u + v) % n);
            let nv = half((mulmod(d_mod, u, n) + v) % n);
            u = nu;
            v = nv;
            qk = mulmod(qk, q_mod, n);
        }
    }
    if u == 0 || v == 0 {
        return true;
    }
    for _ in 1..s {
        v = {
            let v2 = mulmod(v, v, n);
            let t = mulmod(2, qk, n);
            (v2 + n - t) % n
        };
        qk = mulmod(qk, qk, n);
        if v == 0 {
            return true;
        }
    }
    false
}

/// Deterministic primality for u64. Miller-Rabin to the thirteen prime bases
/// 2..41 (already deterministic for all 64-bit inputs) plus a strong Lucas
/// test, so the combined method stays deterministic well past 2^64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        if n % p == 0 {
            return n == p;
        }
    }
    for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        if miller_rabin_witness(n, a) {
            return false;
        }
    }
    let r = isqrt(n as u128) as u64;
    if r * r == n {
        return false;
    }
    strong_lucas(n)
}

fn brent_rho(n: u64, seed: u64, budget: &mut u64) -> Option<u64> {
    // Brent's cycle variant with batched gcd and a backtracking pass
    if n % 2 == 0 {
        return Some(2);
    }
    let c = seed % (n - 2) + 1;
    let f = |x: u64| (mulmod(x, x, n) + c) % n;
    let mut y = seed % n;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x = 0u64;
    let mut ys = 0u64;
    let m = 128u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        if *budget < r {
            *budget = 0;
            return None;
        }
        *budget -= r;
        let mut k = 0u64;
        while k < r && g == 1 {
            ys = y;
            let lim = m.min(r - k);
            for _ in 0..lim {
                y = f(y);
                q = mulmod(q, x.abs_diff(y), n);
            }
            if *budget < lim {
                *budget = 0;
                return None;
            }
            *budget -= lim;
            g = gcd_u64(q, n);
            k += lim;
        }
        r <<= 1;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = gcd_u64(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
        }
    }
    if g == n {
        None
    } else {
        Some(g)
    }
}

pub(crate) fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Complete factorization of `n`, primes ascending with exponents.
/// Trial division up to 4096, then Brent-rho within `cfg.factor_rho_budget`.
pub fn factor(n: u64, cfg: &Config) -> Result<Vec<(u64, u32)>> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n <= 1 {
        return Ok(out);
    }
    let mut n = n;
    let push = |p: u64, out: &mut Vec<(u64, u32)>| {
        if let Some(last) = out.last_mut() {
            if last.0 == p {
                last.1 += 1;
                return;
            }
        }
        out.push((p, 1));
    };
    for p in [2u64, 3, 5] {
        while n % p == 0 {
            push(p, &mut out);
            n /= p;
        }
    }
    // wheel mod 30
    let mut p = 7u64;
    let wheel = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut wi = 0;
    while p <= 4096 && p * p <= n {
        while n % p == 0 {
            push(p, &mut out);
            n /= p;
        }
        p += wheel[wi];
        wi = (wi + 1) % 8;
    }
    // rho phase on what's left
    let mut budget = cfg.factor_rho_budget;
    let mut stack = vec![n];
    let mut found: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            found.push(m);
            continue;
        }
        let r = isqrt(m as u128) as u64;
        if r * r == m {
            stack.push(r);
            stack.push(r);
            continue;
        }
        let mut split = None;
        for seed in 2..64 {
            if let Some(g) = brent_rho(m, seed, &mut budget) {
                split = Some(g);
                break;
            }
            if budget == 0 {
                return Err(Error::FactorBudget(m));
            }
        }
        match split {
            Some(g) => {
                stack.push(g);
                stack.push(m / g);
            }
            None => return Err(Error::FactorBudget(m)),
        }
    }
    found.sort_unstable();
    for f in found {
        push(f, &mut out);
    }
    out.sort_unstable();
    // merge duplicates that sorting may have made adjacent
    let mut merged: Vec<(u64, u32)> = Vec::new();
    for (p, e) in out {
        if let Some(last) = merged.last_mut() {
            if last.0 == p {
                last.1 += e;
                continue;
            }
        }
        merged.push((p, e));
    }
    Ok(merged)
}

/// True iff no prime square divides n.
pub fn is_squarefree(n: u64, cfg: &Config) -> Result<bool> {
    Ok(factor(n, cfg)?.iter().all(|&(_, e)| e == 1))
}

/// True iff every prime divides n at least twice (vacuously true for 1).
pub fn is_powerful(n: u64, cfg: &Config) -> Result<bool> {
    Ok(factor(n, cfg)?.iter().all(|&(_, e)| e >= 2))
}

/// All positive divisors of n, ascending.
pub fn divisors(n: u64, cfg: &Config) -> Result<Vec<u64>> {
    let mut divs = vec![1u64];
    for (p, e) in factor(n, cfg)? {
        let prev = divs.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            divs.extend(prev.iter().map(|d| d * pk));
        }
    }
    divs.sort_unstable();
    Ok(divs)
}

/// Primes up to and including `limit`, by sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2usize;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| if b { Some(i as u64) } else { None })
        .collect()
}

/// Extended gcd: returns (g, s, t) with s*a + t*b = g >= 0.
pub(crate) fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}
