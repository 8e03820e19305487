use quadunit::arith::{
    divisors, factor, is_powerful, is_prime, is_squarefree, isqrt, kronecker, primes_up_to,
};
use quadunit::Config;
use rand::{Rng, SeedableRng};

fn cfg() -> Config {
    Config::default()
}

#[test]
fn isqrt_fixed_points() {
    assert_eq!(isqrt(0), 0);
    assert_eq!(isqrt(1), 1);
    assert_eq!(isqrt(46), 6);
    assert_eq!(isqrt(39_028_039_587_479), 6_247_242);
}

#[test]
fn isqrt_is_exact_floor() {
    for n in 0..=100_000u128 {
        let r = isqrt(n);
        assert!(r * r <= n && (r + 1) * (r + 1) > n, "n = {n}");
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.gen::<u64>() as u128;
        let r = isqrt(n);
        assert!(r * r <= n && (r + 1) * (r + 1) > n, "n = {n}");
    }
}

#[test]
fn kronecker_fixed_values() {
    assert_eq!(kronecker(5, 3), -1);
    assert_eq!(kronecker(2, 7), 1);
    assert_eq!(kronecker(12, 4), 0);
    // bottom 0: nonzero only for |a| = 1
    assert_eq!(kronecker(1, 0), 1);
    assert_eq!(kronecker(-1, 0), 1);
    assert_eq!(kronecker(5, 0), 0);
}

#[test]
fn kronecker_reciprocity() {
    for a in (1..500i64).step_by(2) {
        for b in (1..500i64).step_by(2) {
            if num_integer::gcd(a, b) != 1 {
                continue;
            }
            let sign = if (a % 4 == 3) && (b % 4 == 3) { -1 } else { 1 };
            assert_eq!(
                kronecker(a, b) * kronecker(b, a),
                sign,
                "a = {a}, b = {b}"
            );
        }
    }
}

#[test]
fn kronecker_is_multiplicative() {
    for (a, b, n) in [(3i64, 5i64, 77i64), (7, 11, 15), (2, 9, 21), (-3, 5, 13)] {
        assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
        assert_eq!(kronecker(a, b * n), kronecker(a, b) * kronecker(a, n));
    }
}

#[test]
fn primality_fixed_values() {
    assert!(is_prime(39_028_039_587_479));
    assert!(!is_prime(4_099_215));
    assert!(!is_prime(1));
    assert!(is_prime(2));
}

#[test]
fn primality_agrees_with_sieve() {
    let primes = primes_up_to(1_000_000);
    let mut flags = vec![false; 1_000_001];
    for p in &primes {
        flags[*p as usize] = true;
    }
    for n in 1..=1_000_000u64 {
        assert_eq!(is_prime(n), flags[n as usize], "n = {n}");
    }
}

#[test]
fn factorization_fixed_values() {
    assert_eq!(factor(46, &cfg()).unwrap(), vec![(2, 1), (23, 1)]);
    assert_eq!(factor(1, &cfg()).unwrap(), vec![]);
    let f = factor(58_254, &cfg()).unwrap();
    assert_eq!(f.len(), 5, "five distinct primes");
    assert!(f.iter().all(|&(_, e)| e == 1));
    assert_eq!(f.iter().map(|&(p, _)| p).product::<u64>(), 58_254);
}

#[test]
fn factorization_reconstructs_and_classifies() {
    let cfg = cfg();
    for n in 1..=1_000_000u64 {
        let f = factor(n, &cfg).unwrap();
        let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
        assert_eq!(back, n);
        assert!(f.windows(2).all(|w| w[0].0 < w[1].0), "sorted primes");
        let sqfree = f.iter().all(|&(_, e)| e == 1);
        let powerful = f.iter().all(|&(_, e)| e >= 2);
        assert_eq!(is_squarefree(n, &cfg).unwrap(), sqfree, "n = {n}");
        assert_eq!(is_powerful(n, &cfg).unwrap(), powerful, "n = {n}");
    }
}

#[test]
fn powerful_numbers_fixed_values() {
    let cfg = cfg();
    assert!(is_powerful(1, &cfg).unwrap());
    assert!(is_powerful(108, &cfg).unwrap());
    // 72 = 3²·2³ = a²b³ is powerful (every prime exponent is at least 2)
    assert!(is_powerful(72, &cfg).unwrap());
    assert!(!is_powerful(12, &cfg).unwrap());
    assert!(is_squarefree(46, &cfg).unwrap());
    assert!(!is_squarefree(44, &cfg).unwrap());
}

#[test]
fn divisor_lists() {
    let cfg = cfg();
    assert_eq!(divisors(46, &cfg).unwrap(), vec![1, 2, 23, 46]);
    assert_eq!(divisors(1, &cfg).unwrap(), vec![1]);
    assert_eq!(divisors(36, &cfg).unwrap(), vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
}

#[test]
fn prime_listing() {
    assert_eq!(primes_up_to(1), Vec::<u64>::new());
    assert_eq!(primes_up_to(13), vec![2, 3, 5, 7, 11, 13]);
    assert_eq!(primes_up_to(1_000_000).len(), 78_498);
}
