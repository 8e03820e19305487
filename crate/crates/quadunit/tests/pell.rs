use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use quadunit::{
    cf_expand, fundamental_unit_exact, unit_residue, y_parity, Config, Error, OmegaShape, QField,
};

fn field(d: u64) -> QField {
    QField::new(d, &Config::default()).unwrap()
}

fn unit_small(d: u64) -> (u64, u64, u64, u64, i8, u8, u8, u64) {
    let u = fundamental_unit_exact(&field(d), &Config::default()).unwrap();
    (
        u.x.to_u64().unwrap(),
        u.y.to_u64().unwrap(),
        u.zx.to_u64().unwrap(),
        u.zy.to_u64().unwrap(),
        u.norm_sign,
        u.alpha,
        u.index,
        u.period_len,
    )
}

#[test]
fn field_construction() {
    let f = field(2);
    assert_eq!(f.omega_shape, OmegaShape::SqrtD);
    assert_eq!(f.d_k, 8);
    assert_eq!(f.beta, 2);
    let f = field(5);
    assert_eq!(f.omega_shape, OmegaShape::Half);
    assert_eq!(f.d_k, 5);
    let f = field(58254);
    assert_eq!(f.primes, vec![2, 3, 7, 19, 73]);
    assert_eq!(f.num_prime_factors(), 5);

    assert!(matches!(
        QField::new(1, &Config::default()),
        Err(Error::DTooSmall(1))
    ));
    assert!(matches!(
        QField::new(12, &Config::default()),
        Err(Error::NotSquarefree(12))
    ));
    assert!(matches!(
        QField::new(u64::MAX, &Config::default()),
        Err(Error::DTooLarge(..))
    ));
}

#[test]
fn cf_expand_small_periods() {
    let cfg = Config::default();
    let mut quots = Vec::new();
    let per = cf_expand(&field(2), &cfg, &mut |st| quots.push(st.a)).unwrap();
    assert_eq!(per.period_len, 1);
    assert_eq!(per.norm_sign, -1);
    // Integer part then the (period-opening) repeated quotient: √2 = [1; 2,2,…].
    assert_eq!(quots, vec![1, 2]);

    let per = cf_expand(&field(5), &cfg, &mut |_| {}).unwrap();
    assert_eq!(per.period_len, 1);
    assert_eq!(per.norm_sign, -1);

    let mut quots = Vec::new();
    let per = cf_expand(&field(3), &cfg, &mut |st| quots.push(st.a)).unwrap();
    assert_eq!(per.period_len, 2);
    assert_eq!(per.norm_sign, 1);
    assert_eq!(quots, vec![1, 1, 2]);
}

#[test]
fn cf_budget_is_enforced() {
    let cfg = Config {
        max_cf_steps: 3,
        ..Config::default()
    };
    assert!(matches!(
        cf_expand(&field(46), &cfg, &mut |_| {}),
        Err(Error::WorkBudget { .. })
    ));
}

#[test]
fn exact_units_match_known_values() {
    // (d, x, y, zx, zy, norm, alpha, index)
    let table: &[(u64, u64, u64, u64, u64, i8, u8, u8)] = &[
        (2, 1, 1, 1, 1, -1, 1, 1),
        (3, 2, 1, 2, 1, 1, 1, 1),
        (5, 0, 1, 2, 1, -1, 1, 3),
        (6, 5, 2, 5, 2, 1, 0, 1),
        (13, 1, 1, 18, 5, -1, 1, 3),
        (17, 3, 2, 4, 1, -1, 0, 1),
        (46, 24335, 3588, 24335, 3588, 1, 0, 1),
        (51, 50, 7, 50, 7, 1, 1, 1),
    ];
    for &(d, x, y, zx, zy, norm, alpha, index) in table {
        let got = unit_small(d);
        assert_eq!(
            (got.0, got.1, got.2, got.3, got.4, got.5, got.6),
            (x, y, zx, zy, norm, alpha, index),
            "d={d}"
        );
    }
}

#[test]
fn exact_unit_respects_size_gate() {
    let cfg = Config {
        exact_unit_max_d: 100,
        ..Config::default()
    };
    assert!(matches!(
        fundamental_unit_exact(&field(101), &cfg),
        Err(Error::WorkBudget { .. })
    ));
}

#[test]
fn d46_divisibility() {
    let u = fundamental_unit_exact(&field(46), &Config::default()).unwrap();
    assert_eq!(u.y.to_u64().unwrap() % 46, 0);
    let r = unit_residue(&field(46), 46, &Config::default()).unwrap();
    assert_eq!(r.y_mod, 0);
    assert_eq!(r.period_len, Some(u.period_len));
}

#[test]
fn residues_match_exact_units() {
    let cfg = Config::default();
    for d in 2..400u64 {
        let f = match QField::new(d, &cfg) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let u = fundamental_unit_exact(&f, &cfg).unwrap();
        for m in [2u64, 3, 4, 7, 10, 97, 4096, d, 2 * d] {
            let r = unit_residue(&f, m, &cfg).unwrap();
            let mb = BigUint::from(m);
            assert_eq!(BigUint::from(r.x_mod), &u.x % &mb, "x d={d} m={m}");
            assert_eq!(BigUint::from(r.y_mod), &u.y % &mb, "y d={d} m={m}");
            assert_eq!(BigUint::from(r.zx_mod), &u.zx % &mb, "zx d={d} m={m}");
            assert_eq!(BigUint::from(r.zy_mod), &u.zy % &mb, "zy d={d} m={m}");
            assert_eq!(r.norm_sign, u.norm_sign);
        }
    }
}

#[test]
fn big_modulus_path_agrees_with_u128_path() {
    // Moduli past the u128 carrier cutoff exercise the big-int carrier;
    // CRT consistency pins them to small-modulus walks.
    let cfg = Config::default();
    for d in [46u64, 51, 430, 1817] {
        let f = field(d);
        let big_m = (1u64 << 58) + 1; // past the cutoff, odd
        let r = unit_residue(&f, big_m, &cfg).unwrap();
        let u = fundamental_unit_exact(&f, &cfg).unwrap();
        let mb = BigUint::from(big_m);
        assert_eq!(BigUint::from(r.x_mod), &u.x % &mb);
        assert_eq!(BigUint::from(r.y_mod), &u.y % &mb);
    }
}

#[test]
fn crt_consistency() {
    let cfg = Config::default();
    for d in [46u64, 79, 430, 1817, 58254] {
        let f = field(d);
        let (m1, m2) = (101u64, 256u64);
        let r12 = unit_residue(&f, m1 * m2, &cfg).unwrap();
        let r1 = unit_residue(&f, m1, &cfg).unwrap();
        assert_eq!(r12.x_mod % m1, r1.x_mod);
        assert_eq!(r12.y_mod % m1, r1.y_mod);
        assert_eq!(r12.zx_mod % m1, r1.zx_mod);
        assert_eq!(r12.zy_mod % m1, r1.zy_mod);
    }
}

#[test]
fn norm_identity_mod_m() {
    // x² − dy² ≡ norm (√d shape) or (2x+y)² − dy² ≡ 4·norm (half shape).
    let cfg = Config::default();
    for d in [2u64, 5, 13, 46, 430, 1817, 4099215] {
        let f = field(d);
        for m in [97u64, 1000, 39028039] {
            let r = unit_residue(&f, m, &cfg).unwrap();
            let m128 = m as u128;
            let y = r.y_mod as u128;
            let (sq, scale) = match f.omega_shape {
                OmegaShape::SqrtD => {
                    let x = r.x_mod as u128;
                    (x * x % m128, 1u128)
                }
                OmegaShape::Half => {
                    let a = (2 * r.x_mod as u128 + y) % m128;
                    (a * a % m128, 4u128)
                }
            };
            let dy2 = (d as u128 % m128) * y % m128 * y % m128;
            let diff = (sq + m128 - dy2) % m128;
            let want = if r.norm_sign == 1 {
                scale % m128
            } else {
                (m128 - scale % m128) % m128
            };
            assert_eq!(diff, want, "d={d} m={m}");
        }
    }
}

#[test]
fn y_parity_examples() {
    let cfg = Config::default();
    assert_eq!(y_parity(&field(46), &cfg).unwrap(), 0);
    assert_eq!(y_parity(&field(4099215), &cfg).unwrap(), 1);
    assert_eq!(y_parity(&field(13), &cfg).unwrap(), 1);
    assert_eq!(y_parity(&field(17), &cfg).unwrap(), 0);
}

#[test]
fn modulus_below_two_rejected() {
    assert!(matches!(
        unit_residue(&field(2), 1, &Config::default()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn d2_mod_5() {
    let r = unit_residue(&field(2), 5, &Config::default()).unwrap();
    assert_eq!((r.x_mod, r.y_mod), (1, 1));
}

#[test]
fn corner_case_d_divides_zy_but_not_y() {
    // d = 17451248829: the fundamental solution over Z[√d] is the cube of ε,
    // and d divides the cube's Y-coordinate while d ∤ y.
    let cfg = Config::default();
    let f = field(17451248829);
    let r = unit_residue(&f, 17451248829, &cfg).unwrap();
    assert_eq!(r.zy_mod, 0);
    assert_ne!(r.y_mod, 0);
    assert_eq!(f.beta, 5);
    assert_eq!(f.primes, vec![3, 7, 29, 28655581]);
}

#[test]
fn small_sweep_invariants() {
    // Exact norm identity, norm = (−1)^period, index rule, β̃₀ relations,
    // and the divisibility implication chain for all squarefree d ≤ 2000.
    let cfg = Config::default();
    let mut checked = 0u32;
    for d in 2..=2000u64 {
        let f = match QField::new(d, &cfg) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let u = fundamental_unit_exact(&f, &cfg).unwrap();
        let db = BigUint::from(d);

        // Norm identity, exactly.
        let (lhs, rhs, scale) = match f.omega_shape {
            OmegaShape::SqrtD => (&u.x * &u.x, &db * &u.y * &u.y, 1u32),
            OmegaShape::Half => {
                let a = (&u.x << 1u32) + &u.y;
                (&a * &a, &db * &u.y * &u.y, 4u32)
            }
        };
        if u.norm_sign == 1 {
            assert_eq!(lhs, rhs + scale, "norm identity d={d}");
        } else {
            assert_eq!(lhs + scale, rhs, "norm identity d={d}");
        }
        // Z[√d] solution is ε or ε³ and satisfies the Pell equation itself.
        let (zl, zr) = (&u.zx * &u.zx, &db * &u.zy * &u.zy);
        if u.norm_sign == 1 {
            assert_eq!(zl, zr + 1u32, "Z[√d] norm d={d}");
        } else {
            assert_eq!(zl + 1u32, zr, "Z[√d] norm d={d}");
        }
        assert_eq!(u.norm_sign, if u.period_len % 2 == 0 { 1 } else { -1 });
        assert_eq!(u.alpha, u8::from(u.y.bit(0)));
        let expect_index = if f.omega_shape == OmegaShape::Half && u.alpha == 1 {
            3
        } else {
            1
        };
        assert_eq!(u.index, expect_index, "index d={d}");
        if u.index == 1 {
            match f.omega_shape {
                OmegaShape::SqrtD => assert_eq!((&u.zx, &u.zy), (&u.x, &u.y)),
                OmegaShape::Half => {
                    let half: BigUint = &u.y >> 1u32;
                    assert_eq!(u.zy, half);
                }
            }
        }
        // β̃₀ | y and y | 2β̃₀.
        assert!((&u.y % &u.beta_tilde).is_zero(), "beta_tilde | y d={d}");
        assert!(
            ((&u.beta_tilde << 1u32) % &u.y).is_zero(),
            "y | 2·beta_tilde d={d}"
        );
        // d | y ⇒ d | Y; d | Y ⇒ d | 3y.
        if (&u.y % &db).is_zero() {
            assert!((&u.zy % &db).is_zero(), "d|y ⇒ d|Y d={d}");
        }
        if (&u.zy % &db).is_zero() {
            assert!(
                ((&u.y * 3u32) % &db).is_zero(),
                "d|Y ⇒ d|3y d={d}"
            );
            if !(&u.y % &db).is_zero() {
                assert!(d % 8 == 5 && d % 3 == 0, "corner shape d={d}");
            }
        }
        // x ≥ 1 and y ≥ 1 except d = 5.
        if d != 5 {
            assert!(!u.x.is_zero() && !u.y.is_zero());
        }
        checked += 1;
    }
    assert!(checked > 1200);
}
