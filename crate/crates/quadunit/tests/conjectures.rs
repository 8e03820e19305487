use quadunit::{
    certify_counterexample, check_c, check_rc, check_sc, empty_unusual_criterion, pell,
    small_norm_representations, small_norm_solvability, split_pair_unusual_criteria, Conjecture,
    Error, Status, UnusualShape, Verdict,
};

fn field(d: u64) -> pell::QField {
    pell::QField::new(d, &Default::default()).unwrap()
}

fn cfg() -> quadunit::Config {
    Default::default()
}

#[test]
fn rc_holds_with_certificate() {
    for d in [46u64, 430] {
        let v = check_rc(&field(d), &cfg()).unwrap();
        assert_eq!(v.status, Status::Holds, "d = {d}");
        let w = v.witness.expect("certificate");
        assert_eq!(w["norm"], 1);
        assert_eq!(w["y_mod_d"], 0);
        assert!(v.bounds_used.is_none());
    }
    let w = check_rc(&field(46), &cfg()).unwrap().witness.unwrap();
    assert_eq!(w["beta"], 6);
}

#[test]
fn rc_fails_on_residue_class() {
    let v = check_rc(&field(1817), &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
    let failed = v.witness.unwrap()["failed"].clone();
    assert!(failed.as_array().unwrap().iter().any(|c| c == "beta"));
}

#[test]
fn rc_fails_on_negative_norm() {
    let v = check_rc(&field(5_374_184_665), &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
    let w = v.witness.unwrap();
    assert!(w["failed"].as_array().unwrap().iter().any(|c| c == "norm"));
    assert_eq!(w["observed"]["norm"], -1);
}

#[test]
fn sc_refuted_by_prime_701() {
    let v = check_sc(&field(4_099_215), 10_000, &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
    let w = v.witness.unwrap();
    assert_eq!(w["p"], 701);
    assert_eq!(w["k"], 1);
    assert_eq!(w["u_mod_p"], 0);
    assert_ne!(w["u_mod_p2"], 0);
}

#[test]
fn sc_refuted_by_prime_5_for_large_counterexample() {
    let v = check_sc(&field(39_028_039_587_479), 100, &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
    let w = v.witness.unwrap();
    assert_eq!(w["p"], 5);
    assert_eq!(w["u_mod_p"], 0);
    assert_ne!(w["u_mod_p2"], 0);
}

#[test]
fn sc_fails_fast_outside_residue_class() {
    let v = check_sc(&field(46), 100, &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
    assert_eq!(v.witness.unwrap()["condition"], "d mod 8 = 7");
}

#[test]
fn c_fails_when_y_even() {
    let v = check_c(&field(46), 3, 100, &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
}

#[test]
fn c_refutes_first_power() {
    let v = check_c(&field(4_099_215), 1, 1_000, &cfg()).unwrap();
    assert_eq!(v.status, Status::RefutedUpToBound);
    let b = v.bounds_used.expect("bounded status carries its bounds");
    assert_eq!(b["k_bound"], 1);
    assert_eq!(b["prime_bound"], 1000);
    assert!(v.witness.is_none());
}

#[test]
fn c_never_decides_the_smallest_candidate() {
    for (kb, pb) in [(1u64, 10u64), (3, 100), (9, 1_000)] {
        let v = check_c(&field(7), kb, pb, &cfg()).unwrap();
        assert!(
            matches!(v.status, Status::RefutedUpToBound | Status::Unknown),
            "d = 7, k_bound = {kb}, prime_bound = {pb}: got {:?}",
            v.status
        );
        assert!(v.bounds_used.is_some());
    }
}

#[test]
fn c_rejects_even_power_bound() {
    assert!(matches!(
        check_c(&field(7), 4, 100, &cfg()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn certify_large_prime_counterexample() {
    let v = certify_counterexample(&field(39_028_039_587_479), Conjecture::Mordell, &cfg()).unwrap();
    assert_eq!(v.status, Status::Holds);
    let w = v.witness.unwrap();
    assert_eq!(w["beta"], 7);
    assert_eq!(w["norm"], 1);
    assert_eq!(w["y_mod_d"], 0);
    assert_eq!(w["period_len"], 3_650_856);
}

#[test]
fn certify_fails_when_d_misses_y() {
    let v = certify_counterexample(&field(7), Conjecture::Mordell, &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
    assert_eq!(v.witness.unwrap()["y_mod_d"], 3);
}

#[test]
fn certify_fails_on_composite() {
    let v = certify_counterexample(&field(46), Conjecture::Mordell, &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
    assert_eq!(v.witness.unwrap()["condition"], "d prime");
}

#[test]
fn certify_checks_residue_class_per_conjecture() {
    let v = certify_counterexample(&field(7), Conjecture::Aac, &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
    assert_eq!(v.witness.as_ref().unwrap()["condition"], "d mod 4 = 1");
    let v = certify_counterexample(&field(5), Conjecture::Aac, &cfg()).unwrap();
    assert_eq!(v.status, Status::Fails);
    assert_eq!(v.witness.unwrap()["y_mod_d"], 1);
}

#[test]
fn small_norm_box_witnesses() {
    let r = small_norm_representations(5, 3, 50).unwrap();
    assert_eq!(r.mixed_two, Some((1, 1)));
    assert_eq!(r.mixed_one, None);
    let r = small_norm_representations(13, 3, 50).unwrap();
    assert_eq!(r.mixed_one, Some((1, 2)));
    let r = small_norm_representations(5, 7, 50).unwrap();
    assert_eq!(r.mixed_two, Some((1, 1)));
}

#[test]
fn small_norm_exact_decisions_match_box_on_examples() {
    let s = small_norm_solvability(5, 3, &cfg()).unwrap();
    assert!(!s.mixed_one && s.mixed_two);
    let s = small_norm_solvability(13, 3, &cfg()).unwrap();
    assert!(s.mixed_one);
    let s = small_norm_solvability(5, 7, &cfg()).unwrap();
    assert!(!s.mixed_one && s.mixed_two);
}

#[test]
fn small_norm_rejects_bad_pairs() {
    assert!(small_norm_representations(3, 5, 10).is_err());
    assert!(small_norm_representations(5, 9, 10).is_err());
    assert!(small_norm_solvability(4, 3, &cfg()).is_err());
}

#[test]
fn split_pair_criteria_agree_on_small_cases() {
    let r = split_pair_unusual_criteria(&field(15), &cfg()).unwrap();
    assert_eq!((r.p, r.q, r.h), (5, 3, 2));
    assert_eq!(r.alpha, 1);
    assert_eq!(r.kronecker_pq, -1);
    assert!(!r.only_two_via_parity && !r.only_two_via_kronecker);
    assert!(r.parity_kronecker_agree && !r.software_fault);

    let r = split_pair_unusual_criteria(&field(51), &cfg()).unwrap();
    assert_eq!((r.p, r.q), (17, 3));
    assert!(!r.only_two_via_parity && !r.only_two_via_kronecker);
    assert!(!r.software_fault);
}

#[test]
fn empty_unusual_prediction_odd_pair() {
    let r = empty_unusual_criterion(&field(65), Some(100), &cfg()).unwrap();
    assert_eq!(r.shape, UnusualShape::OddPairNegativeNorm);
    assert!(!r.d_divides_y && !r.predicts_empty);
    assert_eq!(r.direct_empty_up_to, Some((100, false)));
    assert_eq!(r.agreement, Some(true));
}

#[test]
fn empty_unusual_rejects_unmatched_factorization() {
    assert!(matches!(
        empty_unusual_criterion(&field(430), None, &cfg()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn verdict_serialization_contract() {
    let v = check_rc(&field(46), &cfg()).unwrap();
    let j = serde_json::to_value(&v).unwrap();
    assert_eq!(j["status"], "HOLDS");
    assert!(j.get("bounds_used").is_none(), "absent fields are omitted");
    let back: Verdict = serde_json::from_value(j).unwrap();
    assert_eq!(back, v);

    let v = check_c(&field(7), 1, 10, &cfg()).unwrap();
    let j = serde_json::to_value(&v).unwrap();
    assert!(
        j["status"] == "REFUTED_UP_TO_BOUND" || j["status"] == "UNKNOWN",
        "got {}",
        j["status"]
    );
    assert!(j.get("bounds_used").is_some());
}
