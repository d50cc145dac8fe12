use flatcert::hp::{Hp, LogReal};
use flatcert::ledger::*;
use num_rational::Ratio;
use proptest::prelude::*;

fn hp(s: &str) -> Hp {
    Hp::parse_decimal(s).unwrap()
}

fn close(a: &Hp, oracle: &str, tol: f64) {
    let d = (a.clone() - hp(oracle)).abs().to_f64();
    assert!(d <= tol, "{} vs {oracle}: {d:e}", a.to_decimal());
}

// Reference values computed with 110-digit arithmetic by a separate script.
#[test]
fn oracle_n3_eps1_sixteenth_eta_tenth() {
    let p = HarnackParams::<Hp>::new(3, Hp::from_ratio(1, 16), Hp::from_ratio(1, 10)).unwrap();
    let l = derive_ledger(&p).unwrap();
    close(&l.alpha, "0.1520030934450499849628415415937571583452", 1e-38);
    close(&l.eps0.log2, "-11519.10555849873795750931658821372423718", 1e-33);
    close(&l.c6.log2, "17.06197630730391043735485924320549140172", 1e-37);
    close(&l.r0.log2, "-19.16992500144231236290747788789563301752", 1e-37);
    close(&l.threshold(ThresholdKind::Barrier).log2, "-66.77261638625158796757867763481432723988", 1e-36);
    close(&l.threshold(ThresholdKind::Touch).log2, "-12.680969156501653932717246270585503376", 1e-35);
    close(&l.threshold(ThresholdKind::Grad).log2, "-11.78527037914358307124125451322414299872", 1e-36);
    close(&l.threshold(ThresholdKind::Final).log2, "-154.2371148742086972859153526496398331556", 1e-35);
    assert!(check_threshold_chain(&l).holds);
}

#[test]
fn oracle_quarter_alpha_n2() {
    let p = HarnackParams::<Hp>::with_alpha(2, Hp::from_ratio(1, 4), Ratio::new(1, 4)).unwrap();
    let l = derive_ledger(&p).unwrap();
    assert_eq!(l.exact.unwrap().eps0_exponent, Ratio::from_integer(96));
    close(&l.eps0.log2, "-3640", 1e-90);
    close(&l.threshold(ThresholdKind::Touch).log2, "-11.875", 1e-95);
    close(&l.threshold(ThresholdKind::Barrier).log2, "-74.75", 1e-95);
    close(&l.threshold(ThresholdKind::Final).log2, "-80.75", 1e-95);
    close(&l.threshold(ThresholdKind::Harnack).log2, "-5", 1e-95);
}

#[test]
fn oracle_n3_quarter_fifth_and_tenth() {
    let p = HarnackParams::<Hp>::from_decimal(3, "0.25", "0.2").unwrap();
    let l = derive_ledger(&p).unwrap();
    close(&l.eps0.log2, "-2110.107586176032577123036210416172271895", 1e-33);
    close(&l.threshold(ThresholdKind::Barrier).log2, "-108.4628996618719749070179086032662866484", 1e-34);
    // α = -log2(0.8) > 1/4.
    assert!(l.alpha_warning);
    let c = check_threshold_chain(&l);
    assert!(c.holds);
    assert!(c.side_conditions.iter().all(|s| !s.applicable));

    let p = HarnackParams::<Hp>::from_decimal(3, "0.25", "0.1").unwrap();
    let l = derive_ledger(&p).unwrap();
    close(&l.eps0.log2, "-11413.84454283536861697988376265771917073", 1e-33);
    assert!(!l.alpha_warning);
}

#[test]
fn eps0_underflows_but_stays_representable() {
    let p = HarnackParams::<Hp>::from_decimal(3, "0.25", "0.2").unwrap();
    let l = derive_ledger(&p).unwrap();
    assert_eq!(l.eps0.approx(), None);
    assert_eq!(l.eps0.json()["approx"], "underflow");
    assert_eq!(l.c1.approx().map(|v| v > 16.0), Some(true));
}

#[test]
fn depth_scale_bound_defect() {
    // M lands on an integer: the stated bound holds with equality.
    let p = HarnackParams::<Hp>::with_alpha(3, Hp::from_ratio(1, 4), Ratio::new(1, 4)).unwrap();
    let d = max_harnack_depth(&Hp::from_ratio(1, 32), &p).unwrap();
    assert_eq!(d.m_tilde, 3);
    assert!(d.scale_bound.stated_holds && d.scale_bound.corrected_holds);
    // Generic eps: only the bound with the extra factor 2 survives.
    let p = HarnackParams::<f64>::new(3, 0.25, 0.2).unwrap();
    let d = max_harnack_depth(&0.01, &p).unwrap();
    assert_eq!(d.m_tilde, 5);
    assert!(!d.scale_bound.stated_holds);
    assert!(d.scale_bound.corrected_holds);
}

fn arb_params() -> impl Strategy<Value = (u32, f64, f64)> {
    (2u32..=8, 1e-6f64..=0.25, 1e-3f64..=0.2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_and_chain_hold((n, e1, eta) in arb_params()) {
        let p = HarnackParams::<f64>::new(n, e1, eta).unwrap();
        let l = derive_ledger(&p).unwrap();
        prop_assert!(l.identity_gap() <= 1e-12);
        let c = check_threshold_chain(&l);
        prop_assert!(c.holds, "{:?}", c.links.iter().filter(|k| !k.holds).map(|k| k.name).collect::<Vec<_>>());
    }

    #[test]
    fn f64_and_hp_agree((n, e1, eta) in arb_params()) {
        let pf = HarnackParams::<f64>::new(n, e1, eta).unwrap();
        let ph = HarnackParams::<Hp>::new(n, Hp::from_f64(e1), Hp::from_f64(eta)).unwrap();
        let lf = derive_ledger(&pf).unwrap();
        let lh = derive_ledger(&ph).unwrap();
        let rel = (lf.eps0.log2 - lh.eps0.log2.to_f64()).abs() / lf.eps0.log2.abs();
        prop_assert!(rel < 1e-11, "{rel:e}");
    }

    #[test]
    fn r0_is_independent_of_eps1_and_eta((n, e1, eta) in arb_params(), e2 in 1e-6f64..=0.25) {
        let a = derive_ledger(&HarnackParams::<f64>::new(n, e1, eta).unwrap()).unwrap();
        let b = derive_ledger(&HarnackParams::<f64>::new(n, e2, 0.2).unwrap()).unwrap();
        prop_assert_eq!(a.r0.log2, b.r0.log2);
        prop_assert!((a.r0.log2 + 16.0 + 2.0 * (n as f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn smaller_eps1_means_smaller_eps0((n, e1, eta) in arb_params(), shrink in 0.01f64..0.9) {
        let a = derive_ledger(&HarnackParams::<f64>::new(n, e1, eta).unwrap()).unwrap();
        let b = derive_ledger(&HarnackParams::<f64>::new(n, e1 * shrink, eta).unwrap()).unwrap();
        prop_assert!(b.eps0.log2 < a.eps0.log2);
    }

    #[test]
    fn depth_solves_its_equation((n, e1, eta) in arb_params(), frac in 1e-4f64..=1.0) {
        let p = HarnackParams::<f64>::new(n, e1, eta).unwrap();
        let eps = e1 / 8.0 * frac;
        let d = max_harnack_depth(&eps, &p).unwrap();
        // 2^M ε (1-η)^(M-3) = ε₁ in log form.
        let lhs = d.m + eps.log2() + (d.m - 3.0) * (1.0 - eta).log2();
        prop_assert!((lhs - e1.log2()).abs() < 1e-9 * (1.0 + d.m.abs()));
        prop_assert!(d.m_tilde >= 3);
        prop_assert!((d.m_tilde as f64) <= d.m + 1e-9 && d.m < d.m_tilde as f64 + 1.0);
        prop_assert!(d.scale_bound.corrected_holds);
    }

    #[test]
    fn alpha_warning_tracks_quarter((n, e1, eta) in arb_params()) {
        let l = derive_ledger(&HarnackParams::<f64>::new(n, e1, eta).unwrap()).unwrap();
        prop_assert_eq!(l.alpha_warning, -(1.0 - eta).log2() > 0.25);
        let c = check_threshold_chain(&l);
        if !l.alpha_warning {
            prop_assert!(c.side_conditions.iter().all(|s| s.applicable && s.holds));
        }
    }
}
