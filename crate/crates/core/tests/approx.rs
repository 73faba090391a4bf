use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tiltlab::approx::{tilt_tube_membership, tube_from_zero_set, zero_tube_membership, PolySystem, TiltGrid, Verdict};
use tiltlab::perfring::{ExtVal, Exponent, MixedElem, ModelParams, TiltElem};
use tiltlab::tilt::sharp;
use tiltlab::Error;

fn par(p: u32) -> ModelParams {
    ModelParams::new(p).unwrap()
}

fn min_digit(ds: &[(Exponent, u8)]) -> Option<Exponent> {
    ds.iter().map(|(e, _)| *e).min()
}

/// Verdict for one coordinate from the leading digit, or the precision when
/// no digit survives.
fn coord(lead: Option<Exponent>, precision: Exponent, gamma: Exponent) -> Option<bool> {
    match lead {
        Some(v) => Some(v >= gamma),
        None if precision >= gamma => Some(true),
        None => None,
    }
}

fn fold(cs: &[Option<bool>]) -> Verdict {
    if cs.contains(&Some(false)) {
        Verdict::False
    } else if cs.contains(&None) {
        Verdict::Indeterminate
    } else {
        Verdict::True
    }
}

/// `(x^2 - p y, x y - p^(1/2))` computed with ring operations directly.
fn system_by_hand(x: &MixedElem, y: &MixedElem) -> Vec<MixedElem> {
    let (pr, n) = (x.params(), x.precision());
    let p = MixedElem::from_int(pr, n, pr.p as i64);
    let root = MixedElem::monomial(pr, n, 1, Exponent::from_fraction(pr.p, 1, 2).unwrap_or(Exponent::ONE));
    vec![&(x * x) - &(&p * y), &(x * y) - &root]
}

fn gammas(p: u32) -> Vec<Exponent> {
    (0..=8).map(|k| Exponent::from_fraction(p, k, 2).unwrap_or(Exponent::int(k / 2))).collect()
}

#[test]
fn zero_tube_matches_a_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let f = PolySystem::parse("x^2 - p*y; x*y - p^(1/2)", 2).unwrap();
    for _ in 0..500 {
        let n = Exponent::from_fraction(2, rng.gen_range(2..8), 2).unwrap();
        let x = MixedElem::random(&mut rng, par(2), n, 1, 0.4);
        let y = MixedElem::random(&mut rng, par(2), n, 1, 0.4);
        let vals = system_by_hand(&x, &y);
        for gamma in gammas(2) {
            let r = zero_tube_membership(&f, &[x.clone(), y.clone()], gamma).unwrap();
            let want: Vec<Option<bool>> = vals.iter().map(|v| coord(min_digit(v.digits()), n, gamma)).collect();
            assert_eq!(r.verdict, fold(&want), "x = {x}, y = {y}, gamma = {gamma}");
        }
    }
}

#[test]
fn documented_zero_tube_example() {
    let pr = par(2);
    let n = Exponent::int(3);
    let f = PolySystem::parse("y^2 - p", 2).unwrap();
    let x = MixedElem::parse(pr, n, "p^(1/2) + p").unwrap();
    let r = zero_tube_membership(&f, &[x], Exponent::ONE).unwrap();
    assert_eq!(r.verdict, Verdict::True);
    // (p^(1/2) + p)^2 - p = 2 p^(3/2) + p^2 = p^(5/2) + p^2
    assert_eq!(r.valuations, vec![ExtVal::Finite(Exponent::int(2))]);
}

#[test]
fn tilt_zero_set_and_witnesses_check_out() {
    let pr = par(2);
    let grid = TiltGrid { params: pr, precision: Exponent::int(2), den_log: 1, depth: 2, budget: 1 << 12 };
    let f = PolySystem::parse("y^2 - p", 2).unwrap();
    let zs = grid.zero_set(&f).unwrap();
    assert!(!zs.is_empty());
    let m2 = Exponent::int(2);
    for z in &zs {
        let s = sharp(&z[0], m2).unwrap();
        let v = &(&s * &s) - &MixedElem::from_int(pr, m2, 2);
        assert!(v.digits().is_empty(), "{} is not a zero", z[0]);
    }
    let all = grid.points(1).unwrap();
    for y in &all {
        for gamma in gammas(2) {
            let r = tilt_tube_membership(&f, y, gamma, &grid).unwrap();
            let each: Vec<Verdict> = zs
                .iter()
                .map(|z| fold(&[coord(min_digit((&y[0] - &z[0]).digits()), m2, gamma)]))
                .collect();
            let want = if each.contains(&Verdict::True) {
                Verdict::True
            } else if each.contains(&Verdict::Indeterminate) {
                Verdict::Indeterminate
            } else {
                Verdict::False
            };
            assert_eq!(r.verdict, want, "y = {}, gamma = {gamma}", y[0]);
            if let Some(w) = &r.witness {
                assert!(zs.contains(w));
                assert_eq!(r.verdict, Verdict::True);
            }
            assert_eq!(r.searched, zs.len());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn zero_tube_is_monotone_in_gamma(seed in any::<u64>(), pi in 0usize..3) {
        let p = [2u32, 3, 5][pi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PolySystem::parse("x^3 - p*y + x*y", p).unwrap();
        let n = Exponent::int(3);
        let x = MixedElem::random(&mut rng, par(p), n, 1, 0.3);
        let y = MixedElem::random(&mut rng, par(p), n, 1, 0.3);
        let vs: Vec<Verdict> = (0..=12u64)
            .map(|k| zero_tube_membership(&f, &[x.clone(), y.clone()], Exponent::from_fraction(p, k, 3).unwrap_or(Exponent::int(k / 3))).unwrap().verdict)
            .collect();
        let rank = |v: &Verdict| match v { Verdict::True => 0, Verdict::Indeterminate => 1, Verdict::False => 2 };
        prop_assert!(vs.windows(2).all(|w| rank(&w[0]) <= rank(&w[1])), "{:?}", vs);
    }

    #[test]
    fn tilt_tube_is_monotone_in_gamma(seed in any::<u64>()) {
        let pr = par(2);
        let m = Exponent::int(2);
        let grid = TiltGrid { params: pr, precision: m, den_log: 1, depth: 2, budget: 1 << 12 };
        let zs = grid.zero_set(&PolySystem::parse("x*y - p", 2).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = vec![TiltElem::random(&mut rng, pr, m, 1, 0.4), TiltElem::random(&mut rng, pr, m, 1, 0.4)];
        let mut seen_false = false;
        let mut seen_not_true = false;
        for g in gammas(2) {
            let v = tube_from_zero_set(&zs, &y, g).unwrap().verdict;
            prop_assert!(!(seen_not_true && v == Verdict::True));
            prop_assert!(!(seen_false && v != Verdict::False));
            seen_false |= v == Verdict::False;
            seen_not_true |= v != Verdict::True;
        }
    }
}

#[test]
fn precision_and_budget_failures_are_reported() {
    let pr = par(2);
    let f = PolySystem::parse("y^2 - p", 2).unwrap();
    let y = vec![TiltElem::t_pow(pr, Exponent::int(2), Exponent::ONE)];
    let big = TiltGrid { params: pr, precision: Exponent::int(2), den_log: 4, depth: 2, budget: 100 };
    assert!(matches!(tilt_tube_membership(&f, &y, Exponent::ONE, &big), Err(Error::Budget { .. })));
    let shallow = TiltGrid { params: pr, precision: Exponent::ONE, den_log: 1, depth: 3, budget: 1 << 12 };
    assert!(matches!(shallow.zero_set(&f), Err(Error::Precision { .. })));
    assert!(matches!(PolySystem::parse("", 2), Err(Error::Param(_))));
    let zero = MixedElem::zero(pr, Exponent::int(2));
    let r = zero_tube_membership(&PolySystem::parse("y", 2).unwrap(), &[zero], Exponent::int(3)).unwrap();
    assert_eq!(r.verdict, Verdict::Indeterminate);
}
