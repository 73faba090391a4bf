use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tiltlab::perfring::{Exponent, ModelParams, TiltElem};
use tiltlab::witt::{gen_witt_polys, Integers, IntegersModPN, Strategy, TiltRing, Witt, WittVec};

const PAIRS: usize = 500;

fn ghost_oracle(p: u32, w: &[BigInt]) -> Vec<BigInt> {
    let pb = BigInt::from(p);
    (0..w.len())
        .map(|k| {
            (0..=k)
                .map(|j| num_traits::pow(pb.clone(), j) * num_traits::pow(w[j].clone(), (p as usize).pow((k - j) as u32)))
                .sum()
        })
        .collect()
}

fn zv(rng: &mut ChaCha8Rng, n: usize, r: i64) -> WittVec<BigInt> {
    WittVec::new((0..n).map(|_| BigInt::from(rng.gen_range(-r..=r))).collect())
}

#[test]
fn ghost_map_is_a_homomorphism_for_every_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [2u32, 3, 5] {
        for n in 1..=4 {
            let w = Witt::with_strategy(Integers { p }, Strategy::Polynomial);
            for _ in 0..PAIRS {
                let (a, b) = (zv(&mut rng, n, 5), zv(&mut rng, n, 5));
                let (ga, gb) = (ghost_oracle(p, &a.comps), ghost_oracle(p, &b.comps));
                let gs = ghost_oracle(p, &w.add(&a, &b).unwrap().comps);
                let gm = ghost_oracle(p, &w.mul(&a, &b).unwrap().comps);
                for k in 0..n {
                    assert_eq!(gs[k], &ga[k] + &gb[k], "p={p} n={n}");
                    assert_eq!(gm[k], &ga[k] * &gb[k], "p={p} n={n}");
                }
            }
        }
    }
}

#[test]
fn generated_polynomials_have_the_documented_form() {
    let s = gen_witt_polys(2, 2).unwrap();
    assert_eq!(s.sum[1].format(2), "x1 + y1 - x0*y0");
    let s3 = gen_witt_polys(3, 2).unwrap();
    // S_1 = x1 + y1 - (x0^3 + y0^3 - (x0 + y0)^3)/3 ... with integer coefficients
    assert_eq!(s3.sum[1].format(2), "x1 + y1 - x0^2*y0 - x0*y0^2");
    assert!(gen_witt_polys(4, 2).is_err());
    assert!(gen_witt_polys(2, 0).is_err());
}

fn tilt_vec(rng: &mut ChaCha8Rng, p: u32, n: usize, prec: Exponent) -> WittVec<TiltElem> {
    let par = ModelParams::new(p).unwrap();
    WittVec::new((0..n).map(|_| TiltElem::random(rng, par, prec, 1, 0.3)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ghost_transport_agrees_with_polynomials(seed in any::<u64>(), pi in 0usize..2, n in 1usize..4) {
        let p = [2u32, 3][pi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (zv(&mut rng, n, 20), zv(&mut rng, n, 20));
        let poly = Witt::with_strategy(Integers { p }, Strategy::Polynomial);
        let ghost = Witt::with_strategy(Integers { p }, Strategy::Ghost);
        prop_assert_eq!(poly.add(&a, &b).unwrap(), ghost.add(&a, &b).unwrap());
        prop_assert_eq!(poly.mul(&a, &b).unwrap(), ghost.mul(&a, &b).unwrap());
        prop_assert_eq!(poly.neg(&a).unwrap(), ghost.neg(&a).unwrap());
    }

    #[test]
    fn ring_laws_mod_p_power(seed in any::<u64>(), pi in 0usize..2) {
        let p = [2u32, 3][pi];
        let ring = IntegersModPN::new(p, 4).unwrap();
        let m = ring.modulus();
        let w = Witt::new(ring);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = || WittVec::new((0..3).map(|_| rng.gen_range(0..m)).collect::<Vec<u64>>());
        let (a, b, c) = (g(), g(), g());
        prop_assert_eq!(w.add(&w.add(&a, &b).unwrap(), &c).unwrap(), w.add(&a, &w.add(&b, &c).unwrap()).unwrap());
        prop_assert_eq!(w.mul(&a, &b).unwrap(), w.mul(&b, &a).unwrap());
        let lhs = w.mul(&a, &w.add(&b, &c).unwrap()).unwrap();
        let rhs = w.add(&w.mul(&a, &b).unwrap(), &w.mul(&a, &c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ring_laws_and_frobenius_over_the_tilt(seed in any::<u64>(), pi in 0usize..2) {
        let p = [2u32, 3][pi];
        let prec = Exponent::int(4);
        let w = Witt::new(TiltRing::new(ModelParams::new(p).unwrap(), prec));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (tilt_vec(&mut rng, p, 3, prec), tilt_vec(&mut rng, p, 3, prec), tilt_vec(&mut rng, p, 3, prec));
        prop_assert_eq!(w.mul(&w.mul(&a, &b).unwrap(), &c).unwrap(), w.mul(&a, &w.mul(&b, &c).unwrap()).unwrap());
        let lhs = w.mul(&a, &w.add(&b, &c).unwrap()).unwrap();
        let rhs = w.add(&w.mul(&a, &b).unwrap(), &w.mul(&a, &c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        // W_n(F) with F = Frobenius, which keeps the t-precision of p-th powers
        let frob = |v: &WittVec<TiltElem>| w.map(v, |x| x.frobenius().with_precision(prec));
        let s = w.add(&a, &b).unwrap();
        let m = w.mul(&a, &b).unwrap();
        let wf = Witt::new(TiltRing::new(ModelParams::new(p).unwrap(), prec));
        prop_assert_eq!(frob(&s), wf.add(&frob(&a), &frob(&b)).unwrap());
        prop_assert_eq!(frob(&m), wf.mul(&frob(&a), &frob(&b)).unwrap());
    }

    #[test]
    fn teichmuller_expansion_inverts_assembly(seed in any::<u64>(), pi in 0usize..2) {
        let p = [2u32, 3][pi];
        let prec = Exponent::int(4);
        let w = Witt::new(TiltRing::new(ModelParams::new(p).unwrap(), prec));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = tilt_vec(&mut rng, p, 3, prec);
        let cs = w.teich_expand(&v).unwrap();
        prop_assert_eq!(w.teich_assemble(&cs).unwrap(), v);
    }
}
