use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tiltlab::perfring::{d_from_valuations, norm_of, ExtVal, Exponent, MixedElem, ModelParams, Norm, NormBounds, TiltElem};

const ORACLE_PAIRS: usize = 1000;

fn par(p: u32) -> ModelParams {
    ModelParams::new(p).unwrap()
}

/// Dense coefficient vector indexed by `j` for `X^j`, `X = p^{1/q}`.
fn dense(ds: &[(Exponent, u8)], q: u64, len: usize) -> Vec<i64> {
    let mut v = vec![0i64; len];
    for (e, d) in ds {
        let j = (e.num() * (q / e.den())) as usize;
        v[j] += *d as i64;
    }
    v
}

/// Reduces mod `X^q - p` and `p^N`: coefficient `c` at `X^j` becomes the
/// digit `c mod p` and a carry of `c div p` to `X^{j+q}`.
fn carry(mut v: Vec<i64>, p: i64, q: usize) -> Vec<i64> {
    for j in 0..v.len() {
        let d = v[j].rem_euclid(p);
        let c = (v[j] - d) / p;
        v[j] = d;
        if j + q < v.len() {
            v[j + q] += c;
        }
    }
    v
}

fn conv(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len()];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
        for (j, y) in b[..a.len() - i].iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn digits_of(v: &[i64], p: u32, q: u64) -> Vec<(Exponent, u8)> {
    v.iter()
        .enumerate()
        .filter(|(_, d)| **d != 0)
        .map(|(j, d)| (Exponent::from_fraction(p, j as u64, q).unwrap(), *d as u8))
        .collect()
}

#[test]
fn mixed_arithmetic_matches_integer_polynomial_quotient() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in [2u32, 3, 5] {
        for k in 0..=3u32 {
            for n in 1..=6u64 {
                let q = (p as u64).pow(k);
                let len = (n * q) as usize;
                let prec = Exponent::int(n);
                for _ in 0..ORACLE_PAIRS {
                    let a = MixedElem::random(&mut rng, par(p), prec, k, 0.3);
                    let b = MixedElem::random(&mut rng, par(p), prec, k, 0.3);
                    let (da, db) = (dense(a.digits(), q, len), dense(b.digits(), q, len));
                    let sum: Vec<i64> = da.iter().zip(&db).map(|(x, y)| x + y).collect();
                    let diff: Vec<i64> = da.iter().zip(&db).map(|(x, y)| x - y).collect();
                    let prod = conv(&da, &db);
                    let mk = |v: Vec<i64>| MixedElem::from_digits(par(p), prec, &digits_of(&carry(v, p as i64, q as usize), p, q));
                    assert_eq!(&a + &b, mk(sum), "sum p={p} k={k} N={n}");
                    assert_eq!(&a - &b, mk(diff), "difference p={p} k={k} N={n}");
                    assert_eq!(&a * &b, mk(prod), "product p={p} k={k} N={n}");
                }
            }
        }
    }
}

#[test]
fn tilt_arithmetic_matches_truncated_polynomials_mod_p() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in [2u32, 3, 5] {
        for k in 0..=2u32 {
            for m in 1..=4u64 {
                let q = (p as u64).pow(k);
                let len = (m * q) as usize;
                let prec = Exponent::int(m);
                for _ in 0..200 {
                    let a = TiltElem::random(&mut rng, par(p), prec, k, 0.3);
                    let b = TiltElem::random(&mut rng, par(p), prec, k, 0.3);
                    let (da, db) = (dense(a.digits(), q, len), dense(b.digits(), q, len));
                    let red = |v: Vec<i64>| -> Vec<i64> { v.into_iter().map(|c| c.rem_euclid(p as i64)).collect() };
                    let mk = |v: Vec<i64>| TiltElem::from_digits(par(p), prec, &digits_of(&red(v), p, q));
                    let sum: Vec<i64> = da.iter().zip(&db).map(|(x, y)| x + y).collect();
                    assert_eq!(&a + &b, mk(sum));
                    assert_eq!(&a * &b, mk(conv(&da, &db)));
                }
            }
        }
    }
}

fn triple(seed: u64, p: u32, prec: Exponent) -> (MixedElem, MixedElem, MixedElem) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = || MixedElem::random(&mut rng, par(p), prec, 2, 0.3);
    (g(), g(), g())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_laws(seed in any::<u64>(), pi in 0usize..3, num in 1u64..20) {
        let p = [2u32, 3, 5][pi];
        let prec = Exponent::from_fraction(p, num, p as u64).unwrap();
        let (a, b, c) = triple(seed, p, prec);
        let one = MixedElem::one(par(p), prec);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &one, a.clone());
        prop_assert!((&a + &a.neg()).is_zero());
    }

    #[test]
    fn valuation_laws(seed in any::<u64>(), pi in 0usize..3) {
        let p = [2u32, 3, 5][pi];
        let (a, b, _) = triple(seed, p, Exponent::int(4));
        if let (ExtVal::Finite(va), ExtVal::Finite(vb)) = (a.valuation(), b.valuation()) {
            if let ExtVal::Finite(vab) = (&a * &b).valuation() {
                prop_assert_eq!(vab, va + vb);
            } else {
                prop_assert!(va + vb >= Exponent::int(4));
            }
            if let Some(vs) = (&a + &b).valuation().lower_bound() {
                prop_assert!(vs >= va.min(vb));
            }
        }
    }

    #[test]
    fn json_and_text_encodings_are_canonical(seed in any::<u64>(), pi in 0usize..3) {
        let p = [2u32, 3, 5][pi];
        let prec = Exponent::int(3);
        let (a, _, _) = triple(seed, p, prec);
        let j = a.to_json();
        let back = MixedElem::from_json(&j).unwrap();
        prop_assert_eq!(back.to_json(), j);
        prop_assert_eq!(MixedElem::parse(par(p), prec, &a.to_string()).unwrap(), a);
    }
}

/// Every element with digits on the grid `p^{-k} Z` below precision 2.
fn full_grid(p: u32, k: u32) -> Vec<MixedElem> {
    let prec = Exponent::int(2);
    let den = (p as u64).pow(k);
    let len = prec.grid_len(den);
    let mut out = Vec::new();
    let mut ds = vec![0u8; len];
    loop {
        let digits: Vec<(Exponent, u8)> = ds
            .iter()
            .enumerate()
            .filter(|(_, d)| **d > 0)
            .map(|(j, d)| (Exponent::from_grid(j, den), *d))
            .collect();
        out.push(MixedElem::from_digits(par(p), prec, &digits));
        let mut i = 0;
        while i < len && ds[i] as u32 == p - 1 {
            ds[i] = 0;
            i += 1;
        }
        if i == len {
            return out;
        }
        ds[i] += 1;
    }
}

#[test]
fn d_case_split_on_a_grid() {
    for (p, k) in [(2u32, 2u32), (3, 1)] {
        let grid = full_grid(p, k);
        assert!(grid.len() <= 10_000);
        for x in &grid {
            for y in &grid {
                let d = d_from_valuations(x.valuation(), y.valuation());
                match (x.valuation(), y.valuation()) {
                    (ExtVal::Finite(vx), ExtVal::Finite(vy)) if vx <= vy => {
                        assert_eq!(d, NormBounds::exact(Norm::Zero), "x = {x}, y = {y}")
                    }
                    (ExtVal::Finite(_), ExtVal::Finite(_)) => assert_eq!(d, norm_of(y.valuation()), "x = {x}, y = {y}"),
                    (_, ExtVal::AtLeast(_)) => assert_eq!(d.lo, Norm::Zero),
                    _ => {}
                }
            }
        }
    }
}
