//! Dense-grid helpers shared by the mixed and tilt element types.
//!
//! Sparse digit lists are spread on the grid `{ j / D }` where `D` is a power
//! of `p` divisible by every denominator in play, combined as integer
//! vectors, then folded back into canonical digits.

use super::exponent::Exponent;

pub(crate) type Digits = Vec<(Exponent, u8)>;

pub(crate) fn grid_den<'a>(exps: impl IntoIterator<Item = &'a Exponent>) -> u64 {
    exps.into_iter().map(|e| e.den()).max().unwrap_or(1)
}

pub(crate) fn digits_den(digits: &Digits) -> u64 {
    grid_den(digits.iter().map(|(e, _)| e))
}

pub(crate) fn spread(digits: &Digits, den: u64, len: usize) -> Vec<i64> {
    let mut out = vec![0i64; len];
    for (e, d) in digits {
        let j = e.grid_index(den);
        if j < len {
            out[j] += *d as i64;
        }
    }
    out
}

/// Folds integer coefficients into canonical base-`p` digits, carrying an
/// overflow at exponent `e` to `e + 1` and dropping everything at or past
/// the precision (which is `len` grid points).
pub(crate) fn fold_carry(mut coef: Vec<i64>, den: u64, p: u32) -> Digits {
    let p = p as i64;
    let step = den as usize;
    let len = coef.len();
    let mut out = Vec::new();
    for j in 0..len {
        let c = coef[j];
        if c == 0 {
            continue;
        }
        let r = c.rem_euclid(p);
        let q = (c - r) / p;
        if q != 0 && j + step < len {
            coef[j + step] += q;
        }
        if r != 0 {
            out.push((Exponent::from_grid(j, den), r as u8));
        }
    }
    out
}

/// Reduces integer coefficients mod `p` with no carries.
pub(crate) fn fold_mod(coef: &[i64], den: u64, p: u32) -> Digits {
    let p = p as i64;
    coef.iter()
        .enumerate()
        .filter_map(|(j, c)| {
            let r = c.rem_euclid(p);
            (r != 0).then(|| (Exponent::from_grid(j, den), r as u8))
        })
        .collect()
}

/// Truncated convolution of two sparse digit lists on a grid of `len` points.
pub(crate) fn convolve(a: &Digits, b: &Digits, den: u64, len: usize) -> Vec<i64> {
    let mut out = vec![0i64; len];
    let bi: Vec<(usize, i64)> = b
        .iter()
        .map(|(e, d)| (e.grid_index(den), *d as i64))
        .filter(|(j, _)| *j < len)
        .collect();
    for (e, d) in a {
        let i = e.grid_index(den);
        if i >= len {
            continue;
        }
        let d = *d as i64;
        for &(j, c) in &bi {
            if i + j < len {
                out[i + j] += d * c;
            } else {
                break;
            }
        }
    }
    out
}

pub(crate) fn truncate(digits: &Digits, precision: Exponent) -> Digits {
    digits.iter().copied().take_while(|(e, _)| *e < precision).collect()
}

/// Writes a digit list in the element text format, `var` being `p` or `t`.
pub(crate) fn format_terms(digits: &Digits, var: char) -> String {
    if digits.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (e, d)) in digits.iter().enumerate() {
        if i > 0 {
            s.push_str(" + ");
        }
        let mono = if e.is_zero() {
            None
        } else if *e == Exponent::ONE {
            Some(format!("{var}"))
        } else if e.is_integer() {
            Some(format!("{var}^{}", e.num()))
        } else {
            Some(format!("{var}^({}/{})", e.num(), e.den()))
        };
        match (mono, d) {
            (None, d) => s.push_str(&d.to_string()),
            (Some(m), 1) => s.push_str(&m),
            (Some(m), d) => s.push_str(&format!("{d}*{m}")),
        }
    }
    s
}
