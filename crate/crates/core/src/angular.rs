//! Exact Clebsch–Gordan coefficients from the Racah sum in rational arithmetic.
//!
//! All angular momenta are passed doubled (2j, 2m) so half-integers are exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn half(twice: i64) -> Option<i64> {
    (twice % 2 == 0).then_some(twice / 2)
}

/// ⟨j1 m1; j2 m2 | j m⟩ with every argument doubled.
pub fn clebsch_gordan(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tm1 + tm2 != tm || tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if tj > tj1 + tj2 || tj < (tj1 - tj2).abs() {
        return 0.0;
    }
    let args = [
        tj1 + tj2 - tj,
        tj1 - tj2 + tj,
        -tj1 + tj2 + tj,
        tj1 + tj2 + tj + 2,
        tj + tm,
        tj - tm,
        tj1 - tm1,
        tj1 + tm1,
        tj2 - tm2,
        tj2 + tm2,
    ];
    let Some(h): Option<Vec<i64>> = args.iter().map(|&a| half(a)).collect() else {
        return 0.0;
    };
    let (a, b, cc, d) = (h[0], h[1], h[2], h[3]);
    let prefactor = BigRational::new(
        BigInt::from(tj + 1) * factorial(a) * factorial(b) * factorial(cc),
        factorial(d),
    ) * BigRational::from_integer(
        factorial(h[4]) * factorial(h[5]) * factorial(h[6]) * factorial(h[7]) * factorial(h[8]) * factorial(h[9]),
    );

    // j - j2 + m1 and j - j1 - m2, doubled
    let e = (tj - tj2 + tm1) / 2;
    let f = (tj - tj1 - tm2) / 2;
    let kmin = 0.max(-e).max(-f);
    let kmax = a.min(h[6]).min(h[9]);
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let denom = factorial(k) * factorial(a - k) * factorial(h[6] - k) * factorial(h[9] - k) * factorial(e + k) * factorial(f + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let sign = if sum.is_negative() { -1.0 } else { 1.0 };
    let square = prefactor * &sum * &sum;
    sign * square.to_f64().unwrap_or(f64::NAN).sqrt()
}
