use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use super::Dd;

pub type Q = BigRational;

/// Exact rational `num / den`.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Rounds an exact rational to double-double precision.
pub fn rational_to_dd(r: &Q) -> Dd {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() || hi == 0.0 {
        return Dd { hi, lo: 0.0 };
    }
    let resid = r - Q::from_float(hi).expect("finite");
    let lo = resid.to_f64().unwrap_or(0.0);
    Dd { hi, lo } + Dd::ZERO
}
