//! Small integer and rational helpers: primality, factorisation, formatting.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct primes dividing `n`, ascending.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `p`-adic valuation of a nonzero rational.
pub fn valuation_rat(x: &BigRational, p: u64) -> i64 {
    valuation(x.numer(), p) - valuation(x.denom(), p)
}

/// Factorisation of a nonzero rational as prime → exponent (sign dropped).
///
/// Trial division; the values met in this crate have small prime factors.
pub fn factor_rat(x: &BigRational) -> BTreeMap<u64, i64> {
    let mut out = BTreeMap::new();
    for (part, sign) in [(x.numer(), 1i64), (x.denom(), -1i64)] {
        let mut n = part.abs();
        let mut d = 2u64;
        while !n.is_one() {
            let bd = BigInt::from(d);
            if &bd * &bd > n {
                let p = n.to_u64().expect("prime factor above 2^64");
                *out.entry(p).or_insert(0) += sign;
                break;
            }
            while (&n % &bd).is_zero() {
                n /= &bd;
                *out.entry(d).or_insert(0) += sign;
            }
            d += 1;
        }
    }
    out.retain(|_, e| *e != 0);
    out
}

/// `p^k` as an exact rational (`k` may be negative).
pub fn pow_rat(p: u64, k: i64) -> BigRational {
    let base = BigInt::from(p).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// `Some(k)` when `x = p^k`.
pub fn log_exact(x: &BigRational, p: u64) -> Option<i64> {
    if !x.is_positive() {
        return None;
    }
    let f = factor_rat(x);
    match f.len() {
        0 => Some(0),
        1 => f.get(&p).copied(),
        _ => None,
    }
}

/// `a/b`, or `a` when the denominator is 1.
pub fn format_rat(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Power-product form such as `3^-1` or `2^2*5`; `1` for the empty product.
pub fn format_factored(f: &BTreeMap<u64, i64>) -> String {
    if f.is_empty() {
        return "1".into();
    }
    f.iter().map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") }).collect::<Vec<_>>().join("*")
}

/// Parses `a/b` or `a`.
pub fn parse_rat(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                return None;
            }
            Some(BigRational::new(a.trim().parse().ok()?, b))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_round_trip() {
        let x = BigRational::new(BigInt::from(-40), BigInt::from(27));
        let f = factor_rat(&x);
        assert_eq!(f, BTreeMap::from([(2, 3), (3, -3), (5, 1)]));
        assert_eq!(format_factored(&f), "2^3*3^-3*5");
        assert_eq!(log_exact(&pow_rat(5, -2), 5), Some(-2));
        assert_eq!(log_exact(&pow_rat(5, -2), 3), None);
    }
}
