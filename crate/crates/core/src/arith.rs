//! Small integer helpers shared by every module: modular arithmetic on
//! machine words, p-adic orders, primality and exact rational formatting.

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

/// Distinct prime factors of `n` by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
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

/// `p^e`, panicking on overflow.
pub fn pow_u64(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("p-power overflows u64")
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut e: u128, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Inverse of a unit modulo `m` (extended Euclid).
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// p-adic order of a nonzero integer.
pub fn v_p_u64(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// p-adic order of a residue modulo `p^prec`; `None` for the zero residue
/// (meaning "at least `prec`").
pub fn v_p_residue(r: u64, p: u64, prec: u32) -> Option<u32> {
    if r == 0 {
        None
    } else {
        Some(v_p_u64(r, p).min(prec))
    }
}

pub fn v_p_bigint(n: &BigInt, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

/// v_p(n!) by Legendre's formula.
pub fn v_p_factorial(n: u64, p: u64) -> u32 {
    let mut v = 0;
    let mut k = n / p;
    while k > 0 {
        v += k as u32;
        k /= p;
    }
    v
}

/// Reduce a p-integral rational into `Z / modulus`.
pub fn rational_to_residue(x: &BigRational, modulus: u64) -> Option<u64> {
    let m = BigInt::from(modulus);
    let num = x.numer().mod_floor(&m).to_u64()?;
    let den = x.denom().mod_floor(&m).to_u64()?;
    let inv = inv_mod(den, modulus)?;
    Some(mul_mod(num, inv, modulus))
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `"num/den"`, always with an explicit denominator.
pub fn fmt_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Smallest integer `e` (possibly negative) with `p^e >= x`, for `x > 0`.
pub fn ceil_log(p: u64, x: &BigRational) -> i64 {
    assert!(x.is_positive(), "ceil_log of a non-positive argument");
    let pr = BigRational::from_integer(BigInt::from(p));
    let one = BigRational::one();
    let mut e = 0i64;
    let mut pe = one.clone();
    if &pe >= x {
        // walk down while p^(e-1) still dominates x
        loop {
            let next = &pe / &pr;
            if &next >= x {
                pe = next;
                e -= 1;
            } else {
                return e;
            }
        }
    }
    while &pe < x {
        pe *= &pr;
        e += 1;
    }
    e
}
