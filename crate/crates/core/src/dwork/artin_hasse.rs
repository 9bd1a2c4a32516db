//! Artin–Hasse exponential `E(X) = exp(sum_{i>=0} X^{p^i} / p^i)` and the
//! parameters `pi_i = R((1+T)^{p^i} - 1)` where `R` inverts `E(X) - 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{pow_u64, rational_to_residue};
use crate::error::{Error, Result};

use super::series::ZpSeries;

/// Exact coefficients `e_0..e_{n-1}` from `n e_n = sum_{p^i <= n} e_{n - p^i}`.
pub fn artin_hasse_rational(p: u32, n: usize) -> Vec<BigRational> {
    let mut e: Vec<BigRational> = Vec::with_capacity(n);
    for k in 0..n {
        if k == 0 {
            e.push(BigRational::one());
            continue;
        }
        let mut acc = BigRational::zero();
        let mut pi = 1usize;
        while pi <= k {
            acc += &e[k - pi];
            pi *= p as usize;
        }
        e.push(acc / BigRational::from_integer(BigInt::from(k)));
    }
    e
}

/// `e_n mod p^prec`; fails if some `e_n` is not `p`-integral.
pub fn artin_hasse(p: u32, n: usize, prec: u32) -> Result<ZpSeries> {
    let pm = pow_u64(p as u64, prec);
    let c = artin_hasse_rational(p, n)
        .iter()
        .enumerate()
        .map(|(k, x)| {
            rational_to_residue(x, pm).ok_or_else(|| Error::NonIntegralCoefficient {
                n: k,
                detail: format!("Artin-Hasse coefficient {x} is not p-integral"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZpSeries { p, prec, c })
}

/// `g(h(T))` for `h` without constant term, by Horner.
pub fn compose(g: &ZpSeries, h: &ZpSeries) -> ZpSeries {
    debug_assert_eq!(h.c.first().copied().unwrap_or(0), 0);
    let nt = h.nt();
    let mut acc = ZpSeries::zero(h.p, h.prec, nt);
    for &c in g.c.iter().take(nt).rev() {
        acc = acc.mul(h);
        acc.c[0] = (acc.c[0] + c) % acc.pm();
    }
    acc
}

/// Compositional inverse `R` of `E(X) - 1` mod `(T^nt, p^prec)`.
pub fn reversion(e: &ZpSeries, nt: usize) -> ZpSeries {
    let (p, prec) = (e.p, e.prec);
    let pm = e.pm();
    // R <- Y - sum_{n>=2} e_n R^n fixes one more coefficient per pass.
    let mut tail = ZpSeries::zero(p, prec, nt);
    for (n, &c) in e.c.iter().enumerate().take(nt).skip(2) {
        tail.c[n] = c;
    }
    let mut y = ZpSeries::zero(p, prec, nt);
    if nt > 1 {
        y.c[1] = 1 % pm;
    }
    let mut r = y.clone();
    for _ in 0..nt {
        r = y.sub(&compose(&tail, &r));
    }
    r
}

/// `pi_i`, truncated at `T^nt`, mod `p^prec`.
pub fn pi_series(p: u32, i: usize, nt: usize, prec: u32) -> Result<ZpSeries> {
    let e = artin_hasse(p, nt.max(2), prec)?;
    let r = reversion(&e, nt);
    Ok(compose(&r, &one_plus_t_pow_minus_one(p, i, nt, prec)))
}

/// `(1+T)^{p^i} - 1` by repeated `p`-th powering.
pub fn one_plus_t_pow_minus_one(p: u32, i: usize, nt: usize, prec: u32) -> ZpSeries {
    let mut s = ZpSeries::one(p, prec, nt);
    if nt > 1 {
        s.c[1] = 1 % s.pm();
    }
    for _ in 0..i {
        let base = s.clone();
        for _ in 1..p {
            s = s.mul(&base);
        }
    }
    s.c[0] = (s.c[0] + s.pm() - 1 % s.pm()) % s.pm();
    s
}

/// The `T^j` coefficient of `pi_i` has `p`-order at least `i - floor(log_p j)`.
pub fn check_pi_decay(pi: &ZpSeries, i: usize) -> Result<()> {
    let p = pi.p as u64;
    for j in 1..pi.nt() {
        let mut lg = 0usize;
        while pow_u64(p, lg as u32 + 1) <= j as u64 {
            lg += 1;
        }
        let need = i.saturating_sub(lg).min(pi.prec as usize) as u32;
        if pi.c[j] % pow_u64(p, need) != 0 {
            return Err(Error::DecayBound(format!(
                "pi_{i}: T^{j} coefficient {} not divisible by p^{need}",
                pi.c[j]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn leading_coefficients() {
        let e2 = artin_hasse_rational(2, 4);
        assert_eq!(e2[0], rat(1, 1));
        assert_eq!(e2[1], rat(1, 1));
        assert_eq!(e2[2], rat(1, 1));
        let e3 = artin_hasse_rational(3, 4);
        assert_eq!(e3[1], rat(1, 1));
        assert_eq!(e3[2], rat(1, 2));
    }

    #[test]
    fn integrality_for_small_primes() {
        for p in [2, 3, 5, 7] {
            artin_hasse(p, 60, 10).unwrap();
        }
    }

    #[test]
    fn reversion_inverts() {
        let e = artin_hasse(3, 12, 8).unwrap();
        let r = reversion(&e, 12);
        let mut em1 = e.clone();
        em1.c[0] = 0;
        let back = compose(&em1, &r);
        let mut want = ZpSeries::zero(3, 8, 12);
        want.c[1] = 1;
        assert_eq!(back, want);
    }

    #[test]
    fn pi_leading_terms() {
        let p0 = pi_series(2, 0, 6, 10).unwrap();
        assert_eq!(p0.c[1], 1);
        assert_eq!(p0.c[2], (1u64 << 10) - 1);
        for p in [2, 3] {
            for i in 0..4 {
                let s = pi_series(p, i, 12, 10).unwrap();
                assert_eq!(s.c[0], 0);
                assert_eq!(s.c[1], pow_u64(p as u64, i as u32));
                check_pi_decay(&s, i).unwrap();
            }
        }
    }
}
