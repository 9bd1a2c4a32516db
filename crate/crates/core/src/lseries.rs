//! `L*(psi, s)` from exponential sums, `L(psi, s)` after removing the
//! Frobenius-at-zero factor, and the truncated product `C*(psi, s)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::arith::{fmt_rational, pow_u64};
use crate::cyclotomic::{euler_phi, psi_char, CertifiedOrder, CycInt};
use crate::error::{Error, Result};
use crate::expsums::{exp_sum_table, frob0_residue, ExpSumTable, Route};
use crate::tower::TowerSpec;

/// `1 + c_1 s + .. + c_d s^d` over `Z[zeta_{p^m}]`.
#[derive(Clone, Debug, Serialize)]
pub struct LPolynomial {
    pub p: u32,
    pub a: usize,
    pub m: usize,
    pub coeffs: Vec<CycInt>,
    /// The degree `d(m)` predicted by the tower constants.
    pub expected_degree: usize,
    pub nondegenerate: bool,
    /// `c_{d+1} = c_{d+2} = 0` was computed and observed.
    pub degree_confirmed: bool,
}

impl LPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    /// `ord_q(c_n)`, `None` for a zero coefficient.
    pub fn ord_q(&self, n: usize) -> Option<BigRational> {
        self.coeffs[n].ord_q(self.a)
    }

    /// `L(q^j s)`: coefficient `n` scaled by `q^{jn}`.
    pub fn scale_s(&self, j: u32) -> LPolynomial {
        let q = BigInt::from(pow_u64(self.p as u64, self.a as u32));
        let mut out = self.clone();
        for (n, c) in out.coeffs.iter_mut().enumerate() {
            *c = c.scale(&q.pow(j * n as u32));
        }
        out
    }
}

/// Newton's identities `n c_n = sum_{k<=n} S_k c_{n-k}` with exact division.
///
/// The expansion runs to `min(k_max, d + 2)`. When `nondegenerate`, the
/// coefficients past `d` must vanish and `ord_q(c_d) = (d-1)/2`.
pub fn lstar_from_sums(
    sums: &ExpSumTable,
    d: usize,
    a: usize,
    nondegenerate: bool,
) -> Result<LPolynomial> {
    let first = sums.get(1);
    let (p, m) = (first.p(), first.level());
    let n_max = sums.k_max().min(d + 2);
    let mut c = vec![CycInt::one(p, m)];
    for n in 1..=n_max {
        let mut acc = CycInt::zero(p, m);
        for k in 1..=n {
            acc = acc.add(&sums.get(k).mul(&c[n - k]));
        }
        let cn = acc
            .exact_div_by_int(&BigInt::from(n))
            .map_err(|e| Error::NonIntegralCoefficient {
                n,
                detail: e.to_string(),
            })?;
        c.push(cn);
    }
    let degree_confirmed = n_max == d + 2 && c[d + 1..].iter().all(CycInt::is_zero);
    if nondegenerate {
        if n_max < d + 2 {
            return Err(Error::InvalidArgument(format!(
                "need sums up to k = {} to check the degree, have {}",
                d + 2,
                sums.k_max()
            )));
        }
        if let Some(n) = (d + 1..=d + 2).find(|&n| !c[n].is_zero()) {
            return Err(Error::DegreeOracle { n, degree: d });
        }
        let expected = BigRational::new(BigInt::from(d as i64 - 1), BigInt::from(2));
        let found = c[d].ord_q(a);
        if found.as_ref() != Some(&expected) {
            return Err(Error::EndpointOracle {
                degree: d,
                found: found.map(|v| fmt_rational(&v)).unwrap_or_else(|| "inf".into()),
                expected: fmt_rational(&expected),
            });
        }
    }
    c.truncate(d + 1);
    while c.len() > 1 && c.last().unwrap().is_zero() && !nondegenerate {
        c.pop();
    }
    Ok(LPolynomial {
        p,
        a,
        m,
        coeffs: c,
        expected_degree: d,
        nondegenerate,
        degree_confirmed,
    })
}

/// Sums for `k <= d(m) + 2`, then `L*` with the oracles applied when the
/// tower is non-degenerate at level `m`.
pub fn lstar(spec: &TowerSpec, m: usize, route: Route) -> Result<LPolynomial> {
    let d = spec.degree(m) as usize;
    let sums = exp_sum_table(spec, m, d + 2, route)?;
    lstar_from_sums(&sums, d, spec.a(), spec.nondegenerate(m))
}

/// `psi(Frob_0)` at level `m`.
pub fn psi_frob0(spec: &TowerSpec, m: usize) -> CycInt {
    psi_char(spec.p(), m, frob0_residue(spec, m))
}

/// `L = L* / (1 - psi0 s)`; a nonzero remainder is an error.
pub fn l_from_lstar(lstar: &LPolynomial, psi0: &CycInt) -> Result<LPolynomial> {
    let c = &lstar.coeffs;
    let mut l = vec![c[0].clone()];
    for n in 1..c.len() {
        l.push(c[n].add(&psi0.mul(&l[n - 1])));
    }
    let rem = l.pop().unwrap();
    if !rem.is_zero() {
        return Err(Error::FrobeniusFactor(format!("remainder {rem}")));
    }
    if l.is_empty() {
        l.push(CycInt::one(lstar.p, lstar.m));
    }
    Ok(LPolynomial {
        coeffs: l,
        expected_degree: lstar.expected_degree.saturating_sub(1),
        ..lstar.clone()
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CStarCoeff {
    /// Residue representative, coefficients in `[0, p^{N_p})`.
    pub value: CycInt,
    /// `ord_pi` when certified.
    pub ord_pi: Option<u64>,
    /// Lower bound on `ord_pi` when not certified.
    pub ord_pi_at_least: Option<u64>,
}

impl CStarCoeff {
    pub fn trusted(&self) -> bool {
        self.ord_pi.is_some()
    }
}

/// `C*(psi, s) = prod_j L*(q^j s)` modulo `(s^{N_s + 1}, p^{N_p})`.
#[derive(Clone, Debug, Serialize)]
pub struct CStarTruncation {
    pub p: u32,
    pub a: usize,
    pub m: usize,
    pub n_s: usize,
    pub n_p: u32,
    /// Number of factors `L*(q^j s)`, `j < factors`.
    pub factors: u32,
    /// Valuations at or above this `ord_pi` are not certified.
    pub trust_cap: u64,
    pub coeffs: Vec<CStarCoeff>,
}

impl CStarTruncation {
    /// `ord_q` of coefficient `n`, only when certified.
    pub fn ord_q(&self, n: usize) -> Option<BigRational> {
        let phi = (self.a * euler_phi(self.p, self.m)) as u64;
        self.coeffs[n]
            .ord_pi
            .map(|v| BigRational::new(BigInt::from(v), BigInt::from(phi)))
    }

    pub fn all_trusted(&self) -> bool {
        self.coeffs.iter().all(CStarCoeff::trusted)
    }
}

/// Product over `j < J`, `J` the least integer with `aJ >= N_p`: beyond it
/// `q^j = 0 mod p^{N_p}` and every factor is 1.
///
/// A valuation is trusted when below `(N_p - 1) (p-1) p^{m-1}` in `ord_pi`
/// units, one `p` below what the residue determines.
pub fn cstar_truncated(lstar: &LPolynomial, n_s: usize, n_p: u32) -> CStarTruncation {
    let (p, m, a) = (lstar.p, lstar.m, lstar.a);
    let modulus = BigInt::from(p).pow(n_p);
    let factors = (n_p as usize).div_ceil(a) as u32;
    let mut acc: Vec<CycInt> = vec![CycInt::zero(p, m); n_s + 1];
    acc[0] = CycInt::one(p, m);
    for j in 0..factors {
        let f = lstar.scale_s(j);
        let mut next = vec![CycInt::zero(p, m); n_s + 1];
        for (i, x) in acc.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (k, y) in f.coeffs.iter().enumerate() {
                if i + k > n_s {
                    break;
                }
                if !y.is_zero() {
                    next[i + k] = next[i + k].add(&x.mul(y));
                }
            }
        }
        acc = next.into_iter().map(|c| c.reduce_mod(&modulus)).collect();
    }
    let phi = euler_phi(p, m) as u64;
    let cap = (n_p as u64).saturating_sub(1) * phi;
    let coeffs = acc
        .into_iter()
        .map(|value| {
            let ord = match value.pi_valuation_mod(n_p) {
                CertifiedOrder::Exact(v) if v < cap => Some(v),
                _ => None,
            };
            CStarCoeff {
                ord_pi: ord,
                ord_pi_at_least: if ord.is_none() { Some(cap) } else { None },
                value,
            }
        })
        .collect();
    CStarTruncation {
        p,
        a,
        m,
        n_s,
        n_p,
        factors,
        trust_cap: cap,
        coeffs,
    }
}

/// Start at `N_p = max(d^2, 2)` and double until every coefficient up to
/// `s^{N_s}` is certified, at most `max_doublings` times.
pub fn cstar_certified(lstar: &LPolynomial, n_s: usize, max_doublings: u32) -> CStarTruncation {
    let d = lstar.expected_degree.max(1) as u32;
    let mut n_p = (d * d).max(2);
    let mut out = cstar_truncated(lstar, n_s, n_p);
    for _ in 0..max_doublings {
        if out.all_trusted() {
            break;
        }
        n_p *= 2;
        out = cstar_truncated(lstar, n_s, n_p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn ints(p: u32, m: usize, v: &[i64]) -> Vec<CycInt> {
        v.iter().map(|&x| CycInt::from_int(p, m, x)).collect()
    }

    fn table(v: &[i64]) -> ExpSumTable {
        ExpSumTable {
            m: 1,
            sums: ints(2, 1, v),
        }
    }

    #[test]
    fn cubic_lstar_and_l() {
        let l = lstar_from_sums(&table(&[-1, 3, -1, -9, -1]), 3, 1, true).unwrap();
        assert_eq!(l.coeffs, ints(2, 1, &[1, -1, 2, -2]));
        assert!(l.degree_confirmed);
        let big_l = l_from_lstar(&l, &CycInt::one(2, 1)).unwrap();
        assert_eq!(big_l.coeffs, ints(2, 1, &[1, 0, 2]));
    }

    #[test]
    fn linear_and_trivial_cases() {
        let l = lstar_from_sums(&table(&[-1, -1, -1]), 1, 1, false).unwrap();
        assert_eq!(l.coeffs, ints(2, 1, &[1, -1]));
        let l0 = lstar_from_sums(&table(&[0]), 1, 1, false).unwrap();
        assert!(l0.coeffs.len() == 1 || l0.coeffs[1].is_zero());
        let quotient = l_from_lstar(&l, &CycInt::one(2, 1)).unwrap();
        assert_eq!(quotient.coeffs, ints(2, 1, &[1]));
    }

    #[test]
    fn frobenius_factor_with_zeta() {
        // L* = (1 - zeta s)(1 + 2 s^2) at p = 2, m = 2
        let z = psi_char(2, 2, 1);
        let two = CycInt::from_int(2, 2, 2);
        let lstar = LPolynomial {
            p: 2,
            a: 1,
            m: 2,
            coeffs: vec![CycInt::one(2, 2), z.neg(), two.clone(), two.mul(&z).neg()],
            expected_degree: 3,
            nondegenerate: false,
            degree_confirmed: false,
        };
        let l = l_from_lstar(&lstar, &z).unwrap();
        assert!(l.coeffs[0].is_one());
        assert_eq!(l.coeffs[2], two);
        assert!(l_from_lstar(&lstar, &CycInt::one(2, 2)).is_err());
    }

    #[test]
    fn oracle_failures_are_reported() {
        // sums of a fake degree-2 polynomial claimed to be degree 1
        let err = lstar_from_sums(&table(&[-1, 3, -1]), 1, 1, true).unwrap_err();
        assert!(matches!(err, Error::DegreeOracle { n: 2, degree: 1 }));
        // 2 c_2 = S_1 c_1 + S_2 = 1 is odd
        assert!(matches!(
            lstar_from_sums(&table(&[1, 0, 0]), 1, 1, false),
            Err(Error::NonIntegralCoefficient { n: 2, .. })
        ));
        // exp(-log(1 + s)) = 1 - s + s^2 - s^3 + ..
        let err = lstar_from_sums(&table(&[-1, 1, -1, 1]), 2, 1, true).unwrap_err();
        assert!(matches!(err, Error::DegreeOracle { n: 3, degree: 2 }));
        // (1 - s)(1 - 2s) has degree 2 but ord_q(c_2) = 1, not 1/2
        let err = lstar_from_sums(&table(&[-3, -5, -9, -17]), 2, 1, true).unwrap_err();
        assert!(matches!(err, Error::EndpointOracle { degree: 2, .. }));
    }

    #[test]
    fn cstar_low_coefficients() {
        let l = lstar_from_sums(&table(&[-1, 3, -1, -9, -1]), 3, 1, true).unwrap();
        let c = cstar_truncated(&l, 6, 12);
        assert!(c.coeffs[0].value.is_one());
        // s^1: c_1 * sum_j q^j
        let geo: i64 = (0..c.factors).map(|j| 2i64.pow(j)).sum();
        let want = CycInt::from_int(2, 1, -geo).reduce_mod(&BigInt::from(4096));
        assert_eq!(c.coeffs[1].value, want);
        assert_eq!(c.ord_q(1), Some(rat(0, 1)));
        assert_eq!(c.ord_q(3), Some(rat(1, 1)));
    }
}
