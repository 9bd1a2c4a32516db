//! Exact arithmetic in `Z[zeta_{p^m}]` and valuations at the unique prime
//! above `p`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{fmt_rational, pow_u64, v_p_bigint};
use crate::error::{Error, Result};

/// `a_0 + a_1 zeta + .. + a_{phi-1} zeta^{phi-1}`, reduced modulo `Phi_{p^m}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycInt {
    p: u32,
    m: usize,
    coeffs: Vec<BigInt>,
}

/// `(p - 1) p^(m-1)`.
pub fn euler_phi(p: u32, m: usize) -> usize {
    assert!(m >= 1);
    (p as usize - 1) * pow_u64(p as u64, m as u32 - 1) as usize
}

impl CycInt {
    /// From an arbitrary-length coefficient vector in powers of `zeta`
    /// (reduced through `zeta^{p^m} = 1` and `Phi_{p^m}`).
    pub fn from_coeffs(p: u32, m: usize, coeffs: Vec<BigInt>) -> Self {
        let pm = pow_u64(p as u64, m as u32) as usize;
        let mut full = vec![BigInt::zero(); pm];
        for (k, c) in coeffs.into_iter().enumerate() {
            full[k % pm] += c;
        }
        Self::reduce_full(p, m, full)
    }

    fn reduce_full(p: u32, m: usize, mut full: Vec<BigInt>) -> Self {
        let phi = euler_phi(p, m);
        let step = phi / (p as usize - 1);
        // zeta^phi = -sum_{j<p-1} zeta^{j p^(m-1)}
        for k in (phi..full.len()).rev() {
            if full[k].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut full[k]);
            for j in 0..p as usize - 1 {
                full[k - phi + j * step] -= &c;
            }
        }
        full.truncate(phi);
        CycInt { p, m, coeffs: full }
    }

    pub fn zero(p: u32, m: usize) -> Self {
        CycInt {
            p,
            m,
            coeffs: vec![BigInt::zero(); euler_phi(p, m)],
        }
    }

    pub fn from_int(p: u32, m: usize, c: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(p, m);
        z.coeffs[0] = c.into();
        z
    }

    pub fn one(p: u32, m: usize) -> Self {
        Self::from_int(p, m, 1)
    }

    /// `zeta^c`.
    pub fn zeta_pow(p: u32, m: usize, c: u64) -> Self {
        let pm = pow_u64(p as u64, m as u32);
        let mut v = vec![BigInt::zero(); pm as usize];
        v[(c % pm) as usize] = BigInt::one();
        Self::reduce_full(p, m, v)
    }

    /// Sum `sum_c hist[c] zeta^c` over residues `c mod p^m`.
    pub fn from_histogram(p: u32, m: usize, hist: &[i64]) -> Self {
        let pm = pow_u64(p as u64, m as u32) as usize;
        assert_eq!(hist.len(), pm);
        Self::reduce_full(p, m, hist.iter().map(|&h| BigInt::from(h)).collect())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn level(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational integer this element equals, if it lies in `Z`.
    pub fn as_integer(&self) -> Option<&BigInt> {
        self.coeffs[1..].iter().all(Zero::is_zero).then(|| &self.coeffs[0])
    }

    fn check(&self, other: &CycInt) {
        assert!(
            self.p == other.p && self.m == other.m,
            "cyclotomic level mismatch: ({}, {}) vs ({}, {})",
            self.p,
            self.m,
            other.p,
            other.m
        );
    }

    pub fn add(&self, other: &CycInt) -> CycInt {
        self.check(other);
        CycInt {
            p: self.p,
            m: self.m,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CycInt) -> CycInt {
        self.check(other);
        CycInt {
            p: self.p,
            m: self.m,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> CycInt {
        CycInt {
            p: self.p,
            m: self.m,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, other: &CycInt) -> CycInt {
        self.check(other);
        let phi = self.coeffs.len();
        let mut full = vec![BigInt::zero(); 2 * phi - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    full[i + j] += a * b;
                }
            }
        }
        Self::reduce_full(self.p, self.m, full)
    }

    pub fn scale(&self, c: &BigInt) -> CycInt {
        CycInt {
            p: self.p,
            m: self.m,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> CycInt {
        let mut acc = Self::one(self.p, self.m);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Coefficientwise exact division; fails if any coefficient is not a multiple of `n`.
    pub fn exact_div_by_int(&self, n: &BigInt) -> Result<CycInt> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(n);
            if !r.is_zero() {
                return Err(Error::NotDivisible(format!("{self} by {n}")));
            }
            out.push(q);
        }
        Ok(CycInt {
            p: self.p,
            m: self.m,
            coeffs: out,
        })
    }

    /// Coefficients reduced into `[0, modulus)`.
    pub fn reduce_mod(&self, modulus: &BigInt) -> CycInt {
        CycInt {
            p: self.p,
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| c.mod_floor(modulus)).collect(),
        }
    }

    /// Galois action `zeta -> zeta^u`, `gcd(u, p) = 1`.
    pub fn galois(&self, u: u64) -> CycInt {
        assert!(u % self.p as u64 != 0, "zeta -> zeta^u needs p to not divide u");
        let pm = pow_u64(self.p as u64, self.m as u32);
        let mut full = vec![BigInt::zero(); pm as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            full[((j as u64 * u) % pm) as usize] += c;
        }
        Self::reduce_full(self.p, self.m, full)
    }

    /// Image under `Z[zeta_{p^m}] -> Z[zeta_{p^{m'}}]`, `zeta -> zeta'^{p^{m'-m}}` for `m' >= m`.
    pub fn lift_to(&self, m2: usize) -> CycInt {
        assert!(m2 >= self.m);
        let stride = pow_u64(self.p as u64, (m2 - self.m) as u32) as usize;
        let mut v = vec![BigInt::zero(); self.coeffs.len() * stride];
        for (j, c) in self.coeffs.iter().enumerate() {
            v[j * stride] = c.clone();
        }
        CycInt::from_coeffs(self.p, m2, v)
    }

    /// Absolute norm to `Q`: determinant of multiplication by `self`.
    pub fn norm(&self) -> BigInt {
        let phi = self.coeffs.len();
        // column j = self * zeta^j
        let mut cols = Vec::with_capacity(phi);
        let mut cur = self.clone();
        let zeta = Self::zeta_pow(self.p, self.m, 1);
        for _ in 0..phi {
            cols.push(cur.coeffs.clone());
            cur = cur.mul(&zeta);
        }
        let mut mat: Vec<Vec<BigInt>> = (0..phi).map(|i| (0..phi).map(|j| cols[j][i].clone()).collect()).collect();
        bareiss_det(&mut mat)
    }

    /// `ord_pi`, an integer; `None` for zero.
    pub fn pi_valuation(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        // p is totally ramified: ord_pi(x) = v_p(N(x))
        Some(v_p_bigint(&self.norm(), self.p as u64).expect("nonzero norm"))
    }

    /// `ord_q = ord_pi / (a (p-1) p^(m-1))`.
    pub fn ord_q(&self, a: usize) -> Option<BigRational> {
        self.pi_valuation().map(|v| {
            BigRational::new(BigInt::from(v), BigInt::from((a * euler_phi(self.p, self.m)) as u64))
        })
    }

    /// `ord_pi` of an element known only modulo `p^prec`: exact when below
    /// `prec * phi`, otherwise only the lower bound `prec * phi` is certified.
    pub fn pi_valuation_mod(&self, prec: u32) -> CertifiedOrder {
        let cap = prec as u64 * euler_phi(self.p, self.m) as u64;
        match self.pi_valuation() {
            Some(v) if v < cap => CertifiedOrder::Exact(v),
            _ => CertifiedOrder::AtLeast(cap),
        }
    }
}

/// A valuation read off a truncated value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertifiedOrder {
    Exact(u64),
    AtLeast(u64),
}

impl CertifiedOrder {
    pub fn exact(&self) -> Option<u64> {
        match self {
            CertifiedOrder::Exact(v) => Some(*v),
            CertifiedOrder::AtLeast(_) => None,
        }
    }
}

/// Fraction-free Gaussian elimination; consumes the matrix.
pub fn bareiss_det(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Which normalization a reported valuation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Pi,
    P,
    Q,
}

/// Serializable valuation: `value` is `"num/den"` or `"inf"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValuationResult {
    pub value: String,
    pub scale: Scale,
}

impl ValuationResult {
    pub fn of(x: &CycInt, scale: Scale, a: usize) -> Self {
        let phi = euler_phi(x.p, x.m) as u64;
        let value = match x.pi_valuation() {
            None => "inf".to_string(),
            Some(v) => {
                let den = match scale {
                    Scale::Pi => 1,
                    Scale::P => phi,
                    Scale::Q => phi * a as u64,
                };
                fmt_rational(&BigRational::new(BigInt::from(v), BigInt::from(den)))
            }
        };
        ValuationResult { value, scale }
    }
}

/// JSON integers when they fit in 64 bits, decimal strings otherwise.
pub(crate) fn bigint_json(c: &BigInt) -> serde_json::Value {
    match c.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(c.to_string()),
    }
}

impl Serialize for CycInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CycInt", 3)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("m", &self.m)?;
        let coeffs: Vec<serde_json::Value> = self.coeffs.iter().map(bigint_json).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = (c.is_negative(), c.abs());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (j, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{mag}*z")?,
                (_, true) => write!(f, "z^{j}")?,
                (_, false) => write!(f, "{mag}*z^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycInt[p={}, m={}]({self})", self.p, self.m)
    }
}

/// The standard primitive character of conductor `p^m`: `psi(c) = zeta^c`.
pub fn psi_char(p: u32, m: usize, c: u64) -> CycInt {
    CycInt::zeta_pow(p, m, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn ci(p: u32, m: usize, v: &[i64]) -> CycInt {
        CycInt::from_coeffs(p, m, v.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn characters() {
        assert!(psi_char(3, 2, 0).is_one());
        assert_eq!(psi_char(2, 1, 1), CycInt::from_int(2, 1, -1));
        assert_eq!(psi_char(2, 2, 3), ci(2, 2, &[0, -1]));
        // 1 + zeta + zeta^2 = 0 at p = 3
        assert!(ci(3, 1, &[1, 1, 1]).is_zero());
    }

    #[test]
    fn arithmetic_examples() {
        let a = ci(2, 2, &[1, 1]);
        let b = ci(2, 2, &[1, -1]);
        assert_eq!(a.mul(&CycInt::one(2, 2)), a);
        assert_eq!(a.mul(&b), CycInt::from_int(2, 2, 2));
        assert_eq!(ci(2, 2, &[2, 4]).exact_div_by_int(&BigInt::from(2)).unwrap(), ci(2, 2, &[1, 2]));
        assert!(ci(2, 2, &[2, 3]).exact_div_by_int(&BigInt::from(2)).is_err());
    }

    #[test]
    fn valuation_examples() {
        for (p, m) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (5, 1)] {
            let phi = euler_phi(p, m) as u64;
            assert_eq!(CycInt::from_int(p, m, p).pi_valuation(), Some(phi));
            let pi = psi_char(p, m, 1).sub(&CycInt::one(p, m));
            assert_eq!(pi.pi_valuation(), Some(1));
            assert_eq!(CycInt::one(p, m).pi_valuation(), Some(0));
            assert_eq!(CycInt::zero(p, m).pi_valuation(), None);
        }
        assert_eq!(CycInt::from_int(2, 3, 4).ord_q(2), Some(rat(1, 1)));
        assert_eq!(CycInt::from_int(2, 1, 2).ord_q(1), Some(rat(1, 1)));
        assert_eq!(ci(2, 2, &[-1, 1]).ord_q(1), Some(rat(1, 2)));
        assert_eq!(
            ValuationResult::of(&ci(2, 2, &[-1, 1]), Scale::Q, 1).value,
            "1/2"
        );
    }

    #[test]
    fn truncated_orders() {
        let eight = CycInt::from_int(2, 2, 8);
        assert_eq!(eight.pi_valuation_mod(5), CertifiedOrder::Exact(6));
        assert_eq!(eight.pi_valuation_mod(3), CertifiedOrder::AtLeast(6));
    }

    #[test]
    fn lift_and_galois() {
        let z = psi_char(2, 1, 1);
        assert_eq!(z.lift_to(3), psi_char(2, 3, 4));
        let x = ci(3, 2, &[1, 2, 0, -1, 5, 7]);
        assert_eq!(x.galois(2).galois(5), x);
        assert_eq!(x.galois(1), x);
    }

    #[test]
    fn json_shape() {
        let v = serde_json::to_string(&ci(2, 2, &[1, -2])).unwrap();
        assert_eq!(v, r#"{"p":2,"m":2,"coeffs":[1,-2]}"#);
    }
}
