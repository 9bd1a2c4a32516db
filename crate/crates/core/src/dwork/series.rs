//! Truncated power series in `T` over `GR(p^N, a)` (flat, `a` coordinates
//! per `T`-coefficient) and over `Z/p^N`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{inv_mod, mul_mod, pow_u64, v_p_u64};
use crate::error::{Error, Result};
use crate::galois_ring::{GaloisRing, GrElem};

/// Series `sum_{j < nt} c_j T^j`, `c_j in GR(p^N, a)`, stored as
/// `c[j * a + r]` = coordinate `r` of `c_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TSeries(pub Vec<u64>);

/// Context for [`TSeries`]: the coefficient ring and the `T`-precision.
#[derive(Clone, Debug)]
pub struct TRing {
    pub gr: GaloisRing,
    pub nt: usize,
    a: usize,
    pm: u64,
    /// Products fit in `u128` without intermediate reduction.
    lazy: bool,
}

impl TRing {
    pub fn new(p: u32, prec: u32, a: usize, nt: usize) -> Self {
        let gr = GaloisRing::new(p, prec as usize, a);
        let pm = gr.modulus_pm();
        TRing {
            gr,
            nt,
            a,
            pm,
            lazy: pm < 1 << 50,
        }
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn p(&self) -> u32 {
        self.gr.p()
    }

    pub fn prec(&self) -> u32 {
        self.gr.precision() as u32
    }

    pub fn pm(&self) -> u64 {
        self.pm
    }

    pub fn zero(&self) -> TSeries {
        TSeries(vec![0; self.nt * self.a])
    }

    pub fn one(&self) -> TSeries {
        let mut z = self.zero();
        if self.nt > 0 {
            z.0[0] = 1 % self.pm;
        }
        z
    }

    /// Series with `Z/p^N` coefficients placed in the prime subring.
    pub fn from_zp(&self, c: &[u64]) -> TSeries {
        let mut z = self.zero();
        for (j, &x) in c.iter().take(self.nt).enumerate() {
            z.0[j * self.a] = x % self.pm;
        }
        z
    }

    pub fn constant(&self, g: &GrElem) -> TSeries {
        let mut z = self.zero();
        if self.nt > 0 {
            z.0[..self.a].copy_from_slice(&g.0);
        }
        z
    }

    pub fn coeff(&self, s: &TSeries, j: usize) -> GrElem {
        GrElem(s.0[j * self.a..(j + 1) * self.a].to_vec())
    }

    pub fn is_zero(&self, s: &TSeries) -> bool {
        s.0.iter().all(|&c| c == 0)
    }

    /// Index of the first nonzero coefficient.
    pub fn ord_t(&self, s: &TSeries) -> Option<usize> {
        (0..self.nt).find(|&j| s.0[j * self.a..(j + 1) * self.a].iter().any(|&c| c != 0))
    }

    pub fn add(&self, x: &TSeries, y: &TSeries) -> TSeries {
        TSeries(x.0.iter().zip(&y.0).map(|(&a, &b)| (a + b) % self.pm).collect())
    }

    pub fn sub(&self, x: &TSeries, y: &TSeries) -> TSeries {
        TSeries(
            x.0.iter()
                .zip(&y.0)
                .map(|(&a, &b)| if a >= b { a - b } else { self.pm - (b - a) })
                .collect(),
        )
    }

    pub fn scale_int(&self, x: &TSeries, c: u64) -> TSeries {
        TSeries(x.0.iter().map(|&a| mul_mod(a, c % self.pm, self.pm)).collect())
    }

    /// Multiply every coefficient by the constant `g`.
    pub fn scale_gr(&self, x: &TSeries, g: &GrElem) -> TSeries {
        let mut out = self.zero();
        for j in 0..self.nt {
            let c = self.gr.mul(&self.coeff(x, j), g);
            out.0[j * self.a..(j + 1) * self.a].copy_from_slice(&c.0);
        }
        out
    }

    /// `sigma^{-1}` applied coefficientwise.
    pub fn frob_inv(&self, x: &TSeries) -> TSeries {
        if self.a == 1 {
            return x.clone();
        }
        let mut out = self.zero();
        for j in 0..self.nt {
            let c = self.gr.frobenius_inv(&self.coeff(x, j));
            out.0[j * self.a..(j + 1) * self.a].copy_from_slice(&c.0);
        }
        out
    }

    /// `sigma` applied coefficientwise.
    pub fn frob(&self, x: &TSeries) -> TSeries {
        let mut out = self.zero();
        for j in 0..self.nt {
            let c = self.gr.frobenius(&self.coeff(x, j));
            out.0[j * self.a..(j + 1) * self.a].copy_from_slice(&c.0);
        }
        out
    }

    /// Length of an unreduced accumulator.
    pub fn acc_len(&self) -> usize {
        self.nt * (2 * self.a - 1)
    }

    /// `acc += x * y` without reducing by the modulus polynomial. Terms
    /// below `T`-orders `ox`, `oy` are skipped.
    pub fn mul_acc(&self, acc: &mut [u128], x: &TSeries, ox: usize, y: &TSeries, oy: usize) {
        let (a, nt) = (self.a, self.nt);
        let w = 2 * a - 1;
        let pm = self.pm as u128;
        for j1 in ox..nt {
            let xs = &x.0[j1 * a..(j1 + 1) * a];
            if xs.iter().all(|&c| c == 0) {
                continue;
            }
            for j2 in oy..nt - j1 {
                let ys = &y.0[j2 * a..(j2 + 1) * a];
                let base = (j1 + j2) * w;
                for (r1, &c1) in xs.iter().enumerate() {
                    if c1 == 0 {
                        continue;
                    }
                    for (r2, &c2) in ys.iter().enumerate() {
                        let slot = &mut acc[base + r1 + r2];
                        *slot += c1 as u128 * c2 as u128;
                        if !self.lazy {
                            *slot %= pm;
                        }
                    }
                }
            }
        }
    }

    /// Reduce an accumulator mod `p^N` and the modulus polynomial.
    pub fn finish(&self, acc: &[u128]) -> TSeries {
        let (a, nt) = (self.a, self.nt);
        let w = 2 * a - 1;
        let pm = self.pm as u128;
        let modulus = self.gr.modulus();
        let mut out = self.zero();
        let mut buf = vec![0u128; w];
        for j in 0..nt {
            for (r, b) in buf.iter_mut().enumerate() {
                *b = acc[j * w + r] % pm;
            }
            for k in (a..w).rev() {
                let c = buf[k];
                if c == 0 {
                    continue;
                }
                for (r, &g) in modulus[..a].iter().enumerate() {
                    let t = c * g as u128 % pm;
                    buf[k - a + r] = (buf[k - a + r] + pm - t) % pm;
                }
                buf[k] = 0;
            }
            for r in 0..a {
                out.0[j * a + r] = buf[r] as u64;
            }
        }
        out
    }

    pub fn mul(&self, x: &TSeries, y: &TSeries) -> TSeries {
        let (Some(ox), Some(oy)) = (self.ord_t(x), self.ord_t(y)) else {
            return self.zero();
        };
        let mut acc = vec![0u128; self.acc_len()];
        self.mul_acc(&mut acc, x, ox, y, oy);
        self.finish(&acc)
    }

    /// The coefficients as `Z/p^N` residues, if every one lies in the prime subring.
    pub fn to_zp(&self, x: &TSeries) -> Option<ZpSeries> {
        let mut c = Vec::with_capacity(self.nt);
        for j in 0..self.nt {
            let g = &x.0[j * self.a..(j + 1) * self.a];
            if g[1..].iter().any(|&v| v != 0) {
                return None;
            }
            c.push(g[0]);
        }
        Some(ZpSeries {
            p: self.p(),
            prec: self.prec(),
            c,
        })
    }
}

/// Series over `Z/p^prec`, truncated at `T^{c.len()}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZpSeries {
    pub p: u32,
    pub prec: u32,
    pub c: Vec<u64>,
}

impl ZpSeries {
    pub fn zero(p: u32, prec: u32, nt: usize) -> Self {
        ZpSeries {
            p,
            prec,
            c: vec![0; nt],
        }
    }

    pub fn one(p: u32, prec: u32, nt: usize) -> Self {
        let mut z = Self::zero(p, prec, nt);
        if nt > 0 {
            z.c[0] = 1 % z.pm();
        }
        z
    }

    pub fn nt(&self) -> usize {
        self.c.len()
    }

    pub fn pm(&self) -> u64 {
        pow_u64(self.p as u64, self.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    /// Residues read at a lower precision and/or shorter truncation.
    pub fn reduce(&self, prec: u32, nt: usize) -> ZpSeries {
        assert!(prec <= self.prec && nt <= self.nt());
        let pm = pow_u64(self.p as u64, prec);
        ZpSeries {
            p: self.p,
            prec,
            c: self.c[..nt].iter().map(|&x| x % pm).collect(),
        }
    }

    pub fn add(&self, o: &ZpSeries) -> ZpSeries {
        let pm = self.pm();
        ZpSeries {
            c: self.c.iter().zip(&o.c).map(|(&a, &b)| (a + b) % pm).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, o: &ZpSeries) -> ZpSeries {
        let pm = self.pm();
        ZpSeries {
            c: self.c.iter().zip(&o.c).map(|(&a, &b)| (a + pm - b) % pm).collect(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> ZpSeries {
        ZpSeries::zero(self.p, self.prec, self.nt()).sub(self)
    }

    pub fn scale(&self, k: u64) -> ZpSeries {
        let pm = self.pm();
        ZpSeries {
            c: self.c.iter().map(|&a| mul_mod(a, k % pm, pm)).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, o: &ZpSeries) -> ZpSeries {
        let nt = self.nt().min(o.nt());
        let pm = self.pm() as u128;
        let mut acc = vec![0u128; nt];
        for (i, &a) in self.c.iter().take(nt).enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().take(nt - i).enumerate() {
                acc[i + j] = (acc[i + j] + a as u128 * b as u128) % pm;
            }
        }
        ZpSeries {
            p: self.p,
            prec: self.prec,
            c: acc.into_iter().map(|x| x as u64).collect(),
        }
    }

    /// Exact division by an integer `n = p^v u`: every coefficient must be
    /// divisible by `p^v`; the quotient keeps `prec - v` digits.
    pub fn div_int(&self, n: u64) -> Result<ZpSeries> {
        let p = self.p as u64;
        let v = v_p_u64(n, p);
        if v > self.prec {
            return Err(Error::Certificate(format!("dividing by {n} exhausts precision {}", self.prec)));
        }
        let pv = pow_u64(p, v);
        let new_prec = self.prec - v;
        let pm = pow_u64(p, new_prec);
        let u_inv = inv_mod((n / pv) % pm.max(1), pm.max(1)).unwrap_or(0);
        let mut c = Vec::with_capacity(self.nt());
        for &x in &self.c {
            if x % pv != 0 {
                return Err(Error::NotDivisible(format!("T-coefficient {x} by {n}")));
            }
            c.push(mul_mod(x / pv, u_inv, pm.max(1)) % pm.max(1));
        }
        Ok(ZpSeries {
            p: self.p,
            prec: new_prec,
            c,
        })
    }

    /// `v_p` of coefficient `j`; `None` for a zero residue.
    pub fn v_p(&self, j: usize) -> Option<u32> {
        let x = self.c[j];
        (x != 0).then(|| v_p_u64(x, self.p as u64))
    }
}

/// `binom(t, j) mod p^prec` for `j < nt`, with `t` given as a nonnegative integer.
pub fn binomial_row(t: &BigInt, nt: usize, p: u32, prec: u32) -> Vec<u64> {
    let m = BigInt::from(pow_u64(p as u64, prec));
    let mut out = Vec::with_capacity(nt);
    let mut cur = BigInt::from(1);
    for j in 0..nt {
        if j > 0 {
            cur = cur * (t - BigInt::from(j - 1)) / BigInt::from(j);
        }
        out.push(cur.mod_floor(&m).to_u64().unwrap());
        if cur.is_zero() {
            out.resize(nt, 0);
            break;
        }
    }
    out
}
