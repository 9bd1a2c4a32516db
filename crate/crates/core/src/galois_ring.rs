//! Galois rings `GR(p^m, n) = (Z/p^m)[y] / (g(y))`, `g` the canonical
//! modulus of degree `n` read with integer coefficients.

use std::sync::Arc;

use crate::arith::{add_mod, mul_mod, pow_u64, sub_mod};
use crate::error::{Error, Result};
use crate::field::{Embedding, FieldCtx, FqElem};
use crate::tower::TowerSpec;

/// Coordinates in the power basis `1, y, .., y^{n-1}`, each in `[0, p^m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GrElem(pub Vec<u64>);

#[derive(Clone, Debug)]
pub struct GaloisRing {
    p: u32,
    m: usize,
    n: usize,
    pm: u64,
    /// Monic, `n + 1` integer coefficients.
    modulus: Vec<u64>,
    residue: Arc<FieldCtx>,
    /// `frob[j]` = image of `y^j` under Frobenius.
    frob: Vec<GrElem>,
    frob_inv: Vec<GrElem>,
    /// `Tr(y^j)` as residues mod `p^m`.
    trace_basis: Vec<u64>,
}

impl GaloisRing {
    pub fn new(p: u32, m: usize, n: usize) -> Self {
        assert!(m >= 1 && n >= 1, "GR(p^m, n) needs m, n >= 1");
        let residue = Arc::new(FieldCtx::new(p, n));
        let pm = pow_u64(p as u64, m as u32);
        assert!(pm < 1 << 62, "p^m too large for word arithmetic");
        let modulus = residue.modulus().iter().map(|&c| c as u64).collect();
        let mut ring = GaloisRing {
            p,
            m,
            n,
            pm,
            modulus,
            residue,
            frob: Vec::new(),
            frob_inv: Vec::new(),
            trace_basis: Vec::new(),
        };
        let basis: Vec<GrElem> = (0..n).map(|j| ring.basis(j)).collect();
        ring.frob = basis
            .iter()
            .map(|b| ring.frobenius_digits(b).expect("digit extraction"))
            .collect();
        ring.frob_inv = basis
            .iter()
            .map(|b| {
                let mut x = b.clone();
                for _ in 1..n {
                    x = ring.frobenius(&x);
                }
                x
            })
            .collect();
        ring.trace_basis = basis
            .iter()
            .map(|b| ring.trace(b).expect("trace lands in Z/p^m"))
            .collect();
        ring
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Precision exponent `m`.
    pub fn precision(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `p^m`.
    pub fn modulus_pm(&self) -> u64 {
        self.pm
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn residue_field(&self) -> Arc<FieldCtx> {
        self.residue.clone()
    }

    pub fn zero(&self) -> GrElem {
        GrElem(vec![0; self.n])
    }

    pub fn one(&self) -> GrElem {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> GrElem {
        let mut v = vec![0; self.n];
        v[0] = c.rem_euclid(self.pm as i64) as u64;
        GrElem(v)
    }

    /// The basis element `y^j`, `j < n`.
    pub fn basis(&self, j: usize) -> GrElem {
        assert!(j < self.n);
        let mut v = vec![0; self.n];
        v[j] = 1;
        GrElem(v)
    }

    pub fn is_zero(&self, a: &GrElem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &GrElem, b: &GrElem) -> GrElem {
        GrElem(a.0.iter().zip(&b.0).map(|(&x, &y)| add_mod(x, y, self.pm)).collect())
    }

    pub fn sub(&self, a: &GrElem, b: &GrElem) -> GrElem {
        GrElem(a.0.iter().zip(&b.0).map(|(&x, &y)| sub_mod(x, y, self.pm)).collect())
    }

    pub fn neg(&self, a: &GrElem) -> GrElem {
        self.sub(&self.zero(), a)
    }

    pub fn scale(&self, a: &GrElem, c: u64) -> GrElem {
        GrElem(a.0.iter().map(|&x| mul_mod(x, c % self.pm, self.pm)).collect())
    }

    pub fn mul(&self, a: &GrElem, b: &GrElem) -> GrElem {
        let n = self.n;
        let pm = self.pm as u128;
        let mut prod = vec![0u128; 2 * n - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u128 * y as u128) % pm;
            }
        }
        // reduce by the monic modulus from the top
        for k in (n..2 * n - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for (j, &g) in self.modulus[..n].iter().enumerate() {
                let t = c * g as u128 % pm;
                prod[k - n + j] = (prod[k - n + j] + pm - t) % pm;
            }
            prod[k] = 0;
        }
        GrElem(prod[..n].iter().map(|&c| c as u64).collect())
    }

    pub fn pow(&self, a: &GrElem, mut e: u128) -> GrElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Reduction mod `p` into the residue field.
    pub fn reduce(&self, a: &GrElem) -> FqElem {
        FqElem(a.0.iter().map(|&c| (c % self.p as u64) as u32).collect())
    }

    /// Coordinatewise lift of a residue (not multiplicative).
    pub fn lift(&self, r: &FqElem) -> GrElem {
        GrElem(r.0.iter().map(|&c| c as u64).collect())
    }

    /// The Teichmüller lift: the unique `t` with `t^{p^n} = t` reducing to `r`.
    pub fn teichmuller(&self, r: &FqElem) -> GrElem {
        let q = pow_u64(self.p as u64, self.n as u32) as u128;
        let mut z = self.lift(r);
        for _ in 0..=self.m {
            let next = self.pow(&z, q);
            if next == z {
                return z;
            }
            z = next;
        }
        panic!("Teichmüller iteration did not converge in {} steps", self.m);
    }

    pub fn is_teichmuller(&self, a: &GrElem) -> bool {
        let q = pow_u64(self.p as u64, self.n as u32) as u128;
        self.pow(a, q) == *a
    }

    /// Teichmüller digits `t_0, .., t_{m-1}` with `a = sum_i t_i p^i`.
    pub fn digits(&self, a: &GrElem) -> Result<Vec<GrElem>> {
        let p = self.p as u64;
        let mut rem = a.clone();
        let mut out = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            let t = self.teichmuller(&self.reduce(&rem));
            let diff = self.sub(&rem, &t);
            if diff.0.iter().any(|c| c % p != 0) {
                return Err(Error::Internal("Teichmüller digit does not match residue".into()));
            }
            rem = GrElem(diff.0.iter().map(|c| c / p).collect());
            out.push(t);
        }
        Ok(out)
    }

    /// Frobenius through the digit decomposition: `sum t_i p^i -> sum t_i^p p^i`.
    pub fn frobenius_digits(&self, a: &GrElem) -> Result<GrElem> {
        let mut acc = self.zero();
        let mut pi = 1u64;
        for t in self.digits(a)? {
            let tp = self.pow(&t, self.p as u128);
            acc = self.add(&acc, &self.scale(&tp, pi));
            pi = pi.saturating_mul(self.p as u64) % self.pm.max(1);
        }
        Ok(acc)
    }

    fn apply_linear(&self, images: &[GrElem], a: &GrElem) -> GrElem {
        let mut acc = vec![0u128; self.n];
        let pm = self.pm as u128;
        for (j, &c) in a.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (k, &v) in images[j].0.iter().enumerate() {
                acc[k] = (acc[k] + c as u128 * v as u128) % pm;
            }
        }
        GrElem(acc.into_iter().map(|c| c as u64).collect())
    }

    /// Frobenius via the precomputed matrix (equal to `frobenius_digits`).
    pub fn frobenius(&self, a: &GrElem) -> GrElem {
        if self.frob.is_empty() {
            return self.frobenius_digits(a).expect("digit extraction");
        }
        self.apply_linear(&self.frob, a)
    }

    /// `sigma^{-1} = sigma^{n-1}`.
    pub fn frobenius_inv(&self, a: &GrElem) -> GrElem {
        self.apply_linear(&self.frob_inv, a)
    }

    pub fn prime_part(&self, a: &GrElem) -> Option<u64> {
        if a.0[1..].iter().all(|&c| c == 0) {
            Some(a.0[0])
        } else {
            None
        }
    }

    /// `Tr(a) = sum_{j<n} phi^j(a)`, asserted to lie in `Z/p^m`.
    pub fn trace(&self, a: &GrElem) -> Result<u64> {
        let mut acc = self.zero();
        let mut cur = a.clone();
        for _ in 0..self.n {
            acc = self.add(&acc, &cur);
            cur = self.frobenius(&cur);
        }
        if cur != *a {
            return Err(Error::Internal("Frobenius order differs from the ring degree".into()));
        }
        self.prime_part(&acc)
            .ok_or_else(|| Error::Internal("trace left the prime subring".into()))
    }

    /// Trace as a linear form on coordinates (equal to `trace`).
    pub fn trace_fast(&self, a: &GrElem) -> u64 {
        let mut acc = 0u128;
        for (c, t) in a.0.iter().zip(&self.trace_basis) {
            acc = (acc + *c as u128 * *t as u128) % self.pm as u128;
        }
        acc as u64
    }

    /// Generator of `mu_{p^n - 1}`: the Teichmüller lift of the canonical
    /// primitive element of the residue field.
    pub fn teichmuller_generator(&self) -> GrElem {
        self.teichmuller(&self.residue.primitive_element())
    }
}

/// Lifted coefficients of `f^(m)`: for each exponent `u`, the element
/// `sum_{i<m} p^i teich(emb(a_{iu}))` of `ring`. Zero terms are dropped.
pub fn fhat_coeffs(
    spec: &TowerSpec,
    m: usize,
    ring: &GaloisRing,
    emb: &Embedding,
) -> Vec<(usize, GrElem)> {
    let max_u = spec.rows().filter(|(i, _)| *i < m).map(|(_, r)| r.len()).max().unwrap_or(0);
    let mut out = Vec::new();
    for u in 0..max_u {
        let mut acc = ring.zero();
        for (i, row) in spec.rows() {
            if i >= m || u >= row.len() || spec.field().is_zero(&row[u]) {
                continue;
            }
            let t = ring.teichmuller(&emb.apply(&row[u]));
            let pi = pow_u64(ring.p() as u64, i as u32) % ring.modulus_pm();
            acc = ring.add(&acc, &ring.scale(&t, pi));
        }
        if !ring.is_zero(&acc) {
            out.push((u, acc));
        }
    }
    out
}

/// `f^(m)-hat(x) = sum_{i<m} p^i sum_u teich(a_{iu}) x^u`.
pub fn eval_fhat(spec: &TowerSpec, m: usize, ring: &GaloisRing, emb: &Embedding, x: &GrElem) -> GrElem {
    eval_lifted(ring, &fhat_coeffs(spec, m, ring, emb), x)
}

pub fn eval_lifted(ring: &GaloisRing, coeffs: &[(usize, GrElem)], x: &GrElem) -> GrElem {
    let mut acc = ring.zero();
    let mut xp = ring.one();
    let mut deg = 0;
    for (u, c) in coeffs {
        while deg < *u {
            xp = ring.mul(&xp, x);
            deg += 1;
        }
        acc = ring.add(&acc, &ring.mul(c, &xp));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_elem(r: &GaloisRing, rng: &mut impl Rng) -> GrElem {
        GrElem((0..r.degree()).map(|_| rng.gen_range(0..r.modulus_pm())).collect())
    }

    #[test]
    fn construction_examples() {
        let r = GaloisRing::new(2, 2, 2);
        assert_eq!(r.modulus(), &[1, 1, 1]);
        let r = GaloisRing::new(2, 3, 1);
        assert_eq!(r.modulus_pm(), 8);
        let r = GaloisRing::new(3, 1, 2);
        assert_eq!(r.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn teichmuller_examples() {
        let r = GaloisRing::new(2, 2, 2);
        let f = r.residue_field();
        assert_eq!(r.teichmuller(&f.zero()), r.zero());
        assert_eq!(r.teichmuller(&f.one()), r.one());
        assert_eq!(r.teichmuller(&f.gen()), GrElem(vec![0, 1]));
        // x^2 = 3x + 3
        assert_eq!(r.mul(&r.basis(1), &r.basis(1)), GrElem(vec![3, 3]));
        let r = GaloisRing::new(3, 2, 1);
        assert_eq!(r.teichmuller(&FqElem(vec![2])), GrElem(vec![8]));
    }

    #[test]
    fn frobenius_examples() {
        let r = GaloisRing::new(2, 2, 2);
        assert_eq!(r.frobenius_digits(&r.basis(1)).unwrap(), GrElem(vec![3, 3]));
        assert_eq!(r.trace(&r.basis(1)).unwrap(), 3);
        assert_eq!(r.trace(&r.one()).unwrap(), 2);
        let z = GaloisRing::new(3, 3, 1);
        let a = z.from_int(17);
        assert_eq!(z.frobenius_digits(&a).unwrap(), a);
    }

    #[test]
    fn frobenius_is_an_automorphism_of_order_n() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for (p, m, n) in [(2, 3, 3), (3, 2, 2), (2, 4, 4), (5, 2, 2), (2, 1, 5)] {
            let r = GaloisRing::new(p, m, n);
            for _ in 0..50 {
                let a = random_elem(&r, &mut rng);
                let b = random_elem(&r, &mut rng);
                let fa = r.frobenius(&a);
                assert_eq!(fa, r.frobenius_digits(&a).unwrap());
                assert_eq!(r.frobenius(&r.mul(&a, &b)), r.mul(&fa, &r.frobenius(&b)));
                assert_eq!(r.frobenius(&r.add(&a, &b)), r.add(&fa, &r.frobenius(&b)));
                let mut x = a.clone();
                for _ in 0..n {
                    x = r.frobenius(&x);
                }
                assert_eq!(x, a);
                assert_eq!(r.frobenius_inv(&fa), a);
                assert_eq!(r.trace(&a).unwrap(), r.trace_fast(&a));
                assert_eq!(r.trace_fast(&fa), r.trace_fast(&a));
            }
        }
    }

    #[test]
    fn teichmuller_is_multiplicative() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for (p, m, n) in [(2, 3, 4), (3, 2, 3), (2, 4, 2)] {
            let r = GaloisRing::new(p, m, n);
            let f = r.residue_field();
            for _ in 0..40 {
                let a = f.element(rng.gen_range(0..f.size()));
                let b = f.element(rng.gen_range(0..f.size()));
                let ta = r.teichmuller(&a);
                assert!(r.is_teichmuller(&ta));
                assert_eq!(r.reduce(&ta), a);
                assert_eq!(r.teichmuller(&f.mul(&a, &b)), r.mul(&ta, &r.teichmuller(&b)));
            }
        }
    }

    #[test]
    fn trace_is_linear() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let r = GaloisRing::new(3, 3, 2);
        for _ in 0..50 {
            let a = random_elem(&r, &mut rng);
            let b = random_elem(&r, &mut rng);
            let c = rng.gen_range(0..27u64);
            let lhs = r.trace(&r.add(&r.scale(&a, c), &b)).unwrap();
            let rhs = (c * r.trace(&a).unwrap() + r.trace(&b).unwrap()) % 27;
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn eval_fhat_examples() {
        let cubic = TowerSpec::over_prime(2, &[(0, &[0, 0, 0, 1])]).unwrap();
        for m in [1, 2] {
            let r = GaloisRing::new(2, m, 1);
            let emb = Embedding::canonical(cubic.field(), r.residue_field()).unwrap();
            assert_eq!(eval_fhat(&cubic, m, &r, &emb, &r.one()), r.one());
        }
        let lin = TowerSpec::over_prime(2, &[(0, &[0, 1]), (1, &[0, 1])]).unwrap();
        let r = GaloisRing::new(2, 2, 3);
        let emb = Embedding::canonical(lin.field(), r.residue_field()).unwrap();
        let t = r.teichmuller_generator();
        assert_eq!(eval_fhat(&lin, 2, &r, &emb, &t), r.scale(&t, 3));
    }
}
