//! Finite fields `F_{p^n}` in a power basis over a canonical modulus.
//!
//! Every degree `n` has exactly one modulus in use: the lexicographically
//! smallest monic irreducible, comparing coefficient tuples from the constant
//! term upward. Galois rings reuse the same polynomial read modulo `p^m`, so
//! residues and lifts always agree.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::prime_factors;
use crate::error::{Error, Result};

/// Element of `F_{p^n}`: `n` coefficients of `1, y, .., y^{n-1}`.
///
/// The derived ordering is the canonical element order (lexicographic on
/// the coefficient tuple, constant term first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem(pub Vec<u32>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldCtx {
    p: u32,
    n: usize,
    /// Monic, `n + 1` coefficients, constant term first.
    modulus: Vec<u32>,
}

fn modulus_cache() -> &'static Mutex<HashMap<(u32, usize), Vec<u32>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Vec<u32>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The canonical modulus of degree `n` over `F_p`.
pub fn canonical_modulus(p: u32, n: usize) -> Vec<u32> {
    assert!(n >= 1);
    if let Some(m) = modulus_cache().lock().unwrap().get(&(p, n)) {
        return m.clone();
    }
    let mut tuple = vec![0u32; n];
    let found = loop {
        let mut cand = tuple.clone();
        cand.push(1);
        if is_irreducible(p, &cand) {
            break cand;
        }
        // increment the tuple, last coordinate fastest
        let mut i = n;
        loop {
            assert!(i > 0, "no irreducible polynomial of degree {n} over F_{p}");
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < p {
                break;
            }
            tuple[i] = 0;
        }
    };
    modulus_cache()
        .lock()
        .unwrap()
        .insert((p, n), found.clone());
    found
}

// ---- dense polynomials over F_p, constant term first ----

fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let len = a.len().max(b.len());
    let mut out = vec![0u32; len];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    trim(&mut out);
    out
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut m = m.to_vec();
    trim(&mut m);
    let dm = m.len() - 1;
    let lead_inv = inv_fp(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = (r[top] as u64 * lead_inv as u64 % p as u64) as u32;
        if c != 0 {
            for j in 0..=dm {
                let idx = top - dm + j;
                r[idx] = ((r[idx] as u64 + (p - c) as u64 * m[j] as u64) % p as u64) as u32;
            }
        }
        trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    poly_rem(&prod, m, p)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn inv_fp(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    let mut acc = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

/// Rabin-style test: `x^{p^n} = x mod f` and `gcd(x^{p^i} - x, f) = 1` for `0 < i < n`.
pub fn is_irreducible(p: u32, f: &[u32]) -> bool {
    let n = f.len() - 1;
    if n == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let x = vec![0, 1];
    let mut xp = x.clone();
    for i in 1..=n {
        // xp <- xp^p
        let mut acc = vec![1u32];
        for _ in 0..p {
            acc = poly_mulmod(&acc, &xp, f, p);
        }
        xp = acc;
        let diff = poly_sub(&xp, &x, p);
        if i < n {
            let g = poly_gcd(f, &diff, p);
            if g.len() != 1 {
                return false;
            }
        } else if !diff.is_empty() {
            return false;
        }
    }
    true
}

impl FieldCtx {
    /// `F_{p^n}` with the canonical modulus.
    pub fn new(p: u32, n: usize) -> Self {
        let modulus = canonical_modulus(p, n);
        FieldCtx { p, n, modulus }
    }

    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self> {
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidArgument("modulus must be monic of degree >= 1".into()));
        }
        if !is_irreducible(p, &modulus) {
            return Err(Error::InvalidArgument(format!("{modulus:?} is reducible over F_{p}")));
        }
        Ok(FieldCtx {
            p,
            n: modulus.len() - 1,
            modulus,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn size(&self) -> u64 {
        (self.p as u64).pow(self.n as u32)
    }

    pub fn zero(&self) -> FqElem {
        FqElem(vec![0; self.n])
    }

    pub fn one(&self) -> FqElem {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> FqElem {
        let mut v = vec![0; self.n];
        v[0] = c.rem_euclid(self.p as i64) as u32;
        FqElem(v)
    }

    /// The class of the generator `y`.
    pub fn gen(&self) -> FqElem {
        if self.n == 1 {
            // y = -modulus[0]
            return self.from_int(-(self.modulus[0] as i64));
        }
        let mut v = vec![0; self.n];
        v[1] = 1;
        FqElem(v)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> FqElem {
        let reduced = poly_rem(
            &coeffs.iter().map(|c| c % self.p).collect::<Vec<_>>(),
            &self.modulus,
            self.p,
        );
        let mut v = vec![0; self.n];
        v[..reduced.len()].copy_from_slice(&reduced);
        FqElem(v)
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % self.p).collect())
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| (x + self.p - y) % self.p)
                .collect(),
        )
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        FqElem(a.0.iter().map(|x| (self.p - x) % self.p).collect())
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let p = self.p as u64;
        let n = self.n;
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] += x as u64 * y as u64;
            }
        }
        for c in prod.iter_mut() {
            *c %= p;
        }
        for top in (n..2 * n - 1).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for j in 0..n {
                let idx = top - n + j;
                prod[idx] = (prod[idx] + (p - c) * self.modulus[j] as u64) % p;
            }
        }
        FqElem(prod[..n].iter().map(|&c| c as u32).collect())
    }

    pub fn scale(&self, a: &FqElem, c: u32) -> FqElem {
        FqElem(
            a.0.iter()
                .map(|&x| (x as u64 * c as u64 % self.p as u64) as u32)
                .collect(),
        )
    }

    pub fn pow(&self, a: &FqElem, mut e: u128) -> FqElem {
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

    pub fn frobenius(&self, a: &FqElem) -> FqElem {
        self.pow(a, self.p as u128)
    }

    pub fn inv(&self, a: &FqElem) -> Option<FqElem> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.size() as u128 - 2))
        }
    }

    /// Returns the `F_p` value if `a` lies in the prime field.
    pub fn as_prime(&self, a: &FqElem) -> Option<u32> {
        if a.0[1..].iter().all(|&c| c == 0) {
            Some(a.0[0])
        } else {
            None
        }
    }

    /// `Tr_{F_{p^n}/F_p}(a)`.
    pub fn trace(&self, a: &FqElem) -> u32 {
        let mut acc = self.zero();
        let mut cur = a.clone();
        for _ in 0..self.n {
            acc = self.add(&acc, &cur);
            cur = self.frobenius(&cur);
        }
        self.as_prime(&acc).expect("field trace left the prime field")
    }

    /// Element with canonical index `idx` (base-p digits, constant term most significant).
    pub fn element(&self, mut idx: u64) -> FqElem {
        let mut v = vec![0; self.n];
        for i in (0..self.n).rev() {
            v[i] = (idx % self.p as u64) as u32;
            idx /= self.p as u64;
        }
        FqElem(v)
    }

    pub fn index_of(&self, a: &FqElem) -> u64 {
        a.0.iter().fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.size()).map(move |i| self.element(i))
    }

    /// The multiplicative order of `a` divides `size - 1`; checks it is maximal.
    pub fn is_primitive(&self, a: &FqElem) -> bool {
        if self.is_zero(a) {
            return false;
        }
        let order = self.size() - 1;
        let one = self.one();
        prime_factors(order)
            .into_iter()
            .all(|r| self.pow(a, (order / r) as u128) != one)
    }

    /// First primitive element in canonical order.
    pub fn primitive_element(&self) -> FqElem {
        (1..self.size())
            .map(|i| self.element(i))
            .find(|g| self.is_primitive(g))
            .expect("finite field without a primitive element")
    }

    /// Evaluate a polynomial with coefficients in this field.
    pub fn eval_poly(&self, coeffs: &[FqElem], x: &FqElem) -> FqElem {
        let mut acc = self.zero();
        for c in coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, x), c);
        }
        acc
    }
}

type EmbeddingKey = (Vec<u32>, Vec<u32>);

fn embedding_cache() -> &'static Mutex<HashMap<EmbeddingKey, FqElem>> {
    static CACHE: OnceLock<Mutex<HashMap<EmbeddingKey, FqElem>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// A field embedding `F_{p^a} -> F_{p^{ak}}` fixed by the image of the generator.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub sub: Arc<FieldCtx>,
    pub sup: Arc<FieldCtx>,
    /// Image of the generator of `sub`: a root of its modulus in `sup`.
    pub root: FqElem,
}

impl Embedding {
    /// Embedding sending the generator to the least root (canonical order)
    /// of the sub-field modulus.
    pub fn canonical(sub: Arc<FieldCtx>, sup: Arc<FieldCtx>) -> Result<Self> {
        let key = (sub.modulus.clone(), sup.modulus.clone());
        let cached = embedding_cache().lock().unwrap().get(&key).cloned();
        let root = match cached {
            Some(r) => r,
            None => {
                let r = Self::roots(&sub, &sup)?.swap_remove(0);
                embedding_cache().lock().unwrap().insert(key, r.clone());
                r
            }
        };
        Ok(Embedding { sub, sup, root })
    }

    /// Embedding through an explicitly chosen root of the sub-field modulus.
    pub fn with_root(sub: Arc<FieldCtx>, sup: Arc<FieldCtx>, root: FqElem) -> Result<Self> {
        let modulus: Vec<FqElem> = sub.modulus.iter().map(|&c| sup.from_int(c as i64)).collect();
        if !sup.is_zero(&sup.eval_poly(&modulus, &root)) {
            return Err(Error::InvalidArgument("embedding root is not a root of the modulus".into()));
        }
        Ok(Embedding { sub, sup, root })
    }

    /// All roots of the sub-field modulus in `sup`, in canonical order.
    pub fn roots(sub: &FieldCtx, sup: &FieldCtx) -> Result<Vec<FqElem>> {
        if sub.p != sup.p || sup.n % sub.n != 0 {
            return Err(Error::InvalidArgument(format!(
                "F_{}^{} does not embed in F_{}^{}",
                sub.p, sub.n, sup.p, sup.n
            )));
        }
        if sub.n == 1 {
            return Ok(vec![sup.gen_prime_image(sub)]);
        }
        let modulus: Vec<FqElem> = sub.modulus.iter().map(|&c| sup.from_int(c as i64)).collect();
        // the roots are a Frobenius orbit of any one root
        let first = sup
            .elements()
            .find(|x| sup.is_zero(&sup.eval_poly(&modulus, x)))
            .ok_or_else(|| Error::Internal("no root of the sub-field modulus".into()))?;
        let mut roots = vec![first.clone()];
        let mut cur = sup.frobenius(&first);
        while cur != first {
            roots.push(cur.clone());
            cur = sup.frobenius(&cur);
        }
        roots.sort();
        Ok(roots)
    }

    pub fn apply(&self, a: &FqElem) -> FqElem {
        let coeffs: Vec<FqElem> = a.0.iter().map(|&c| self.sup.from_int(c as i64)).collect();
        self.sup.eval_poly(&coeffs, &self.root)
    }
}

impl FieldCtx {
    fn gen_prime_image(&self, sub: &FieldCtx) -> FqElem {
        self.from_int(-(sub.modulus[0] as i64))
    }
}

/// Polynomials over a finite field, coefficients constant term first.
#[derive(Clone, Debug)]
pub struct FqPolyRing {
    pub base: Arc<FieldCtx>,
}

impl FqPolyRing {
    pub fn new(base: Arc<FieldCtx>) -> Self {
        FqPolyRing { base }
    }

    pub fn normalize(&self, mut a: Vec<FqElem>) -> Vec<FqElem> {
        while a.last().is_some_and(|c| self.base.is_zero(c)) {
            a.pop();
        }
        a
    }

    pub fn monomial(&self, c: FqElem, deg: usize) -> Vec<FqElem> {
        let mut v = vec![self.base.zero(); deg];
        v.push(c);
        self.normalize(v)
    }

    pub fn add(&self, a: &[FqElem], b: &[FqElem]) -> Vec<FqElem> {
        let len = a.len().max(b.len());
        let z = self.base.zero();
        let out = (0..len)
            .map(|i| self.base.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        self.normalize(out)
    }

    pub fn mul(&self, a: &[FqElem], b: &[FqElem]) -> Vec<FqElem> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.base.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.base.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = self.base.add(&out[i + j], &self.base.mul(x, y));
            }
        }
        self.normalize(out)
    }

    /// Evaluate at a point of an extension field through an embedding.
    pub fn eval_in(&self, a: &[FqElem], emb: &Embedding, x: &FqElem) -> FqElem {
        let coeffs: Vec<FqElem> = a.iter().map(|c| emb.apply(c)).collect();
        emb.sup.eval_poly(&coeffs, x)
    }
}
