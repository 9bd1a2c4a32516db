//! Truncated Witt vectors `W_m(R)` over rings of characteristic `p`.
//!
//! Addition and multiplication come from the universal structure polynomials
//! `S_n`, `P_n`, generated once per `(p, m)` by the ghost-component recursion
//! over exact integers and cached. Coordinates are indexed from 0.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Debug, Write as _};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{mul_mod, pow_u64};
use crate::error::{Error, Result};
use crate::field::{Embedding, FieldCtx, FqElem, FqPolyRing};
use crate::tower::TowerSpec;

pub const MAX_WITT_LENGTH: usize = 4;

/// A commutative ring of characteristic `p` that Witt vectors can live over.
pub trait CharPRing {
    type Elem: Clone + PartialEq + Debug;

    fn characteristic(&self) -> u32;
    fn zero(&self) -> Self::Elem;
    fn from_u32(&self, c: u32) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn one(&self) -> Self::Elem {
        self.from_u32(1)
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// `F_p` with elements as plain residues.
#[derive(Clone, Copy, Debug)]
pub struct PrimeField(pub u32);

impl CharPRing for PrimeField {
    type Elem = u32;

    fn characteristic(&self) -> u32 {
        self.0
    }
    fn zero(&self) -> u32 {
        0
    }
    fn from_u32(&self, c: u32) -> u32 {
        c % self.0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        (a + b) % self.0
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        mul_mod(*a as u64, *b as u64, self.0 as u64) as u32
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
}

impl CharPRing for FieldCtx {
    type Elem = FqElem;

    fn characteristic(&self) -> u32 {
        self.p()
    }
    fn zero(&self) -> FqElem {
        FieldCtx::zero(self)
    }
    fn from_u32(&self, c: u32) -> FqElem {
        self.from_int(c as i64)
    }
    fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FieldCtx::add(self, a, b)
    }
    fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FieldCtx::mul(self, a, b)
    }
    fn is_zero(&self, a: &FqElem) -> bool {
        FieldCtx::is_zero(self, a)
    }
}

impl CharPRing for FqPolyRing {
    type Elem = Vec<FqElem>;

    fn characteristic(&self) -> u32 {
        self.base.p()
    }
    fn zero(&self) -> Vec<FqElem> {
        Vec::new()
    }
    fn from_u32(&self, c: u32) -> Vec<FqElem> {
        self.normalize(vec![self.base.from_int(c as i64)])
    }
    fn add(&self, a: &Vec<FqElem>, b: &Vec<FqElem>) -> Vec<FqElem> {
        FqPolyRing::add(self, a, b)
    }
    fn mul(&self, a: &Vec<FqElem>, b: &Vec<FqElem>) -> Vec<FqElem> {
        FqPolyRing::mul(self, a, b)
    }
    fn is_zero(&self, a: &Vec<FqElem>) -> bool {
        a.is_empty()
    }
}

/// Sparse integer polynomial in `X_0..X_{m-1}, Y_0..Y_{m-1}`; variable
/// `X_i` has index `i`, `Y_i` has index `m + i`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut out = Self::zero(nvars);
        if !c.is_zero() {
            out.terms.insert(vec![0; nvars], c);
        }
        out
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        let mut out = Self::zero(nvars);
        out.terms.insert(e, BigInt::one());
        out
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> MPoly {
        let mut out = Self::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        for (e, v) in &self.terms {
            out.terms.insert(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut acc: HashMap<Vec<u32>, BigInt> = HashMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *acc.entry(e).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        MPoly {
            nvars: self.nvars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> MPoly {
        let mut acc = Self::constant(self.nvars, BigInt::one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Divide every coefficient by `d`, failing if any division is inexact.
    pub fn exact_div(&self, d: &BigInt) -> Result<MPoly> {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return Err(Error::NotDivisible(format!(
                    "structure polynomial coefficient {c} by {d}"
                )));
            }
            out.terms.insert(e.clone(), q);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let half = self.nvars / 2;
        let mut first = true;
        // highest total degree last reads poorly; print in reverse key order
        for (e, c) in self.terms.iter().rev() {
            let mut mono = String::new();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !mono.is_empty() {
                    mono.push('*');
                }
                let name = if i < half {
                    format!("X{i}")
                } else {
                    format!("Y{}", i - half)
                };
                if k == 1 {
                    mono.push_str(&name);
                } else {
                    let _ = write!(mono, "{name}^{k}");
                }
            }
            let neg = c.is_negative();
            let abs = c.abs();
            let sign = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            write!(f, "{sign}")?;
            if mono.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{abs}*{mono}")?;
            }
            first = false;
        }
        Ok(())
    }
}

impl Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Structure polynomial reduced mod `p`, ready for evaluation.
#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<(u32, Vec<(usize, u64)>)>,
}

impl CompiledPoly {
    fn new(poly: &MPoly, p: u32) -> Self {
        let pb = BigInt::from(p);
        let terms = poly
            .terms
            .iter()
            .filter_map(|(e, c)| {
                let c = c.mod_floor(&pb).to_u32().unwrap();
                if c == 0 {
                    return None;
                }
                let factors = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| (i, k as u64))
                    .collect();
                Some((c, factors))
            })
            .collect();
        CompiledPoly { terms }
    }

    fn eval<R: CharPRing>(&self, ring: &R, vars: &[&R::Elem]) -> R::Elem {
        let mut acc = ring.zero();
        for (c, factors) in &self.terms {
            let mut term = ring.from_u32(*c);
            for &(i, k) in factors {
                if ring.is_zero(vars[i]) {
                    term = ring.zero();
                    break;
                }
                term = ring.mul(&term, &ring.pow(vars[i], k));
            }
            if !ring.is_zero(&term) {
                acc = ring.add(&acc, &term);
            }
        }
        acc
    }
}

/// Universal addition and multiplication polynomials for `W_m`.
#[derive(Clone)]
pub struct WittStructurePolys {
    pub p: u32,
    pub m: usize,
    pub sum_polys: Vec<MPoly>,
    pub prod_polys: Vec<MPoly>,
    compiled_sum: Vec<CompiledPoly>,
    compiled_prod: Vec<CompiledPoly>,
}

impl Debug for WittStructurePolys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WittStructurePolys")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("sum_polys", &self.sum_polys)
            .field("prod_polys", &self.prod_polys)
            .finish()
    }
}

impl WittStructurePolys {
    /// Text dump, one polynomial per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (n, s) in self.sum_polys.iter().enumerate() {
            let _ = writeln!(out, "S_{n} = {s}");
        }
        for (n, s) in self.prod_polys.iter().enumerate() {
            let _ = writeln!(out, "P_{n} = {s}");
        }
        out
    }
}

/// Ghost component `w_n(Z) = sum_{i<=n} p^i Z_i^{p^{n-i}}` over variables at `offset..`.
pub fn ghost_poly(p: u32, n: usize, nvars: usize, offset: usize) -> MPoly {
    let mut out = MPoly::zero(nvars);
    for i in 0..=n {
        let term = MPoly::var(nvars, offset + i)
            .pow(pow_u64(p as u64, (n - i) as u32))
            .scale(&BigInt::from(pow_u64(p as u64, i as u32)));
        out = out.add(&term);
    }
    out
}

/// Ghost component applied to already-built polynomials `Z_0..Z_n`.
pub fn ghost_of(p: u32, polys: &[MPoly], n: usize) -> MPoly {
    let nvars = polys[0].nvars;
    let mut out = MPoly::zero(nvars);
    for (i, z) in polys.iter().enumerate().take(n + 1) {
        let term = z
            .pow(pow_u64(p as u64, (n - i) as u32))
            .scale(&BigInt::from(pow_u64(p as u64, i as u32)));
        out = out.add(&term);
    }
    out
}

fn structure_cache() -> &'static Mutex<HashMap<(u32, usize), Arc<WittStructurePolys>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<WittStructurePolys>>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Structure polynomials for `W_m` over `Z`, cached per `(p, m)`.
pub fn build_structure_polys(p: u32, m: usize) -> Result<Arc<WittStructurePolys>> {
    if m == 0 {
        return Err(Error::InvalidArgument("Witt length must be at least 1".into()));
    }
    if m > MAX_WITT_LENGTH {
        return Err(Error::WittLengthTooLarge(m));
    }
    if !crate::arith::is_prime(p as u64) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if let Some(hit) = structure_cache().lock().unwrap().get(&(p, m)) {
        return Ok(hit.clone());
    }
    let nvars = 2 * m;
    let mut sums: Vec<MPoly> = Vec::with_capacity(m);
    let mut prods: Vec<MPoly> = Vec::with_capacity(m);
    for n in 0..m {
        let wx = ghost_poly(p, n, nvars, 0);
        let wy = ghost_poly(p, n, nvars, m);
        let pn = BigInt::from(pow_u64(p as u64, n as u32));

        let mut s = wx.add(&wy);
        let mut pr = wx.mul(&wy);
        for i in 0..n {
            let e = pow_u64(p as u64, (n - i) as u32);
            let pi = BigInt::from(pow_u64(p as u64, i as u32));
            s = s.sub(&sums[i].pow(e).scale(&pi));
            pr = pr.sub(&prods[i].pow(e).scale(&pi));
        }
        sums.push(
            s.exact_div(&pn)
                .map_err(|e| Error::Internal(format!("ghost recursion S_{n}: {e}")))?,
        );
        prods.push(
            pr.exact_div(&pn)
                .map_err(|e| Error::Internal(format!("ghost recursion P_{n}: {e}")))?,
        );
    }
    let polys = Arc::new(WittStructurePolys {
        p,
        m,
        compiled_sum: sums.iter().map(|s| CompiledPoly::new(s, p)).collect(),
        compiled_prod: prods.iter().map(|s| CompiledPoly::new(s, p)).collect(),
        sum_polys: sums,
        prod_polys: prods,
    });
    structure_cache()
        .lock()
        .unwrap()
        .insert((p, m), polys.clone());
    Ok(polys)
}

/// Truncated Witt vector; `coords[i]` is the i-th (0-based) coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct WittVec<E> {
    pub coords: Vec<E>,
}

impl<E: Clone> WittVec<E> {
    pub fn new(coords: Vec<E>) -> Self {
        WittVec { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

pub fn witt_zero<R: CharPRing>(ring: &R, m: usize) -> WittVec<R::Elem> {
    WittVec::new(vec![ring.zero(); m])
}

pub fn witt_one<R: CharPRing>(ring: &R, m: usize) -> WittVec<R::Elem> {
    let mut v = vec![ring.zero(); m];
    v[0] = ring.one();
    WittVec::new(v)
}

/// The vector with `c` at coordinate `pos` and zeros elsewhere.
pub fn witt_single<R: CharPRing>(ring: &R, m: usize, pos: usize, c: R::Elem) -> WittVec<R::Elem> {
    let mut v = vec![ring.zero(); m];
    v[pos] = c;
    WittVec::new(v)
}

fn check_lengths<E>(u: &WittVec<E>, v: &WittVec<E>, polys: &WittStructurePolys) -> Result<usize> {
    if u.coords.len() != v.coords.len() {
        return Err(Error::LengthMismatch(u.coords.len(), v.coords.len()));
    }
    let m = u.coords.len();
    if m > polys.m {
        return Err(Error::LengthMismatch(m, polys.m));
    }
    Ok(m)
}

fn apply<R: CharPRing>(
    u: &WittVec<R::Elem>,
    v: &WittVec<R::Elem>,
    compiled: &[CompiledPoly],
    ring: &R,
    m: usize,
) -> WittVec<R::Elem> {
    // polynomials are laid out over 2 * polys.m variables; missing slots are zero
    let width = compiled.len();
    let zero = ring.zero();
    let mut vars: Vec<&R::Elem> = vec![&zero; 2 * width];
    for i in 0..m {
        vars[i] = &u.coords[i];
        vars[width + i] = &v.coords[i];
    }
    WittVec::new(compiled[..m].iter().map(|c| c.eval(ring, &vars)).collect())
}

pub fn witt_add<R: CharPRing>(
    u: &WittVec<R::Elem>,
    v: &WittVec<R::Elem>,
    polys: &WittStructurePolys,
    ring: &R,
) -> Result<WittVec<R::Elem>> {
    debug_assert_eq!(ring.characteristic(), polys.p);
    let m = check_lengths(u, v, polys)?;
    Ok(apply(u, v, &polys.compiled_sum, ring, m))
}

pub fn witt_mul<R: CharPRing>(
    u: &WittVec<R::Elem>,
    v: &WittVec<R::Elem>,
    polys: &WittStructurePolys,
    ring: &R,
) -> Result<WittVec<R::Elem>> {
    debug_assert_eq!(ring.characteristic(), polys.p);
    let m = check_lengths(u, v, polys)?;
    Ok(apply(u, v, &polys.compiled_prod, ring, m))
}

/// Coordinatewise p-th power.
pub fn witt_frobenius<R: CharPRing>(u: &WittVec<R::Elem>, ring: &R) -> WittVec<R::Elem> {
    let p = ring.characteristic() as u64;
    WittVec::new(u.coords.iter().map(|c| ring.pow(c, p)).collect())
}

/// `f^{(m)} = tau_m(sum_i iota_i(f_i))` in `W_m(F_q[x])`, each monomial
/// `a x^u` of row `i` placed alone at coordinate `i` and Witt-summed.
pub fn build_fm(spec: &TowerSpec, m: usize) -> Result<WittVec<Vec<FqElem>>> {
    let ring = FqPolyRing::new(spec.field());
    let polys = build_structure_polys(spec.p(), m)?;
    let mut acc = witt_zero(&ring, m);
    for (i, coeffs) in spec.rows() {
        if i >= m {
            continue;
        }
        for (u, c) in coeffs.iter().enumerate() {
            if spec.field().is_zero(c) {
                continue;
            }
            let mono = ring.monomial(c.clone(), u);
            let term = witt_single(&ring, m, i, mono);
            acc = witt_add(&acc, &term, &polys, &ring)?;
        }
    }
    Ok(acc)
}

/// Evaluate a Witt vector of polynomials over `F_q` at `x` in an extension field.
pub fn eval_witt_poly(
    w: &WittVec<Vec<FqElem>>,
    ring: &FqPolyRing,
    emb: &Embedding,
    x: &FqElem,
) -> WittVec<FqElem> {
    WittVec::new(w.coords.iter().map(|c| ring.eval_in(c, emb, x)).collect())
}

/// `Tr_{W_m(F_{p^n}) / W_m(F_p)}`: the Witt sum of all Frobenius iterates.
/// Coordinates of the result are asserted to lie in `F_p`.
pub fn witt_trace(
    w: &WittVec<FqElem>,
    field: &FieldCtx,
    polys: &WittStructurePolys,
) -> Result<Vec<u32>> {
    let mut acc = witt_zero(field, w.len());
    let mut cur = w.clone();
    for _ in 0..field.degree() {
        acc = witt_add(&acc, &cur, polys, field)?;
        cur = witt_frobenius(&cur, field);
    }
    if cur != *w {
        return Err(Error::Internal("Frobenius does not have the field degree as order".into()));
    }
    acc.coords
        .iter()
        .map(|c| {
            field
                .as_prime(c)
                .ok_or_else(|| Error::Internal("Witt trace left W_m(F_p)".into()))
        })
        .collect()
}

/// Teichmuller representative of `a in F_p` inside `Z / p^m`.
pub fn teichmuller_zmod(a: u32, p: u32, m: usize) -> u64 {
    let pm = pow_u64(p as u64, m as u32);
    let mut z = a as u64 % pm;
    loop {
        let next = crate::arith::pow_mod(z, p as u128, pm);
        if next == z {
            return z;
        }
        z = next;
    }
}

/// The canonical isomorphism `W_m(F_p) -> Z / p^m`: `sum_i omega(a_i) p^i`.
pub fn nu_to_zmod(coords: &[u32], p: u32) -> u64 {
    let m = coords.len();
    let pm = pow_u64(p as u64, m as u32);
    let mut acc = 0u64;
    let mut pi = 1u64;
    for &a in coords {
        let t = teichmuller_zmod(a, p, m);
        acc = (acc + mul_mod(t, pi, pm)) % pm;
        pi = pi.saturating_mul(p as u64);
    }
    acc
}
