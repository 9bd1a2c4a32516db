//! Exponential sums `S*(psi, k) = sum_{x in F_{q^k}^*} psi(Tr f^(m)(x))`,
//! by Witt-vector arithmetic or through Teichmüller lifts in a Galois ring.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::pow_u64;
use crate::cyclotomic::CycInt;
use crate::error::{Error, Result};
use crate::field::{Embedding, FieldCtx, FqElem, FqPolyRing};
use crate::galois_ring::{eval_lifted, fhat_coeffs, GaloisRing, GrElem};
use crate::tower::TowerSpec;
use crate::witt::{build_fm, build_structure_polys, eval_witt_poly, nu_to_zmod, witt_trace, WittStructurePolys, WittVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Witt,
    Galois,
}

impl std::str::FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "witt" => Ok(Route::Witt),
            "galois" => Ok(Route::Galois),
            _ => Err(Error::InvalidArgument(format!("unknown route {s:?}"))),
        }
    }
}

/// Per-element traces through `W_m(F_{q^k})`.
pub struct WittRoute {
    pub field: Arc<FieldCtx>,
    emb: Embedding,
    fm: WittVec<Vec<FqElem>>,
    ring: FqPolyRing,
    polys: Arc<WittStructurePolys>,
    p: u32,
}

impl WittRoute {
    pub fn new(spec: &TowerSpec, m: usize, k: usize) -> Result<Self> {
        let field = Arc::new(FieldCtx::new(spec.p(), spec.a() * k));
        let emb = Embedding::canonical(spec.field(), field.clone())?;
        Self::with_embedding(spec, m, emb)
    }

    pub fn with_embedding(spec: &TowerSpec, m: usize, emb: Embedding) -> Result<Self> {
        Ok(WittRoute {
            field: emb.sup.clone(),
            fm: build_fm(spec, m)?,
            ring: FqPolyRing::new(spec.field()),
            polys: build_structure_polys(spec.p(), m)?,
            p: spec.p(),
            emb,
        })
    }

    /// `nu(Tr_{W_m(F_{q^k})/W_m(F_p)} f^(m)(x))` in `Z/p^m`.
    pub fn trace_residue(&self, x: &FqElem) -> Result<u64> {
        let w = eval_witt_poly(&self.fm, &self.ring, &self.emb, x);
        let t = witt_trace(&w, &self.field, &self.polys)?;
        Ok(nu_to_zmod(&t, self.p))
    }
}

/// Per-element traces `Tr(f-hat(x-hat))` in `GR(p^m, ak)`.
pub struct GaloisRoute {
    pub ring: GaloisRing,
    coeffs: Vec<(usize, GrElem)>,
}

impl GaloisRoute {
    pub fn new(spec: &TowerSpec, m: usize, k: usize) -> Result<Self> {
        let ring = GaloisRing::new(spec.p(), m, spec.a() * k);
        let emb = Embedding::canonical(spec.field(), ring.residue_field())?;
        Ok(Self::with_embedding(spec, m, ring, &emb))
    }

    pub fn with_embedding(spec: &TowerSpec, m: usize, ring: GaloisRing, emb: &Embedding) -> Self {
        let coeffs = fhat_coeffs(spec, m, &ring, emb);
        GaloisRoute { ring, coeffs }
    }

    pub fn trace_residue_lifted(&self, xhat: &GrElem) -> u64 {
        self.ring.trace_fast(&eval_lifted(&self.ring, &self.coeffs, xhat))
    }

    pub fn trace_residue(&self, x: &FqElem) -> u64 {
        self.trace_residue_lifted(&self.ring.teichmuller(x))
    }

    /// Histogram over `x-hat = g-hat^j`, `0 <= j < q^k - 1`.
    fn histogram(&self) -> Vec<i64> {
        let pm = self.ring.modulus_pm() as usize;
        let r = &self.ring;
        let order = r.residue_field().size() - 1;
        let g = r.teichmuller_generator();
        let chunk = 4096u64;
        let starts: Vec<u64> = (0..order).step_by(chunk as usize).collect();
        let gu: Vec<(GrElem, GrElem)> = self
            .coeffs
            .iter()
            .map(|(u, c)| (c.clone(), r.pow(&g, *u as u128)))
            .collect();
        starts
            .into_par_iter()
            .map(|s| {
                let mut hist = vec![0i64; pm];
                // running c_u * g^{u j} for each monomial
                let mut terms: Vec<GrElem> = gu
                    .iter()
                    .map(|(c, gpow)| r.mul(c, &r.pow(gpow, s as u128)))
                    .collect();
                for _ in s..(s + chunk).min(order) {
                    let mut acc = r.zero();
                    for t in &terms {
                        acc = r.add(&acc, t);
                    }
                    hist[r.trace_fast(&acc) as usize] += 1;
                    for (t, (_, gpow)) in terms.iter_mut().zip(&gu) {
                        *t = r.mul(t, gpow);
                    }
                }
                hist
            })
            .reduce(|| vec![0i64; pm], |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            })
    }
}

/// Counts of trace residues `c in Z/p^m` over `F_{q^k}^*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceHistogram {
    pub p: u32,
    pub m: usize,
    pub counts: Vec<i64>,
}

impl TraceHistogram {
    /// `sum_c counts[c] zeta^c`, the sum for the standard character.
    pub fn sum(&self) -> CycInt {
        CycInt::from_histogram(self.p, self.m, &self.counts)
    }

    /// The sum for `psi^u`.
    pub fn sum_twisted(&self, u: u64) -> CycInt {
        let pm = self.counts.len() as u64;
        let mut h = vec![0i64; self.counts.len()];
        for (c, &n) in self.counts.iter().enumerate() {
            h[((c as u64 * u) % pm) as usize] += n;
        }
        CycInt::from_histogram(self.p, self.m, &h)
    }

    /// Histogram of the residues reduced mod `p^{m'}`.
    pub fn fold(&self, m2: usize) -> TraceHistogram {
        assert!(m2 <= self.m && m2 >= 1);
        let pm2 = pow_u64(self.p as u64, m2 as u32) as usize;
        let mut h = vec![0i64; pm2];
        for (c, &n) in self.counts.iter().enumerate() {
            h[c % pm2] += n;
        }
        TraceHistogram {
            p: self.p,
            m: m2,
            counts: h,
        }
    }

    /// The level-`m` sum for the non-primitive character `c -> zeta_{p^m}^{p^{m-m'} c}`.
    pub fn sum_conductor(&self, m2: usize) -> CycInt {
        let u = pow_u64(self.p as u64, (self.m - m2) as u32);
        let pm = self.counts.len() as u64;
        let mut h = vec![0i64; self.counts.len()];
        for (c, &n) in self.counts.iter().enumerate() {
            h[((c as u64 * u) % pm) as usize] += n;
        }
        CycInt::from_histogram(self.p, self.m, &h)
    }
}

pub fn trace_histogram(spec: &TowerSpec, m: usize, k: usize, route: Route) -> Result<TraceHistogram> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidArgument("k and m must be positive".into()));
    }
    let pm = pow_u64(spec.p() as u64, m as u32) as usize;
    let counts = match route {
        Route::Galois => GaloisRoute::new(spec, m, k)?.histogram(),
        Route::Witt => {
            let ctx = WittRoute::new(spec, m, k)?;
            let size = ctx.field.size();
            let residues: Result<Vec<u64>> = (1..size)
                .into_par_iter()
                .map(|idx| ctx.trace_residue(&ctx.field.element(idx)))
                .collect();
            let mut h = vec![0i64; pm];
            for c in residues? {
                h[c as usize] += 1;
            }
            h
        }
    };
    Ok(TraceHistogram {
        p: spec.p(),
        m,
        counts,
    })
}

/// `S*(psi, k)` for the standard character of conductor `p^m`.
pub fn exp_sum(spec: &TowerSpec, m: usize, k: usize, route: Route) -> Result<CycInt> {
    Ok(trace_histogram(spec, m, k, route)?.sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpSumTable {
    pub m: usize,
    /// `sums[k-1] = S*(psi, k)`.
    pub sums: Vec<CycInt>,
}

impl ExpSumTable {
    pub fn get(&self, k: usize) -> &CycInt {
        &self.sums[k - 1]
    }

    pub fn k_max(&self) -> usize {
        self.sums.len()
    }
}

/// Histograms for `k = 1..=k_max`.
pub fn histograms(spec: &TowerSpec, m: usize, k_max: usize, route: Route) -> Result<Vec<TraceHistogram>> {
    (1..=k_max).map(|k| trace_histogram(spec, m, k, route)).collect()
}

impl ExpSumTable {
    /// Sums for the character `psi^u` (`u = 1` is the standard one), each
    /// checked against `|coeff| <= q^k`.
    pub fn from_histograms(spec: &TowerSpec, hists: &[TraceHistogram], u: u64) -> Result<Self> {
        let m = hists.first().map(|h| h.m).unwrap_or(1);
        let mut sums = Vec::with_capacity(hists.len());
        for (idx, h) in hists.iter().enumerate() {
            let k = idx + 1;
            let s = h.sum_twisted(u);
            let bound = BigInt::from(spec.q()).pow(k as u32);
            if s.coeffs().iter().any(|c| c.abs() > bound) {
                return Err(Error::Internal(format!("S*(psi,{k}) = {s} exceeds q^{k} coefficientwise")));
            }
            sums.push(s);
        }
        Ok(ExpSumTable { m, sums })
    }
}

/// Sums for `k = 1..=k_max` and the standard character.
pub fn exp_sum_table(spec: &TowerSpec, m: usize, k_max: usize, route: Route) -> Result<ExpSumTable> {
    ExpSumTable::from_histograms(spec, &histograms(spec, m, k_max, route)?, 1)
}

/// Residue `Tr_{GR(p^m,a)/(Z/p^m)}(sum_i p^i teich(a_{i0}))`, so that
/// `psi(Frob_0) = zeta^residue`.
pub fn frob0_residue(spec: &TowerSpec, m: usize) -> u64 {
    let ring = GaloisRing::new(spec.p(), m, spec.a());
    let mut acc = ring.zero();
    for (i, row) in spec.rows() {
        if i < m && !spec.field().is_zero(&row[0]) {
            let t = ring.teichmuller(&row[0]);
            acc = ring.add(&acc, &ring.scale(&t, pow_u64(spec.p() as u64, i as u32)));
        }
    }
    ring.trace_fast(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_sums() {
        let t = TowerSpec::over_prime(2, &[(0, &[0, 0, 0, 1])]).unwrap();
        for route in [Route::Witt, Route::Galois] {
            let s: Vec<_> = (1..=3).map(|k| exp_sum(&t, 1, k, route).unwrap()).collect();
            assert_eq!(s[0], CycInt::from_int(2, 1, -1));
            assert_eq!(s[1], CycInt::from_int(2, 1, 3));
            assert_eq!(s[2], CycInt::from_int(2, 1, -1));
        }
        assert_eq!(frob0_residue(&t, 1), 0);
    }

    #[test]
    fn frob0_with_constant_terms() {
        // f_0 = 1 + x over F_2, m = 1: psi(Frob_0) = psi(1) = -1
        let t = TowerSpec::over_prime(2, &[(0, &[1, 1])]).unwrap();
        assert_eq!(frob0_residue(&t, 1), 1);
        // f_0 = 1 + x, f_1 = 1: 1 + 2 = 3 in Z/4
        let t = TowerSpec::over_prime(2, &[(0, &[1, 1]), (1, &[1])]).unwrap();
        assert_eq!(frob0_residue(&t, 2), 3);
    }
}
