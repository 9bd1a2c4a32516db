use aswt_core::cyclotomic::{euler_phi, CycInt};
use aswt_core::expsums::{histograms, trace_histogram, ExpSumTable, GaloisRoute, Route, WittRoute};
use aswt_core::field::{Embedding, FieldCtx, FqElem};
use aswt_core::galois_ring::GaloisRing;
use aswt_core::lseries::{l_from_lstar, lstar, lstar_from_sums, psi_frob0};
use aswt_core::polygon::{multiset_difference, polygon_in_pi_units, polygon_of};
use aswt_core::TowerSpec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use std::sync::Arc;

/// Towers with `p in {2, 3}`, `a in {1, 2}`, `D <= 4` and at most two rows.
fn tower() -> impl Strategy<Value = TowerSpec> {
    (
        prop_oneof![Just(2u32), Just(3u32)],
        1usize..=2,
        1usize..=4,
        prop::collection::vec(0u64..81, 5),
        prop::option::of((1usize..=4, prop::collection::vec(0u64..81, 5))),
    )
        .prop_map(|(p, a, d0, c0, row1)| {
            let f = FieldCtx::new(p, a);
            let mk = |d: usize, c: &[u64]| -> Vec<FqElem> {
                let mut v: Vec<FqElem> = (0..=d).map(|u| f.element(c[u] % f.size())).collect();
                if f.is_zero(&v[d]) {
                    v[d] = f.one();
                }
                v
            };
            let mut rows = vec![(0, mk(d0, &c0))];
            if let Some((d1, c1)) = row1 {
                rows.push((1, mk(d1, &c1)));
            }
            TowerSpec::new(p, a, rows).unwrap()
        })
}

/// Largest `k <= 3` with `q^k <= 81`.
fn k_cap(t: &TowerSpec) -> usize {
    (1..=3).filter(|&k| t.q().pow(k as u32) <= 81).max().unwrap()
}

fn cyc(p: u32, m: usize, v: &[i64]) -> CycInt {
    let n = euler_phi(p, m);
    CycInt::from_coeffs(p, m, v.iter().take(n).map(|&x| BigInt::from(x)).collect())
}

fn level() -> impl Strategy<Value = (u32, usize)> {
    prop_oneof![Just((2, 1)), Just((2, 2)), Just((2, 3)), Just((3, 1)), Just((3, 2))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuation_is_multiplicative((p, m) in level(), x in prop::collection::vec(-20i64..20, 6), y in prop::collection::vec(-20i64..20, 6)) {
        let (a, b) = (cyc(p, m, &x), cyc(p, m, &y));
        prop_assume!(!a.is_zero() && !b.is_zero());
        let va = a.pi_valuation().unwrap();
        let vb = b.pi_valuation().unwrap();
        prop_assert_eq!(a.mul(&b).pi_valuation(), Some(va + vb));
    }

    #[test]
    fn valuation_is_ultrametric((p, m) in level(), x in prop::collection::vec(-20i64..20, 6), y in prop::collection::vec(-20i64..20, 6)) {
        let (a, b) = (cyc(p, m, &x), cyc(p, m, &y));
        prop_assume!(!a.is_zero() && !b.is_zero());
        let (va, vb) = (a.pi_valuation().unwrap(), b.pi_valuation().unwrap());
        let s = a.add(&b);
        if let Some(vs) = s.pi_valuation() {
            prop_assert!(vs >= va.min(vb));
            if va != vb {
                prop_assert_eq!(vs, va.min(vb));
            }
        } else {
            prop_assert_eq!(va, vb);
        }
    }

    #[test]
    fn valuation_is_galois_invariant((p, m) in level(), x in prop::collection::vec(-20i64..20, 6), u in 1u64..27) {
        prop_assume!(u % p as u64 != 0);
        let a = cyc(p, m, &x);
        prop_assert_eq!(a.galois(u).pi_valuation(), a.pi_valuation());
    }
}

#[test]
fn pi_has_order_one() {
    for (p, m) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2)] {
        let pi = CycInt::zeta_pow(p, m, 1).sub(&CycInt::one(p, m));
        assert_eq!(pi.pi_valuation(), Some(1), "p={p} m={m}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn routes_agree(t in tower(), mk in (1usize..=3, 1usize..=3)) {
        let m = mk.0.min(if t.p() == 2 { 3 } else { 2 });
        let k = mk.1.min(k_cap(&t));
        let w = trace_histogram(&t, m, k, Route::Witt).unwrap();
        let g = trace_histogram(&t, m, k, Route::Galois).unwrap();
        prop_assert_eq!(w, g);
    }

    #[test]
    fn nu_identity_per_element(t in tower(), m in 1usize..=3, k in 1usize..=3) {
        let m = m.min(if t.p() == 2 { 3 } else { 2 });
        let k = k.min(k_cap(&t));
        let wr = WittRoute::new(&t, m, k).unwrap();
        let gr = GaloisRoute::new(&t, m, k).unwrap();
        for x in wr.field.elements().skip(1) {
            prop_assert_eq!(wr.trace_residue(&x).unwrap(), gr.trace_residue(&x));
        }
    }

    #[test]
    fn conductor_collapse(t in tower(), k in 1usize..=3) {
        let k = k.min(k_cap(&t));
        let m = if t.p() == 2 { 3 } else { 2 };
        let h = trace_histogram(&t, m, k, Route::Galois).unwrap();
        for m2 in 1..m {
            let low = trace_histogram(&t, m2, k, Route::Galois).unwrap();
            prop_assert_eq!(&h.fold(m2), &low);
            prop_assert_eq!(h.sum_conductor(m2), low.sum().lift_to(m));
        }
    }

    #[test]
    fn galois_equivariance(t in tower(), m in 1usize..=3, u in 1u64..27) {
        let m = m.min(if t.p() == 2 { 3 } else { 2 });
        prop_assume!(u % t.p() as u64 != 0);
        let h = trace_histogram(&t, m, 1, Route::Galois).unwrap();
        prop_assert_eq!(h.sum_twisted(u), h.sum().galois(u));
    }
}

/// Sum over `F_{q^k}^*` of `zeta^{trace}` for an explicit embedding.
fn sum_with_embedding(t: &TowerSpec, m: usize, k: usize, root: FqElem) -> (CycInt, CycInt) {
    let ring = GaloisRing::new(t.p(), m, t.a() * k);
    let sup = ring.residue_field();
    let emb = Embedding::with_root(t.field(), sup.clone(), root).unwrap();
    let g = GaloisRoute::with_embedding(t, m, ring, &emb);
    let w = WittRoute::with_embedding(t, m, emb).unwrap();
    let size = t.p().pow(m as u32) as usize;
    let (mut hg, mut hw) = (vec![0i64; size], vec![0i64; size]);
    for x in sup.elements().skip(1) {
        hg[g.trace_residue(&x) as usize] += 1;
        hw[w.trace_residue(&x).unwrap() as usize] += 1;
    }
    (CycInt::from_histogram(t.p(), m, &hg), CycInt::from_histogram(t.p(), m, &hw))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn embedding_independence(t in tower().prop_filter("a > 1", |t| t.a() > 1), m in 1usize..=2, k in 1usize..=2) {
        let k = k.min(k_cap(&t));
        let sup: Arc<FieldCtx> = GaloisRing::new(t.p(), m, t.a() * k).residue_field();
        let roots = Embedding::roots(&t.field(), &sup).unwrap();
        prop_assert!(roots.len() >= 2);
        let sums: Vec<_> = roots.into_iter().map(|r| sum_with_embedding(&t, m, k, r)).collect();
        for (g, w) in &sums {
            prop_assert_eq!(g, &sums[0].0);
            prop_assert_eq!(w, &sums[0].0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Degree and endpoint oracles run inside `lstar`; here the consequences.
    #[test]
    fn lseries_structure(t in tower(), m in 1usize..=2) {
        prop_assume!(t.nondegenerate(m));
        prop_assume!(t.q().pow(t.degree(m) as u32 + 2) <= 1 << 16);
        let ls = lstar(&t, m, Route::Galois).unwrap();
        let d = t.degree(m) as usize;
        prop_assert_eq!(ls.degree(), d);
        for n in 0..=d {
            if let Some(o) = ls.ord_q(n) {
                prop_assert!(o >= BigRational::zero());
            }
        }
        let l = l_from_lstar(&ls, &psi_frob0(&t, m)).unwrap();
        let star = polygon_of(&ls).unwrap().slopes;
        let mut plain = polygon_of(&l).unwrap().slopes;
        prop_assert_eq!(plain.len(), d - 1);
        plain.push(BigRational::zero());
        let (missing, extra) = multiset_difference(&star, &plain);
        prop_assert!(missing.is_empty() && extra.is_empty());

        // Rescaling: q-adic slopes times p^{m - m~} are the slopes in units of
        // ord(pi^{a (p-1) p^{m~ - 1}}).
        let c = t.constants().unwrap();
        prop_assume!(m >= c.m_tilde);
        let unit = t.a() as u64 * (t.p() as u64 - 1) * (t.p() as u64).pow(c.m_tilde as u32 - 1);
        let scaled = polygon_in_pi_units(&ls, unit).unwrap().slopes;
        let factor = BigRational::from_integer(BigInt::from((t.p() as u64).pow((m - c.m_tilde) as u32)));
        let want: Vec<_> = star.iter().map(|s| s * &factor).collect();
        prop_assert_eq!(scaled, want);
    }

    #[test]
    fn slopes_symmetric_under_twist(t in tower(), m in 1usize..=2, u in 1u64..9) {
        prop_assume!(u % t.p() as u64 != 0);
        prop_assume!(t.nondegenerate(m));
        prop_assume!(t.q().pow(t.degree(m) as u32 + 2) <= 1 << 16);
        let d = t.degree(m) as usize;
        let hists = histograms(&t, m, d + 2, Route::Galois).unwrap();
        let base = lstar_from_sums(&ExpSumTable::from_histograms(&t, &hists, 1).unwrap(), d, t.a(), true).unwrap();
        let tw = lstar_from_sums(&ExpSumTable::from_histograms(&t, &hists, u).unwrap(), d, t.a(), true).unwrap();
        prop_assert_eq!(polygon_of(&base).unwrap().slopes, polygon_of(&tw).unwrap().slopes);
    }
}

fn witt_case() -> impl Strategy<Value = (u32, usize, usize, Vec<u64>)> {
    (
        prop_oneof![Just((2u32, 3usize)), Just((3, 2)), Just((2, 2))],
        1usize..=3,
        prop::collection::vec(0u64..64, 9),
    )
        .prop_map(|((p, n), m, c)| (p, n, m, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn witt_ring_axioms_over_extensions((p, n, m, c) in witt_case()) {
        use aswt_core::witt::{build_structure_polys, witt_add, witt_mul, WittVec};
        let f = FieldCtx::new(p, n);
        let polys = build_structure_polys(p, m).unwrap();
        let v = |off: usize| WittVec::new((0..m).map(|i| f.element(c[off + i] % f.size())).collect::<Vec<_>>());
        let (x, y, z) = (v(0), v(3), v(6));
        let add = |a: &WittVec<FqElem>, b: &WittVec<FqElem>| witt_add(a, b, &polys, &f).unwrap();
        let mul = |a: &WittVec<FqElem>, b: &WittVec<FqElem>| witt_mul(a, b, &polys, &f).unwrap();
        prop_assert_eq!(add(&x, &y), add(&y, &x));
        prop_assert_eq!(mul(&x, &y), mul(&y, &x));
        prop_assert_eq!(add(&add(&x, &y), &z), add(&x, &add(&y, &z)));
        prop_assert_eq!(mul(&mul(&x, &y), &z), mul(&x, &mul(&y, &z)));
        prop_assert_eq!(mul(&x, &add(&y, &z)), add(&mul(&x, &y), &mul(&x, &z)));
    }
}
