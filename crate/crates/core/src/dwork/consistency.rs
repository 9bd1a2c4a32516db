//! Cross-checks of the `T`-adic objects against the finite-field side:
//! specialising `T = zeta_{p^m} - 1` must reproduce `S*(psi, k)` and `C*(psi, s)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{pow_u64, v_p_factorial};
use crate::cyclotomic::{euler_phi, CertifiedOrder, CycInt};
use crate::error::Result;
use crate::expsums::{exp_sum, Route};
use crate::field::Embedding;
use crate::galois_ring::{eval_lifted, fhat_coeffs, GaloisRing};
use crate::lseries::{cstar_truncated, lstar};
use crate::tower::TowerSpec;

use super::orders::{ord_r_from_valuations, visibility_cap};
use super::series::{binomial_row, ZpSeries};
use super::{theta, DworkRun};

/// `sum_j c_j (zeta - 1)^j` in `Z[zeta_{p^m}]`, reduced mod `p^prec`.
pub fn specialize(s: &ZpSeries, m: usize) -> CycInt {
    let p = s.p;
    let modulus = BigInt::from(s.pm());
    let t = CycInt::zeta_pow(p, m, 1).sub(&CycInt::one(p, m));
    let mut acc = CycInt::zero(p, m);
    for &c in s.c.iter().rev() {
        acc = acc.mul(&t).add(&CycInt::from_int(p, m, c)).reduce_mod(&modulus);
    }
    acc
}

/// `ord_pi` below which a specialised truncation is exact: the dropped
/// `T^{>= N_T}` terms have `ord_pi >= N_T`, the `p`-adic error `>= phi N_p`.
pub fn specialization_cap(p: u32, m: usize, nt: usize, prec: u32) -> u64 {
    (nt as u64).min(euler_phi(p, m) as u64 * prec as u64)
}

/// One comparison of two elements of `Z[zeta]` that must agree to `cap`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub what: String,
    pub m: usize,
    pub index: usize,
    pub cap: u64,
    /// `ord_pi` of the difference (exact, or the bound it is known to exceed).
    pub diff_ord_pi: u64,
    pub diff_exact: bool,
    pub ok: bool,
}

fn compare(what: &str, m: usize, index: usize, x: &CycInt, y: &CycInt, prec: u32, cap: u64) -> CheckLine {
    let diff = x.sub(y).reduce_mod(&BigInt::from(pow_u64(x.p() as u64, prec)));
    let (v, exact) = match diff.pi_valuation_mod(prec) {
        CertifiedOrder::Exact(v) => (v, true),
        CertifiedOrder::AtLeast(v) => (v, false),
    };
    CheckLine {
        what: what.into(),
        m,
        index,
        cap,
        diff_ord_pi: v,
        diff_exact: exact,
        ok: v >= cap,
    }
}

/// `(q^k - 1) Tr(A^k)` at `T = zeta - 1` against `S*(psi, k)` at level `m`.
pub fn trace_formula_check(spec: &TowerSpec, run: &DworkRun, m: usize, k: usize) -> Result<CheckLine> {
    let np = run.params.n_p;
    let t = run.traces[k - 1].reduce(np, run.params.n_t);
    let qk1 = pow_u64(spec.q(), k as u32).wrapping_sub(1) % t.pm();
    let lhs = specialize(&t.scale(qk1), m);
    let rhs = exp_sum(spec, m, k, Route::Galois)?;
    let cap = specialization_cap(spec.p(), m, run.params.n_t, np);
    Ok(compare("trace_formula", m, k, &lhs, &rhs, np, cap))
}

/// `b_n(zeta - 1)` against the coefficient of `s^n` in `C*(psi, s)`.
pub fn cstar_check(spec: &TowerSpec, run: &DworkRun, m: usize, n_max: usize) -> Result<Vec<CheckLine>> {
    let np = run.params.n_p;
    let n_max = n_max.min(run.params.n_s);
    let l = lstar(spec, m, Route::Galois)?;
    let cs = cstar_truncated(&l, n_max, np);
    let cap = specialization_cap(spec.p(), m, run.params.n_t, np);
    Ok((0..=n_max)
        .map(|n| compare("cstar", m, n, &specialize(&run.b[n], m), &cs.coeffs[n].value, np, cap))
        .collect())
}

/// `S_f(T, k) = sum_{x in mu_{q^k - 1}} (1+T)^{Tr(f-hat(x))}` mod `(T^nt, p^prec)`.
pub fn direct_sf(spec: &TowerSpec, k: usize, nt: usize, prec: u32) -> Result<ZpSeries> {
    let p = spec.p();
    let wp = prec + v_p_factorial(nt.saturating_sub(1) as u64, p as u64);
    let ring = GaloisRing::new(p, wp as usize, spec.a() * k);
    let emb = Embedding::canonical(spec.field(), ring.residue_field())?;
    let coeffs = fhat_coeffs(spec, wp as usize, &ring, &emb);
    let g = ring.teichmuller_generator();
    let order = ring.residue_field().size() - 1;
    let mut xs = Vec::with_capacity(order as usize);
    let mut x = ring.one();
    for _ in 0..order {
        xs.push(x.clone());
        x = ring.mul(&x, &g);
    }
    let counts: BTreeMap<u64, u64> = xs
        .par_iter()
        .map(|x| ring.trace_fast(&eval_lifted(&ring, &coeffs, x)))
        .fold(BTreeMap::new, |mut h, t| {
            *h.entry(t).or_insert(0) += 1;
            h
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (t, c) in b {
                *a.entry(t).or_insert(0) += c;
            }
            a
        });
    let mut acc = ZpSeries::zero(p, prec, nt);
    for (t, c) in counts {
        let row = ZpSeries {
            p,
            prec,
            c: binomial_row(&BigInt::from(t), nt, p, prec),
        };
        acc = acc.add(&row.scale(c));
    }
    Ok(acc)
}

/// `S_f(T, k) = (q^k - 1) Tr(A^k)` as series mod `(T^{N_T}, p^{N_p})`.
pub fn series_trace_check(spec: &TowerSpec, run: &DworkRun, k: usize) -> Result<bool> {
    let (nt, np) = (run.params.n_t, run.params.n_p);
    let direct = direct_sf(spec, k, nt, np)?;
    let t = run.traces[k - 1].reduce(np, nt);
    let qk1 = pow_u64(spec.q(), k as u32).wrapping_sub(1) % t.pm();
    Ok(direct == t.scale(qk1))
}

/// `L_f(T, s) C_f(T, qs) = C_f(T, s)` through `s^{k_max}`, with
/// `L_f = exp(sum S_f(T, k) s^k / k)` built from direct sums.
pub fn quotient_check(spec: &TowerSpec, run: &DworkRun, k_max: usize) -> Result<bool> {
    let (p, nt) = (spec.p(), run.params.n_t);
    let k_max = k_max.min(run.params.n_s);
    let np = run.params.n_p;
    let wp = np + v_p_factorial(k_max as u64, p as u64);
    let sums = (1..=k_max)
        .map(|k| direct_sf(spec, k, nt, wp))
        .collect::<Result<Vec<_>>>()?;
    // Newton: n l_n = sum_{k=1}^n S_k l_{n-k}.
    let mut l = vec![ZpSeries::one(p, wp, nt)];
    for n in 1..=k_max {
        let prec = l.iter().map(|s| s.prec).min().unwrap();
        let mut acc = ZpSeries::zero(p, prec, nt);
        for k in 1..=n {
            acc = acc.add(&sums[k - 1].reduce(prec, nt).mul(&l[n - k].reduce(prec, nt)));
        }
        l.push(acc.div_int(n as u64)?);
    }
    let q = spec.q();
    for n in 0..=k_max {
        let mut lhs = ZpSeries::zero(p, np, nt);
        for i in 0..=n {
            let c_qs = run.b[n - i].scale(pow_u64(q, (n - i) as u32) % run.b[0].pm());
            lhs = lhs.add(&l[i].reduce(np, nt).mul(&c_qs));
        }
        if lhs != run.b[n] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Decay of the building blocks in `ord_R`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    /// `ord_R(pi_i) >= p^{min(i, m~-1)}` for each row `i`.
    pub pi_ok: bool,
    /// `ord_R(alpha_u) >= u / delta` for every `u` whose bound is visible.
    pub alpha_ok: bool,
    pub alpha_checked_up_to: usize,
}

pub fn decay_report(spec: &TowerSpec, run: &DworkRun) -> Result<DecayReport> {
    let c = spec.constants()?;
    let p = spec.p();
    let th = theta(p, c.m_tilde);
    let ring = &run.ring;
    let (nt, wp) = (ring.nt, ring.prec());
    let cap = visibility_cap(th, nt, wp);
    let mut pi_ok = true;
    for i in 0..=spec.last_row() {
        let pi = super::artin_hasse::pi_series(p, i, nt, wp)?;
        let vals = (0..nt).map(|j| pi.v_p(j));
        let o = ord_r_from_valuations(vals, th, cap).lower_bound();
        let need = pow_u64(p as u64, i.min(c.m_tilde - 1) as u32);
        pi_ok &= o >= need.min(cap);
    }
    let mut alpha_ok = true;
    let mut checked = 0;
    for (u, a) in run.alphas.iter().enumerate() {
        let need = BigRational::new(BigInt::from(u), BigInt::from(1)) / &c.delta;
        if need >= BigRational::from_integer(BigInt::from(cap)) {
            break;
        }
        let vals = (0..nt).map(|j| {
            let g = ring.coeff(a, j);
            g.0.iter()
                .filter(|&&x| x != 0)
                .map(|&x| crate::arith::v_p_u64(x, p as u64))
                .min()
        });
        let o = ord_r_from_valuations(vals, th, cap).lower_bound();
        alpha_ok &= BigRational::from_integer(BigInt::from(o)) >= need;
        checked = u;
    }
    Ok(DecayReport {
        pi_ok,
        alpha_ok,
        alpha_checked_up_to: checked,
    })
}

/// Everything checked for one tower and one set of parameters.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub trace_formula: Vec<CheckLine>,
    pub cstar: Vec<CheckLine>,
    pub passed: bool,
}

/// Trace formula for `k <= k_max` and `C*` coefficients for `n <= n_max`,
/// at each level in `levels`.
pub fn consistency_report(
    spec: &TowerSpec,
    run: &DworkRun,
    levels: &[usize],
    k_max: usize,
    n_max: usize,
) -> Result<ConsistencyReport> {
    let mut trace_formula = Vec::new();
    let mut cstar = Vec::new();
    for &m in levels {
        for k in 1..=k_max.min(run.params.n_s) {
            trace_formula.push(trace_formula_check(spec, run, m, k)?);
        }
        cstar.extend(cstar_check(spec, run, m, n_max)?);
    }
    let passed = trace_formula.iter().chain(&cstar).all(|l| l.ok);
    Ok(ConsistencyReport {
        trace_formula,
        cstar,
        passed,
    })
}

/// One variant of the truncation parameters compared against a base run.
#[derive(Clone, Debug, Serialize)]
pub struct DoublingLine {
    pub which: String,
    pub params: super::DworkParams,
    /// `b_n` of the variant, read mod the base `(T^{N_T}, p^{N_p})`, equals the base.
    pub series_agree: bool,
    /// Every order certified by the base run is certified with the same value.
    pub orders_agree: bool,
}

impl DoublingLine {
    pub fn ok(&self) -> bool {
        self.series_agree && self.orders_agree
    }
}

/// Double `B`, `N_T` and `N_p` one at a time. Doubling `N_T` alone can
/// break `(p-1) B >= D N_T`; that variant raises `B` to the least valid size.
pub fn doubling_report(spec: &TowerSpec, base: super::DworkParams) -> Result<Vec<DoublingLine>> {
    use super::orders::order_report;
    let run0 = DworkRun::new(spec, base)?;
    let rep0 = order_report(spec, &run0)?;
    let d = spec.constants()?.big_d;
    let p = spec.p() as usize;
    let mut variants = vec![
        ("B", super::DworkParams { b: 2 * base.b, ..base }),
        ("N_p", super::DworkParams { n_p: 2 * base.n_p, ..base }),
    ];
    let nt2 = 2 * base.n_t;
    let b_min = (d * nt2).div_ceil(p - 1);
    variants.insert(1, ("N_T", super::DworkParams { n_t: nt2, b: base.b.max(b_min), ..base }));
    let mut out = Vec::new();
    for (which, params) in variants {
        let run = DworkRun::new(spec, params)?;
        let series_agree = run
            .b
            .iter()
            .zip(&run0.b)
            .all(|(x, y)| &x.reduce(base.n_p, base.n_t) == y);
        let rep = order_report(spec, &run)?;
        let orders_agree = rep0.records.iter().zip(&rep.records).all(|(r0, r)| {
            r0.ord_r.exact().is_none_or(|v| r.ord_r.exact() == Some(v))
                && r0.lambda.is_none_or(|v| r.lambda == Some(v))
                && r0.lambda_prime.is_none_or(|v| r.lambda_prime == Some(v))
        });
        out.push(DoublingLine {
            which: which.into(),
            params,
            series_agree,
            orders_agree,
        });
    }
    Ok(out)
}
