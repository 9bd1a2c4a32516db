//! Coefficients `alpha_u in Z_q[[T]]` of the splitting function
//! `E_f(x) = prod_i prod_u E(pi_i teich(a_{iu}) x^u)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tower::TowerSpec;

use super::artin_hasse::{artin_hasse, check_pi_decay, pi_series};
use super::series::{TRing, TSeries, ZpSeries};

/// `alpha_0 .. alpha_{u_max - 1}` mod `(T^nt, p^prec)`, checked against the
/// decay `alpha_u = 0 mod T^{ceil(u/D)}`.
pub fn build_ef(spec: &TowerSpec, ring: &TRing, u_max: usize) -> Result<Vec<TSeries>> {
    let (p, nt, prec) = (spec.p(), ring.nt, ring.prec());
    let e = artin_hasse(p, nt.max(2), prec)?;
    let mut poly = vec![ring.zero(); u_max];
    if u_max == 0 {
        return Ok(poly);
    }
    poly[0] = ring.one();
    for (i, row) in spec.rows() {
        let pi = pi_series(p, i, nt, prec)?;
        check_pi_decay(&pi, i)?;
        let pi_pows = powers(&pi, nt);
        for (u, coeff) in row.iter().enumerate() {
            if spec.field().is_zero(coeff) {
                continue;
            }
            let hat = ring.gr.teichmuller(coeff);
            let factor = factor_terms(ring, &e, &pi_pows, &hat, u, u_max);
            poly = mul_sparse(ring, &poly, &factor);
        }
    }
    let d = spec.constants()?.big_d;
    for (u, a) in poly.iter().enumerate() {
        let need = u.div_ceil(d).min(nt);
        if let Some(o) = ring.ord_t(a) {
            if o < need {
                return Err(Error::DecayBound(format!(
                    "alpha_{u} has T-order {o} < ceil({u}/{d}) = {need}"
                )));
            }
        }
    }
    Ok(poly)
}

fn powers(s: &ZpSeries, n: usize) -> Vec<ZpSeries> {
    let mut out = vec![ZpSeries::one(s.p, s.prec, s.nt())];
    for k in 1..n {
        let next = out[k - 1].mul(s);
        out.push(next);
    }
    out
}

/// Nonzero terms `(u n, e_n hat^n pi^n)` of `E(pi hat x^u)` below `x^{u_max}`.
fn factor_terms(
    ring: &TRing,
    e: &ZpSeries,
    pi_pows: &[ZpSeries],
    hat: &crate::galois_ring::GrElem,
    u: usize,
    u_max: usize,
) -> Vec<(usize, TSeries)> {
    let mut out = Vec::new();
    let mut hat_n = ring.gr.one();
    for (n, pw) in pi_pows.iter().enumerate() {
        // u = 0 keeps every n; they are summed into the constant term below.
        if u > 0 && u * n >= u_max {
            break;
        }
        let scalar = pw.scale(e.c[n]);
        let term = ring.scale_gr(&ring.from_zp(&scalar.c), &hat_n);
        if !ring.is_zero(&term) {
            out.push((u * n, term));
        }
        hat_n = ring.gr.mul(&hat_n, hat);
    }
    if u == 0 {
        let sum = out.iter().fold(ring.zero(), |acc, (_, t)| ring.add(&acc, t));
        return vec![(0, sum)];
    }
    out
}

/// `poly * factor` truncated below `x^{poly.len()}`.
fn mul_sparse(ring: &TRing, poly: &[TSeries], factor: &[(usize, TSeries)]) -> Vec<TSeries> {
    let u_max = poly.len();
    let orders: Vec<Option<usize>> = poly.iter().map(|s| ring.ord_t(s)).collect();
    let f_orders: Vec<Option<usize>> = factor.iter().map(|(_, s)| ring.ord_t(s)).collect();
    (0..u_max)
        .into_par_iter()
        .map(|k| {
            let mut acc = vec![0u128; ring.acc_len()];
            let mut any = false;
            for ((sh, f), fo) in factor.iter().zip(&f_orders) {
                if *sh > k {
                    continue;
                }
                let (Some(po), Some(fo)) = (orders[k - sh], fo) else {
                    continue;
                };
                if po + fo >= ring.nt {
                    continue;
                }
                ring.mul_acc(&mut acc, &poly[k - sh], po, f, *fo);
                any = true;
            }
            if any {
                ring.finish(&acc)
            } else {
                ring.zero()
            }
        })
        .collect()
}
