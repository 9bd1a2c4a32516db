//! The Dwork operator `sigma^{-1} o psi_p o E_f` on the monomial basis,
//! truncated to `B x B`, and the Fredholm determinant of its `a`-th power.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::series::{TRing, TSeries, ZpSeries};

/// Square matrix of `T`-series, row-major.
#[derive(Clone, Debug)]
pub struct SeriesMatrix {
    pub dim: usize,
    pub entries: Vec<TSeries>,
}

impl SeriesMatrix {
    pub fn entry(&self, u: usize, v: usize) -> &TSeries {
        &self.entries[u * self.dim + v]
    }

    /// `M_{uv} = sigma^{-1}(alpha_{pu - v})`, zero when `pu < v`.
    pub fn dwork(ring: &TRing, alphas: &[TSeries], b: usize) -> SeriesMatrix {
        let p = ring.p() as usize;
        let entries = (0..b * b)
            .into_par_iter()
            .map(|idx| {
                let (u, v) = (idx / b, idx % b);
                if p * u < v || p * u - v >= alphas.len() {
                    ring.zero()
                } else {
                    ring.frob_inv(&alphas[p * u - v])
                }
            })
            .collect();
        SeriesMatrix { dim: b, entries }
    }

    pub fn map(&self, f: impl Fn(&TSeries) -> TSeries + Sync + Send) -> SeriesMatrix {
        SeriesMatrix {
            dim: self.dim,
            entries: self.entries.par_iter().map(f).collect(),
        }
    }

    pub fn mul(&self, ring: &TRing, o: &SeriesMatrix) -> SeriesMatrix {
        let n = self.dim;
        assert_eq!(n, o.dim);
        let ox: Vec<Option<usize>> = self.entries.par_iter().map(|s| ring.ord_t(s)).collect();
        let oy: Vec<Option<usize>> = o.entries.par_iter().map(|s| ring.ord_t(s)).collect();
        let rows: Vec<Vec<TSeries>> = (0..n)
            .into_par_iter()
            .map(|u| {
                let mut row = Vec::with_capacity(n);
                let mut acc = vec![0u128; ring.acc_len()];
                for w in 0..n {
                    acc.iter_mut().for_each(|x| *x = 0);
                    let mut any = false;
                    for v in 0..n {
                        let (Some(a), Some(b)) = (ox[u * n + v], oy[v * n + w]) else {
                            continue;
                        };
                        if a + b >= ring.nt {
                            continue;
                        }
                        ring.mul_acc(&mut acc, &self.entries[u * n + v], a, &o.entries[v * n + w], b);
                        any = true;
                    }
                    row.push(if any { ring.finish(&acc) } else { ring.zero() });
                }
                row
            })
            .collect();
        SeriesMatrix {
            dim: n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    /// The linear map `phi^a`: `M sigma^{-1}(M) ... sigma^{-(a-1)}(M)`.
    pub fn semilinear_power(&self, ring: &TRing) -> SeriesMatrix {
        let mut out = self.clone();
        let mut conj = self.clone();
        for _ in 1..ring.a() {
            conj = conj.map(|s| ring.frob_inv(s));
            out = out.mul(ring, &conj);
        }
        out
    }

    pub fn trace(&self, ring: &TRing) -> TSeries {
        (0..self.dim).fold(ring.zero(), |acc, u| ring.add(&acc, self.entry(u, u)))
    }
}

/// `Tr(A^k)` for `k = 1..=n_s`, each checked to lie in `Z_p[[T]]`.
pub fn power_traces(ring: &TRing, a: &SeriesMatrix, n_s: usize) -> Result<Vec<ZpSeries>> {
    let mut out = Vec::with_capacity(n_s);
    let mut pow = a.clone();
    for k in 1..=n_s {
        if k > 1 {
            pow = pow.mul(ring, a);
        }
        let t = pow.trace(ring);
        out.push(
            ring.to_zp(&t)
                .ok_or_else(|| Error::Certificate(format!("Tr(A^{k}) has coefficients outside Z_p")))?,
        );
    }
    Ok(out)
}

/// `b_0 .. b_{n_s}` from `n b_n = -sum_{k=1}^n Tr(A^k) b_{n-k}`. Each `b_n`
/// carries the precision left after the divisions.
pub fn fredholm_from_traces(traces: &[ZpSeries]) -> Result<Vec<ZpSeries>> {
    let t0 = &traces[0];
    let mut b = vec![ZpSeries::one(t0.p, t0.prec, t0.nt())];
    for n in 1..=traces.len() {
        let prec = (0..n).map(|k| b[k].prec).min().unwrap();
        let mut acc = ZpSeries::zero(t0.p, prec, t0.nt());
        for k in 1..=n {
            let t = traces[k - 1].reduce(prec, t0.nt());
            let prev = b[n - k].reduce(prec, t0.nt());
            acc = acc.add(&t.mul(&prev));
        }
        b.push(acc.neg().div_int(n as u64)?);
    }
    Ok(b)
}
