//! `R`-adic orders of the coefficients `b_n(T)` of `C_f(T, s)`.
//!
//! With `theta = ord_R(p)`, `ord_R(sum_j c_j T^j) = min_j (j + theta v_p(c_j))`;
//! for `m~ = 1` the ideal is `(T)` and `ord_R` is the `T`-adic order.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::fmt_rational;
use crate::error::Result;
use crate::tower::TowerSpec;

use super::series::ZpSeries;
use super::{theta, DworkRun};

/// An order read off a truncated series: exact below the visibility cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum OrdR {
    Exact(u64),
    AtLeast(u64),
}

impl OrdR {
    pub fn lower_bound(&self) -> u64 {
        match *self {
            OrdR::Exact(v) | OrdR::AtLeast(v) => v,
        }
    }

    pub fn exact(&self) -> Option<u64> {
        match *self {
            OrdR::Exact(v) => Some(v),
            OrdR::AtLeast(_) => None,
        }
    }
}

/// Orders at or above this value are not determined by `(T^nt, p^prec)`.
pub fn visibility_cap(theta: Option<u64>, nt: usize, prec: u32) -> u64 {
    match theta {
        None => nt as u64,
        Some(th) => (nt as u64).min(th * prec as u64),
    }
}

/// `ord_R` of a series given the `v_p` of each coefficient (`None` = zero
/// residue). For `theta = None` a zero residue is read as zero.
pub fn ord_r_from_valuations(vals: impl Iterator<Item = Option<u32>>, theta: Option<u64>, cap: u64) -> OrdR {
    let mut best = u64::MAX;
    for (j, v) in vals.enumerate() {
        if let Some(v) = v {
            let o = j as u64 + theta.map_or(0, |t| t * v as u64);
            best = best.min(o);
        }
    }
    if best < cap {
        OrdR::Exact(best)
    } else {
        OrdR::AtLeast(cap)
    }
}

pub fn ord_r(s: &ZpSeries, theta: Option<u64>) -> OrdR {
    let cap = visibility_cap(theta, s.nt(), s.prec);
    ord_r_from_valuations((0..s.nt()).map(|j| s.v_p(j)), theta, cap)
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderRecord {
    pub n: usize,
    /// First `j` with `b_n^{(j)} != 0` mod `p^{N_p}`.
    pub lambda: Option<usize>,
    /// First `j` with `b_n^{(j)}` a unit, when below `N_T`.
    pub lambda_prime: Option<usize>,
    /// Set when no unit coefficient is visible: `lambda'_n >= N_T`.
    pub lambda_prime_at_least: Option<usize>,
    pub ord_r: OrdR,
    /// `Lambda_n = a (p-1) n (n-1) / (2 delta)`.
    pub hodge: String,
    /// `ord_R(b_n) >= Lambda_n`; `None` when precision cannot decide.
    pub hodge_ok: Option<bool>,
    /// `n = 0, 1 mod delta_1`: the order must equal `Lambda_n`, attained by a unit.
    pub contact: bool,
    pub contact_ok: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub m_tilde: usize,
    pub delta1: u64,
    /// `ord_R(p)`, absent when `m~ = 1`.
    pub theta: Option<u64>,
    pub cap: u64,
    pub records: Vec<OrderRecord>,
    pub hodge_passed: bool,
    pub contact_passed: bool,
}

impl OrderReport {
    pub fn passed(&self) -> bool {
        self.hodge_passed && self.contact_passed
    }
}

pub fn order_report(spec: &TowerSpec, run: &DworkRun) -> Result<OrderReport> {
    let c = spec.constants()?;
    let th = theta(spec.p(), c.m_tilde);
    let params = run.params;
    let cap = visibility_cap(th, params.n_t, params.n_p);
    let mut records = Vec::new();
    for (n, b) in run.b.iter().enumerate() {
        let lambda = (0..b.nt()).find(|&j| b.c[j] != 0);
        let lambda_prime = (0..b.nt()).find(|&j| b.v_p(j) == Some(0));
        let ord = ord_r(b, th);
        let hodge: BigRational = c.hodge(spec.p(), spec.a(), n as u64);
        let lb = BigRational::from_integer(ord.lower_bound().into());
        let hodge_ok = match ord {
            OrdR::Exact(_) => Some(lb >= hodge),
            OrdR::AtLeast(_) => (lb >= hodge).then_some(true),
        };
        let contact = n as u64 % c.delta1 <= 1 || c.delta1 == 1;
        let contact_ok = contact.then(|| {
            if !hodge.is_integer() {
                return None;
            }
            let target = hodge.to_integer().to_u64()?;
            if target >= cap {
                return None;
            }
            let unit_there = (target as usize) < b.nt() && b.v_p(target as usize) == Some(0);
            Some(ord == OrdR::Exact(target) && unit_there)
        });
        records.push(OrderRecord {
            n,
            lambda,
            lambda_prime,
            lambda_prime_at_least: lambda_prime.is_none().then_some(b.nt()),
            ord_r: ord,
            hodge: fmt_rational(&hodge),
            hodge_ok,
            contact,
            contact_ok: contact_ok.flatten(),
        });
    }
    let hodge_passed = records.iter().all(|r| r.hodge_ok == Some(true));
    let contact_passed = records.iter().filter(|r| r.contact).all(|r| r.contact_ok == Some(true));
    Ok(OrderReport {
        m_tilde: c.m_tilde,
        delta1: c.delta1,
        theta: th,
        cap,
        records,
        hodge_passed,
        contact_passed,
    })
}
