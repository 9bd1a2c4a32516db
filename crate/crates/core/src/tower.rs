//! Tower data `f = sum_i iota_i(f_i)` over `F_q`, its derived constants and
//! the non-degeneracy test.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{ceil_log, is_prime, pow_u64};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FqElem};

/// One coefficient in a config file: a residue mod `p` when `a = 1`, or a
/// tuple of `a` residues (power basis of the canonical modulus) otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffConfig {
    Prime(u32),
    Tuple(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowConfig {
    pub i: usize,
    pub coeffs: Vec<CoeffConfig>,
}

/// On-disk tower description: `{p, a, rows: [{i, coeffs}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerConfig {
    pub p: u32,
    #[serde(default = "default_a")]
    pub a: usize,
    pub rows: Vec<RowConfig>,
}

fn default_a() -> usize {
    1
}

#[derive(Clone, Debug)]
pub struct TowerSpec {
    p: u32,
    a: usize,
    field: Arc<FieldCtx>,
    rows: BTreeMap<usize, Vec<FqElem>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerConstants {
    /// `D = max d_i`.
    pub big_d: usize,
    /// `delta = max d_i / p^i`.
    pub delta: BigRational,
    /// One plus the first row index attaining `D`.
    pub m_tilde: usize,
    /// `delta_1 = p^(m_tilde - 1) * delta`, the degree of `L*` at level `m_tilde`.
    pub delta1: u64,
    /// Unclamped `m_tilde + ceil(log_p(1/p + a (delta_1 - 1)^2 / (8 delta_1)))`.
    pub m0_formula: i64,
    /// `max(m_tilde, m0_formula)`.
    pub m0: usize,
    pub m0_clamped: bool,
}

impl TowerSpec {
    /// Build and validate. Rows may be listed in any order; a row whose
    /// coefficient list is empty is the zero polynomial.
    pub fn new(p: u32, a: usize, rows: Vec<(usize, Vec<FqElem>)>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidTower(format!("{p} is not prime")));
        }
        if a == 0 {
            return Err(Error::InvalidTower("a must be at least 1".into()));
        }
        let field = Arc::new(FieldCtx::new(p, a));
        let mut map = BTreeMap::new();
        for (i, coeffs) in rows {
            if coeffs.iter().any(|c| c.0.len() != a || c.0.iter().any(|&x| x >= p)) {
                return Err(Error::InvalidTower(format!("row {i}: coefficient outside F_q")));
            }
            if coeffs.len() > 1 && field.is_zero(coeffs.last().unwrap()) {
                return Err(Error::InvalidTower(format!(
                    "row {i}: leading coefficient a_{{{i},{}}} is zero",
                    coeffs.len() - 1
                )));
            }
            if coeffs.is_empty() || coeffs.iter().all(|c| field.is_zero(c)) {
                continue;
            }
            if map.insert(i, coeffs).is_some() {
                return Err(Error::InvalidTower(format!("row {i} listed twice")));
            }
        }
        let d0 = map.get(&0).map(|r| r.len() - 1).unwrap_or(0);
        if d0 == 0 {
            return Err(Error::InvalidTower("d_0 must be positive".into()));
        }
        let spec = TowerSpec {
            p,
            a,
            field,
            rows: map,
        };
        spec.constants()?;
        Ok(spec)
    }

    /// Tower over a prime field (`a = 1`) from integer coefficient rows.
    pub fn over_prime(p: u32, rows: &[(usize, &[u32])]) -> Result<Self> {
        let f = FieldCtx::new(p, 1);
        let rows = rows
            .iter()
            .map(|(i, cs)| (*i, cs.iter().map(|&c| f.from_int(c as i64)).collect()))
            .collect();
        Self::new(p, 1, rows)
    }

    pub fn from_config(cfg: &TowerConfig) -> Result<Self> {
        if !is_prime(cfg.p as u64) || cfg.a == 0 {
            return Err(Error::InvalidTower(format!("bad field parameters p={} a={}", cfg.p, cfg.a)));
        }
        let mut rows = Vec::new();
        for row in &cfg.rows {
            let mut coeffs = Vec::new();
            for c in &row.coeffs {
                let tuple = match c {
                    CoeffConfig::Prime(x) => {
                        let mut t = vec![0; cfg.a];
                        t[0] = *x;
                        t
                    }
                    CoeffConfig::Tuple(t) => t.clone(),
                };
                if tuple.len() != cfg.a || tuple.iter().any(|&x| x >= cfg.p) {
                    return Err(Error::InvalidTower(format!(
                        "row {}: coefficient {c:?} is not an element of F_{}^{}",
                        row.i, cfg.p, cfg.a
                    )));
                }
                coeffs.push(FqElem(tuple));
            }
            rows.push((row.i, coeffs));
        }
        Self::new(cfg.p, cfg.a, rows)
    }

    pub fn to_config(&self) -> TowerConfig {
        TowerConfig {
            p: self.p,
            a: self.a,
            rows: self
                .rows
                .iter()
                .map(|(&i, cs)| RowConfig {
                    i,
                    coeffs: cs
                        .iter()
                        .map(|c| {
                            if self.a == 1 {
                                CoeffConfig::Prime(c.0[0])
                            } else {
                                CoeffConfig::Tuple(c.0.clone())
                            }
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn a(&self) -> usize {
        self.a
    }

    /// `q = p^a`.
    pub fn q(&self) -> u64 {
        pow_u64(self.p as u64, self.a as u32)
    }

    pub fn field(&self) -> Arc<FieldCtx> {
        self.field.clone()
    }

    /// Nonzero rows `(i, [a_{i0}, .., a_{i d_i}])` in increasing `i`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &[FqElem])> {
        self.rows.iter().map(|(&i, c)| (i, c.as_slice()))
    }

    pub fn last_row(&self) -> usize {
        *self.rows.keys().next_back().unwrap()
    }

    /// `d_i` (0 for absent rows).
    pub fn row_degree(&self, i: usize) -> usize {
        self.rows.get(&i).map(|r| r.len() - 1).unwrap_or(0)
    }

    pub fn coeff(&self, i: usize, u: usize) -> FqElem {
        self.rows
            .get(&i)
            .and_then(|r| r.get(u).cloned())
            .unwrap_or_else(|| self.field.zero())
    }

    /// `d(m) = max_{i<m} p^(m-i-1) d_i`, the degree of `L*` at level `m`.
    pub fn degree(&self, m: usize) -> u64 {
        (0..m)
            .map(|i| pow_u64(self.p as u64, (m - i - 1) as u32) * self.row_degree(i) as u64)
            .max()
            .unwrap_or(0)
    }

    pub fn constants(&self) -> Result<TowerConstants> {
        let p = self.p as u64;
        let big_d = self.rows.values().map(|r| r.len() - 1).max().unwrap_or(0);
        let delta = self
            .rows
            .iter()
            .map(|(&i, r)| {
                BigRational::new(BigInt::from(r.len() - 1), BigInt::from(pow_u64(p, i as u32)))
            })
            .max()
            .unwrap();
        let first = self
            .rows
            .iter()
            .find(|(_, r)| r.len() - 1 == big_d)
            .map(|(&i, _)| i)
            .unwrap();
        let m_tilde = first + 1;
        let delta1_rat = &delta * BigRational::from_integer(BigInt::from(pow_u64(p, first as u32)));
        let delta1_max = self.degree(m_tilde);
        if !delta1_rat.is_integer() || delta1_rat.to_integer() != BigInt::from(delta1_max) {
            return Err(Error::Internal(format!(
                "delta_1 mismatch: p^(m~-1) delta = {delta1_rat}, max formula = {delta1_max}"
            )));
        }
        let delta1 = delta1_max;
        let arg = BigRational::new(BigInt::one(), BigInt::from(p))
            + BigRational::new(
                BigInt::from(self.a as u64 * (delta1 - 1) * (delta1 - 1)),
                BigInt::from(8 * delta1),
            );
        let m0_formula = m_tilde as i64 + ceil_log(p, &arg);
        let m0 = m0_formula.max(m_tilde as i64) as usize;
        Ok(TowerConstants {
            big_d,
            delta,
            m_tilde,
            delta1,
            m0_formula,
            m0,
            m0_clamped: m0_formula < m_tilde as i64,
        })
    }

    /// Non-degeneracy at level `m`: the sum of `d_i a_{i,d_i}^(p^(m-i-1))` over
    /// the rows attaining `d(m)` is nonzero in `F_q`.
    pub fn nondegenerate(&self, m: usize) -> bool {
        let d = self.degree(m);
        let f = &self.field;
        let mut acc = f.zero();
        for i in 0..m {
            let di = self.row_degree(i);
            if di == 0 || pow_u64(self.p as u64, (m - i - 1) as u32) * di as u64 != d {
                continue;
            }
            let lead = self.coeff(i, di);
            let powed = f.pow(&lead, pow_u64(self.p as u64, (m - i - 1) as u32) as u128);
            acc = f.add(&acc, &f.scale(&powed, (di as u64 % self.p as u64) as u32));
        }
        !f.is_zero(&acc)
    }
}

impl TowerConstants {
    /// `Lambda_k = a (p-1) k (k-1) / (2 delta)`, the Hodge bound on `ord_R(b_k)`.
    pub fn hodge(&self, p: u32, a: usize, k: u64) -> BigRational {
        let num = BigRational::from_integer(BigInt::from(a as u64 * (p as u64 - 1) * k * k.saturating_sub(1)));
        num / (BigRational::from_integer(BigInt::from(2)) * &self.delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn cubic_constants() {
        let t = TowerSpec::over_prime(2, &[(0, &[0, 0, 0, 1])]).unwrap();
        let c = t.constants().unwrap();
        assert_eq!(c.big_d, 3);
        assert_eq!(c.m_tilde, 1);
        assert_eq!(c.delta, rat(3, 1));
        assert_eq!(c.delta1, 3);
        assert_eq!(t.degree(2), 6);
        assert_eq!(c.m0, 1);
        assert_eq!(c.m0_formula, 1);
        assert!(!c.m0_clamped);
    }

    #[test]
    fn two_row_constants() {
        let t = TowerSpec::over_prime(2, &[(0, &[0, 0, 0, 1]), (1, &[0, 0, 0, 0, 1])]).unwrap();
        let c = t.constants().unwrap();
        assert_eq!(c.big_d, 4);
        assert_eq!(c.m_tilde, 2);
        assert_eq!(c.delta, rat(3, 1));
        assert_eq!(c.delta1, 6);
        assert_eq!(t.degree(2), 6);
    }

    #[test]
    fn shifted_row_constants() {
        let t = TowerSpec::over_prime(2, &[(0, &[0, 1]), (1, &[0, 0, 0, 1])]).unwrap();
        let c = t.constants().unwrap();
        assert_eq!((c.big_d, c.m_tilde, c.delta1, c.m0), (3, 2, 3, 2));
        assert_eq!(c.delta, rat(3, 2));
        assert_eq!((t.degree(2), t.degree(3), t.degree(4)), (3, 6, 12));
    }

    #[test]
    fn linear_constants() {
        let t = TowerSpec::over_prime(3, &[(0, &[0, 1])]).unwrap();
        let c = t.constants().unwrap();
        assert_eq!((c.big_d, c.m_tilde, c.delta1), (1, 1, 1));
        assert_eq!(c.delta, rat(1, 1));
        for m in 1..5 {
            assert_eq!(t.degree(m), 3u64.pow(m as u32 - 1));
        }
        // log_3(1/3) = -1 pulls the formula below m_tilde
        assert_eq!(c.m0_formula, 0);
        assert_eq!(c.m0, 1);
        assert!(c.m0_clamped);
    }

    #[test]
    fn nondegeneracy() {
        let cubic = TowerSpec::over_prime(2, &[(0, &[0, 0, 0, 1])]).unwrap();
        assert!(cubic.nondegenerate(1));
        let frob = TowerSpec::over_prime(3, &[(0, &[0, 0, 0, 1])]).unwrap();
        assert!(!frob.nondegenerate(1));
        let quad = TowerSpec::over_prime(3, &[(0, &[1, 2, 2])]).unwrap();
        for m in 1..4 {
            assert!(quad.nondegenerate(m));
        }
    }

    #[test]
    fn rejects_bad_towers() {
        assert!(TowerSpec::over_prime(2, &[(0, &[1])]).is_err());
        assert!(TowerSpec::over_prime(2, &[(0, &[0, 1, 0])]).is_err());
        assert!(TowerSpec::over_prime(4, &[(0, &[0, 1])]).is_err());
        assert!(TowerSpec::over_prime(2, &[(1, &[0, 1])]).is_err());
    }

    #[test]
    fn config_roundtrip() {
        let json = r#"{"p":2,"a":2,"rows":[{"i":0,"coeffs":[[0,0],[1,1],[0,0],[0,1]]}]}"#;
        let cfg: TowerConfig = serde_json::from_str(json).unwrap();
        let t = TowerSpec::from_config(&cfg).unwrap();
        assert_eq!(t.q(), 4);
        assert_eq!(t.row_degree(0), 3);
        assert_eq!(t.to_config(), cfg);
        let json = r#"{"p":2,"rows":[{"i":0,"coeffs":[0,0,0,1]}]}"#;
        let cfg: TowerConfig = serde_json::from_str(json).unwrap();
        assert_eq!(TowerSpec::from_config(&cfg).unwrap().a(), 1);
    }
}
