//! T-adic Dwork theory: the splitting function `E_f`, the operator matrix,
//! the characteristic series `C_f(T, s) = det(I - s A)` and its `R`-adic orders.

pub mod artin_hasse;
pub mod consistency;
pub mod ef;
pub mod matrix;
pub mod orders;
pub mod series;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith::{pow_u64, v_p_factorial};
use crate::error::{Error, Result};
use crate::tower::TowerSpec;

pub use consistency::{CheckLine, ConsistencyReport};
pub use matrix::SeriesMatrix;
pub use orders::{OrdR, OrderRecord, OrderReport};
pub use series::{TRing, TSeries, ZpSeries};

/// Truncation parameters: `s`-degree `n_s`, `T`-precision `n_t`,
/// `p`-adic precision `n_p`, matrix size `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DworkParams {
    pub n_s: usize,
    pub n_t: usize,
    pub n_p: u32,
    pub b: usize,
}

impl DworkParams {
    /// `N_s = 2 delta_1 + 1`, `N_T = ceil(Lambda_{N_s}) + delta_1 + 2`,
    /// `N_p` enough to see `T^{N_T}` through `ord_R`, `B = D N_T + D`.
    pub fn defaults(spec: &TowerSpec) -> Result<Self> {
        let c = spec.constants()?;
        let n_s = 2 * c.delta1 as usize + 1;
        let lam = c.hodge(spec.p(), spec.a(), n_s as u64);
        let lam = lam.ceil().to_integer().to_usize().unwrap();
        let n_t = lam + c.delta1 as usize + 2;
        let n_p = match theta(spec.p(), c.m_tilde) {
            None => n_t as u32,
            Some(th) => (n_t as u64).div_ceil(th) as u32 + 2,
        };
        Ok(DworkParams {
            n_s,
            n_t,
            n_p,
            b: c.big_d * n_t + c.big_d,
        })
    }

    /// Extra digits absorbed by the divisions `b_n = (...)/n`.
    pub fn working_precision(&self, p: u32) -> u32 {
        self.n_p + v_p_factorial(self.n_s as u64, p as u64)
    }

    pub fn validate(&self, spec: &TowerSpec) -> Result<()> {
        let d = spec.constants()?.big_d;
        let p = spec.p() as usize;
        if self.n_s == 0 || self.n_t == 0 || self.n_p == 0 {
            return Err(Error::InvalidArgument("truncation parameters must be positive".into()));
        }
        // A cycle through an index >= B has T-order >= (p-1) B / D.
        if (p - 1) * self.b < d * self.n_t {
            return Err(Error::TruncationTooSmall(format!(
                "B = {} needs (p-1) B >= D N_T = {}",
                self.b,
                d * self.n_t
            )));
        }
        if 2 * self.n_s > self.b {
            return Err(Error::TruncationTooSmall(format!("N_s = {} exceeds B/2", self.n_s)));
        }
        let wp = self.working_precision(spec.p());
        if (wp as f64) * (spec.p() as f64).log2() > 61.0 {
            return Err(Error::InvalidArgument(format!(
                "working precision p^{wp} exceeds word arithmetic"
            )));
        }
        Ok(())
    }
}

/// `ord_R(p)`: `p^{m~-2}(p-1)` for `m~ >= 2`; `None` when `m~ = 1` (`R = (T)`).
pub fn theta(p: u32, m_tilde: usize) -> Option<u64> {
    (m_tilde >= 2).then(|| pow_u64(p as u64, (m_tilde - 2) as u32) * (p as u64 - 1))
}

/// Everything computed from one set of truncation parameters.
#[derive(Clone, Debug)]
pub struct DworkRun {
    pub params: DworkParams,
    pub ring: TRing,
    pub alphas: Vec<TSeries>,
    pub matrix: SeriesMatrix,
    /// `Tr(A^k)`, `k = 1..=N_s`, at the working precision.
    pub traces: Vec<ZpSeries>,
    /// `b_0 .. b_{N_s}` mod `(T^{N_T}, p^{N_p})`.
    pub b: Vec<ZpSeries>,
}

impl DworkRun {
    pub fn new(spec: &TowerSpec, params: DworkParams) -> Result<Self> {
        params.validate(spec)?;
        let p = spec.p();
        let wp = params.working_precision(p);
        let ring = TRing::new(p, wp, spec.a(), params.n_t);
        let u_max = p as usize * (params.b - 1) + 1;
        let alphas = ef::build_ef(spec, &ring, u_max)?;
        let matrix = SeriesMatrix::dwork(&ring, &alphas, params.b);
        let a = matrix.semilinear_power(&ring);
        let traces = matrix::power_traces(&ring, &a, params.n_s)?;
        let b = matrix::fredholm_from_traces(&traces)?
            .into_iter()
            .map(|s| {
                if s.prec < params.n_p {
                    Err(Error::Internal(format!("b_n kept only {} digits", s.prec)))
                } else {
                    Ok(s.reduce(params.n_p, params.n_t))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DworkRun {
            params,
            ring,
            alphas,
            matrix,
            traces,
            b,
        })
    }

    pub fn with_defaults(spec: &TowerSpec) -> Result<Self> {
        Self::new(spec, DworkParams::defaults(spec)?)
    }
}
