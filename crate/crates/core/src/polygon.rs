//! Newton polygons over exact rationals, the two broken-line bounds for
//! `C*`, and the slope-stability verifier.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{fmt_rational, pow_u64, rat_int};
use crate::cyclotomic::euler_phi;
use crate::error::{Error, Result};
use crate::expsums::Route;
use crate::lseries::{l_from_lstar, lstar, psi_frob0, CStarTruncation, LPolynomial};
use crate::tower::TowerSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Input points; `None` is `+inf` (or not certified) and is skipped.
    pub points: Vec<(usize, Option<BigRational>)>,
    pub vertices: Vec<(usize, BigRational)>,
    /// Nondecreasing, with multiplicity.
    pub slopes: Vec<BigRational>,
    /// Some point inside the hull's range was unavailable.
    pub partial: bool,
}

impl NewtonPolygon {
    pub fn len(&self) -> usize {
        self.vertices.last().map(|v| v.0).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The hull's height at abscissa `n` (within its range).
    pub fn value_at(&self, n: usize) -> Option<BigRational> {
        let idx = self.vertices.iter().position(|v| v.0 >= n)?;
        let (x1, y1) = &self.vertices[idx];
        if *x1 == n {
            return Some(y1.clone());
        }
        let (x0, y0) = &self.vertices[idx - 1];
        let t = BigRational::new(BigInt::from(n - x0), BigInt::from(x1 - x0));
        Some(y0 + (y1 - y0) * t)
    }

    pub fn slope_strings(&self) -> Vec<String> {
        self.slopes.iter().map(fmt_rational).collect()
    }
}

impl Serialize for NewtonPolygon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("NewtonPolygon", 3)?;
        let v: Vec<(usize, String)> = self.vertices.iter().map(|(n, y)| (*n, fmt_rational(y))).collect();
        st.serialize_field("vertices", &v)?;
        st.serialize_field("slopes", &self.slope_strings())?;
        st.serialize_field("partial", &self.partial)?;
        st.end()
    }
}

/// Lower convex hull by monotone chain; requires the anchor `(0, 0)`.
pub fn newton_polygon(points: &[(usize, Option<BigRational>)]) -> Result<NewtonPolygon> {
    let mut pts: Vec<(usize, BigRational)> = points
        .iter()
        .filter_map(|(n, v)| v.as_ref().map(|v| (*n, v.clone())))
        .collect();
    pts.sort_by_key(|p| p.0);
    match pts.first() {
        Some((0, v)) if v.is_zero() => {}
        _ => return Err(Error::MissingAnchor),
    }
    let mut hull: Vec<(usize, BigRational)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (x0, y0) = &hull[hull.len() - 2];
            let (x1, y1) = &hull[hull.len() - 1];
            // drop the middle point unless it lies strictly below the chord
            let lhs = (y1 - y0) * BigRational::from_integer(BigInt::from(pt.0 - x0));
            let rhs = (&pt.1 - y0) * BigRational::from_integer(BigInt::from(x1 - x0));
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let len = w[1].0 - w[0].0;
        let s = (&w[1].1 - &w[0].1) / BigRational::from_integer(BigInt::from(len));
        slopes.extend(std::iter::repeat(s).take(len));
    }
    let end = hull.last().unwrap().0;
    let partial = points.iter().any(|(n, v)| v.is_none() && *n <= end);
    Ok(NewtonPolygon {
        points: points.to_vec(),
        vertices: hull,
        slopes,
        partial,
    })
}

/// `q`-adic polygon of an exact polynomial.
pub fn polygon_of(l: &LPolynomial) -> Result<NewtonPolygon> {
    let pts: Vec<_> = (0..l.coeffs.len()).map(|n| (n, l.ord_q(n))).collect();
    newton_polygon(&pts)
}

/// Polygon measured in units of `ord_pi / unit`.
pub fn polygon_in_pi_units(l: &LPolynomial, unit: u64) -> Result<NewtonPolygon> {
    let pts: Vec<_> = l
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| (n, c.pi_valuation().map(|v| BigRational::new(v.into(), unit.into()))))
        .collect();
    newton_polygon(&pts)
}

/// `a (p-1) p^{m~-1}`: the `ord_pi` unit in which the `C*` bounds are stated.
pub fn bound_unit(spec: &TowerSpec) -> Result<u64> {
    let c = spec.constants()?;
    Ok((spec.a() * euler_phi(spec.p(), c.m_tilde)) as u64)
}

/// Polygon of the certified `C*` coefficients in `ord_pi / unit`.
pub fn polygon_of_cstar(c: &CStarTruncation, unit: u64) -> Result<NewtonPolygon> {
    let pts: Vec<_> = c
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, x)| (n, x.ord_pi.map(|v| BigRational::new(v.into(), unit.into()))))
        .collect();
    newton_polygon(&pts)
}

/// The upper broken line (slopes `k` on `[k d1, k d1 + 1]`, `(2k+1)/2` on
/// `[k d1 + 1, (k+1) d1]`) and the lower bound `n(n-1)/(2 d1)`.
#[derive(Clone, Debug)]
pub struct BoundLines {
    pub delta1: u64,
}

impl BoundLines {
    pub fn upper(&self, n: usize) -> BigRational {
        let d1 = self.delta1 as usize;
        let mut acc = BigRational::zero();
        for x in 0..n {
            let k = (x / d1) as i64;
            let s = if x % d1 == 0 {
                rat_int(k)
            } else {
                BigRational::new(BigInt::from(2 * k + 1), BigInt::from(2))
            };
            acc += s;
        }
        acc
    }

    pub fn lower(&self, n: usize) -> BigRational {
        BigRational::new(BigInt::from(n * n.saturating_sub(1)), BigInt::from(2 * self.delta1))
    }

    /// Abscissae `n = k d1, k d1 + 1` up to `n_max`.
    pub fn contact_points(&self, n_max: usize) -> Vec<usize> {
        (0..=n_max)
            .filter(|n| n % self.delta1 as usize <= 1 || self.delta1 == 1)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundViolation {
    pub n: usize,
    pub kind: String,
    pub value: String,
    pub bound: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub delta1: u64,
    /// Abscissae where the check is certified.
    pub checked_up_to: usize,
    pub contact_points: Vec<usize>,
    pub violations: Vec<BoundViolation>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every certified point against the lower line, the hull against
/// the upper line, and that the hull passes through each contact point
/// `(k d1, k(k d1 - 1)/2)`, `(k d1 + 1, k(k d1 + 1)/2)`.
///
/// The hull of a truncation is exact only up to its last contact point, so
/// the upper check stops there.
pub fn check_bounds(poly: &NewtonPolygon, delta1: u64) -> BoundReport {
    let lines = BoundLines { delta1 };
    let n_max = poly.points.iter().filter(|p| p.1.is_some()).map(|p| p.0).max().unwrap_or(0);
    let contacts = lines.contact_points(n_max);
    let cert = *contacts.last().unwrap_or(&0);
    let mut violations = Vec::new();
    for (n, v) in &poly.points {
        if let Some(v) = v {
            let lo = lines.lower(*n);
            if *v < lo {
                violations.push(BoundViolation {
                    n: *n,
                    kind: "below lower bound".into(),
                    value: fmt_rational(v),
                    bound: fmt_rational(&lo),
                });
            }
        }
    }
    for n in 0..=cert {
        let Some(h) = poly.value_at(n) else {
            violations.push(BoundViolation {
                n,
                kind: "hull undefined".into(),
                value: "-".into(),
                bound: "-".into(),
            });
            continue;
        };
        let up = lines.upper(n);
        if h > up {
            violations.push(BoundViolation {
                n,
                kind: "above upper bound".into(),
                value: fmt_rational(&h),
                bound: fmt_rational(&up),
            });
        }
        if contacts.contains(&n) && h != up {
            violations.push(BoundViolation {
                n,
                kind: "misses contact point".into(),
                value: fmt_rational(&h),
                bound: fmt_rational(&up),
            });
        }
    }
    BoundReport {
        delta1,
        checked_up_to: cert,
        contact_points: contacts,
        violations,
    }
}

fn multiset(v: &[BigRational]) -> BTreeMap<BigRational, usize> {
    let mut m = BTreeMap::new();
    for x in v {
        *m.entry(x.clone()).or_insert(0) += 1;
    }
    m
}

/// `(expected - observed, observed - expected)` as sorted lists.
pub fn multiset_difference(expected: &[BigRational], observed: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let (e, o) = (multiset(expected), multiset(observed));
    let diff = |a: &BTreeMap<BigRational, usize>, b: &BTreeMap<BigRational, usize>| {
        let mut out = Vec::new();
        for (k, &n) in a {
            let extra = n.saturating_sub(*b.get(k).unwrap_or(&0));
            out.extend(std::iter::repeat(k.clone()).take(extra));
        }
        out
    };
    (diff(&e, &o), diff(&o, &e))
}

/// `union_{i < e} {i/e, (gamma_t + i)/e}` minus one `0`, `e = p^{m - m0}`.
/// The second value counts zeros beyond the one removed.
pub fn expected_slopes(gammas: &[BigRational], p: u32, m: usize, m0: usize) -> (Vec<BigRational>, usize) {
    let e = pow_u64(p as u64, (m - m0) as u32) as i64;
    let er = rat_int(e);
    let mut out = Vec::new();
    for i in 0..e {
        out.push(rat_int(i) / &er);
        for g in gammas {
            out.push((g + rat_int(i)) / &er);
        }
    }
    let zero = BigRational::zero();
    let pos = out.iter().position(|x| *x == zero).unwrap();
    out.remove(pos);
    let extra_zeros = out.iter().filter(|x| **x == zero).count();
    out.sort();
    (out, extra_zeros)
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelCheck {
    pub m: usize,
    pub degree: u64,
    pub observed: Vec<String>,
    pub expected: Vec<String>,
    pub missing: Vec<String>,
    pub unexpected: Vec<String>,
    pub extra_zero_slopes: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityVerdict {
    pub m0: usize,
    pub m0_clamped: bool,
    pub m_tilde: usize,
    pub delta1: u64,
    /// Slopes of `L` at level `m0`.
    pub gammas: Vec<String>,
    /// Every `gamma` lies strictly between 0 and 1.
    pub gammas_in_open_unit_interval: bool,
    pub levels: Vec<LevelCheck>,
    pub passed: bool,
}

/// Slopes of `L(psi, s)` at level `m`.
pub fn l_slopes(spec: &TowerSpec, m: usize, route: Route) -> Result<Vec<BigRational>> {
    let ls = lstar(spec, m, route)?;
    let l = l_from_lstar(&ls, &psi_frob0(spec, m))?;
    Ok(polygon_of(&l)?.slopes)
}

/// Compare directly computed slopes at each level in `levels` (all
/// `>= m0`) with the progressions predicted from level `m0`.
pub fn verify_stability(spec: &TowerSpec, levels: &[usize], route: Route) -> Result<StabilityVerdict> {
    let c = spec.constants()?;
    if let Some(&bad) = levels.iter().find(|&&m| m < c.m0) {
        return Err(Error::InvalidArgument(format!("level {bad} is below m_0 = {}", c.m0)));
    }
    let gammas = l_slopes(spec, c.m0, route)?;
    let one = BigRational::one();
    let in_unit = gammas.iter().all(|g| g > &BigRational::zero() && g < &one);
    let mut checks = Vec::new();
    for &m in levels {
        let observed = if m == c.m0 { gammas.clone() } else { l_slopes(spec, m, route)? };
        let (expected, extra_zero_slopes) = expected_slopes(&gammas, spec.p(), m, c.m0);
        let (missing, unexpected) = multiset_difference(&expected, &observed);
        let s = |v: &[BigRational]| v.iter().map(fmt_rational).collect::<Vec<_>>();
        checks.push(LevelCheck {
            m,
            degree: spec.degree(m),
            passed: missing.is_empty() && unexpected.is_empty(),
            observed: s(&observed),
            expected: s(&expected),
            missing: s(&missing),
            unexpected: s(&unexpected),
            extra_zero_slopes,
        });
    }
    let passed = in_unit && checks.iter().all(|l| l.passed);
    Ok(StabilityVerdict {
        m0: c.m0,
        m0_clamped: c.m0_clamped,
        m_tilde: c.m_tilde,
        delta1: c.delta1,
        gammas: gammas.iter().map(fmt_rational).collect(),
        gammas_in_open_unit_interval: in_unit,
        levels: checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn pts(v: &[(usize, i64, i64)]) -> Vec<(usize, Option<BigRational>)> {
        v.iter().map(|&(n, a, b)| (n, Some(rat(a, b)))).collect()
    }

    #[test]
    fn hull_examples() {
        let p = newton_polygon(&pts(&[(0, 0, 1), (1, 0, 1), (2, 1, 1)])).unwrap();
        assert_eq!(p.slopes, vec![rat(0, 1), rat(1, 1)]);
        let p = newton_polygon(&pts(&[(0, 0, 1), (1, 1, 1), (2, 1, 1)])).unwrap();
        assert_eq!(p.vertices, vec![(0, rat(0, 1)), (2, rat(1, 1))]);
        assert_eq!(p.slopes, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(p.value_at(1), Some(rat(1, 2)));
        let p = newton_polygon(&[(0, Some(rat(0, 1))), (1, None), (2, Some(rat(1, 1)))]).unwrap();
        assert_eq!(p.slopes, vec![rat(1, 2), rat(1, 2)]);
        assert!(p.partial);
        assert!(matches!(newton_polygon(&pts(&[(1, 0, 1)])), Err(Error::MissingAnchor)));
    }

    #[test]
    fn bound_lines_meet_at_contacts() {
        for d1 in 1..7u64 {
            let b = BoundLines { delta1: d1 };
            for n in 0..(4 * d1 as usize + 2) {
                assert!(b.upper(n) >= b.lower(n), "d1={d1} n={n}");
                if n % d1 as usize <= 1 || d1 == 1 {
                    assert_eq!(b.upper(n), b.lower(n), "d1={d1} n={n}");
                }
            }
            assert_eq!(b.upper(d1 as usize), rat(d1 as i64 - 1, 2));
        }
    }

    #[test]
    fn expected_progressions() {
        let g = vec![rat(1, 2), rat(1, 2)];
        let (e, extra) = expected_slopes(&g, 2, 2, 1);
        assert_eq!(e, vec![rat(1, 4), rat(1, 4), rat(1, 2), rat(3, 4), rat(3, 4)]);
        assert_eq!(extra, 0);
        let (e, _) = expected_slopes(&g, 2, 3, 1);
        let want: Vec<_> = [(1, 8), (1, 8), (1, 4), (3, 8), (3, 8), (1, 2), (5, 8), (5, 8), (3, 4), (7, 8), (7, 8)]
            .iter()
            .map(|&(a, b)| rat(a, b))
            .collect();
        assert_eq!(e, want);
        let (e, _) = expected_slopes(&g, 2, 1, 1);
        assert_eq!(e, g);
    }

    #[test]
    fn cubic_tower_stability() {
        let t = TowerSpec::over_prime(2, &[(0, &[0, 0, 0, 1])]).unwrap();
        let v = verify_stability(&t, &[1, 2], Route::Galois).unwrap();
        assert_eq!(v.gammas, vec!["1/2", "1/2"]);
        assert!(v.passed, "{v:?}");
    }

    #[test]
    fn multiset_diff() {
        let (a, b) = multiset_difference(&[rat(1, 2), rat(1, 2), rat(1, 1)], &[rat(1, 2), rat(3, 2)]);
        assert_eq!(a, vec![rat(1, 2), rat(1, 1)]);
        assert_eq!(b, vec![rat(3, 2)]);
    }
}
