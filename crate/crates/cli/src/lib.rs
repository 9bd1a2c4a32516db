//! Report builders behind the `aswt` binary. Every report is a
//! `serde_json::Value` with sorted keys and rationals written as `"num/den"`,
//! so identical inputs give byte-identical output.

use std::fmt::Write as _;
use std::path::Path;

use aswt_core::arith::fmt_rational;
use aswt_core::dwork::consistency::{consistency_report, decay_report, doubling_report, DoublingLine};
use aswt_core::dwork::orders::order_report;
use aswt_core::dwork::{DworkParams, DworkRun};
use aswt_core::expsums::Route;
use aswt_core::lseries::{cstar_certified, cstar_truncated, l_from_lstar, lstar, psi_frob0, LPolynomial};
use aswt_core::polygon::{bound_unit, check_bounds, polygon_of, polygon_of_cstar, verify_stability};
use aswt_core::{Error, TowerConfig, TowerSpec};
use serde_json::{json, Value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RouteChoice {
    Witt,
    Galois,
    Both,
}

impl std::str::FromStr for RouteChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "witt" => Ok(RouteChoice::Witt),
            "galois" => Ok(RouteChoice::Galois),
            "both" => Ok(RouteChoice::Both),
            _ => Err(format!("unknown route '{s}' (witt, galois, both)")),
        }
    }
}

impl RouteChoice {
    fn routes(self) -> Vec<Route> {
        match self {
            RouteChoice::Witt => vec![Route::Witt],
            RouteChoice::Galois => vec![Route::Galois],
            RouteChoice::Both => vec![Route::Galois, Route::Witt],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format '{s}' (json, csv)")),
        }
    }
}

/// Failure of a command: bad input or a computation that contradicted an oracle.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_BAD_INPUT,
            CliError::Core(e) if e.is_input_error() => EXIT_BAD_INPUT,
            CliError::Core(_) => EXIT_COMPUTATION,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Input(msg) => json!({"error": {"kind": "input", "message": msg}}),
            CliError::Core(e) => json!({"error": {"kind": e.kind(), "message": e.to_string()}}),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A finished command: the JSON body, a CSV rendering and the verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub passed: bool,
    pub body: Value,
    pub csv: String,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.body).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
        }
    }
}

/// Parse a tower from JSON or TOML text; the extension picks the parser
/// when it is `.json` or `.toml`, otherwise JSON is tried first.
pub fn parse_tower(text: &str, ext: Option<&str>) -> CliResult<TowerSpec> {
    let cfg: TowerConfig = match ext {
        Some("toml") => toml::from_str(text).map_err(|e| CliError::Input(format!("TOML: {e}")))?,
        Some("json") => serde_json::from_str(text).map_err(|e| CliError::Input(format!("JSON: {e}")))?,
        _ => match serde_json::from_str(text) {
            Ok(c) => c,
            Err(je) => toml::from_str(text)
                .map_err(|te| CliError::Input(format!("neither JSON ({je}) nor TOML ({te})")))?,
        },
    };
    Ok(TowerSpec::from_config(&cfg)?)
}

pub fn load_tower(path: &Path) -> CliResult<TowerSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))?;
    parse_tower(&text, path.extension().and_then(|e| e.to_str()))
}

fn tower_json(spec: &TowerSpec) -> Value {
    serde_json::to_value(spec.to_config()).expect("config serializes")
}

fn rat_opt(x: Option<num_rational::BigRational>) -> Value {
    x.map_or(Value::Null, |r| Value::from(fmt_rational(&r)))
}

fn slopes_csv(rows: &[(usize, Vec<String>)]) -> String {
    let mut s = String::from("m,num,den\n");
    for (m, slopes) in rows {
        for sl in slopes {
            let (n, d) = sl.split_once('/').unwrap_or((sl, "1"));
            let _ = writeln!(s, "{m},{n},{d}");
        }
    }
    s
}

pub fn constants(spec: &TowerSpec, m_max: Option<usize>) -> CliResult<Report> {
    let c = spec.constants()?;
    let m_max = m_max.unwrap_or(c.m0 + 1);
    let levels: Vec<Value> = (1..=m_max)
        .map(|m| json!({"m": m, "degree": spec.degree(m), "nondegenerate": spec.nondegenerate(m)}))
        .collect();
    let body = json!({
        "command": "constants",
        "tower": tower_json(spec),
        "D": c.big_d,
        "m_tilde": c.m_tilde,
        "delta": fmt_rational(&c.delta),
        "delta1": c.delta1,
        "m0": c.m0,
        "m0_formula": c.m0_formula,
        "m0_clamped": c.m0_clamped,
        "levels": levels,
    });
    let mut csv = String::from("key,value\n");
    let _ = writeln!(csv, "D,{}", c.big_d);
    let _ = writeln!(csv, "m_tilde,{}", c.m_tilde);
    let _ = writeln!(csv, "delta,{}", fmt_rational(&c.delta));
    let _ = writeln!(csv, "delta1,{}", c.delta1);
    let _ = writeln!(csv, "m0,{}", c.m0);
    for m in 1..=m_max {
        let _ = writeln!(csv, "degree_{m},{}", spec.degree(m));
    }
    Ok(Report {
        command: "constants".into(),
        passed: true,
        body,
        csv,
    })
}

fn poly_json(l: &LPolynomial) -> Value {
    json!({
        "degree": l.degree(),
        "coeffs": l.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "exact": serde_json::to_value(&l.coeffs).expect("cyclotomic serializes"),
        "ord_q": (0..l.coeffs.len()).map(|n| rat_opt(l.ord_q(n))).collect::<Vec<_>>(),
    })
}

/// `L*` and `L` at one level; with both routes the two must agree.
fn l_pair(spec: &TowerSpec, m: usize, routes: RouteChoice) -> CliResult<(LPolynomial, LPolynomial, Option<bool>)> {
    let mut first: Option<LPolynomial> = None;
    let mut agree = None;
    for route in routes.routes() {
        let ls = lstar(spec, m, route)?;
        match &first {
            None => first = Some(ls),
            Some(f) => agree = Some(f.coeffs == ls.coeffs),
        }
    }
    let ls = first.expect("at least one route");
    let l = l_from_lstar(&ls, &psi_frob0(spec, m))?;
    Ok((ls, l, agree))
}

pub fn lfunction(spec: &TowerSpec, levels: &[usize], routes: RouteChoice) -> CliResult<Report> {
    let mut out = Vec::new();
    let mut rows = Vec::new();
    let mut passed = true;
    for &m in levels {
        let (ls, l, agree) = l_pair(spec, m, routes)?;
        let slopes = polygon_of(&l)?.slope_strings();
        passed &= agree.unwrap_or(true);
        out.push(json!({
            "m": m,
            "degree": spec.degree(m),
            "nondegenerate": spec.nondegenerate(m),
            "degree_confirmed": ls.degree_confirmed,
            "lstar": poly_json(&ls),
            "l": poly_json(&l),
            "slopes": slopes,
            "routes_agree": agree,
        }));
        rows.push((m, slopes));
    }
    Ok(Report {
        command: "lfunction".into(),
        passed,
        body: json!({"command": "lfunction", "tower": tower_json(spec), "levels": out}),
        csv: slopes_csv(&rows),
    })
}

pub fn polygon(spec: &TowerSpec, levels: &[usize], routes: RouteChoice) -> CliResult<Report> {
    let mut out = Vec::new();
    let mut rows = Vec::new();
    let mut passed = true;
    for &m in levels {
        let (ls, l, agree) = l_pair(spec, m, routes)?;
        let pl = polygon_of(&l)?;
        passed &= agree.unwrap_or(true);
        rows.push((m, pl.slope_strings()));
        out.push(json!({
            "m": m,
            "l": pl,
            "lstar": polygon_of(&ls)?,
            "routes_agree": agree,
        }));
    }
    Ok(Report {
        command: "polygon".into(),
        passed,
        body: json!({"command": "polygon", "tower": tower_json(spec), "levels": out}),
        csv: slopes_csv(&rows),
    })
}

pub fn cstar(spec: &TowerSpec, levels: &[usize], n_s: Option<usize>, n_p: Option<u32>) -> CliResult<Report> {
    let c = spec.constants()?;
    let n_s = n_s.unwrap_or(2 * c.delta1 as usize + 1);
    let unit = bound_unit(spec)?;
    let mut out = Vec::new();
    let mut csv = String::from("m,n,ord_pi,trusted\n");
    let mut passed = true;
    for &m in levels {
        let ls = lstar(spec, m, Route::Galois)?;
        let trunc = match n_p {
            Some(np) => cstar_truncated(&ls, n_s, np),
            None => cstar_certified(&ls, n_s, 6),
        };
        let poly = polygon_of_cstar(&trunc, unit)?;
        let bounds = check_bounds(&poly, c.delta1);
        passed &= bounds.passed();
        for (n, x) in trunc.coeffs.iter().enumerate() {
            let ord = x.ord_pi.or(x.ord_pi_at_least).map_or(String::new(), |v| v.to_string());
            let _ = writeln!(csv, "{m},{n},{ord},{}", x.trusted());
        }
        out.push(json!({
            "m": m,
            "n_s": trunc.n_s,
            "n_p": trunc.n_p,
            "factors": trunc.factors,
            "trust_cap": trunc.trust_cap,
            "unit": unit,
            "ord_pi": trunc.coeffs.iter().map(|x| x.ord_pi).collect::<Vec<_>>(),
            "ord_pi_at_least": trunc.coeffs.iter().map(|x| x.ord_pi_at_least).collect::<Vec<_>>(),
            "polygon": poly,
            "bounds": bounds,
            "passed": bounds.passed(),
        }));
    }
    Ok(Report {
        command: "cstar".into(),
        passed,
        body: json!({"command": "cstar", "tower": tower_json(spec), "levels": out}),
        csv,
    })
}

/// Overrides for the Dwork truncation; unset fields take the defaults.
#[derive(Clone, Copy, Debug, Default)]
pub struct DworkOverrides {
    pub n_s: Option<usize>,
    pub n_t: Option<usize>,
    pub n_p: Option<u32>,
    pub b: Option<usize>,
}

impl DworkOverrides {
    pub fn resolve(&self, spec: &TowerSpec) -> CliResult<DworkParams> {
        let d = DworkParams::defaults(spec)?;
        let n_t = self.n_t.unwrap_or(d.n_t);
        let c = spec.constants()?;
        let params = DworkParams {
            n_s: self.n_s.unwrap_or(d.n_s),
            n_t,
            n_p: self.n_p.unwrap_or(d.n_p),
            // B follows N_T unless given.
            b: self.b.unwrap_or(c.big_d * n_t + c.big_d),
        };
        params.validate(spec)?;
        Ok(params)
    }
}

pub fn dwork(spec: &TowerSpec, ov: DworkOverrides, levels: &[usize], doubling: bool) -> CliResult<Report> {
    let params = ov.resolve(spec)?;
    let run = DworkRun::new(spec, params)?;
    let orders = order_report(spec, &run)?;
    let decay = decay_report(spec, &run)?;
    let n_max = params.n_s.min(6);
    let cons = consistency_report(spec, &run, levels, 2, n_max)?;
    let doubled = if doubling { Some(doubling_report(spec, params)?) } else { None };
    let doubling_ok = doubled.as_ref().is_none_or(|v| v.iter().all(DoublingLine::ok));
    let passed = orders.passed() && decay.pi_ok && decay.alpha_ok && cons.passed && doubling_ok;
    let mut csv = String::from("n,lambda,lambda_prime,ord_r,exact,hodge,hodge_ok,contact_ok\n");
    let opt = |x: Option<usize>| x.map_or(String::new(), |v| v.to_string());
    for r in &orders.records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.n,
            opt(r.lambda),
            opt(r.lambda_prime),
            r.ord_r.lower_bound(),
            r.ord_r.exact().is_some(),
            r.hodge,
            r.hodge_ok.map_or(String::new(), |b| b.to_string()),
            r.contact_ok.map_or(String::new(), |b| b.to_string()),
        );
    }
    let body = json!({
        "command": "dwork",
        "tower": tower_json(spec),
        "params": params,
        "working_precision": params.working_precision(spec.p()),
        "b": run.b.iter().map(|s| s.c.clone()).collect::<Vec<_>>(),
        "orders": orders,
        "decay": decay,
        "consistency": cons,
        "doubling": doubled,
        "passed": passed,
    });
    Ok(Report {
        command: "dwork".into(),
        passed,
        body,
        csv,
    })
}

pub fn verify_stability_report(spec: &TowerSpec, m_max: Option<usize>, routes: RouteChoice) -> CliResult<Report> {
    let c = spec.constants()?;
    let m_max = m_max.unwrap_or(c.m0 + 1).max(c.m0);
    let levels: Vec<usize> = (c.m0..=m_max).collect();
    let mut verdicts = Vec::new();
    for route in routes.routes() {
        verdicts.push(verify_stability(spec, &levels, route)?);
    }
    let v = &verdicts[0];
    let agree = (verdicts.len() > 1).then(|| {
        let a = serde_json::to_value(&verdicts[0]).unwrap();
        let b = serde_json::to_value(&verdicts[1]).unwrap();
        a == b
    });
    let passed = v.passed && agree.unwrap_or(true);
    let rows: Vec<(usize, Vec<String>)> = v.levels.iter().map(|l| (l.m, l.observed.clone())).collect();
    Ok(Report {
        command: "verify-stability".into(),
        passed,
        body: json!({
            "command": "verify-stability",
            "tower": tower_json(spec),
            "verdict": v,
            "routes_agree": agree,
            "passed": passed,
        }),
        csv: slopes_csv(&rows),
    })
}

/// Levels from `--m` / `--m-max`, defaulting to `[m~]`; `--m-max 0` is empty.
pub fn levels(spec: &TowerSpec, m: Option<usize>, m_max: Option<usize>) -> CliResult<Vec<usize>> {
    let c = spec.constants()?;
    let lv: Vec<usize> = match (m, m_max) {
        (Some(m), None) => vec![m],
        (None, Some(hi)) => (1..=hi).collect(),
        (Some(lo), Some(hi)) => (lo..=hi).collect(),
        (None, None) => vec![c.m_tilde],
    };
    if lv.contains(&0) {
        return Err(CliError::Input("levels must be positive".into()));
    }
    Ok(lv)
}

/// Size the global thread pool from `ASWT_THREADS`; ignored when unset.
pub fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("ASWT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Input(format!("ASWT_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}
