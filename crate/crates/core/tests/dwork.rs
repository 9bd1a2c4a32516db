use aswt_core::dwork::consistency::{decay_report, doubling_report, quotient_check, series_trace_check};
use aswt_core::dwork::ef::build_ef;
use aswt_core::dwork::matrix::power_traces;
use aswt_core::dwork::{DworkParams, DworkRun, SeriesMatrix, TRing};
use aswt_core::{TowerConfig, TowerSpec};

fn tower(json: &str) -> TowerSpec {
    let cfg: TowerConfig = serde_json::from_str(json).unwrap();
    TowerSpec::from_config(&cfg).unwrap()
}

fn towers() -> Vec<TowerSpec> {
    vec![
        tower(r#"{"p":2,"rows":[{"i":0,"coeffs":[0,0,0,1]}]}"#),
        tower(r#"{"p":2,"rows":[{"i":0,"coeffs":[0,1]},{"i":1,"coeffs":[0,0,0,1]}]}"#),
        tower(r#"{"p":3,"rows":[{"i":0,"coeffs":[0,0,1]}]}"#),
        tower(r#"{"p":2,"a":2,"rows":[{"i":0,"coeffs":[0,[0,1],0,1]}]}"#),
    ]
}

/// Using `sigma` instead of `sigma^{-1}` throughout conjugates the operator;
/// the traces of its powers do not change.
#[test]
fn traces_do_not_depend_on_the_frobenius_generator() {
    let t = tower(r#"{"p":2,"a":2,"rows":[{"i":0,"coeffs":[0,[0,1],0,1]}]}"#);
    let params = DworkParams { n_s: 4, n_t: 8, n_p: 8, b: 30 };
    let ring = TRing::new(2, params.working_precision(2), 2, params.n_t);
    let alphas = build_ef(&t, &ring, 2 * (params.b - 1) + 1).unwrap();
    let m_inv = SeriesMatrix::dwork(&ring, &alphas, params.b);
    let fwd: Vec<_> = alphas.iter().map(|a| ring.frob(a)).collect();
    // dwork() applies sigma^{-1}; pre-applying sigma twice yields sigma overall.
    let fwd2: Vec<_> = fwd.iter().map(|a| ring.frob(a)).collect();
    let m_fwd = SeriesMatrix::dwork(&ring, &fwd2, params.b);
    let a_inv = m_inv.semilinear_power(&ring);
    let a_fwd = m_fwd.mul(&ring, &m_fwd.map(|s| ring.frob(s)));
    let t_inv = power_traces(&ring, &a_inv, params.n_s).unwrap();
    let t_fwd = power_traces(&ring, &a_fwd, params.n_s).unwrap();
    assert_eq!(t_inv, t_fwd);
}

#[test]
fn series_identities() {
    for t in towers() {
        let run = DworkRun::with_defaults(&t).unwrap();
        for k in 1..=2 {
            assert!(series_trace_check(&t, &run, k).unwrap(), "S_f(T,{k}) for {:?}", t.to_config());
        }
        assert!(quotient_check(&t, &run, 3).unwrap(), "{:?}", t.to_config());
    }
}

#[test]
fn decay_bounds() {
    for t in towers() {
        let run = DworkRun::with_defaults(&t).unwrap();
        let d = decay_report(&t, &run).unwrap();
        assert!(d.pi_ok && d.alpha_ok, "{:?}: {d:?}", t.to_config());
        assert!(d.alpha_checked_up_to > 0);
    }
}

#[test]
fn doubling_two_row_tower() {
    let t = &towers()[1];
    let lines = doubling_report(t, DworkParams::defaults(t).unwrap()).unwrap();
    for l in &lines {
        assert!(l.ok(), "{l:?}");
    }
}
