use maxwave_core::explab::*;
use maxwave_core::Error;

fn records(pairs: &[(f64, f64)]) -> Vec<Record> {
    pairs.iter().map(|&(s, r)| Record::new(s, r, 1.0).unwrap()).collect()
}

#[test]
fn exact_power_law() {
    let rs = records(&[(8.0, 3.0 * 8f64.sqrt()), (16.0, 12.0), (64.0, 24.0), (128.0, 3.0 * 128f64.sqrt())]);
    let fit = fit_exponent(&rs).unwrap();
    assert!((fit.alpha - 0.5).abs() < 1e-12);
    assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(fit.residual < 1e-12);
}

#[test]
fn constant_ratio_has_zero_slope() {
    let fit = fit_exponent(&records(&[(8.0, 2.5), (32.0, 2.5), (256.0, 2.5)])).unwrap();
    assert!(fit.alpha.abs() < 1e-12);
    assert!(fit.residual < 1e-12);
}

#[test]
fn three_point_fit_closed_form() {
    // at x = 0, 1, 2 (in units of ln 2) the OLS slope is (y2 - y0) / 2
    let ys = [0.3f64, 1.1, 0.9];
    let rs = records(&[(1.0, ys[0].exp()), (2.0, ys[1].exp()), (4.0, ys[2].exp())]);
    let fit = fit_exponent(&rs).unwrap();
    let l = 2f64.ln();
    let slope = (ys[2] - ys[0]) / (2.0 * l);
    assert!((fit.alpha - slope).abs() < 1e-12);
    let mean = ys.iter().sum::<f64>() / 3.0;
    let resid: Vec<f64> = (0..3).map(|i| ys[i] - (mean + slope * l * (i as f64 - 1.0))).collect();
    let rms = (resid.iter().map(|r| r * r).sum::<f64>() / 3.0).sqrt();
    assert!((fit.residual - rms).abs() < 1e-12);
}

#[test]
fn fit_rejects_bad_data() {
    assert!(matches!(fit_exponent(&[]), Err(Error::Data(_))));
    assert!(matches!(fit_exponent(&records(&[(8.0, 1.0), (16.0, 2.0)])), Err(Error::Data(_))));
    let zero = vec![
        Record { scale: 8.0, lhs: 0.0, normalizer: 1.0, ratio: 0.0 },
        Record { scale: 16.0, lhs: 1.0, normalizer: 1.0, ratio: 1.0 },
        Record { scale: 32.0, lhs: 1.0, normalizer: 1.0, ratio: 1.0 },
    ];
    assert!(matches!(fit_exponent(&zero), Err(Error::Data(_))));
    assert!(matches!(Record::new(8.0, 1.0, 0.0), Err(Error::UndefinedRatio(_))));
}

#[test]
fn ids_round_trip() {
    for id in ExperimentId::ALL {
        assert_eq!(id.to_string().parse::<ExperimentId>().unwrap(), id);
        let json = serde_json::to_string(&id).unwrap();
        assert_eq!(json, format!("\"{id}\""));
        assert!(ExperimentConfig::new(id).validate().is_ok(), "{id}");
        assert!(ExperimentConfig::smoke(id).validate().is_ok(), "{id}");
    }
    assert!(matches!("nope".parse::<ExperimentId>(), Err(Error::Argument(_))));
}

#[test]
fn config_validation() {
    let base = ExperimentConfig::new(ExperimentId::MaximalKnapp);
    let bad = [
        ExperimentConfig { scales: vec![16, 32], ..base.clone() },
        ExperimentConfig { scales: vec![16, 48, 64], ..base.clone() },
        ExperimentConfig { scales: vec![32, 16, 64], ..base.clone() },
        ExperimentConfig { scales: vec![64, 128, 512], ..base.clone() },
        ExperimentConfig { scales: vec![4, 8, 16], ..base.clone() },
        ExperimentConfig { seeds: vec![], ..base.clone() },
        ExperimentConfig { dt: Some(0.5), ..base.clone() },
        ExperimentConfig { dt: Some(0.0), ..base.clone() },
    ];
    for c in bad {
        assert!(matches!(c.validate(), Err(Error::Argument(_))), "{c:?}");
    }
    let wp = ExperimentConfig { scales: vec![8, 16, 32], ..ExperimentConfig::new(ExperimentId::WavepacketSuite) };
    assert!(wp.validate().is_err());
    let tc = ExperimentConfig { scales: vec![16, 32, 64], ..ExperimentConfig::new(ExperimentId::TinycapSharp) };
    assert!(matches!(tc.validate(), Err(Error::Argument(_))));
}

#[test]
fn config_from_json_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"experiment": "l2xt-knapp", "scales": [8, 16, 32]}"#).unwrap();
    let c = ExperimentConfig::load(&p).unwrap();
    assert_eq!(c.seeds, vec![7]);
    assert_eq!(c.dt(), 0.125);
    assert!(matches!(ExperimentConfig::load(&dir.path().join("missing.json")), Err(Error::Io { .. })));
}

#[test]
fn smoke_run_report_is_stable() {
    let c = ExperimentConfig::smoke(ExperimentId::MaximalKnapp);
    let run = run_experiment(&c).unwrap();
    assert_eq!(run.series.len(), 1);
    assert_eq!(run.series[0].records.len(), 3);
    assert!(run.series[0].records.iter().all(|r| r.ratio > 0.0));

    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = emit_report(&run, &dir.path().join("a")).unwrap();
    let again = run_experiment(&c).unwrap();
    let (csv2, json2) = emit_report(&again, &dir.path().join("b")).unwrap();
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&csv2).unwrap());
    assert_eq!(std::fs::read(&json).unwrap(), std::fs::read(&json2).unwrap());

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("series,scale,lhs,normalizer,ratio"));
    assert_eq!(lines.count(), 3);

    assert_eq!(load_report(&json).unwrap(), run);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    for key in ["experiment", "config", "reference", "window", "series", "checks", "pass"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["experiment"], "maximal-knapp");
    assert_eq!(v["reference"]["exponent"], 0.25);
}

#[test]
fn empty_report_is_rejected() {
    let mut run = run_experiment(&ExperimentConfig::smoke(ExperimentId::MaximalKnapp)).unwrap();
    run.series[0].records.clear();
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_report(&run, dir.path()), Err(Error::Data(_))));
}

#[test]
fn unwritable_report_path() {
    let run = run_experiment(&ExperimentConfig::smoke(ExperimentId::MaximalKnapp)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    assert!(matches!(emit_report(&run, &file.join("sub")), Err(Error::Io { .. })));
}

#[test]
fn window_acceptance() {
    let w = ExperimentId::MaximalKnapp.window();
    let fit = |alpha, residual| Fit { alpha, intercept: 0.0, residual };
    assert!(w.accepts(&fit(0.25, 0.01)));
    assert!(!w.accepts(&fit(0.35, 0.01)));
    assert!(!w.accepts(&fit(0.25, 0.06)));
    assert!(ExperimentId::WhitneyProduct.window().is_open());
}

#[test]
fn whitney_grid_holds_the_annulus() {
    assert_eq!(whitney_grid(32).unwrap().l(), 94.0);
    for n in [16, 32, 64] {
        assert!(whitney_grid(n).unwrap().contains_annulus());
    }
}

#[test]
fn verify_suite_passes() {
    for c in verify_suite().unwrap() {
        assert!(c.pass, "{} = {:e}", c.name, c.value);
    }
}

#[test]
fn every_smoke_config_runs() {
    for id in ExperimentId::ALL {
        let run = run_experiment(&ExperimentConfig::smoke(id)).unwrap_or_else(|e| panic!("{id}: {e}"));
        assert!(!run.series.is_empty(), "{id}");
        for s in &run.series {
            assert!(s.fit.alpha.is_finite() && s.fit.residual.is_finite(), "{id} {}", s.name);
        }
    }
}
