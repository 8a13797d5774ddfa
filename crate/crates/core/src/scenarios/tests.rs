use super::*;

fn quick(id: ScenarioId) -> ScenarioSpec {
    let mut spec = ScenarioSpec::default_for(id);
    spec.dictionary.grid = 3;
    match id {
        ScenarioId::DoublePlane => spec.resolutions = vec![4, 8],
        ScenarioId::TranslatedSpheres => {
            spec.resolutions = vec![4];
            spec.ells = vec![4.0, 8.0];
        }
        ScenarioId::SphereVerification => {
            spec.resolutions = vec![4, 8];
            spec.radii = vec![1.0];
        }
        ScenarioId::LatitudeCircles => spec.resolutions = vec![4, 8],
    }
    spec
}

#[test]
fn defaults_validate() {
    for id in ScenarioId::ALL {
        ScenarioSpec::default_for(id).validate().unwrap();
    }
}

#[test]
fn ids_round_trip_through_names() {
    for id in ScenarioId::ALL {
        assert_eq!(ScenarioId::parse(id.name()).unwrap(), id);
        let json = serde_json::to_string(&id).unwrap();
        assert_eq!(json, format!("\"{}\"", id.name()));
    }
    assert!(matches!(ScenarioId::parse("cube"), Err(Error::Config(_))));
}

#[test]
fn rejects_non_increasing_lists() {
    let mut spec = ScenarioSpec::default_for(ScenarioId::SphereVerification);
    spec.resolutions = vec![16, 16];
    assert!(matches!(spec.validate(), Err(Error::Config(m)) if m.contains("resolutions")));
    spec.resolutions = vec![32, 16];
    assert!(spec.validate().is_err());
    spec.resolutions = vec![];
    assert!(spec.validate().is_err());
    spec.resolutions = vec![0, 4];
    assert!(spec.validate().is_err());

    let mut spec = ScenarioSpec::default_for(ScenarioId::TranslatedSpheres);
    spec.ells = vec![8.0, 4.0];
    assert!(matches!(spec.validate(), Err(Error::Config(m)) if m.contains("ells")));
    spec.ells = vec![];
    assert!(spec.validate().is_err());
    spec.ells = vec![-1.0, 2.0];
    assert!(spec.validate().is_err());
}

#[test]
fn rejects_bad_geometry_parameters() {
    let mut spec = ScenarioSpec::default_for(ScenarioId::DoublePlane);
    spec.radii = vec![1.0, 2.0];
    assert!(spec.validate().is_err());
    let mut spec = ScenarioSpec::default_for(ScenarioId::LatitudeCircles);
    spec.polar_angles = vec![0.0];
    assert!(spec.validate().is_err());
    spec.polar_angles = vec![];
    assert!(spec.validate().is_err());
    let mut spec = ScenarioSpec::default_for(ScenarioId::SphereVerification);
    spec.radii = vec![f64::NAN];
    assert!(spec.validate().is_err());
}

#[test]
fn run_validates_first() {
    let mut spec = quick(ScenarioId::DoublePlane);
    spec.resolutions = vec![8, 4];
    assert!(matches!(run_scenario(&spec), Err(Error::Config(_))));
}

#[test]
fn spec_hash_tracks_parameters() {
    let a = ScenarioSpec::default_for(ScenarioId::SphereVerification);
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 8);
    b.seed = 1;
    assert_ne!(a.hash(), b.hash());
    assert!(a.file_stem().starts_with("sphere-verification-"));
}

#[test]
fn spec_toml_and_json_round_trip() {
    let spec = ScenarioSpec::default_for(ScenarioId::LatitudeCircles);
    let json = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<ScenarioSpec>(&json).unwrap(), spec);
    let text = toml::to_string(&spec).unwrap();
    assert_eq!(toml::from_str::<ScenarioSpec>(&text).unwrap(), spec);
    assert!(serde_json::from_str::<ScenarioSpec>(r#"{"id":"double-plane","resolutions":[4],"order":1,"bogus":1}"#).is_err());
}

#[test]
fn short_hash_is_sha256_prefix() {
    // sha256("abc") = ba7816bf...
    assert_eq!(short_hash(b"abc"), "ba7816bf");
}

#[test]
fn scalar_field_is_affine() {
    let g = ScalarField { constant: 1.0, gradient: vec![2.0, 0.0, -1.0] };
    assert_eq!(g.eval(&Vector::<3>::new(1.0, 5.0, 3.0)), 0.0);
    assert_eq!(ScalarField::constant(0.5).eval(&Vector::<2>::new(7.0, 7.0)), 0.5);
}

#[test]
fn verdict_comparisons() {
    assert!(Verdict::at_most("c", "q", 1.0, 1.0).passed);
    assert!(!Verdict::at_most("c", "q", f64::NAN, 1.0).passed);
    assert!(Verdict::at_least("c", "q", 2.0, 1.5).passed);
    assert!(!Verdict::new("c", "q", 1.0, Comparison::LessThan, 1.0).passed);
    assert!(Verdict::new("c", "q", 1.5, Comparison::GreaterThan, 1.0).passed);
}

#[test]
fn table_csv_and_columns() {
    let mut t = Table::new("t", &["name", "value"]);
    t.push(vec!["a,b".into(), 0.25.into()]);
    t.push(vec!["c".into(), 3usize.into()]);
    assert_eq!(t.to_csv(), "name,value\n\"a,b\",2.5e-1\nc,3e0\n");
    assert_eq!(t.column("value"), vec![0.25, 3.0]);
    assert!(t.column("name").is_empty());
    assert!(t.column("missing").is_empty());
}

#[test]
fn orders_from_levels() {
    let o = orders(&[(8, 4e-2), (16, 1e-2), (32, 2.5e-3)]);
    assert_eq!(o.len(), 2);
    for v in o {
        assert!((v - 2.0).abs() < 1e-12);
    }
}

#[test]
fn every_scenario_runs_deterministically() {
    for id in ScenarioId::ALL {
        let spec = quick(id);
        let a = run_scenario(&spec).unwrap();
        let b = run_scenario(&spec).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap(), "{}", id.name());
        assert_eq!(a.scenario, id.name());
        assert_eq!(a.spec_hash, spec.hash());
        assert!(a.timestamp.is_none());
        assert!(!a.tables.is_empty() && !a.verdicts.is_empty());
        for v in &a.verdicts {
            assert!(v.criterion.chars().next().unwrap().is_ascii_digit(), "{}", v.criterion);
        }
    }
}

#[test]
fn double_plane_cancels_exactly() {
    let report = run_scenario(&quick(ScenarioId::DoublePlane)).unwrap();
    for v in report.verdicts_for(criteria::CANCELLATION) {
        if v.quantity.contains("current action") || v.quantity.contains("H_avg") {
            assert!(v.passed, "{v:?}");
        }
    }
}

#[test]
fn report_files_are_written() {
    let spec = quick(ScenarioId::DoublePlane);
    let report = run_scenario(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = write_report(&report, &spec.file_stem(), dir.path()).unwrap();
    assert_eq!(paths.len(), 1 + report.tables.len());
    let json = std::fs::read_to_string(&paths[0]).unwrap();
    let back: ScenarioReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
}
