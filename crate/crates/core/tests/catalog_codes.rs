use chordpack::catalog::CatalogEntry;
use chordpack::manifolds::CodeFile;
use chordpack::packing::{self, Code};
use chordpack::VolumeModel;

#[test]
fn named_codes_meet_expectations() {
    for name in ["C1", "C2", "C3", "C4", "C1-m2", "C1-m3", "C2-m2", "C2-m3"] {
        let entry = CatalogEntry::by_name(name).unwrap();
        let code = entry.build().unwrap();
        assert_eq!(code.manifold(), &entry.manifold);
        let report = packing::analyze(&code, VolumeModel::SmallBall).unwrap();
        for check in entry.check(&report) {
            assert!(check.pass, "{name}: {check:?}");
        }
        assert!(
            report.violations.is_empty(),
            "{name}: {:?}",
            report.violations
        );
    }
}

#[test]
fn code_files_round_trip() {
    for name in ["C2", "C3"] {
        let code = CatalogEntry::by_name(name).unwrap().build().unwrap();
        let text = CodeFile::from_points(code.manifold(), code.points())
            .to_json()
            .unwrap();
        let (m, points) = CodeFile::from_json(&text).unwrap().to_points().unwrap();
        let back = Code::new(m, points).unwrap();
        let a = packing::min_distance(&code).unwrap();
        let b = packing::min_distance(&back).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn duplicate_codewords_are_rejected() {
    let code = CatalogEntry::by_name("C2").unwrap().build().unwrap();
    let mut points = code.points().to_vec();
    points.push(points[3].clone());
    let err = Code::new(*code.manifold(), points).unwrap_err();
    assert!(err.to_string().contains("duplicate codewords"));
}

#[test]
fn unknown_names_are_rejected() {
    assert!(CatalogEntry::by_name("C5").is_err());
    assert!(CatalogEntry::by_name("C1-m9").is_err());
    assert_eq!(CatalogEntry::names().len(), 14);
}
