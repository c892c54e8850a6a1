//! Excision checks on the scalar presets and report encodings.

use etacalc_core::dirac::{DiracModel, ModelSpec, Preset, ProjectionKind};
use etacalc_core::index::pairing::{excision_check, PairingReport};

fn model(p: Preset) -> DiracModel {
    DiracModel::from_spec(&ModelSpec::preset(p)).unwrap()
}

#[test]
fn scalar_presets_agree_with_the_oracle() {
    for (p, index) in [(Preset::Constant, 0), (Preset::TanhCrossing, 1)] {
        for kind in [ProjectionKind::Graph, ProjectionKind::Wassermann] {
            let r = excision_check(p.name(), &model(p), kind).unwrap();
            assert!(r.passed, "{r:?}");
            assert_eq!(r.oracle_index, index);
            assert!((r.relative_total - (r.relative_bulk + r.relative_eta)).norm() == 0.0);
        }
    }
}

#[test]
fn reversed_crossing_flips_the_sign() {
    let spec = ModelSpec { a_minus: 1.0, a_plus: -1.0, ..ModelSpec::preset(Preset::TanhCrossing) };
    let r = excision_check("reversed", &DiracModel::from_spec(&spec).unwrap(), ProjectionKind::Graph).unwrap();
    assert!(r.passed, "{r:?}");
    assert_eq!(r.oracle_index, -1);
}

#[test]
fn report_encodings_carry_every_field() {
    let r = excision_check("tanh-crossing", &model(Preset::TanhCrossing), ProjectionKind::Graph).unwrap();
    let row = r.csv_row();
    assert_eq!(row.len(), PairingReport::CSV_HEADER.len());
    assert_eq!(row[0], "excision");
    let json: serde_json::Value = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    for key in ["absolute", "relative_bulk", "relative_eta", "relative_total", "oracle_index", "tolerances", "runtimes"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

#[test]
fn gapless_profile_is_rejected() {
    let spec = ModelSpec { a_minus: 0.0, ..ModelSpec::preset(Preset::TanhCrossing) };
    assert!(DiracModel::from_spec(&spec).and_then(|m| excision_check("gapless", &m, ProjectionKind::Graph)).is_err());
}
