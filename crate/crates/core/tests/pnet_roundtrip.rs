//! Stability guarantees: the model language round-trips through its printer,
//! incidence output matches the bundled reference tables byte for byte, and
//! every seeded entry point is reproducible.

use petriproof_core::cpn::{self, ChoicePolicy};
use petriproof_core::incidence::matrices;
use petriproof_core::models::{self, catalog, ModelId, MODEL_NAMES};
use petriproof_core::pnet::{parse_raw, print_raw};
use petriproof_core::sim::{replicate, SimConfig};
use petriproof_core::smtgen::{emit_property, emit_rule, property_ids, rule_ids};

#[test]
fn every_shipped_source_round_trips_through_the_printer() {
    for id in catalog() {
        let src = models::source(&id).expect("catalog source");
        let first = parse_raw(src).expect("shipped source parses");
        let printed = print_raw(&first);
        let second = parse_raw(&printed).expect("printed source parses");
        assert_eq!(first, second, "{id}: printer and parser disagree");
    }
    for name in ["ecdsa-full", "lps-full"] {
        let raw = models::composite_raw(name).expect("composite");
        let reparsed = parse_raw(&print_raw(&raw)).expect("printed composite parses");
        assert_eq!(raw, reparsed, "{name}: printer and parser disagree");
    }
}

#[test]
fn incidence_output_matches_bundled_reference_tables() {
    for name in MODEL_NAMES {
        let net = models::hlpn_net(name).expect("model");
        let expected = models::golden_incidence_csv(name).expect("reference table");
        let actual = matrices(&net).to_csv();
        assert_eq!(actual, expected, "{name}: incidence CSV drifted");
    }
}

#[test]
fn composite_incidence_satisfies_the_combined_identity() {
    for name in ["ecdsa-full", "lps-full"] {
        let net = models::hlpn_net(name).expect("composite");
        let set = matrices(&net);
        for p in 0..set.combined.rows() {
            for t in 0..set.combined.cols() {
                let expected = set.forward.get(p, t) - set.backward.get(p, t);
                assert_eq!(set.combined.get(p, t), expected, "{name} at ({p},{t})");
            }
        }
    }
}

#[test]
fn seeded_replication_is_reproducible() {
    let net = models::hlpn_net("ecdsa-siggen").expect("model");
    let config = SimConfig {
        firings: 100,
        replications: 5,
        seed: 42,
        alpha: 0.05,
    };
    let a = replicate(&net, config).expect("first run");
    let b = replicate(&net, config).expect("second run");
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn seeded_coloured_runs_are_reproducible() {
    for name in MODEL_NAMES {
        let model = models::cpn_model(name, true).expect("model");
        let a = cpn::run(&model, 300, 9, ChoicePolicy::SeededRandom).expect("first");
        let b = cpn::run(&model, 300, 9, ChoicePolicy::SeededRandom).expect("second");
        assert_eq!(a, b, "{name}: identical seeds diverged");
    }
}

#[test]
fn smt_emission_is_byte_stable() {
    for id in property_ids() {
        let a = emit_property(id).expect("emit");
        let b = emit_property(id).expect("emit");
        assert_eq!(a.render(), b.render(), "{id}: emission not deterministic");
    }
    for id in rule_ids() {
        let a = emit_rule(id).expect("emit");
        let b = emit_rule(id).expect("emit");
        assert_eq!(a.render(), b.render(), "{id}: emission not deterministic");
    }
}

#[test]
fn catalog_identifiers_parse_back_from_display_form() {
    for id in catalog() {
        let shown = id.to_string();
        let mut parts = shown.split('/');
        let name = parts.next().unwrap();
        let layer = parts.next().unwrap();
        let rebuilt = match layer {
            "hlpn" => ModelId::hlpn(name),
            "cpn" => ModelId::cpn(name, parts.next().unwrap() == "timed"),
            other => panic!("unexpected layer {other}"),
        };
        assert_eq!(rebuilt, id);
    }
}
