//! End-to-end behaviour of the built-in models through the public API:
//! workflow runs drain into the expected stores, exhaustive bounded search
//! finds no stuck states, and the coloured variants exercise every
//! transition under both scheduling policies.

use petriproof_core::cpn::{self, ChoicePolicy};
use petriproof_core::cpn::monitor::{run_with_monitor, stats_to_csv, MonitorKind};
use petriproof_core::models::{self, MODEL_NAMES};
use petriproof_core::sim::{bounded_explore, run_trace, TraceEnd};
use petriproof_core::value::Value;

/// Expected terminal store and its token count once a workflow completes.
const WORKFLOW_SINKS: [(&str, &str, u64); 6] = [
    ("ecdsa-keygen", "Keys Store", 5),
    ("ecdsa-siggen", "Signature Store", 3),
    ("ecdsa-sigverify", "Accept / Reject", 1),
    ("lps-calc-location", "Provers' Distance Store", 4),
    ("lps-gen-proof", "Signed Location Proofs Store", 1),
    ("lps-verify-proof", "Accept / Reject Location Proof", 1),
];

#[test]
fn workflow_models_complete_and_drain_into_their_sinks() {
    for (name, sink, expected) in WORKFLOW_SINKS {
        let net = models::hlpn_net(name).expect("built-in model");
        for seed in 0..5 {
            let trace = run_trace(&net, 200, seed).expect("run");
            assert_eq!(
                trace.end,
                TraceEnd::Completed,
                "{name} seed {seed} should complete, got {:?} after {} firings",
                trace.end,
                trace.firings.len()
            );
            let sink_id = net.place_id(sink).expect("sink place");
            assert_eq!(
                trace.final_marking.bag(sink_id).size(),
                expected,
                "{name} seed {seed}: wrong token count in {sink}"
            );
            for place in net.places() {
                if place.name != sink {
                    let id = net.place_id(&place.name).unwrap();
                    assert!(
                        trace.final_marking.bag(id).is_empty(),
                        "{name} seed {seed}: residual tokens in {}",
                        place.name
                    );
                }
            }
        }
    }
}

#[test]
fn signature_verification_workflow_accepts() {
    let net = models::hlpn_net("ecdsa-sigverify").expect("model");
    let trace = run_trace(&net, 200, 1).expect("run");
    let verdict = net.place_id("Accept / Reject").unwrap();
    assert_eq!(trace.final_marking.bag(verdict).count(&Value::sym("A")), 1);
}

#[test]
fn bounded_search_covers_every_place_without_deadlock() {
    for name in MODEL_NAMES {
        let net = models::hlpn_net(name).expect("model");
        let report = bounded_explore(&net, 10_000).expect("explore");
        assert!(!report.truncated, "{name}: state space exceeds bound");
        assert!(
            report.uncovered_places.is_empty(),
            "{name}: unreachable places {:?}",
            report.uncovered_places
        );
        assert!(
            report.deadlocks.is_empty(),
            "{name}: {} deadlocked markings",
            report.deadlocks.len()
        );
        assert!(report.completions > 0, "{name}: no completed marking found");
    }
}

#[test]
fn composite_models_complete() {
    for name in ["ecdsa-full", "lps-full"] {
        let net = models::hlpn_net(name).expect("composite");
        let trace = run_trace(&net, 500, 0).expect("run");
        assert_eq!(
            trace.end,
            TraceEnd::Completed,
            "{name} stopped with {:?} after {} firings",
            trace.end,
            trace.firings.len()
        );
    }
}

#[test]
fn coloured_models_fire_every_transition_across_a_seed_ensemble() {
    for name in MODEL_NAMES {
        for timed in [false, true] {
            let model = models::cpn_model(name, timed).expect("model");
            let mut fired = vec![false; model.transitions.len()];
            for seed in 0..20 {
                let run = cpn::run(&model, 500, seed, ChoicePolicy::SeededRandom).expect("run");
                for event in &run.events {
                    fired[event.trans] = true;
                }
            }
            for (t, hit) in fired.iter().enumerate() {
                assert!(
                    hit,
                    "{name} (timed={timed}): transition {} never fired in 20 seeds",
                    model.transitions[t].name
                );
            }
        }
    }
}

#[test]
fn priority_policy_runs_every_coloured_model_to_quiescence() {
    for name in MODEL_NAMES {
        let model = models::cpn_model(name, false).expect("model");
        let run = cpn::run(&model, 500, 3, ChoicePolicy::Priority).expect("run");
        assert!(run.completed, "{name}: priority run hit the step limit");
        assert!(!run.events.is_empty(), "{name}: nothing fired");
    }
}

#[test]
fn timed_key_generation_fires_only_at_odd_clocks() {
    let model = models::cpn_model("ecdsa-keygen", true).expect("model");
    for seed in 0..10 {
        let run = cpn::run(&model, 500, seed, ChoicePolicy::SeededRandom).expect("run");
        assert!(!run.events.is_empty());
        for event in &run.events {
            assert!(event.clock >= 1, "seed {seed}: firing before clock 1");
            assert_eq!(
                event.clock % 2,
                1,
                "seed {seed}: transition {} fired at even clock {}",
                model.transitions[event.trans].name,
                event.clock
            );
        }
    }
}

#[test]
fn monitor_csv_reports_every_place_with_consistent_statistics() {
    let model = models::cpn_model("lps-gen-proof", false).expect("model");
    let run = run_with_monitor(&model, 500, 7, ChoicePolicy::SeededRandom, MonitorKind::Discrete)
        .expect("run");
    assert_eq!(run.stats.len(), model.places.len());
    for s in &run.stats {
        assert!(!s.empty, "{}: monitor saw no observations", s.place);
        assert!(s.min <= s.max, "{}: min above max", s.place);
        let implied = s.average * s.count as f64;
        assert!(
            (implied - s.sum as f64).abs() <= 1e-9 * (s.sum as f64).max(1.0),
            "{}: average * count = {implied} disagrees with sum {}",
            s.place,
            s.sum
        );
    }
    let csv = stats_to_csv(&run.stats);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("place,count,sum,average,min,max"));
    assert_eq!(lines.count(), model.places.len());
}
