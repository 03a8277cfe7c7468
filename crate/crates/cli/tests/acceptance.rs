//! Release acceptance suite.
//!
//! Each test checks one release gate end to end and prints a single
//! `ACCEPTANCE <n> <name>: PASS` line once every assertion holds. Budgets
//! and tolerances are pinned as constants next to the tests that use them;
//! a failure in any assertion fails the gate.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use petriproof_core::cpn::monitor::{run_with_monitor, MonitorKind};
use petriproof_core::cpn::{self, ChoicePolicy};
use petriproof_core::incidence::matrices;
use petriproof_core::models;
use petriproof_core::pnet::{parse_model, ParsedModel};
use petriproof_core::scheme::{
    batch_verify, generate_domain_parameters, generate_keys, keypair_from_scalar, sign, verify,
    BatchItem, BatchOutcome, CurveProfile, HashKind, Point,
};
use petriproof_core::sim::{bounded_explore, replicate, SimConfig};
use petriproof_core::smtgen::{
    emit_property_unbound, property_ids, resolve_solver, run_solver, verify_all, Verdict,
};

fn pass(number: u32, name: &str) {
    println!("ACCEPTANCE {number} {name}: PASS");
}

fn pass_timed(number: u32, name: &str, elapsed: Duration, budget: Duration) {
    println!("ACCEPTANCE {number} {name}: PASS ({elapsed:.2?} of {budget:?} budget)");
}

// ---------------------------------------------------------------------------
// 1. Incidence matrices match the bundled reference tables
// ---------------------------------------------------------------------------

const INCIDENCE_BUDGET: Duration = Duration::from_secs(1);

/// Parses one incidence CSV into `(section, place, transition) -> entry`.
/// Names never contain commas, so a plain field split is exact.
fn incidence_cells(csv: &str) -> BTreeMap<(String, String, String), i64> {
    let mut cells = BTreeMap::new();
    let mut section = String::new();
    let mut columns: Vec<String> = Vec::new();
    for line in csv.lines() {
        if line.is_empty() {
            continue;
        }
        if !line.contains(',') {
            section = line.to_string();
            columns.clear();
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0] == "place" {
            columns = fields[1..].iter().map(|s| s.to_string()).collect();
            continue;
        }
        assert_eq!(
            fields.len(),
            columns.len() + 1,
            "ragged row in section {section}"
        );
        for (column, raw) in columns.iter().zip(&fields[1..]) {
            let entry: i64 = raw.parse().expect("incidence entries are exact integers");
            cells.insert(
                (section.clone(), fields[0].to_string(), column.clone()),
                entry,
            );
        }
    }
    cells
}

#[test]
fn acceptance_1_incidence_tables() {
    let started = Instant::now();
    for name in models::MODEL_NAMES {
        let net = models::hlpn_net(name).expect("catalog model compiles");
        let computed = matrices(&net).to_csv();
        let golden = models::golden_incidence_csv(name).expect("bundled table exists");
        let ours = incidence_cells(&computed);
        let reference = incidence_cells(golden);
        assert_eq!(
            ours.len(),
            reference.len(),
            "{name}: table shapes differ ({} cells vs {})",
            ours.len(),
            reference.len()
        );
        for (key, expected) in &reference {
            let got = ours.get(key);
            assert_eq!(
                got,
                Some(expected),
                "{name}: cell {key:?} is {got:?}, reference says {expected}"
            );
        }
        assert_eq!(computed, golden, "{name}: rendered CSV differs");
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < INCIDENCE_BUDGET,
        "incidence suite took {elapsed:?}, budget is {INCIDENCE_BUDGET:?}"
    );
    pass_timed(1, "incidence-golden-tables", elapsed, INCIDENCE_BUDGET);
}

// ---------------------------------------------------------------------------
// 2. All six properties come back unsat from a real solver
// ---------------------------------------------------------------------------

const SOLVER_BUDGET_SECONDS: f64 = 10.0;

#[test]
fn acceptance_2_smt_verdicts() {
    let solver = resolve_solver(None)
        .expect("an SMT solver must be reachable: install z3 or set PETRIPROOF_SOLVER");
    let rows = verify_all(&solver, SOLVER_BUDGET_SECONDS);
    assert_eq!(rows.len(), 6, "exactly six properties ship");
    for row in &rows {
        let verdict = row
            .outcome
            .as_ref()
            .unwrap_or_else(|e| panic!("{}: solver failed: {e}", row.property));
        assert_eq!(
            verdict.result,
            Verdict::Unsat,
            "{}: expected unsat, solver said {}",
            row.property,
            verdict.result
        );
        assert!(
            verdict.elapsed_seconds < SOLVER_BUDGET_SECONDS,
            "{}: took {:.2}s, budget is {SOLVER_BUDGET_SECONDS}s",
            row.property,
            verdict.elapsed_seconds
        );
    }
    // Negative control: with the binding assertions removed the arrays are
    // unconstrained, so every property must flip to sat.
    for id in property_ids() {
        let script = emit_property_unbound(id).expect("property emits");
        let verdict = run_solver(&script, &solver, SOLVER_BUDGET_SECONDS)
            .unwrap_or_else(|e| panic!("{id}: negative control failed to run: {e}"));
        assert_eq!(
            verdict.result,
            Verdict::Sat,
            "{id}: unbound control must be sat"
        );
    }
    pass(2, "smt-verdict-suite");
}

// ---------------------------------------------------------------------------
// 3. Crypto layer versus independent oracles
// ---------------------------------------------------------------------------

const CRYPTO_BUDGET: Duration = Duration::from_secs(30);
const MESSAGES_PER_SCALAR: usize = 100;
const TAMPER_TRIALS: usize = 1000;
const BATCH_TRIALS: usize = 500;
const MAX_BATCH_LEN: usize = 8;

const TOY_P: i64 = 17;
const TOY_ORDER: u64 = 19;

/// Brute-force inverse modulo 17, by exhaustive search.
fn oracle_inv(a: i64) -> i64 {
    let a = a.rem_euclid(TOY_P);
    (1..TOY_P)
        .find(|x| (a * x) % TOY_P == 1)
        .expect("nonzero residues modulo a prime invert")
}

/// Chord-and-tangent addition on y^2 = x^3 + 2x + 2 over F_17, written with
/// plain machine integers so it shares nothing with the library code.
fn oracle_add(p: Option<(i64, i64)>, q: Option<(i64, i64)>) -> Option<(i64, i64)> {
    let (x1, y1) = match p {
        None => return q,
        Some(v) => v,
    };
    let (x2, y2) = match q {
        None => return p,
        Some(v) => v,
    };
    if x1 == x2 && (y1 + y2) % TOY_P == 0 {
        return None;
    }
    let slope = if (x1, y1) == (x2, y2) {
        (3 * x1 * x1 + 2).rem_euclid(TOY_P) * oracle_inv(2 * y1) % TOY_P
    } else {
        (y2 - y1).rem_euclid(TOY_P) * oracle_inv(x2 - x1) % TOY_P
    };
    let x3 = (slope * slope - x1 - x2).rem_euclid(TOY_P);
    let y3 = (slope * (x1 - x3) - y1).rem_euclid(TOY_P);
    Some((x3, y3))
}

fn oracle_scalar_mul(k: u64, g: (i64, i64)) -> Option<(i64, i64)> {
    let mut acc = None;
    for _ in 0..k {
        acc = oracle_add(acc, Some(g));
    }
    acc
}

fn as_pair(point: &Point) -> Option<(i64, i64)> {
    match point {
        Point::Infinity => None,
        Point::Affine { x, y } => Some((
            x.to_u64().expect("toy coordinates fit u64") as i64,
            y.to_u64().expect("toy coordinates fit u64") as i64,
        )),
    }
}

fn as_point(pair: Option<(i64, i64)>) -> Point {
    match pair {
        None => Point::Infinity,
        Some((x, y)) => Point::affine(x as u64, y as u64),
    }
}

#[test]
fn acceptance_3_crypto_oracles() {
    let started = Instant::now();
    let toy = generate_domain_parameters(CurveProfile::Toy).expect("toy profile builds");

    // Scalar multiples of the generator versus repeated oracle addition,
    // exhaustively over the whole group.
    let g = as_pair(&toy.generator()).expect("generator is affine");
    let mut table = Vec::new();
    for k in 0..=TOY_ORDER {
        let expected = oracle_scalar_mul(k, g);
        let got = as_pair(&toy.scalar_mul(&BigUint::from(k), &toy.generator()));
        assert_eq!(got, expected, "scalar multiple {k}G");
        table.push(expected);
    }
    assert_eq!(table[TOY_ORDER as usize], None, "the generator has order 19");

    // The subgroup is the whole curve: 18 affine points plus infinity.
    let mut on_curve = BTreeSet::new();
    for x in 0..TOY_P {
        for y in 0..TOY_P {
            if (y * y - (x * x * x + 2 * x + 2)).rem_euclid(TOY_P) == 0 {
                on_curve.insert((x, y));
            }
        }
    }
    let reached: BTreeSet<(i64, i64)> = table.iter().flatten().copied().collect();
    assert_eq!(reached, on_curve, "scalar multiples must sweep the curve");
    assert_eq!(on_curve.len(), (TOY_ORDER - 1) as usize);

    // The full 19 x 19 addition table versus the oracle.
    for a in 0..TOY_ORDER as usize {
        for b in 0..TOY_ORDER as usize {
            let expected = oracle_add(table[a], table[b]);
            let got = as_pair(&toy.add(&as_point(table[a]), &as_point(table[b])));
            assert_eq!(got, expected, "{a}G + {b}G");
        }
    }

    // Sign/verify round trip for every private scalar.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_acce);
    for d in 1..TOY_ORDER {
        let key = keypair_from_scalar(&toy, BigUint::from(d)).expect("scalar in range");
        for _ in 0..MESSAGES_PER_SCALAR {
            let mut message = [0u8; 24];
            rng.fill_bytes(&mut message);
            let sig = sign(&toy, &key.d, &message, HashKind::Sha256, &mut rng)
                .expect("signing terminates");
            assert!(
                verify(&toy, &key.q, &message, HashKind::Sha256, &sig),
                "round trip rejected for d = {d}"
            );
        }
    }

    // Tampered messages must all be rejected. This runs on the 256-bit
    // profile: its group is large enough that a one-bit flip cannot land
    // back on an accepting hash residue, whereas in a 19-element group a
    // random flip is accepted with probability about 2/19.
    let standard =
        generate_domain_parameters(CurveProfile::Standard).expect("standard profile builds");
    let mut rejected = 0usize;
    for _ in 0..TAMPER_TRIALS {
        let key = generate_keys(&standard, &mut rng);
        let mut message = [0u8; 32];
        rng.fill_bytes(&mut message);
        let sig = sign(&standard, &key.d, &message, HashKind::Sha256, &mut rng)
            .expect("signing terminates");
        let bit = rng.gen_range(0..message.len() * 8);
        message[bit / 8] ^= 1 << (bit % 8);
        if !verify(&standard, &key.q, &message, HashKind::Sha256, &sig) {
            rejected += 1;
        }
    }
    assert_eq!(
        rejected, TAMPER_TRIALS,
        "every tampered message must be rejected"
    );

    // Batch verification agrees with the per-item conjunction, including
    // the exact set of failing indices.
    for batch in 0..BATCH_TRIALS {
        let len = rng.gen_range(1..=MAX_BATCH_LEN);
        let mut storage = Vec::with_capacity(len);
        for _ in 0..len {
            let key = generate_keys(&toy, &mut rng);
            let mut message = vec![0u8; 12];
            rng.fill_bytes(&mut message);
            let mut sig = sign(&toy, &key.d, &message, HashKind::Sha256, &mut rng)
                .expect("signing terminates");
            if rng.gen_bool(0.3) {
                if rng.gen_bool(0.5) {
                    let bit = rng.gen_range(0..message.len() * 8);
                    message[bit / 8] ^= 1 << (bit % 8);
                } else {
                    let mut replacement = BigUint::from(rng.gen_range(1..TOY_ORDER));
                    while replacement == sig.s {
                        replacement = BigUint::from(rng.gen_range(1..TOY_ORDER));
                    }
                    sig.s = replacement;
                }
            }
            storage.push((key.q, message, sig));
        }
        let items: Vec<BatchItem> = storage
            .iter()
            .map(|(q, message, sig)| BatchItem {
                public_key: q,
                message: message.as_slice(),
                signature: sig,
            })
            .collect();
        let expected: Vec<usize> = items
            .iter()
            .enumerate()
            .filter(|(_, item)| {
                !verify(&toy, item.public_key, item.message, HashKind::Sha256, item.signature)
            })
            .map(|(index, _)| index)
            .collect();
        let mut batch_rng = ChaCha8Rng::seed_from_u64(0xbeef ^ batch as u64);
        match batch_verify(&toy, &items, HashKind::Sha256, &mut batch_rng) {
            BatchOutcome::AllValid => {
                assert!(expected.is_empty(), "batch {batch}: missed {expected:?}")
            }
            BatchOutcome::Invalid(found) => {
                assert_eq!(found, expected, "batch {batch}: wrong failing set")
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed < CRYPTO_BUDGET,
        "crypto suite took {elapsed:?}, budget is {CRYPTO_BUDGET:?}"
    );
    pass_timed(3, "crypto-oracle-suite", elapsed, CRYPTO_BUDGET);
}

// ---------------------------------------------------------------------------
// 4. Liveness: reachability, deadlock freedom, transition coverage
// ---------------------------------------------------------------------------

const STATE_BOUND: usize = 10_000;
const LIVENESS_BUDGET: Duration = Duration::from_secs(60);
const ENSEMBLE_SEEDS: u64 = 20;
const ENSEMBLE_STEPS: u64 = 500;

#[test]
fn acceptance_4_liveness() {
    let started = Instant::now();
    for name in models::MODEL_NAMES {
        let net = models::hlpn_net(name).expect("catalog model compiles");
        let report = bounded_explore(&net, STATE_BOUND).expect("exploration runs");
        assert!(
            !report.truncated,
            "{name}: state space exceeds the {STATE_BOUND}-state bound"
        );
        assert!(
            report.uncovered_places.is_empty(),
            "{name}: unreachable places {:?}",
            report.uncovered_places
        );
        assert!(
            report.deadlocks.is_empty(),
            "{name}: {} non-terminal deadlock(s)",
            report.deadlocks.len()
        );
        assert!(report.completions > 0, "{name}: workflow never completes");
    }
    for name in models::MODEL_NAMES {
        for timed in [false, true] {
            let model = models::cpn_model(name, timed).expect("catalog model compiles");
            let mut fired = BTreeSet::new();
            for seed in 0..ENSEMBLE_SEEDS {
                let run = cpn::run(&model, ENSEMBLE_STEPS, seed, ChoicePolicy::SeededRandom)
                    .expect("run terminates");
                fired.extend(run.events.iter().map(|e| e.trans));
            }
            let missing: Vec<&str> = (0..model.transitions.len())
                .filter(|t| !fired.contains(t))
                .map(|t| model.transitions[t].name.as_str())
                .collect();
            assert!(
                missing.is_empty(),
                "{name} (timed = {timed}): transitions never fired across \
                 {ENSEMBLE_SEEDS} seeds: {missing:?}"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < LIVENESS_BUDGET,
        "liveness suite took {elapsed:?}, budget is {LIVENESS_BUDGET:?}"
    );
    pass_timed(4, "liveness-and-coverage", elapsed, LIVENESS_BUDGET);
}

// ---------------------------------------------------------------------------
// 5. Monitor statistics identities
// ---------------------------------------------------------------------------

const STATS_REL_TOL: f64 = 1e-9;
/// The reference averages carry six decimal places, so a correctly rounded
/// table sits within half a unit in the sixth place of the exact ratio.
const PUBLISHED_AVG_TOL: f64 = 5e-7;

struct CountRow {
    model: &'static str,
    place: &'static str,
    count: u64,
    sum: u64,
    average: f64,
    min: u64,
    max: u64,
}

struct TimedRow {
    model: &'static str,
    place: &'static str,
    count: u64,
    average: f64,
    min: u64,
    max: u64,
}

/// Reference marking-size statistics for the untimed coloured models, one
/// recorded run each, counting the marking after every firing.
const DISCRETE_ROWS: &[CountRow] = &[
    CountRow { model: "ecdsa-keygen", place: "Inputs", count: 51, sum: 56, average: 1.098039, min: 0, max: 5 },
    CountRow { model: "ecdsa-keygen", place: "Domain Parameters Store", count: 51, sum: 454, average: 8.901961, min: 5, max: 10 },
    CountRow { model: "ecdsa-keygen", place: "Keys Store", count: 51, sum: 1178, average: 23.098039, min: 2, max: 47 },
    CountRow { model: "ecdsa-siggen", place: "Inputs", count: 51, sum: 204, average: 4.0, min: 4, max: 4 },
    CountRow { model: "ecdsa-siggen", place: "Coordinates Store", count: 51, sum: 377, average: 7.392157, min: 2, max: 13 },
    CountRow { model: "ecdsa-siggen", place: "Hash Integer Store", count: 51, sum: 280, average: 5.490196, min: 1, max: 12 },
    CountRow { model: "ecdsa-siggen", place: "Signature Pair 1 Store", count: 51, sum: 330, average: 6.470588, min: 2, max: 10 },
    CountRow { model: "ecdsa-siggen", place: "Signature Pair 2 Store", count: 51, sum: 393, average: 7.705882, min: 4, max: 10 },
    CountRow { model: "ecdsa-siggen", place: "Signature Store", count: 51, sum: 118, average: 2.313725, min: 0, max: 5 },
    CountRow { model: "ecdsa-sigverify", place: "Inputs", count: 51, sum: 153, average: 3.0, min: 3, max: 3 },
    CountRow { model: "ecdsa-sigverify", place: "Signatures Store", count: 51, sum: 123, average: 2.411765, min: 0, max: 5 },
    CountRow { model: "ecdsa-sigverify", place: "Hash Integer Store", count: 51, sum: 325, average: 6.372549, min: 2, max: 11 },
    CountRow { model: "ecdsa-sigverify", place: "Point Store", count: 51, sum: 429, average: 8.411765, min: 2, max: 15 },
    CountRow { model: "ecdsa-sigverify", place: "Coordinates Store", count: 51, sum: 175, average: 3.431373, min: 0, max: 8 },
    CountRow { model: "ecdsa-sigverify", place: "Accept / Reject", count: 51, sum: 354, average: 6.941176, min: 0, max: 11 },
    CountRow { model: "lps-calc-location", place: "Inputs", count: 51, sum: 204, average: 4.0, min: 4, max: 4 },
    CountRow { model: "lps-calc-location", place: "Points Store", count: 51, sum: 834, average: 16.352941, min: 4, max: 28 },
    CountRow { model: "lps-calc-location", place: "Provers' Distance Store", count: 51, sum: 696, average: 13.647059, min: 1, max: 27 },
    CountRow { model: "lps-gen-proof", place: "Inputs", count: 51, sum: 306, average: 6.0, min: 6, max: 6 },
    CountRow { model: "lps-gen-proof", place: "Context Information Store", count: 51, sum: 628, average: 12.313725, min: 4, max: 19 },
    CountRow { model: "lps-gen-proof", place: "LBS Information Store", count: 51, sum: 408, average: 8.0, min: 2, max: 16 },
    CountRow { model: "lps-gen-proof", place: "Location Proof Store", count: 51, sum: 511, average: 10.019608, min: 2, max: 18 },
    CountRow { model: "lps-gen-proof", place: "Signed Location Proofs Store", count: 51, sum: 340, average: 6.666667, min: 4, max: 9 },
    CountRow { model: "lps-verify-proof", place: "Inputs", count: 51, sum: 153, average: 3.0, min: 3, max: 3 },
    CountRow { model: "lps-verify-proof", place: "Extracted Context Information Store", count: 51, sum: 484, average: 9.490196, min: 2, max: 14 },
    CountRow { model: "lps-verify-proof", place: "Location Proofs Store", count: 51, sum: 417, average: 8.176471, min: 2, max: 14 },
    CountRow { model: "lps-verify-proof", place: "Verified Information Store", count: 51, sum: 286, average: 5.607843, min: 0, max: 11 },
    CountRow { model: "lps-verify-proof", place: "Accept / Reject Location Proof", count: 51, sum: 292, average: 5.725490, min: 0, max: 15 },
];

/// Reference statistics for the timed coloured models. Their averages are
/// weighted by holding time, so no sum column exists and only the bracket
/// identity applies.
const TIME_AVERAGE_ROWS: &[TimedRow] = &[
    TimedRow { model: "ecdsa-keygen", place: "Inputs", count: 7, average: 0.510204, min: 0, max: 5 },
    TimedRow { model: "ecdsa-keygen", place: "Domain Parameters Store", count: 52, average: 9.489796, min: 5, max: 10 },
    TimedRow { model: "ecdsa-keygen", place: "Keys Store", count: 47, average: 22.0, min: 2, max: 47 },
    TimedRow { model: "ecdsa-siggen", place: "Inputs", count: 18, average: 4.0, min: 4, max: 4 },
    TimedRow { model: "ecdsa-siggen", place: "Coordinates Store", count: 43, average: 6.242424, min: 2, max: 11 },
    TimedRow { model: "ecdsa-siggen", place: "Hash Integer Store", count: 9, average: 2.818182, min: 1, max: 4 },
    TimedRow { model: "ecdsa-siggen", place: "Signature Pair 1 Store", count: 36, average: 13.575758, min: 2, max: 34 },
    TimedRow { model: "ecdsa-siggen", place: "Signature Pair 2 Store", count: 8, average: 3.969697, min: 3, max: 7 },
    TimedRow { model: "ecdsa-siggen", place: "Signature Store", count: 4, average: 0.787879, min: 0, max: 2 },
    TimedRow { model: "ecdsa-sigverify", place: "Inputs", count: 32, average: 3.0, min: 3, max: 3 },
    TimedRow { model: "ecdsa-sigverify", place: "Signatures Store", count: 34, average: 1.589474, min: 0, max: 3 },
    TimedRow { model: "ecdsa-sigverify", place: "Hash Integer Store", count: 25, average: 7.621053, min: 2, max: 13 },
    TimedRow { model: "ecdsa-sigverify", place: "Point Store", count: 22, average: 5.294737, min: 2, max: 10 },
    TimedRow { model: "ecdsa-sigverify", place: "Coordinates Store", count: 21, average: 6.452632, min: 0, max: 12 },
    TimedRow { model: "ecdsa-sigverify", place: "Accept / Reject", count: 9, average: 3.178947, min: 0, max: 7 },
    TimedRow { model: "lps-calc-location", place: "Inputs", count: 17, average: 4.0, min: 4, max: 4 },
    TimedRow { model: "lps-calc-location", place: "Points Store", count: 52, average: 11.371429, min: 4, max: 19 },
    TimedRow { model: "lps-calc-location", place: "Provers' Distance Store", count: 37, average: 16.8, min: 4, max: 39 },
    TimedRow { model: "lps-gen-proof", place: "Inputs", count: 14, average: 6.0, min: 6, max: 6 },
    TimedRow { model: "lps-gen-proof", place: "Context Information Store", count: 26, average: 8.266667, min: 4, max: 12 },
    TimedRow { model: "lps-gen-proof", place: "LBS Information Store", count: 40, average: 6.733333, min: 2, max: 14 },
    TimedRow { model: "lps-gen-proof", place: "Location Proof Store", count: 32, average: 11.8, min: 2, max: 28 },
    TimedRow { model: "lps-gen-proof", place: "Signed Location Proofs Store", count: 6, average: 6.333333, min: 4, max: 8 },
    TimedRow { model: "lps-verify-proof", place: "Inputs", count: 16, average: 3.0, min: 3, max: 3 },
    TimedRow { model: "lps-verify-proof", place: "Extracted Context Information Store", count: 47, average: 6.941176, min: 2, max: 11 },
    TimedRow { model: "lps-verify-proof", place: "Location Proofs Store", count: 38, average: 9.441176, min: 2, max: 20 },
    TimedRow { model: "lps-verify-proof", place: "Verified Information Store", count: 25, average: 6.764706, min: 0, max: 18 },
    TimedRow { model: "lps-verify-proof", place: "Accept / Reject Location Proof", count: 7, average: 1.705882, min: 0, max: 5 },
];

#[test]
fn acceptance_5_statistics_identities() {
    // Every model and place appears in the reference tables.
    for name in models::MODEL_NAMES {
        let model = models::cpn_model(name, false).expect("catalog model compiles");
        for place in &model.places {
            assert!(
                DISCRETE_ROWS
                    .iter()
                    .any(|r| r.model == name && r.place == place.name),
                "{name}: no discrete reference row for place {}",
                place.name
            );
            assert!(
                TIME_AVERAGE_ROWS
                    .iter()
                    .any(|r| r.model == name && r.place == place.name),
                "{name}: no time-average reference row for place {}",
                place.name
            );
        }
    }

    for row in DISCRETE_ROWS {
        let average = row.sum as f64 / row.count as f64;
        let product = average * row.count as f64;
        let relative = (product - row.sum as f64).abs() / (row.sum as f64).max(1.0);
        assert!(
            relative <= STATS_REL_TOL,
            "{} / {}: average * count drifts from sum by {relative:e}",
            row.model,
            row.place
        );
        assert!(
            (average - row.average).abs() <= PUBLISHED_AVG_TOL,
            "{} / {}: table average {} is not sum/count = {average}",
            row.model,
            row.place,
            row.average
        );
        assert!(
            row.min as f64 <= average && average <= row.max as f64,
            "{} / {}: average {average} escapes [{}, {}]",
            row.model,
            row.place,
            row.min,
            row.max
        );
    }
    for row in TIME_AVERAGE_ROWS {
        assert!(row.count > 0, "{} / {}: empty row", row.model, row.place);
        assert!(
            row.min as f64 <= row.average && row.average <= row.max as f64,
            "{} / {}: average {} escapes [{}, {}]",
            row.model,
            row.place,
            row.average,
            row.min,
            row.max
        );
    }

    // The same identities hold for live monitors over the whole catalog.
    for name in models::MODEL_NAMES {
        for timed in [false, true] {
            let model = models::cpn_model(name, timed).expect("catalog model compiles");
            for seed in [1u64, 7, 23] {
                let run = run_with_monitor(
                    &model,
                    400,
                    seed,
                    ChoicePolicy::SeededRandom,
                    MonitorKind::Discrete,
                )
                .expect("monitored run terminates");
                for stat in &run.stats {
                    if stat.empty {
                        continue;
                    }
                    let product = stat.average * stat.count as f64;
                    let relative = (product - stat.sum as f64).abs() / (stat.sum as f64).max(1.0);
                    assert!(
                        relative <= STATS_REL_TOL,
                        "{name} seed {seed} place {}: identity drift {relative:e}",
                        stat.place
                    );
                    assert!(
                        stat.min as f64 <= stat.average && stat.average <= stat.max as f64,
                        "{name} seed {seed} place {}: average escapes the bracket",
                        stat.place
                    );
                }
                let run = run_with_monitor(
                    &model,
                    400,
                    seed,
                    ChoicePolicy::SeededRandom,
                    MonitorKind::TimeAverage,
                )
                .expect("monitored run terminates");
                for stat in &run.stats {
                    if stat.empty {
                        continue;
                    }
                    assert!(
                        stat.min as f64 <= stat.average && stat.average <= stat.max as f64,
                        "{name} seed {seed} place {}: time average escapes the bracket",
                        stat.place
                    );
                }
            }
        }
    }
    pass(5, "statistics-identities");
}

// ---------------------------------------------------------------------------
// 6. Timed semantics
// ---------------------------------------------------------------------------

/// A minimal net mixing an untimed and a timed colour: both transitions are
/// enabled at clock 0, and the priority policy must pick the untimed one.
const MIXED_NET: &str = r#"
net "mixed-timing" kind cpn timed

colset U = enum { a }
colset T = enum { b } timed

var u : U
var t : T

place UntimedIn : U init 1'a
place TimedIn : T init 1'b
place UntimedOut : U
place TimedOut : T

trans UseUntimed
trans UseTimed

arc UntimedIn -> UseUntimed : u
arc UseUntimed -> UntimedOut : u
arc TimedIn -> UseTimed : t
arc UseTimed -> TimedOut : t
"#;

#[test]
fn acceptance_6_timed_semantics() {
    // The timed key-generation net stays quiet until the clock reaches 1
    // (its earliest token timestamp) and only ever fires on odd ticks.
    let model = models::cpn_model("ecdsa-keygen", true).expect("catalog model compiles");
    for seed in 0..10u64 {
        let run =
            cpn::run(&model, 500, seed, ChoicePolicy::SeededRandom).expect("run terminates");
        assert!(run.completed, "seed {seed}: timed run must drain");
        assert!(!run.events.is_empty(), "seed {seed}: nothing fired");
        for event in &run.events {
            assert!(
                event.clock >= 1,
                "seed {seed}: fired before clock 1 (clock {})",
                event.clock
            );
            assert_eq!(
                event.clock % 2,
                1,
                "seed {seed}: fired at even clock {}",
                event.clock
            );
        }
    }

    // Enabled untimed work outranks timed work under the priority policy.
    let parsed =
        parse_model(MIXED_NET, models::default_registry()).expect("mixed fixture compiles");
    let ParsedModel::Cpn(mixed) = parsed else {
        panic!("mixed fixture must compile as a coloured net");
    };
    for seed in 0..10u64 {
        let run = cpn::run(&mixed, 10, seed, ChoicePolicy::Priority).expect("run terminates");
        let order: Vec<&str> = run
            .events
            .iter()
            .map(|e| mixed.transitions[e.trans].name.as_str())
            .collect();
        assert_eq!(
            order,
            ["UseUntimed", "UseTimed"],
            "seed {seed}: untimed work must fire first"
        );
        assert!(run.completed, "seed {seed}: mixed net must drain");
    }
    pass(6, "timed-semantics");
}

// ---------------------------------------------------------------------------
// 7. Seeded commands are byte-identical across runs
// ---------------------------------------------------------------------------

#[test]
fn acceptance_7_seeded_determinism() {
    let exe = env!("CARGO_BIN_EXE_petriproof");
    let run = |args: &[&str]| -> Vec<u8> {
        let output = Command::new(exe).args(args).output().expect("binary runs");
        assert!(
            output.status.success(),
            "petriproof {args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        output.stdout
    };

    let seeded: &[&[&str]] = &[
        &[
            "simulate", "lps-gen-proof", "--firings", "300", "--replications", "10",
            "--seed", "2024",
        ],
        &[
            "simulate", "ecdsa-siggen", "--firings", "200", "--replications", "8",
            "--seed", "7", "--format", "csv",
        ],
        &[
            "cpn-run", "ecdsa-sigverify", "--timed", "--seed", "5", "--monitor", "discrete",
            "--format", "csv",
        ],
        &["cpn-run", "lps-verify-proof", "--seed", "9"],
        &["cpn-run", "lps-calc-location", "--timed", "--seed", "3", "--format", "csv"],
    ];
    for args in seeded {
        assert_eq!(
            run(args),
            run(args),
            "output of {args:?} must be byte-identical across runs"
        );
    }

    // The report bundle is seeded as a whole: two runs must produce the
    // same file set with byte-identical contents.
    let dir = tempfile::tempdir().expect("tempdir");
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    for out in [&first, &second] {
        run(&[
            "report", "ecdsa-keygen", "lps-gen-proof", "--seed", "11", "--firings", "200",
            "--replications", "6", "--out",
            out.to_str().expect("tempdir paths are unicode"),
        ]);
    }
    let list = |dir: &std::path::Path| -> Vec<std::ffi::OsString> {
        let mut names: Vec<_> = std::fs::read_dir(dir)
            .expect("bundle directory exists")
            .map(|entry| entry.expect("directory entry").file_name())
            .collect();
        names.sort();
        names
    };
    let names = list(&first);
    assert_eq!(names, list(&second), "bundles must contain the same files");
    assert!(!names.is_empty(), "the bundle must not be empty");
    for name in &names {
        let a = std::fs::read(first.join(name)).expect("bundle file reads");
        let b = std::fs::read(second.join(name)).expect("bundle file reads");
        assert_eq!(a, b, "report file {name:?} must be byte-identical");
    }
    pass(7, "seeded-determinism");
}

// ---------------------------------------------------------------------------
// 8. Confidence intervals shrink with the larger profile
// ---------------------------------------------------------------------------

const SHRINK_SEEDS: u64 = 20;
const SHRINK_MIN_SUCCESSES: usize = 18;
/// (firings, replications) per replication run.
const NARROW_PROFILE: (u64, u32) = (1000, 50);
const WIDE_PROFILE: (u64, u32) = (100, 5);

#[test]
fn acceptance_8_interval_shrinkage() {
    let net = models::hlpn_net("ecdsa-siggen").expect("catalog model compiles");
    let half_width_sum = |profile: (u64, u32), seed: u64| -> f64 {
        let report = replicate(&net, SimConfig::new(profile.0, profile.1, seed))
            .expect("replication runs");
        report
            .places
            .iter()
            .map(|p| (p.ci_hi - p.ci_lo) / 2.0)
            .sum()
    };
    let mut successes = 0usize;
    for seed in 0..SHRINK_SEEDS {
        let narrow = half_width_sum(NARROW_PROFILE, seed);
        let wide = half_width_sum(WIDE_PROFILE, seed);
        if narrow <= wide {
            successes += 1;
        }
    }
    assert!(
        successes >= SHRINK_MIN_SUCCESSES,
        "intervals shrank for only {successes} of {SHRINK_SEEDS} master seeds, \
         need at least {SHRINK_MIN_SUCCESSES}"
    );
    pass(8, "interval-shrinkage");
}
