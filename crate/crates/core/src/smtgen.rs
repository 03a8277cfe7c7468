//! SMT-LIB2 emission for the six verification properties of the built-in
//! models, plus the per-transition rule fragments R1 to R21, and a thin
//! subprocess harness for an external solver.
//!
//! Each property is a negated disjunction of chained equalities over
//! `(select |array| index)` terms in the QF_AUFLIA logic. On their own such
//! assertions are satisfiable (the arrays are free), so the emitter also
//! asserts ground bindings pinning every selected cell to a value computed
//! by the executable scheme implementation; the property then checks that
//! the pinned pipeline satisfies each stage equality, and the expected
//! verdict is unsat. Dropping the bindings (`emit_property_unbound`) gives
//! the sanity-negative script, which a correct solver answers sat.
//!
//! Dotted identifiers such as `prime.field.order` are not bare SMT-LIB2
//! symbols, so every identifier is emitted `|quoted|`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::scheme::{
    determine_2d_point_space, generate_domain_parameters, hash_to_int, keypair_from_scalar,
    mod_inv, sign_with_nonce, verify, CurveProfile, HashKind,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmtError {
    #[error("unknown property {0}")]
    UnknownProperty(String),
    #[error("unknown rule {0}")]
    UnknownRule(String),
    #[error("solver not found: {0}")]
    SolverNotFound(String),
    #[error("solver exceeded the {seconds} s timeout")]
    SolverTimeout { seconds: f64 },
    #[error("no sat/unsat/unknown token in solver output: {0:?}")]
    UnparseableOutput(String),
    #[error("emitted script is malformed: {0}")]
    MalformedScript(String),
    #[error("io failure: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmtDecl {
    /// `(declare-const |name| (Array Int Int))`
    ArrayIntInt(String),
    /// `(declare-const |name| Int)`
    IntConst(String),
}

impl SmtDecl {
    fn name(&self) -> &str {
        match self {
            SmtDecl::ArrayIntInt(n) | SmtDecl::IntConst(n) => n,
        }
    }
}

/// An SMT-LIB2 script: one logic line, declarations, assertions, and a
/// single trailing check-sat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtScript {
    pub logic: String,
    pub decls: Vec<SmtDecl>,
    pub asserts: Vec<String>,
}

impl SmtScript {
    pub fn new() -> Self {
        SmtScript {
            logic: "QF_AUFLIA".to_string(),
            decls: Vec::new(),
            asserts: Vec::new(),
        }
    }

    fn declare_array(&mut self, name: &str) {
        if !self.decls.iter().any(|d| d.name() == name) {
            self.decls.push(SmtDecl::ArrayIntInt(name.to_string()));
        }
    }

    fn declare_int(&mut self, name: &str) {
        if !self.decls.iter().any(|d| d.name() == name) {
            self.decls.push(SmtDecl::IntConst(name.to_string()));
        }
    }

    /// Renders the full script text, ending in exactly one `(check-sat)`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "(set-logic {})", self.logic);
        for decl in &self.decls {
            match decl {
                SmtDecl::ArrayIntInt(name) => {
                    let _ = writeln!(out, "(declare-const |{name}| (Array Int Int))");
                }
                SmtDecl::IntConst(name) => {
                    let _ = writeln!(out, "(declare-const |{name}| Int)");
                }
            }
        }
        for assert in &self.asserts {
            let _ = writeln!(out, "(assert {assert})");
        }
        out.push_str("(check-sat)\n");
        out
    }
}

impl Default for SmtScript {
    fn default() -> Self {
        SmtScript::new()
    }
}

// ---------------------------------------------------------------------------
// Property table
// ---------------------------------------------------------------------------

/// Index of one select term: a literal integer or the symbolic
/// `|verified|` constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ix {
    N(u64),
    Verified,
}

/// One disjunct: a chained equality over `(select |name| index)` terms.
/// Single-element groups compare the select against a free `.expected`
/// integer constant, since a one-argument equality is not well-formed.
struct Group {
    members: &'static [(&'static str, Ix)],
}

struct Property {
    id: &'static str,
    aliases: &'static [&'static str],
    groups: &'static [Group],
}

const PROPERTIES: &[Property] = &[
    Property {
        id: "ecdsa-keygen",
        aliases: &["keygen", "key-generation"],
        groups: &[
            Group {
                members: &[
                    ("prime.field.order", Ix::N(1)),
                    ("elliptic.curve", Ix::N(2)),
                    ("base.point", Ix::N(3)),
                    ("ordinal.value", Ix::N(4)),
                    ("cofactor", Ix::N(5)),
                ],
            },
            Group {
                members: &[
                    ("generate.private.key", Ix::N(6)),
                    ("generate.public.key", Ix::N(7)),
                ],
            },
        ],
    },
    Property {
        id: "ecdsa-siggen",
        aliases: &["siggen", "signature-generation"],
        groups: &[
            Group {
                members: &[("random.integer", Ix::N(1)), ("base.point", Ix::N(2))],
            },
            Group {
                members: &[("message", Ix::N(3)), ("compute.hash", Ix::N(4))],
            },
            Group {
                members: &[("mod", Ix::N(5))],
            },
            Group {
                members: &[("private.key", Ix::N(6)), ("hash.integer", Ix::N(7))],
            },
        ],
    },
    Property {
        id: "ecdsa-sigverify",
        aliases: &["sigverify", "signature-verification"],
        groups: &[
            Group {
                members: &[
                    ("signature.integer", Ix::N(1)),
                    ("signature.integer2", Ix::N(2)),
                ],
            },
            Group {
                members: &[("message", Ix::N(3))],
            },
            Group {
                members: &[("get.integer.point", Ix::N(4))],
            },
            Group {
                members: &[
                    ("integer.point.1", Ix::N(5)),
                    ("integer.point2", Ix::N(6)),
                    ("coordinate.point", Ix::N(7)),
                ],
            },
            Group {
                members: &[
                    ("calculate.point.1", Ix::Verified),
                    ("calculate.point.2", Ix::Verified),
                ],
            },
        ],
    },
    Property {
        id: "lps-calc-location",
        aliases: &["calc-location", "calculate-location"],
        groups: &[
            Group {
                members: &[
                    ("prover.coordinate", Ix::N(1)),
                    ("prover.coordinate", Ix::N(2)),
                ],
            },
            Group {
                members: &[
                    ("verifier.coordinate", Ix::N(3)),
                    ("verifier.coordinate", Ix::N(4)),
                ],
            },
            Group {
                members: &[
                    ("prover.coordinate", Ix::N(5)),
                    ("verifier.coordinate", Ix::N(6)),
                ],
            },
        ],
    },
    Property {
        id: "lps-gen-proof",
        aliases: &["gen-proof", "generate-location-proof"],
        groups: &[
            Group {
                members: &[
                    ("id", Ix::N(1)),
                    ("time", Ix::N(2)),
                    ("location", Ix::N(3)),
                    ("activity", Ix::N(4)),
                ],
            },
            Group {
                members: &[
                    ("extract.context.information", Ix::N(5)),
                    ("store.context.information", Ix::N(6)),
                ],
            },
            Group {
                members: &[
                    ("location.proof", Ix::N(7)),
                    ("private.key", Ix::N(8)),
                    ("hash", Ix::N(9)),
                ],
            },
        ],
    },
    Property {
        id: "lps-verify-proof",
        aliases: &["verify-proof", "verify-location-proof"],
        groups: &[
            Group {
                members: &[
                    ("extract.context.information", Ix::N(1)),
                    ("extract.context.information", Ix::N(2)),
                ],
            },
            Group {
                members: &[("location.proof.request", Ix::N(3))],
            },
            Group {
                members: &[("extracted.context.information", Ix::N(4))],
            },
            Group {
                members: &[("verified.information", Ix::N(6)), ("public.key", Ix::N(7))],
            },
            Group {
                members: &[("verified.location.proof", Ix::Verified)],
            },
        ],
    },
];

/// The six property identifiers, in report order.
pub fn property_ids() -> Vec<&'static str> {
    PROPERTIES.iter().map(|p| p.id).collect()
}

fn lookup_property(id: &str) -> Result<&'static Property, SmtError> {
    PROPERTIES
        .iter()
        .find(|p| p.id == id || p.aliases.contains(&id))
        .ok_or_else(|| SmtError::UnknownProperty(id.to_string()))
}

/// Resolves a property identifier or one of its aliases to the canonical
/// identifier.
pub fn canonical_property_id(id: &str) -> Result<&'static str, SmtError> {
    lookup_property(id).map(|p| p.id)
}

/// One representative integer per property stage, computed by running the
/// executable scheme on a fixed toy-curve pipeline: key pair d = 7, nonce
/// k = 3, prover at the origin and verifier at (3, 4).
fn stage_values(property: &str) -> Vec<i64> {
    let dp = generate_domain_parameters(CurveProfile::Toy).expect("toy curve is valid");
    let d = BigUint::from(7u32);
    let k = BigUint::from(3u32);
    let key = keypair_from_scalar(&dp, d.clone()).expect("7 is in range");
    let message = b"location proof context";
    let e = hash_to_int(HashKind::Sha256, message, &dp.n);
    let sig = sign_with_nonce(&dp, &d, message, HashKind::Sha256, &k)
        .expect("scalars are in range")
        .expect("nonce 3 yields a signature");
    let accepted = verify(&dp, &key.q, message, HashKind::Sha256, &sig);
    let w = mod_inv(&sig.s, &dp.n).expect("s is invertible");
    let placement = determine_2d_point_space(0.0, 0.0, 3.0, 4.0).expect("finite coordinates");

    let int = |b: &BigUint| b.to_i64().expect("toy values fit in 64 bits");
    let verdict = i64::from(accepted);
    match property {
        "ecdsa-keygen" => vec![int(&dp.p), int(&d)],
        "ecdsa-siggen" => vec![int(&k), int(&e), int(&sig.r), int(&sig.s)],
        "ecdsa-sigverify" => vec![int(&sig.r), int(&e), int(&w), int(&sig.r), verdict],
        "lps-calc-location" => vec![
            placement.prover.x as i64,
            placement.verifier.x as i64,
            placement.distance() as i64,
        ],
        "lps-gen-proof" => vec![1, 2, int(&e)],
        "lps-verify-proof" => vec![1, 3, 4, int(&d), verdict],
        _ => unreachable!("stage_values is called with canonical ids"),
    }
}

fn select_term(name: &str, ix: Ix) -> String {
    match ix {
        Ix::N(n) => format!("(select |{name}| {n})"),
        Ix::Verified => format!("(select |{name}| |verified|)"),
    }
}

fn expected_const(group: &Group) -> String {
    format!("{}.expected", group.members[0].0)
}

fn build_property(id: &str, with_bindings: bool) -> Result<SmtScript, SmtError> {
    let property = lookup_property(id)?;
    let mut script = SmtScript::new();

    let uses_verified = property
        .groups
        .iter()
        .flat_map(|g| g.members)
        .any(|(_, ix)| *ix == Ix::Verified);
    for group in property.groups {
        for (name, _) in group.members {
            script.declare_array(name);
        }
        if group.members.len() == 1 {
            script.declare_int(&expected_const(group));
        }
    }
    if uses_verified {
        script.declare_int("verified");
    }

    if with_bindings {
        if uses_verified {
            script.asserts.push("(= |verified| 1)".to_string());
        }
        let values = stage_values(property.id);
        debug_assert_eq!(values.len(), property.groups.len());
        for (group, value) in property.groups.iter().zip(values) {
            let literal = if value < 0 {
                format!("(- {})", -value)
            } else {
                value.to_string()
            };
            for (name, ix) in group.members {
                script
                    .asserts
                    .push(format!("(= {} {literal})", select_term(name, *ix)));
            }
            if group.members.len() == 1 {
                script
                    .asserts
                    .push(format!("(= |{}| {literal})", expected_const(group)));
            }
        }
    }

    let disjuncts: Vec<String> = property
        .groups
        .iter()
        .map(|group| {
            let mut terms: Vec<String> = group
                .members
                .iter()
                .map(|(name, ix)| select_term(name, *ix))
                .collect();
            if group.members.len() == 1 {
                terms.push(format!("|{}|", expected_const(group)));
            }
            format!("(= {})", terms.join(" "))
        })
        .collect();
    script
        .asserts
        .push(format!("(not (or {}))", disjuncts.join(" ")));
    Ok(script)
}

/// Emits the property script whose expected verdict is unsat: the negated
/// stage disjunction plus the ground bindings computed from the scheme.
pub fn emit_property(id: &str) -> Result<SmtScript, SmtError> {
    build_property(id, true)
}

/// Emits the property without its binding assertions. The arrays are then
/// unconstrained, so the expected verdict flips to sat; used as the
/// negative control for the solver harness.
pub fn emit_property_unbound(id: &str) -> Result<SmtScript, SmtError> {
    build_property(id, false)
}

// ---------------------------------------------------------------------------
// Rule fragments
// ---------------------------------------------------------------------------

struct Rule {
    id: &'static str,
    out: &'static str,
    stores: &'static [(u64, &'static str)],
}

const RULES: &[Rule] = &[
    Rule {
        id: "R1",
        out: "generate.domain.parameters.out",
        stores: &[
            (1, "prime.field.order"),
            (2, "elliptic.curve"),
            (3, "base.point"),
            (4, "ordinal.value"),
            (5, "cofactor"),
            (6, "generate.domain.parameters"),
        ],
    },
    Rule {
        id: "R2",
        out: "generate.keys.out",
        stores: &[
            (1, "generate.private.key"),
            (2, "generate.public.key"),
            (3, "generate.keys"),
        ],
    },
    Rule {
        id: "R3",
        out: "compute.coordinates.out",
        stores: &[
            (1, "random.integer"),
            (2, "base.point"),
            (3, "compute.coordinates"),
        ],
    },
    Rule {
        id: "R4",
        out: "compute.hash.out",
        stores: &[(1, "message"), (2, "compute.hash")],
    },
    Rule {
        id: "R5",
        out: "generate.signature.pair.1.out",
        stores: &[(1, "mod"), (2, "mod"), (3, "generate.signature.pair.1")],
    },
    Rule {
        id: "R6",
        out: "generate.signature.pair.2.out",
        stores: &[
            (1, "private.key"),
            (2, "random.integer"),
            (3, "hash.integer"),
            (4, "generate.signature.pair.2"),
        ],
    },
    Rule {
        id: "R7",
        out: "get.signature.integers.out",
        stores: &[
            (1, "signature.integer.1"),
            (2, "signature.integer.2"),
            (3, "get.signature.integers"),
        ],
    },
    Rule {
        id: "R8",
        out: "hash.integer.out",
        stores: &[(1, "message"), (2, "compute.hash")],
    },
    Rule {
        id: "R9",
        out: "calculate.point.out",
        stores: &[(1, "get.integer.point"), (2, "calculate.point")],
    },
    Rule {
        id: "R10",
        out: "coordinate.point.out",
        stores: &[
            (1, "integer.point.1"),
            (2, "integer.point.2"),
            (3, "coordinate.point"),
            (4, "compute.coordinates"),
        ],
    },
    Rule {
        id: "R11",
        out: "verify.signatures.out",
        stores: &[
            (1, "point.1"),
            (2, "point.1"),
            (3, "calculate.point.1"),
            (4, "point.2"),
            (5, "point.2"),
            (6, "calculate.point.2"),
            (7, "verify.signatures"),
        ],
    },
    Rule {
        id: "R12",
        out: "determine.2d.point.space.out",
        stores: &[
            (1, "prover.coordinate.1"),
            (2, "prover.coordinate.2"),
            (3, "verifier.coordinate.1"),
            (4, "verifier.coordinate.2"),
            (5, "determine.2d.point.space"),
        ],
    },
    Rule {
        id: "R13",
        out: "calculate.location.out",
        stores: &[
            (1, "prover.coordinate"),
            (2, "verifier.coordinate"),
            (3, "calculate.location"),
        ],
    },
    Rule {
        id: "R14",
        out: "sense.context.information.out",
        stores: &[
            (1, "id"),
            (2, "time"),
            (3, "location"),
            (4, "activity"),
            (5, "sense.context.information"),
        ],
    },
    Rule {
        id: "R15",
        out: "stored.context.information.out",
        stores: &[
            (1, "extract.context.information"),
            (2, "store.context.information"),
            (3, "stored.context.information"),
        ],
    },
    Rule {
        id: "R16",
        out: "request.location.proof.out",
        stores: &[
            (1, "extract.context.information"),
            (2, "request.location.proof"),
        ],
    },
    Rule {
        id: "R17",
        out: "generate.location.proof.out",
        stores: &[
            (1, "location.proof"),
            (2, "extract.context.information"),
            (3, "private.key"),
            (4, "hash"),
            (5, "generate.location.proof"),
        ],
    },
    Rule {
        id: "R18",
        out: "extract.context.information.out",
        stores: &[
            (1, "extract.context.information"),
            (2, "extract.context.information"),
            (3, "extract.context.information"),
        ],
    },
    Rule {
        id: "R19",
        out: "accept.location.proof.request.out",
        stores: &[
            (1, "location.proof.request"),
            (2, "accept.location.proof.request"),
        ],
    },
    Rule {
        id: "R20",
        out: "verify.context.information.out",
        stores: &[
            (1, "location.proof.request"),
            (2, "extracted.context.information"),
            (3, "verify.context.information"),
        ],
    },
    Rule {
        id: "R21",
        out: "verify.location.proof.out",
        stores: &[
            (1, "verified.information"),
            (2, "public.key"),
            (3, "verify.location.proof"),
        ],
    },
];

/// The rule identifiers R1 to R21.
pub fn rule_ids() -> Vec<&'static str> {
    RULES.iter().map(|r| r.id).collect()
}

/// Emits one transition rule as an array-store fragment: the rule's output
/// array is its input array with each stage value stored at its index.
pub fn emit_rule(id: &str) -> Result<SmtScript, SmtError> {
    let rule = RULES
        .iter()
        .find(|r| r.id == id)
        .ok_or_else(|| SmtError::UnknownRule(id.to_string()))?;
    let mut script = SmtScript::new();
    let pre = format!("{}.pre", rule.out);
    script.declare_array(&pre);
    script.declare_array(rule.out);
    for (_, name) in rule.stores {
        script.declare_array(name);
    }
    let mut chain = format!("|{pre}|");
    for (ix, name) in rule.stores {
        chain = format!("(store {chain} {ix} (select |{name}| {ix}))");
    }
    script.asserts.push(format!("(= |{}| {chain})", rule.out));
    Ok(script)
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Checks the rendered script for balanced parentheses, a single check-sat,
/// and use of declared `|quoted|` symbols only.
pub fn validate_script(script: &SmtScript) -> Result<(), SmtError> {
    let text = script.render();
    let mut depth: i64 = 0;
    let mut in_symbol = false;
    for c in text.chars() {
        match c {
            '|' => in_symbol = !in_symbol,
            '(' if !in_symbol => depth += 1,
            ')' if !in_symbol => {
                depth -= 1;
                if depth < 0 {
                    return Err(SmtError::MalformedScript(
                        "unbalanced closing parenthesis".to_string(),
                    ));
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(SmtError::MalformedScript(format!(
            "{depth} unclosed parentheses"
        )));
    }
    if in_symbol {
        return Err(SmtError::MalformedScript("unterminated |symbol|".to_string()));
    }
    if text.matches("(check-sat)").count() != 1 {
        return Err(SmtError::MalformedScript(
            "expected exactly one check-sat".to_string(),
        ));
    }
    // every quoted symbol in an assertion must be declared
    for assert in &script.asserts {
        let mut rest = assert.as_str();
        while let Some(start) = rest.find('|') {
            let tail = &rest[start + 1..];
            let Some(end) = tail.find('|') else {
                return Err(SmtError::MalformedScript(
                    "unterminated |symbol| in assertion".to_string(),
                ));
            };
            let name = &tail[..end];
            if !script.decls.iter().any(|d| d.name() == name) {
                return Err(SmtError::MalformedScript(format!(
                    "symbol |{name}| is used before declaration"
                )));
            }
            rest = &tail[end + 1..];
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Solver harness
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Sat => write!(f, "sat"),
            Verdict::Unsat => write!(f, "unsat"),
            Verdict::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverVerdict {
    pub result: Verdict,
    pub elapsed_seconds: f64,
    pub raw_output: String,
}

/// Reads the first sat/unsat/unknown token, skipping banner noise.
pub fn parse_verdict(output: &str) -> Option<Verdict> {
    output.split_whitespace().find_map(|tok| match tok {
        "sat" => Some(Verdict::Sat),
        "unsat" => Some(Verdict::Unsat),
        "unknown" => Some(Verdict::Unknown),
        _ => None,
    })
}

/// Writes the script to a temp file and runs `solver_path <file>`,
/// killing the subprocess after `timeout_s` seconds.
pub fn run_solver(
    script: &SmtScript,
    solver_path: &Path,
    timeout_s: f64,
) -> Result<SolverVerdict, SmtError> {
    validate_script(script)?;
    let mut file = tempfile::Builder::new()
        .prefix("petriproof-")
        .suffix(".smt2")
        .tempfile()
        .map_err(|e| SmtError::Io(e.to_string()))?;
    file.write_all(script.render().as_bytes())
        .map_err(|e| SmtError::Io(e.to_string()))?;
    file.flush().map_err(|e| SmtError::Io(e.to_string()))?;

    let started = Instant::now();
    let mut child = Command::new(solver_path)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                SmtError::SolverNotFound(solver_path.display().to_string())
            } else {
                SmtError::Io(e.to_string())
            }
        })?;

    let deadline = Duration::from_secs_f64(timeout_s);
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if started.elapsed() > deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SmtError::SolverTimeout { seconds: timeout_s });
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(SmtError::Io(e.to_string())),
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let output = child
        .wait_with_output()
        .map_err(|e| SmtError::Io(e.to_string()))?;
    let mut raw = String::from_utf8_lossy(&output.stdout).into_owned();
    raw.push_str(&String::from_utf8_lossy(&output.stderr));
    let result = parse_verdict(&raw).ok_or_else(|| SmtError::UnparseableOutput(raw.clone()))?;
    Ok(SolverVerdict {
        result,
        elapsed_seconds: elapsed,
        raw_output: raw,
    })
}

/// One row of the verification table.
#[derive(Clone, Debug)]
pub struct PropertyRow {
    pub property: String,
    pub outcome: Result<SolverVerdict, SmtError>,
}

/// Runs all six properties against the solver, at most `min(6, cores)` in
/// flight, and returns rows in the fixed property order.
pub fn verify_all(solver_path: &Path, timeout_s: f64) -> Vec<PropertyRow> {
    let ids = property_ids();
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(ids.len());
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut outcomes: Vec<Option<Result<SolverVerdict, SmtError>>> = Vec::new();
    outcomes.resize_with(ids.len(), || None);
    let slots: Vec<std::sync::Mutex<Option<Result<SolverVerdict, SmtError>>>> =
        outcomes.into_iter().map(std::sync::Mutex::new).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= ids.len() {
                    break;
                }
                let outcome = emit_property(ids[i])
                    .and_then(|script| run_solver(&script, solver_path, timeout_s));
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    ids.iter()
        .zip(slots)
        .map(|(id, slot)| PropertyRow {
            property: id.to_string(),
            outcome: slot.into_inner().unwrap().expect("every slot was filled"),
        })
        .collect()
}

/// Resolves the solver binary: an explicit path wins, then the
/// PETRIPROOF_SOLVER environment variable, then `z3` on PATH.
pub fn resolve_solver(explicit: Option<&Path>) -> Option<PathBuf> {
    if let Some(path) = explicit {
        return Some(path.to_path_buf());
    }
    if let Some(env) = std::env::var_os("PETRIPROOF_SOLVER") {
        if !env.is_empty() {
            return Some(PathBuf::from(env));
        }
    }
    let path_var = std::env::var_os("PATH")?;
    for dir in std::env::split_paths(&path_var) {
        let candidate = dir.join("z3");
        if candidate.is_file() {
            return Some(candidate);
        }
    }
    None
}
