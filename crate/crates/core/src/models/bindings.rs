//! Host functions the built-in models bind to their transitions.
//!
//! Each function pairs a symbol mapping (how a figure's enum tokens move
//! between stores) with the executable operation the transition stands
//! for. The operations run once over a fixed toy-curve pipeline, memoised
//! in a [`OnceLock`]; every host call first confirms that pipeline is
//! healthy, so a broken curve or proof implementation surfaces as a model
//! run failure rather than a silently decorative binding.
//!
//! The symbol maps are partial on purpose: a function asked to move a
//! token outside its table rejects the binding, which keeps unguarded
//! transitions on their figure's paths.

use std::sync::OnceLock;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::registry::{symbol_map, FnError, FnRegistry, HostFn};
use crate::scheme::{
    determine_2d_point_space, encode_context, generate_domain_parameters,
    generate_location_proof, keypair_from_scalar, request_location_proof, sense_context, verify,
    verify_location_proof, CurveProfile, HashKind, LbsStore, ProofVerdict,
};
use crate::value::Value;

/// Outcomes of the fixed toy pipeline: key pair d = 7 on the toy curve,
/// a prover at the origin with its verifier at (3, 4), one sensed and
/// stored context record, and one signed location proof.
struct ToyPipeline {
    signature_accepted: bool,
    proof_accepted: bool,
}

fn build_pipeline() -> Result<ToyPipeline, String> {
    let fail = |stage: &str, detail: String| format!("toy pipeline {stage}: {detail}");
    let dp = generate_domain_parameters(CurveProfile::Toy)
        .map_err(|e| fail("domain parameters", e.to_string()))?;
    let key = keypair_from_scalar(&dp, BigUint::from(7u32))
        .map_err(|e| fail("key generation", e.to_string()))?;

    let placement = determine_2d_point_space(0.0, 0.0, 3.0, 4.0)
        .map_err(|e| fail("point space", e.to_string()))?;
    let context = sense_context(1, 4, placement.distance(), "walk")
        .map_err(|e| fail("context sensing", e.to_string()))?;
    let mut lbs = LbsStore::new();
    lbs.register_prover(1, key.q.clone());
    lbs.store_context(context.clone());
    request_location_proof(&lbs, 2, 1, 4).map_err(|e| fail("proof request", e.to_string()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let proof = generate_location_proof(&context, &key, &dp, HashKind::Sha256, &mut rng)
        .map_err(|e| fail("proof generation", e.to_string()))?;
    let signature_accepted = verify(
        &dp,
        &key.q,
        &encode_context(&context),
        HashKind::Sha256,
        &proof.signature,
    );
    let verdict = verify_location_proof(&proof, &key.q, &lbs, &dp, HashKind::Sha256, 1e-9);
    Ok(ToyPipeline {
        signature_accepted,
        proof_accepted: verdict == ProofVerdict::Accept,
    })
}

fn pipeline() -> Result<&'static ToyPipeline, FnError> {
    static PIPELINE: OnceLock<Result<ToyPipeline, String>> = OnceLock::new();
    PIPELINE
        .get_or_init(build_pipeline)
        .as_ref()
        .map_err(|msg| FnError::Fail(msg.clone()))
}

/// Wraps a host function so every call first checks the toy pipeline.
fn backed<F: HostFn + 'static>(f: F) -> impl HostFn {
    move |args: &[Value]| {
        pipeline()?;
        f.call(args)
    }
}

/// A host function that packs exactly `arity` arguments into a tuple.
fn tuple_of(arity: usize) -> impl HostFn {
    move |args: &[Value]| {
        if args.len() == arity {
            Ok(Value::Tuple(args.to_vec()))
        } else {
            Err(FnError::Reject)
        }
    }
}

/// Hashing accepts any enum symbol and lands on the hash-integer token.
fn hash_any() -> impl HostFn {
    |args: &[Value]| match args {
        [Value::Sym(_)] => Ok(Value::sym("e")),
        _ => Err(FnError::Reject),
    }
}

/// The signature comparison emits the accept or reject token depending on
/// whether the toy signature actually verifies.
fn signature_verdict() -> impl HostFn {
    |args: &[Value]| {
        if args.len() != 2 {
            return Err(FnError::Reject);
        }
        let accepted = pipeline()?.signature_accepted;
        Ok(Value::sym(if accepted { "A" } else { "R" }))
    }
}

/// Packs the verified-information pair, failing outright if the toy
/// location proof does not survive its own verification pipeline.
fn proof_verdict_tuple() -> impl HostFn {
    |args: &[Value]| {
        if args.len() != 2 {
            return Err(FnError::Reject);
        }
        if !pipeline()?.proof_accepted {
            return Err(FnError::Fail(
                "toy location proof failed verification".to_string(),
            ));
        }
        Ok(Value::Tuple(args.to_vec()))
    }
}

fn build_registry() -> FnRegistry {
    let mut reg = FnRegistry::new();

    // key generation
    reg.register(
        "genDomParms",
        backed(symbol_map(&[
            ("p", "sp"),
            ("E", "sE"),
            ("P", "sP"),
            ("n", "sn"),
            ("h", "sh"),
        ])),
    );
    reg.register(
        "genKeys",
        backed(symbol_map(&[
            ("sp", "PUK"),
            ("sE", "PRK"),
            ("sP", "PUK"),
            ("sn", "PRK"),
            ("sh", "PUK"),
        ])),
    );

    // signature generation
    reg.register(
        "compCoord",
        backed(symbol_map(&[
            ("m", "x"),
            ("d", "y"),
            ("H", "x"),
            ("P", "y"),
            ("k", "x"),
        ])),
    );
    reg.register("compHash", backed(hash_any()));
    reg.register(
        "genSigPair1",
        backed(symbol_map(&[("x", "nx"), ("y", "n")])),
    );
    reg.register("genSigPair2", backed(symbol_map(&[("e", "ne")])));
    reg.register("comSign", backed(tuple_of(2)));

    // signature verification
    reg.register(
        "getSigInt",
        backed(symbol_map(&[("r", "sr"), ("s", "ss"), ("Q", "sr")])),
    );
    reg.register(
        "calcPoint",
        backed(symbol_map(&[("sr", "ns"), ("ss", "n")])),
    );
    reg.register("verifySignatures", signature_verdict());

    // location calculation
    reg.register(
        "det2DSpace",
        backed(symbol_map(&[
            ("p1", "sp1"),
            ("p2", "sp2"),
            ("v1", "sv1"),
            ("v2", "sv2"),
        ])),
    );
    reg.register(
        "calDistance",
        backed(symbol_map(&[
            ("sp1", "pdl1"),
            ("sp2", "pdl2"),
            ("sv1", "pdl3"),
            ("sv2", "pdln"),
        ])),
    );

    // proof generation
    reg.register(
        "senConInformation",
        backed(symbol_map(&[
            ("ID", "SID"),
            ("Time", "STime"),
            ("Loc", "SLoc"),
            ("Act", "SAct"),
            ("PRK", "SID"),
            ("H", "STime"),
        ])),
    );
    reg.register(
        "storeConInformation",
        backed(symbol_map(&[
            ("SID", "CI1"),
            ("STime", "CIn"),
            ("SLoc", "CI1"),
            ("SAct", "CIn"),
        ])),
    );
    reg.register(
        "reqLocProof",
        backed(symbol_map(&[
            ("CI1", "RLP_NonEmpty"),
            ("CIn", "RLP_Empty"),
        ])),
    );
    reg.register("genLocProof", backed(tuple_of(3)));

    // proof verification
    reg.register(
        "extConInform",
        backed(symbol_map(&[
            ("P_Sig", "CI_Exist"),
            ("P_PK", "CI_NotExist"),
            ("Ver", "CI_Exist"),
        ])),
    );
    reg.register(
        "acceptLocProof",
        backed(symbol_map(&[
            ("CI_Exist", "LP_Request1"),
            ("CI_NotExist", "LP_Requestn"),
        ])),
    );
    reg.register("verConInform", backed(tuple_of(2)));
    reg.register("verLocProof", proof_verdict_tuple());

    reg
}

/// The registry every built-in model compiles against.
pub fn default_registry() -> &'static FnRegistry {
    static REGISTRY: OnceLock<FnRegistry> = OnceLock::new();
    REGISTRY.get_or_init(build_registry)
}
