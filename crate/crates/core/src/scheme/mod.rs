//! The modelled subject: curve signatures and a location-proof system.

pub mod curve;
pub mod ecdsa;
pub mod hash;
pub mod lps;

pub use curve::{generate_domain_parameters, mod_inv, CurveError, CurveProfile, DomainParams, Point};
pub use ecdsa::{
    batch_verify, generate_keys, hash_to_int, keypair_from_scalar, sign, sign_with_nonce, verify,
    BatchItem, BatchOutcome, EcdsaError, KeyPair, Signature,
};
pub use hash::HashKind;
pub use lps::{
    decode_context, determine_2d_point_space, encode_context, euclidean_distance,
    generate_location_proof, request_location_proof, sense_context, verify_context,
    verify_location_proof, ContextInfo, Coord2, LbsStore, LocationProof, LpsError,
    PointPlacement, ProofRequest, ProofVerdict, RejectReason,
};
