//! Location-proof system: context sensing, a proof-request pipeline, and
//! signed proofs whose verification detects cloned devices.
//!
//! A prover's position is fixed in a 2-D point space; its distance to the
//! verifier becomes the location field of the context information it senses
//! (identity, time, location, activity). Context records are stored with a
//! location-based service (LBS). A verifier later requests a location proof;
//! the prover signs the canonical encoding of its context record, and the
//! verifier checks the claimed context against the stored record before
//! checking the signature. A cloned device that holds the key but sits
//! elsewhere produces a context mismatch and is rejected; a clone without
//! the key fails the signature check.

use std::collections::BTreeMap;
use std::fmt;

use rand::RngCore;
use thiserror::Error;

use super::curve::{DomainParams, Point};
use super::ecdsa::{self, KeyPair, Signature};
use super::hash::HashKind;

pub type DeviceId = u64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coord2 {
    pub x: f64,
    pub y: f64,
}

impl Coord2 {
    pub fn new(x: f64, y: f64) -> Self {
        Coord2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for Coord2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

pub fn euclidean_distance(a: &Coord2, b: &Coord2) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpsError {
    #[error("coordinate is not finite")]
    InvalidCoordinate,
    #[error("timestamp must be non-negative")]
    InvalidTime,
    #[error("device {0} is not a registered prover")]
    UnknownProver(DeviceId),
    #[error("signing failed: {0}")]
    Signing(String),
    #[error("malformed context encoding: {0}")]
    Codec(String),
}

/// Prover and verifier positions on the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointPlacement {
    pub prover: Coord2,
    pub verifier: Coord2,
}

/// Shapes four raw coordinates into a placement record, rejecting
/// non-finite values.
pub fn determine_2d_point_space(
    p1: f64,
    p2: f64,
    v1: f64,
    v2: f64,
) -> Result<PointPlacement, LpsError> {
    let prover = Coord2::new(p1, p2);
    let verifier = Coord2::new(v1, v2);
    if !prover.is_finite() || !verifier.is_finite() {
        return Err(LpsError::InvalidCoordinate);
    }
    Ok(PointPlacement { prover, verifier })
}

impl PointPlacement {
    /// The prover-verifier distance this placement induces.
    pub fn distance(&self) -> f64 {
        euclidean_distance(&self.prover, &self.verifier)
    }
}

/// Context information a prover senses at one instant. `loc` is the
/// prover's distance in the point space.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextInfo {
    pub id: DeviceId,
    pub t: i64,
    pub loc: f64,
    pub activity: String,
}

/// Validates raw sensor readings into a context record.
pub fn sense_context(
    id: DeviceId,
    t: i64,
    loc: f64,
    activity: &str,
) -> Result<ContextInfo, LpsError> {
    if t < 0 {
        return Err(LpsError::InvalidTime);
    }
    if !loc.is_finite() {
        return Err(LpsError::InvalidCoordinate);
    }
    Ok(ContextInfo {
        id,
        t,
        loc,
        activity: activity.to_string(),
    })
}

/// Canonical byte encoding of a context record: each field in declaration
/// order, length-prefixed with a big-endian u32. Integers are 8-byte
/// big-endian, reals are IEEE-754 binary64 bit patterns big-endian, text is
/// UTF-8. Equal records encode byte-identically.
pub fn encode_context(ci: &ContextInfo) -> Vec<u8> {
    let mut out = Vec::new();
    let field = |bytes: &[u8], out: &mut Vec<u8>| {
        out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
        out.extend_from_slice(bytes);
    };
    field(&ci.id.to_be_bytes(), &mut out);
    field(&ci.t.to_be_bytes(), &mut out);
    field(&ci.loc.to_bits().to_be_bytes(), &mut out);
    field(ci.activity.as_bytes(), &mut out);
    out
}

fn take_field<'a>(bytes: &'a [u8], cursor: &mut usize) -> Result<&'a [u8], LpsError> {
    let err = |msg: &str| LpsError::Codec(msg.to_string());
    let len_end = *cursor + 4;
    let prefix = bytes
        .get(*cursor..len_end)
        .ok_or_else(|| err("truncated length prefix"))?;
    let len = u32::from_be_bytes(prefix.try_into().unwrap()) as usize;
    let end = len_end
        .checked_add(len)
        .ok_or_else(|| err("length overflow"))?;
    let body = bytes
        .get(len_end..end)
        .ok_or_else(|| err("truncated field"))?;
    *cursor = end;
    Ok(body)
}

pub fn decode_context(bytes: &[u8]) -> Result<ContextInfo, LpsError> {
    let err = |msg: &str| LpsError::Codec(msg.to_string());
    let mut cursor = 0usize;
    let id: [u8; 8] = take_field(bytes, &mut cursor)?
        .try_into()
        .map_err(|_| err("id field must be 8 bytes"))?;
    let t: [u8; 8] = take_field(bytes, &mut cursor)?
        .try_into()
        .map_err(|_| err("time field must be 8 bytes"))?;
    let loc: [u8; 8] = take_field(bytes, &mut cursor)?
        .try_into()
        .map_err(|_| err("location field must be 8 bytes"))?;
    let activity = std::str::from_utf8(take_field(bytes, &mut cursor)?)
        .map_err(|_| err("activity field must be UTF-8"))?
        .to_string();
    if cursor != bytes.len() {
        return Err(err("trailing bytes"));
    }
    Ok(ContextInfo {
        id: u64::from_be_bytes(id),
        t: i64::from_be_bytes(t),
        loc: f64::from_bits(u64::from_be_bytes(loc)),
        activity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoreOutcome {
    Inserted,
    /// A record with the same (device, time) key existed and was replaced.
    Replaced,
}

/// The location-based service: prover registrations and stored context
/// records, keyed by (prover, time) so repeated sensing deduplicates.
#[derive(Clone, Debug, Default)]
pub struct LbsStore {
    records: BTreeMap<(DeviceId, i64), ContextInfo>,
    prover_keys: BTreeMap<DeviceId, Point>,
}

impl LbsStore {
    pub fn new() -> Self {
        LbsStore::default()
    }

    pub fn register_prover(&mut self, id: DeviceId, public_key: Point) {
        self.prover_keys.insert(id, public_key);
    }

    pub fn store_context(&mut self, ci: ContextInfo) -> StoreOutcome {
        match self.records.insert((ci.id, ci.t), ci) {
            None => StoreOutcome::Inserted,
            Some(_) => StoreOutcome::Replaced,
        }
    }

    pub fn extract_context(&self, id: DeviceId, t: i64) -> Option<&ContextInfo> {
        self.records.get(&(id, t))
    }

    pub fn public_key_of(&self, id: DeviceId) -> Option<&Point> {
        self.prover_keys.get(&id)
    }

    pub fn is_registered(&self, id: DeviceId) -> bool {
        self.prover_keys.contains_key(&id)
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }
}

/// A verifier's request naming the prover and the context epoch to prove.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofRequest {
    pub verifier: DeviceId,
    pub prover: DeviceId,
    pub t: i64,
}

pub fn request_location_proof(
    lbs: &LbsStore,
    verifier: DeviceId,
    prover: DeviceId,
    t: i64,
) -> Result<ProofRequest, LpsError> {
    if !lbs.is_registered(prover) {
        return Err(LpsError::UnknownProver(prover));
    }
    Ok(ProofRequest {
        verifier,
        prover,
        t,
    })
}

/// A context record signed by the prover's key.
#[derive(Clone, Debug, PartialEq)]
pub struct LocationProof {
    pub context: ContextInfo,
    pub signature: Signature,
}

/// The prover signs the canonical encoding of the context record it claims.
pub fn generate_location_proof(
    ci: &ContextInfo,
    key: &KeyPair,
    dp: &DomainParams,
    hash: HashKind,
    rng: &mut dyn RngCore,
) -> Result<LocationProof, LpsError> {
    let payload = encode_context(ci);
    let signature = ecdsa::sign(dp, &key.d, &payload, hash, rng)
        .map_err(|e| LpsError::Signing(e.to_string()))?;
    Ok(LocationProof {
        context: ci.clone(),
        signature,
    })
}

/// Compares a claimed context record against the stored one: identity, time
/// and activity must match exactly, locations may differ by at most
/// `tolerance` (closed interval).
pub fn verify_context(claimed: &ContextInfo, stored: &ContextInfo, tolerance: f64) -> bool {
    claimed.id == stored.id
        && claimed.t == stored.t
        && claimed.activity == stored.activity
        && (claimed.loc - stored.loc).abs() <= tolerance
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofVerdict {
    Accept,
    Reject(RejectReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectReason {
    /// No stored context record for the claimed (device, time).
    ContextNotFound,
    /// The claimed context disagrees with the stored record.
    ContextMismatch,
    /// The signature does not verify under the given public key.
    BadSignature,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            RejectReason::ContextNotFound => "no stored context for the claimed time",
            RejectReason::ContextMismatch => "claimed context disagrees with the stored record",
            RejectReason::BadSignature => "signature does not verify",
        };
        write!(f, "{text}")
    }
}

/// Full proof verification pipeline: extract the stored context, compare it
/// with the claimed one, then verify the signature over the canonical
/// encoding. The rejection carries the stage that failed; a signature-stage
/// rejection is the clone-detection signal.
pub fn verify_location_proof(
    proof: &LocationProof,
    public_key: &Point,
    lbs: &LbsStore,
    dp: &DomainParams,
    hash: HashKind,
    tolerance: f64,
) -> ProofVerdict {
    let Some(stored) = lbs.extract_context(proof.context.id, proof.context.t) else {
        return ProofVerdict::Reject(RejectReason::ContextNotFound);
    };
    if !verify_context(&proof.context, stored, tolerance) {
        return ProofVerdict::Reject(RejectReason::ContextMismatch);
    }
    let payload = encode_context(&proof.context);
    if !ecdsa::verify(dp, public_key, &payload, hash, &proof.signature) {
        return ProofVerdict::Reject(RejectReason::BadSignature);
    }
    ProofVerdict::Accept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::curve::{generate_domain_parameters, CurveProfile};
    use crate::scheme::ecdsa::generate_keys;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distance_of_the_three_four_five_triangle() {
        let d = euclidean_distance(&Coord2::new(0.0, 0.0), &Coord2::new(3.0, 4.0));
        assert!((d - 5.0).abs() < 1e-12);
        assert_eq!(
            euclidean_distance(&Coord2::new(2.0, 2.0), &Coord2::new(2.0, 2.0)),
            0.0
        );
    }

    #[test]
    fn placement_distance_matches_the_direct_call() {
        let placement = determine_2d_point_space(1.0, 2.0, 3.0, 4.0).unwrap();
        assert_eq!(placement.prover, Coord2::new(1.0, 2.0));
        assert_eq!(placement.verifier, Coord2::new(3.0, 4.0));
        assert_eq!(
            placement.distance(),
            euclidean_distance(&Coord2::new(1.0, 2.0), &Coord2::new(3.0, 4.0))
        );
        assert_eq!(
            determine_2d_point_space(f64::NAN, 0.0, 0.0, 0.0),
            Err(LpsError::InvalidCoordinate)
        );
    }

    #[test]
    fn context_encoding_round_trips_and_is_canonical() {
        let ci = sense_context(7, 100, 5.0, "monitoring").unwrap();
        assert_eq!(ci.id, 7);
        assert_eq!(ci.t, 100);
        assert_eq!(ci.loc, 5.0);
        assert_eq!(ci.activity, "monitoring");
        let bytes = encode_context(&ci);
        assert_eq!(decode_context(&bytes).unwrap(), ci);
        // equal records encode identically; any field change shows
        assert_eq!(encode_context(&ci.clone()), bytes);
        let mut other = ci.clone();
        other.activity = "Monitoring".into();
        assert_ne!(encode_context(&other), bytes);
        let mut other = ci.clone();
        other.loc = 5.000001;
        assert_ne!(encode_context(&other), bytes);
    }

    #[test]
    fn decode_rejects_malformed_encodings() {
        let ci = sense_context(1, 2, 0.0, "idle").unwrap();
        let bytes = encode_context(&ci);
        assert!(matches!(
            decode_context(&bytes[..bytes.len() - 1]),
            Err(LpsError::Codec(_))
        ));
        let mut extended = bytes.clone();
        extended.push(0);
        assert!(matches!(decode_context(&extended), Err(LpsError::Codec(_))));
        assert!(matches!(decode_context(&[0, 0]), Err(LpsError::Codec(_))));
    }

    #[test]
    fn sensing_validates_inputs() {
        assert_eq!(sense_context(1, -1, 5.0, "idle"), Err(LpsError::InvalidTime));
        assert_eq!(
            sense_context(1, 10, f64::NAN, "idle"),
            Err(LpsError::InvalidCoordinate)
        );
    }

    #[test]
    fn store_deduplicates_on_device_and_time() {
        let mut lbs = LbsStore::new();
        let a = sense_context(7, 100, 1.0, "idle").unwrap();
        assert_eq!(lbs.store_context(a.clone()), StoreOutcome::Inserted);
        let b = sense_context(7, 100, 1.5, "idle").unwrap();
        assert_eq!(lbs.store_context(b.clone()), StoreOutcome::Replaced);
        assert_eq!(lbs.record_count(), 1);
        assert_eq!(lbs.extract_context(7, 100), Some(&b));
        assert_eq!(lbs.extract_context(7, 101), None);
    }

    #[test]
    fn requests_demand_a_registered_prover() {
        let dp = generate_domain_parameters(CurveProfile::Toy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let kp = generate_keys(&dp, &mut rng);
        let mut lbs = LbsStore::new();
        lbs.register_prover(1, kp.q);
        assert!(request_location_proof(&lbs, 9, 1, 50).is_ok());
        assert_eq!(
            request_location_proof(&lbs, 9, 2, 50),
            Err(LpsError::UnknownProver(2))
        );
    }

    #[test]
    fn context_comparison_uses_a_closed_tolerance_interval() {
        let stored = sense_context(1, 10, 5.0, "idle").unwrap();
        let mut claimed = stored.clone();
        claimed.loc = 5.5;
        assert!(verify_context(&claimed, &stored, 0.5));
        claimed.loc = 6.1;
        assert!(!verify_context(&claimed, &stored, 0.5));
        claimed.loc = 5.0;
        claimed.t = 11;
        assert!(!verify_context(&claimed, &stored, 0.5));
    }

    /// The honest pipeline end to end, then the two clone scenarios: a
    /// clone holding the key but at the wrong distance fails the context
    /// stage; a clone signing with a different key fails the signature
    /// stage.
    #[test]
    fn clone_attacks_are_rejected_at_the_right_stage() {
        let dp = generate_domain_parameters(CurveProfile::Toy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kp = generate_keys(&dp, &mut rng);
        let mut lbs = LbsStore::new();
        lbs.register_prover(7, kp.q.clone());

        let placement = determine_2d_point_space(0.0, 0.0, 3.0, 4.0).unwrap();
        let honest = sense_context(7, 200, placement.distance(), "transit").unwrap();
        lbs.store_context(honest.clone());
        let request = request_location_proof(&lbs, 9, 7, 200).unwrap();
        assert_eq!(request.prover, 7);

        // honest prover answers and every verifier accepts
        let proof = generate_location_proof(&honest, &kp, &dp, HashKind::Sha256, &mut rng).unwrap();
        for _verifier in 0..3 {
            assert_eq!(
                verify_location_proof(&proof, &kp.q, &lbs, &dp, HashKind::Sha256, 1e-9),
                ProofVerdict::Accept
            );
        }

        // clone with the key, sensing from another position
        let elsewhere = determine_2d_point_space(30.0, -9.0, 3.0, 4.0).unwrap();
        let cloned = sense_context(7, 200, elsewhere.distance(), "transit").unwrap();
        let forged = generate_location_proof(&cloned, &kp, &dp, HashKind::Sha256, &mut rng).unwrap();
        assert_eq!(
            verify_location_proof(&forged, &kp.q, &lbs, &dp, HashKind::Sha256, 1e-9),
            ProofVerdict::Reject(RejectReason::ContextMismatch)
        );

        // clone without the key signs the honest context
        let other_key = generate_keys(&dp, &mut rng);
        let replayed =
            generate_location_proof(&honest, &other_key, &dp, HashKind::Sha256, &mut rng).unwrap();
        assert_eq!(
            verify_location_proof(&replayed, &kp.q, &lbs, &dp, HashKind::Sha256, 1e-9),
            ProofVerdict::Reject(RejectReason::BadSignature)
        );

        // claimed epoch never stored
        let mut stale = proof.clone();
        stale.context.t = 999;
        assert_eq!(
            verify_location_proof(&stale, &kp.q, &lbs, &dp, HashKind::Sha256, 1e-9),
            ProofVerdict::Reject(RejectReason::ContextNotFound)
        );
    }

    #[test]
    fn bulk_store_and_extract_round_trips() {
        let mut lbs = LbsStore::new();
        for i in 0..1000u64 {
            let ci = sense_context(i % 10, i as i64, i as f64 / 3.0, "bulk").unwrap();
            lbs.store_context(ci);
        }
        for i in 0..1000u64 {
            let found = lbs.extract_context(i % 10, i as i64).unwrap();
            assert_eq!(found.loc, i as f64 / 3.0);
        }
    }
}
