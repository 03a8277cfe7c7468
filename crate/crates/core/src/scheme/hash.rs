//! Selectable message digests for signing and proof generation.

use sha1::Digest as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HashKind {
    Sha256,
    Sha1,
}

impl HashKind {
    pub fn digest(&self, data: &[u8]) -> Vec<u8> {
        match self {
            HashKind::Sha256 => sha2::Sha256::digest(data).to_vec(),
            HashKind::Sha1 => sha1::Sha1::digest(data).to_vec(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HashKind::Sha256 => "sha256",
            HashKind::Sha1 => "sha1",
        }
    }
}
