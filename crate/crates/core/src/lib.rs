//! Auditing toolkit for fact-checking corpora.
//!
//! The crate ingests claim/evidence datasets ([`corpus`]), maps verdicts onto
//! misinformation flags and veracity scales ([`labels`]), flags evidence
//! snippets that were leaked from fact-checking articles ([`detector`]),
//! aggregates leakage and verdict statistics ([`report`]) and measures how much
//! a simple lexical classifier profits from leaked evidence ([`probe`]).

pub mod corpus;
pub mod detector;
pub mod error;
pub mod labels;
pub mod par;
pub mod probe;
pub mod report;

pub use corpus::{ClaimRecord, Dataset, EvidenceSnippet, ValidationReport};
pub use detector::{ClaimLeakStatus, LeakVerdict, Mechanism, PatternSet};
pub use error::{Error, Result};
pub use labels::{LabelScheme, VerdictGroup};
pub use par::Execution;

use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
