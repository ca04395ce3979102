//! Stable content digests.
//!
//! `content_digest(text)` is `"sha256:"` followed by the lowercase hex SHA-256
//! of the UTF-8 bytes.
//!
//! A variant id is the lowercase hex SHA-256 of the following fields joined by
//! the unit separator `0x1F`:
//!
//! 1. the literal `provline-variant-v1`
//! 2. `doc_id`
//! 3. the base text's content digest
//! 4. the policy descriptor (compact JSON, see [`TrustPolicy::descriptor`])
//! 5. the applied event ids, sorted by byte order and joined by `0x1E`
//!
//! The algorithm is independent of platform and input order.
//!
//! [`TrustPolicy::descriptor`]: crate::TrustPolicy::descriptor

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use sha2::{Digest, Sha256};

const VARIANT_DOMAIN: &str = "provline-variant-v1";
const FIELD_SEP: u8 = 0x1F;
const ID_SEP: u8 = 0x1E;

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(out, "{b:02x}");
    }
    out
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(Sha256::digest(data).as_slice())
}

pub fn content_digest(text: &str) -> String {
    let mut out = String::from("sha256:");
    out.push_str(&sha256_hex(text.as_bytes()));
    out
}

pub fn variant_id(doc_id: &str, base_digest: &str, policy_descriptor: &str, applied: &[&str]) -> String {
    let mut ids: Vec<&str> = applied.to_vec();
    ids.sort_unstable();
    let mut hasher = Sha256::new();
    for (i, field) in [VARIANT_DOMAIN, doc_id, base_digest, policy_descriptor].iter().enumerate() {
        if i > 0 {
            hasher.update([FIELD_SEP]);
        }
        hasher.update(field.as_bytes());
    }
    hasher.update([FIELD_SEP]);
    for (i, id) in ids.iter().enumerate() {
        if i > 0 {
            hasher.update([ID_SEP]);
        }
        hasher.update(id.as_bytes());
    }
    hex(hasher.finalize().as_slice())
}
