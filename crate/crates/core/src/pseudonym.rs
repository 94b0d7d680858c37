//! Keyed replacement of identifier values by opaque tokens.
//!
//! This hides direct identifiers but is not anonymization: the remaining
//! attributes are untouched and may still single out records.

use base64::engine::general_purpose::STANDARD_NO_PAD;
use base64::Engine;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::table::{AttributeKind, Table, Value};

/// Token length in base64 characters (128 bits).
const TOKEN_LEN: usize = 22;

/// Replaces each cell of `attr` with a 22-character base64 token derived
/// from SHA-256 over the seed and the cell text. Equal inputs give equal
/// tokens; the seed itself is not written anywhere.
pub fn pseudonymize(table: &Table, attr: &str, seed: &[u8]) -> Result<Table> {
    let col = table.column_index(attr)?;
    Ok(table.map_column(col, AttributeKind::Text, |v| Value::Text(token(seed, &v.to_string()))))
}

fn token(seed: &[u8], value: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update((seed.len() as u64).to_be_bytes());
    hasher.update(seed);
    hasher.update(value.as_bytes());
    let digest = hasher.finalize();
    let mut encoded = STANDARD_NO_PAD.encode(&digest[..16]);
    encoded.truncate(TOKEN_LEN);
    encoded
}
