//! Content-hash identifiers for persisted artifacts.
//!
//! An [`ArtifactId`] is the first 8 lowercase hex characters of the SHA-256
//! digest of a file's canonical bytes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArtifactId(String);

impl ArtifactId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Fails with a provenance error naming `path` unless `bytes` hash to
    /// this id.
    pub fn verify(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        let actual = content_hash(bytes);
        if &actual != self {
            return Err(Error::Provenance {
                path: path.to_path_buf(),
                expected: self.0.clone(),
                actual: actual.0,
            });
        }
        Ok(())
    }
}

pub fn content_hash(bytes: &[u8]) -> ArtifactId {
    let digest = Sha256::digest(bytes);
    let hex: String = digest[..4].iter().map(|b| format!("{b:02x}")).collect();
    ArtifactId(hex)
}

impl fmt::Display for ArtifactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ArtifactId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ok = s.len() == 8
            && s.bytes()
                .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
        if !ok {
            return Err(Error::Usage(format!(
                "`{s}` is not an 8-character lowercase hex id"
            )));
        }
        Ok(ArtifactId(s.to_owned()))
    }
}

impl TryFrom<String> for ArtifactId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ArtifactId> for String {
    fn from(id: ArtifactId) -> String {
        id.0
    }
}

/// The id embedded in names like `grid-1a2b3c4d.csv`.
pub fn id_from_file_name(path: &Path) -> Option<ArtifactId> {
    let stem = path.file_stem()?.to_str()?;
    let (_, id) = stem.rsplit_once('-')?;
    id.parse().ok()
}

/// Reads `path` and checks its bytes against the id in its file name.
pub fn read_verified(path: &Path) -> Result<Vec<u8>> {
    let id = id_from_file_name(path)
        .ok_or_else(|| Error::format(path, "file name carries no artifact id"))?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    id.verify(path, &bytes)?;
    Ok(bytes)
}
