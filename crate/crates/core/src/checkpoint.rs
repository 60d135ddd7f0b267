//! Resumable job state for the long block-structured counts. A checkpoint
//! records a prefix of completed blocks plus the running totals; because
//! block results are folded in index order with plain f64 addition, resuming
//! from the stored partial sum reproduces the uninterrupted result bit for
//! bit. Integrity is a SHA-256 over a canonical rendering of the payload
//! (the f64 total enters through its bit pattern, so any drift is caught).

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Checkpoint {
    pub job_type: String,
    pub params: BTreeMap<String, String>,
    pub block_size: u64,
    /// Completed blocks form the prefix 0..completed_blocks.
    pub completed_blocks: u64,
    pub partial_count: u64,
    pub partial_sum: f64,
    pub checksum: String,
}

impl Checkpoint {
    pub fn new(job_type: &str, params: BTreeMap<String, String>, block_size: u64) -> Self {
        Checkpoint {
            job_type: job_type.to_string(),
            params,
            block_size,
            completed_blocks: 0,
            partial_count: 0,
            partial_sum: 0.0,
            checksum: String::new(),
        }
    }

    /// Canonical payload: fixed field order, params in key order (BTreeMap
    /// iteration), the sum as raw bits. The checksum field itself is not
    /// part of the payload.
    fn canonical_payload(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "job_type={}", self.job_type);
        for (k, v) in &self.params {
            let _ = writeln!(s, "param.{k}={v}");
        }
        let _ = writeln!(s, "block_size={}", self.block_size);
        let _ = writeln!(s, "completed_blocks={}", self.completed_blocks);
        let _ = writeln!(s, "partial_count={}", self.partial_count);
        let _ = writeln!(s, "partial_sum_bits={:016x}", self.partial_sum.to_bits());
        s
    }

    pub fn compute_checksum(&self) -> String {
        let digest = Sha256::digest(self.canonical_payload().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    /// Write atomically: serialize to a sibling temp file, then rename over
    /// the target. The stored checksum is always freshly computed.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut sealed = self.clone();
        sealed.checksum = sealed.compute_checksum();
        let json = serde_json::to_string_pretty(&sealed)
            .map_err(|e| Error::checkpoint(format!("serialize failed: {e}")))?;
        let file_name = path
            .file_name()
            .ok_or_else(|| Error::checkpoint("checkpoint path has no file name"))?;
        let tmp = path.with_file_name(format!("{}.tmp", file_name.to_string_lossy()));
        fs::write(&tmp, json)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let data = fs::read_to_string(path)?;
        let cp: Checkpoint = serde_json::from_str(&data)
            .map_err(|e| Error::checkpoint(format!("unreadable checkpoint: {e}")))?;
        let expect = cp.compute_checksum();
        if cp.checksum != expect {
            return Err(Error::checkpoint(format!(
                "checksum mismatch (stored {}.., recomputed {}..); refusing to resume",
                &cp.checksum.get(..12).unwrap_or(&cp.checksum),
                &expect[..12]
            )));
        }
        Ok(cp)
    }

    /// A checkpoint only resumes the exact job it was written by: same job
    /// type, same parameters, same block size (block geometry changes the
    /// fold order and would break bit-identical resumption).
    pub fn ensure_matches(
        &self,
        job_type: &str,
        params: &BTreeMap<String, String>,
        block_size: u64,
    ) -> Result<()> {
        if self.job_type != job_type {
            return Err(Error::checkpoint(format!(
                "checkpoint is for job '{}', not '{job_type}'",
                self.job_type
            )));
        }
        if &self.params != params {
            return Err(Error::checkpoint(format!(
                "checkpoint parameters {:?} do not match requested {:?}",
                self.params, params
            )));
        }
        if self.block_size != block_size {
            return Err(Error::checkpoint(format!(
                "checkpoint block size {} does not match requested {block_size}",
                self.block_size
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let mut params = BTreeMap::new();
        params.insert("x".to_string(), "1000000".to_string());
        let mut cp = Checkpoint::new("quadratic_twin_count", params, 128);
        cp.completed_blocks = 3;
        cp.partial_count = 2;
        cp.partial_sum = 17.25;
        cp
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("job.ckpt");
        let cp = sample();
        cp.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back.completed_blocks, 3);
        assert_eq!(back.partial_count, 2);
        assert_eq!(back.partial_sum.to_bits(), 17.25f64.to_bits());
        assert_eq!(back.checksum, back.compute_checksum());
    }

    #[test]
    fn tampered_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("job.ckpt");
        sample().save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let bad = text.replace("\"partial_count\": 2", "\"partial_count\": 3");
        assert_ne!(text, bad);
        fs::write(&path, bad).unwrap();
        assert!(matches!(
            Checkpoint::load(&path),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn tampered_checksum_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("job.ckpt");
        sample().save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cp: Checkpoint = serde_json::from_str(&text).unwrap();
        let flipped = if cp.checksum.starts_with('0') { "1" } else { "0" };
        let bad = text.replace(&cp.checksum, &format!("{flipped}{}", &cp.checksum[1..]));
        fs::write(&path, bad).unwrap();
        assert!(Checkpoint::load(&path).is_err());
    }

    #[test]
    fn mismatched_job_is_rejected() {
        let cp = sample();
        let mut other = cp.params.clone();
        other.insert("x".to_string(), "2000000".to_string());
        assert!(cp.ensure_matches("quadratic_twin_count", &cp.params, 128).is_ok());
        assert!(cp.ensure_matches("linear_correlation", &cp.params, 128).is_err());
        assert!(cp.ensure_matches("quadratic_twin_count", &other, 128).is_err());
        assert!(cp.ensure_matches("quadratic_twin_count", &cp.params, 64).is_err());
    }
}
