//! On-disk store for complexity tables.
//!
//! One file per (machine version, kind, auxiliary string, budget) key,
//! immutable once written.  The payload is the table's bit-level wire form
//! so that two runs that computed the same table produce byte-identical
//! files, and writes go through a temp file plus rename so a crashed run
//! can never leave a half-written table behind.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::BitString;
use crate::codec::{encode_string, gamma_encode, BitReader, CodecError};
use crate::enumerator::{complexity_table, ComplexityTable, TableEntry};
use crate::vm::{Budget, MachineKind, MACHINE_VERSION};

const MAGIC: &[u8; 8] = b"AITLTBL1";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache file corrupt: {0}")]
    Corrupt(String),
    #[error("cache built for machine {found}, this binary implements {expected}")]
    VersionMismatch { found: String, expected: String },
}

impl From<CodecError> for CacheError {
    fn from(e: CodecError) -> Self {
        CacheError::Corrupt(e.to_string())
    }
}

fn ascii_bits(s: &str) -> BitString {
    BitString::from_bytes(s.as_bytes())
}

fn bits_to_ascii(b: &BitString) -> Result<String, CacheError> {
    if b.len() % 8 != 0 {
        return Err(CacheError::Corrupt("version field is not whole bytes".into()));
    }
    String::from_utf8(b.to_padded_bytes())
        .map_err(|_| CacheError::Corrupt("version field is not ascii".into()))
}

/// Serializes a table to its canonical byte form: magic, then a bit-packed
/// header (machine version, kind, aux, budget, entry count) followed by the
/// sorted entries.  Each entry is encode_string(output), gamma(min_len+1),
/// gamma(min_steps_any+1), encode_string(witness), gamma(min_steps_at_min_len+1).
pub fn encode_table(table: &ComplexityTable) -> Vec<u8> {
    let mut bits = BitString::new();
    bits.extend_from(&encode_string(&ascii_bits(MACHINE_VERSION)));
    bits.push(table.kind == MachineKind::Prefix);
    bits.extend_from(&encode_string(&table.aux));
    bits.extend_from(&gamma_encode(u64::from(table.budget.max_len) + 1));
    bits.extend_from(&gamma_encode(table.budget.max_steps + 1));
    bits.extend_from(&gamma_encode(table.len() as u64 + 1));
    for (output, e) in table.iter() {
        bits.extend_from(&encode_string(output));
        bits.extend_from(&gamma_encode(u64::from(e.min_len) + 1));
        bits.extend_from(&gamma_encode(e.min_steps_any + 1));
        bits.extend_from(&encode_string(&e.witness));
        bits.extend_from(&gamma_encode(e.min_steps_at_min_len + 1));
    }
    let mut out = MAGIC.to_vec();
    out.extend_from_slice(&bits.to_padded_bytes());
    out
}

/// Strict inverse of [`encode_table`]: checks the magic, machine version,
/// entry ordering, per-entry invariants, and that nothing but zero padding
/// follows the declared payload.
pub fn decode_table(bytes: &[u8]) -> Result<ComplexityTable, CacheError> {
    let payload = bytes
        .strip_prefix(MAGIC.as_slice())
        .ok_or_else(|| CacheError::Corrupt("bad magic".into()))?;
    let stream = BitString::from_bytes(payload);
    let mut r = BitReader::new(&stream);

    let version = bits_to_ascii(&r.read_string()?)?;
    if version != MACHINE_VERSION {
        return Err(CacheError::VersionMismatch {
            found: version,
            expected: MACHINE_VERSION.to_string(),
        });
    }
    let kind = if r.read_bit()? { MachineKind::Prefix } else { MachineKind::Plain };
    let aux = r.read_string()?;
    let max_len = r.read_gamma()? - 1;
    let max_steps = r.read_gamma()? - 1;
    let count = r.read_gamma()? - 1;
    let max_len = u32::try_from(max_len)
        .map_err(|_| CacheError::Corrupt("program length bound overflows".into()))?;
    let budget = Budget::new(max_len, max_steps);

    let mut entries = std::collections::BTreeMap::new();
    let mut prev: Option<BitString> = None;
    for _ in 0..count {
        let output = r.read_string()?;
        if let Some(p) = &prev {
            if *p >= output {
                return Err(CacheError::Corrupt("entries out of canonical order".into()));
            }
        }
        let min_len = u32::try_from(r.read_gamma()? - 1)
            .map_err(|_| CacheError::Corrupt("entry length overflows".into()))?;
        let min_steps_any = r.read_gamma()? - 1;
        let witness = r.read_string()?;
        let min_steps_at_min_len = r.read_gamma()? - 1;
        if witness.len() as u32 != min_len {
            return Err(CacheError::Corrupt(format!(
                "witness length {} disagrees with recorded minimum {min_len}",
                witness.len()
            )));
        }
        if min_steps_any > min_steps_at_min_len {
            return Err(CacheError::Corrupt("step minima inverted".into()));
        }
        prev = Some(output.clone());
        entries.insert(
            output,
            TableEntry { min_len, witness, min_steps_at_min_len, min_steps_any },
        );
    }
    let tail = r.rest();
    if tail.len() >= 8 || tail.bits().any(|b| b) {
        return Err(CacheError::Corrupt("trailing data after entries".into()));
    }
    Ok(ComplexityTable::from_parts(kind, aux, budget, entries))
}

fn key_digest(kind: MachineKind, aux: &BitString, budget: &Budget) -> String {
    let mut h = Sha256::new();
    h.update(MACHINE_VERSION.as_bytes());
    h.update([kind as u8]);
    h.update((aux.len() as u64).to_be_bytes());
    h.update(aux.to_padded_bytes());
    h.update(u64::from(budget.max_len).to_be_bytes());
    h.update(budget.max_steps.to_be_bytes());
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Summary of one cached table, for listings.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CacheEntryInfo {
    pub file: String,
    pub kind: MachineKind,
    pub aux: BitString,
    pub max_len: u32,
    pub max_steps: u64,
    pub entries: usize,
    pub bytes: u64,
}

/// Outcome of verifying one cached file against recomputation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub file: String,
    pub sampled: usize,
    pub mismatches: usize,
    pub error: Option<String>,
}

/// Directory-backed table store.
pub struct TableStore {
    dir: PathBuf,
}

impl TableStore {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, kind: MachineKind, aux: &BitString, budget: &Budget) -> PathBuf {
        self.dir.join(format!("{}.tbl", key_digest(kind, aux, budget)))
    }

    /// Returns the cached table for this key, or None when absent.  A file
    /// that exists but fails validation is reported as an error rather than
    /// silently recomputed, since it signals corruption worth surfacing.
    pub fn load(
        &self,
        kind: MachineKind,
        aux: &BitString,
        budget: &Budget,
    ) -> Result<Option<ComplexityTable>, CacheError> {
        let path = self.path_for(kind, aux, budget);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let table = decode_table(&bytes)
            .map_err(|e| annotate(e, &path))?;
        if table.kind != kind
            || &table.aux != aux
            || table.budget.max_len != budget.max_len
            || table.budget.max_steps != budget.max_steps
        {
            return Err(CacheError::Corrupt(format!(
                "{} holds a different key than its name claims",
                path.display()
            )));
        }
        Ok(Some(table))
    }

    /// Writes the table atomically (temp file in the same directory, then
    /// rename).  Rewriting an existing key produces identical bytes.
    pub fn store(&self, table: &ComplexityTable) -> Result<PathBuf, CacheError> {
        let path = self.path_for(table.kind, &table.aux, &table.budget);
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        let bytes = encode_table(table);
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Cached table if present, otherwise computes and stores it.  The
    /// returned table is identical either way; the cache only buys time.
    pub fn load_or_compute(
        &self,
        kind: MachineKind,
        aux: &BitString,
        budget: &Budget,
    ) -> Result<ComplexityTable, CacheError> {
        if let Some(t) = self.load(kind, aux, budget)? {
            return Ok(t);
        }
        let t = complexity_table(kind, aux, budget);
        self.store(&t)?;
        Ok(t)
    }

    fn table_files(&self) -> Result<Vec<PathBuf>, CacheError> {
        let mut files: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "tbl"))
            .collect();
        files.sort();
        Ok(files)
    }

    pub fn list(&self) -> Result<Vec<CacheEntryInfo>, CacheError> {
        let mut out = Vec::new();
        for path in self.table_files()? {
            let bytes = fs::read(&path)?;
            let table = decode_table(&bytes).map_err(|e| annotate(e, &path))?;
            out.push(CacheEntryInfo {
                file: path.file_name().unwrap().to_string_lossy().into_owned(),
                kind: table.kind,
                aux: table.aux.clone(),
                max_len: table.budget.max_len,
                max_steps: table.budget.max_steps,
                entries: table.len(),
                bytes: bytes.len() as u64,
            });
        }
        Ok(out)
    }

    /// Deletes every cached table; returns how many files were removed.
    pub fn purge(&self) -> Result<usize, CacheError> {
        let files = self.table_files()?;
        let n = files.len();
        for f in files {
            fs::remove_file(f)?;
        }
        Ok(n)
    }

    /// Re-derives a deterministic 1% sample (at least one entry) of every
    /// cached table and compares bit-exactly against the stored entries.
    /// The sample is drawn with a generator seeded from the file name, so
    /// repeated verifications check the same entries.
    pub fn verify(&self) -> Result<Vec<VerifyReport>, CacheError> {
        let mut reports = Vec::new();
        for path in self.table_files()? {
            let file = path.file_name().unwrap().to_string_lossy().into_owned();
            let bytes = fs::read(&path)?;
            let stored = match decode_table(&bytes) {
                Ok(t) => t,
                Err(e) => {
                    reports.push(VerifyReport {
                        file,
                        sampled: 0,
                        mismatches: 1,
                        error: Some(e.to_string()),
                    });
                    continue;
                }
            };
            let fresh = complexity_table(stored.kind, &stored.aux, &stored.budget);

            let mut seed = [0u8; 32];
            let digest = Sha256::digest(file.as_bytes());
            seed.copy_from_slice(&digest);
            let mut rng = ChaCha8Rng::from_seed(seed);
            let outputs: Vec<&BitString> = stored.outputs().collect();
            let sample_size = outputs.len().div_ceil(100).max(1).min(outputs.len());
            let sample: Vec<&&BitString> =
                outputs.choose_multiple(&mut rng, sample_size).collect();

            let mut mismatches = 0;
            for x in &sample {
                if stored.get(x) != fresh.get(x) {
                    mismatches += 1;
                }
            }
            if fresh.len() != stored.len() {
                mismatches += 1;
            }
            reports.push(VerifyReport {
                file,
                sampled: sample.len(),
                mismatches,
                error: None,
            });
        }
        Ok(reports)
    }
}

fn annotate(e: CacheError, path: &Path) -> CacheError {
    match e {
        CacheError::Corrupt(msg) => CacheError::Corrupt(format!("{}: {msg}", path.display())),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    fn sample_table() -> ComplexityTable {
        complexity_table(MachineKind::Prefix, &bits(""), &Budget::new(8, 64))
    }

    #[test]
    fn roundtrip_is_byte_identical() {
        let t = sample_table();
        let bytes = encode_table(&t);
        let back = decode_table(&bytes).unwrap();
        assert_eq!(t, back);
        assert_eq!(encode_table(&back), bytes);
    }

    #[test]
    fn rejects_bad_magic_and_tampering() {
        let t = sample_table();
        let mut bytes = encode_table(&t);
        bytes[0] ^= 0xff;
        assert!(matches!(decode_table(&bytes), Err(CacheError::Corrupt(_))));

        let mut truncated = encode_table(&t);
        truncated.truncate(truncated.len() - 2);
        assert!(decode_table(&truncated).is_err());
    }

    #[test]
    fn rejects_foreign_machine_version() {
        // Hand-build a header with a different version string.
        let mut bits = BitString::new();
        bits.extend_from(&encode_string(&ascii_bits("tinyvm-v0")));
        bits.push(true);
        bits.extend_from(&encode_string(&BitString::new()));
        bits.extend_from(&gamma_encode(1));
        bits.extend_from(&gamma_encode(1));
        bits.extend_from(&gamma_encode(1));
        let mut bytes = MAGIC.to_vec();
        bytes.extend_from_slice(&bits.to_padded_bytes());
        assert!(matches!(
            decode_table(&bytes),
            Err(CacheError::VersionMismatch { .. })
        ));
    }

    #[test]
    fn store_load_and_identity_with_cold_computation() {
        let dir = tempfile::tempdir().unwrap();
        let store = TableStore::new(dir.path()).unwrap();
        let budget = Budget::new(9, 64);
        assert!(store.load(MachineKind::Prefix, &bits(""), &budget).unwrap().is_none());
        let cold = store.load_or_compute(MachineKind::Prefix, &bits(""), &budget).unwrap();
        let warm = store.load_or_compute(MachineKind::Prefix, &bits(""), &budget).unwrap();
        assert_eq!(cold, warm);
        assert_eq!(cold, complexity_table(MachineKind::Prefix, &bits(""), &budget));
    }

    #[test]
    fn distinct_keys_get_distinct_files() {
        let dir = tempfile::tempdir().unwrap();
        let store = TableStore::new(dir.path()).unwrap();
        let b1 = Budget::new(6, 32);
        let b2 = Budget::new(7, 32);
        store.load_or_compute(MachineKind::Prefix, &bits(""), &b1).unwrap();
        store.load_or_compute(MachineKind::Prefix, &bits(""), &b2).unwrap();
        store.load_or_compute(MachineKind::Plain, &bits(""), &b1).unwrap();
        store.load_or_compute(MachineKind::Prefix, &bits("1"), &b1).unwrap();
        assert_eq!(store.list().unwrap().len(), 4);
    }

    #[test]
    fn verify_passes_on_fresh_cache_and_flags_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let store = TableStore::new(dir.path()).unwrap();
        store.load_or_compute(MachineKind::Prefix, &bits(""), &Budget::new(8, 64)).unwrap();
        store.load_or_compute(MachineKind::Plain, &bits(""), &Budget::new(8, 64)).unwrap();
        let reports = store.verify().unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.mismatches == 0 && r.error.is_none()));

        // Chop the tail off one file; the decoder hits the missing bits
        // before any sampling happens, so verify must flag it.
        let victim = store.table_files().unwrap().pop().unwrap();
        let mut bytes = fs::read(&victim).unwrap();
        bytes.truncate(bytes.len() - 2);
        fs::write(&victim, bytes).unwrap();
        let reports = store.verify().unwrap();
        assert!(reports.iter().any(|r| r.mismatches > 0 && r.error.is_some()));
    }

    #[test]
    fn purge_removes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let store = TableStore::new(dir.path()).unwrap();
        store.load_or_compute(MachineKind::Prefix, &bits(""), &Budget::new(6, 32)).unwrap();
        assert_eq!(store.purge().unwrap(), 1);
        assert!(store.list().unwrap().is_empty());
    }
}
