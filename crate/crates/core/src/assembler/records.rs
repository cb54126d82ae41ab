//! Best-known lower bounds as JSON-lines records.
//!
//! One record per line keeps files mergeable with plain text tools; a merge
//! keeps the largest bound per `(n, t, k)` cell, and a render turns a set of
//! records into a fixed-width table with explicit gaps for missing cells.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembler::{read_witness, verify_shell_code};
use crate::{Error, Result};

/// A verified lower bound for the largest code in shell `s_k` of the
/// `n`-dimensional integer lattice with pairwise inner products at most `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub n: usize,
    pub t: i64,
    pub k: u32,
    pub bound: u64,
    /// Short label of how the code was found (group family tag, search
    /// settings, or an explicit construction name).
    pub construction_tag: String,
    /// Path of the witness file holding the code itself, relative to the
    /// records file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Read JSON-lines records; blank lines and `#` comments are skipped.
pub fn read_records(path: &Path) -> Result<Vec<BoundRecord>> {
    let text = fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: BoundRecord = serde_json::from_str(line).map_err(|e| Error::MalformedFile {
            format: "records",
            line: idx + 1,
            msg: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(records)
}

/// Write records as JSON lines, one per record.
pub fn write_records(path: &Path, records: &[BoundRecord]) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    for rec in records {
        let line = serde_json::to_string(rec)
            .map_err(|e| Error::VerificationFailed(format!("record serialization: {e}")))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Keep the best record per `(n, t, k)`: the largest bound, breaking ties in
/// favor of a record with a witness and then by tag, so the result does not
/// depend on input order.
pub fn merge_records(records: &[BoundRecord]) -> Vec<BoundRecord> {
    let mut best: BTreeMap<(usize, i64, u32), BoundRecord> = BTreeMap::new();
    for rec in records {
        match best.get(&(rec.n, rec.t, rec.k)) {
            Some(cur) if !beats(rec, cur) => {}
            _ => {
                best.insert((rec.n, rec.t, rec.k), rec.clone());
            }
        }
    }
    best.into_values().collect()
}

fn beats(a: &BoundRecord, b: &BoundRecord) -> bool {
    if a.bound != b.bound {
        return a.bound > b.bound;
    }
    if a.witness.is_some() != b.witness.is_some() {
        return a.witness.is_some();
    }
    a.construction_tag < b.construction_tag
}

/// The best bound for one cell among already-merged records.
pub fn lookup(records: &[BoundRecord], n: usize, t: i64, k: u32) -> Option<&BoundRecord> {
    records
        .iter()
        .filter(|r| r.n == n && r.t == t && r.k == k)
        .max_by_key(|r| r.bound)
}

/// Render records for one dimension as a table with rows indexed by `t` and
/// columns by `k`; cells with no record show `-`.
pub fn render_table(records: &[BoundRecord], n: usize, ts: &[i64], ks: &[u32]) -> String {
    let merged = merge_records(records);
    let mut out = String::new();
    let _ = writeln!(out, "n={n}");
    let _ = write!(out, "{:>5}", "t\\k");
    for k in ks {
        let _ = write!(out, "{k:>7}");
    }
    out.push('\n');
    for t in ts {
        let _ = write!(out, "{t:>5}");
        for k in ks {
            match lookup(&merged, n, *t, *k) {
                Some(r) => {
                    let _ = write!(out, "{:>7}", r.bound);
                }
                None => {
                    let _ = write!(out, "{:>7}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Check a record against its witness file: the header must match the
/// record's cell, the code must have exactly `bound` vectors, and it must
/// pass full verification.  `base` anchors the relative witness path.
pub fn validate_record(rec: &BoundRecord, base: &Path) -> Result<()> {
    let rel = rec.witness.as_ref().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "record ({}, {}, {}) has no witness file",
            rec.n, rec.t, rec.k
        ))
    })?;
    let code = read_witness(&base.join(rel))?;
    if code.spec.shell.n != rec.n || code.spec.shell.k != rec.k || code.spec.t != rec.t {
        return Err(Error::VerificationFailed(format!(
            "witness {rel} is for ({}, {}, {}), record says ({}, {}, {})",
            code.spec.shell.n, code.spec.t, code.spec.shell.k, rec.n, rec.t, rec.k
        )));
    }
    if code.vectors.len() as u64 != rec.bound {
        return Err(Error::VerificationFailed(format!(
            "witness {rel} has {} vectors, record claims {}",
            code.vectors.len(),
            rec.bound
        )));
    }
    let report = verify_shell_code(&code);
    if !report.passes() {
        return Err(Error::VerificationFailed(format!(
            "witness {rel} fails verification: {report}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembler::{write_witness, Provenance, ShellCode};
    use crate::shellgeom::{CodeSpec, LatticeVector, ShellId};

    fn rec(n: usize, t: i64, k: u32, bound: u64, tag: &str) -> BoundRecord {
        BoundRecord {
            n,
            t,
            k,
            bound,
            construction_tag: tag.into(),
            witness: None,
        }
    }

    #[test]
    fn records_round_trip_as_json_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let records = vec![
            BoundRecord { witness: Some("w/a.code".into()), ..rec(6, 1, 4, 18, "s2") },
            rec(6, 1, 6, 12, "n"),
        ];
        write_records(&path, &records).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(back, records);

        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2, "one record per line");
        std::fs::write(&path, format!("# comment\n\n{text}")).unwrap();
        assert_eq!(read_records(&path).unwrap(), records);
        std::fs::write(&path, "{\"n\": 6}\n").unwrap();
        assert!(matches!(
            read_records(&path),
            Err(Error::MalformedFile { line: 1, .. })
        ));
    }

    #[test]
    fn merge_keeps_the_best_bound_per_cell() {
        let records = vec![
            rec(6, 2, 4, 12, "p"),
            rec(6, 2, 4, 60, "s"),
            rec(6, 2, 4, 40, "n"),
            rec(8, 2, 4, 240, "s"),
        ];
        let merged = merge_records(&records);
        assert_eq!(merged.len(), 2);
        assert_eq!(lookup(&merged, 6, 2, 4).unwrap().bound, 60);
        assert_eq!(lookup(&merged, 8, 2, 4).unwrap().bound, 240);
        assert!(lookup(&merged, 6, 2, 5).is_none());
    }

    #[test]
    fn merge_ties_prefer_witnessed_records_deterministically() {
        let a = rec(6, 1, 4, 12, "zz");
        let b = BoundRecord { witness: Some("w.code".into()), ..rec(6, 1, 4, 12, "n") };
        let forward = merge_records(&[a.clone(), b.clone()]);
        let reverse = merge_records(&[b.clone(), a.clone()]);
        assert_eq!(forward, reverse);
        assert_eq!(forward[0].witness, Some("w.code".into()));
    }

    #[test]
    fn render_shows_bounds_and_gaps() {
        let records = vec![rec(6, 1, 4, 18, "s2"), rec(6, 1, 6, 12, "n")];
        let table = render_table(&records, 6, &[1], &[4, 5, 6]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "n=6");
        assert!(lines[1].contains('4') && lines[1].contains('6'));
        let row = lines[2];
        assert!(row.starts_with("    1"));
        assert!(row.contains("18") && row.contains("12") && row.contains('-'));
    }

    #[test]
    fn validation_accepts_good_witnesses_and_rejects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let spec = CodeSpec::new(ShellId::new(3, 4).unwrap(), 0).unwrap();
        let mut vectors = Vec::new();
        for i in 0..3 {
            for s in [2i64, -2] {
                let mut c = vec![0i64; 3];
                c[i] = s;
                vectors.push(LatticeVector::new(c));
            }
        }
        let code = ShellCode { spec, vectors, provenance: Provenance::default() };
        write_witness(&dir.path().join("w.code"), &code).unwrap();
        let good = BoundRecord {
            witness: Some("w.code".into()),
            ..rec(3, 0, 4, 6, "s")
        };
        validate_record(&good, dir.path()).unwrap();

        let wrong_count = BoundRecord { bound: 7, ..good.clone() };
        assert!(matches!(
            validate_record(&wrong_count, dir.path()),
            Err(Error::VerificationFailed(_))
        ));
        let wrong_cell = BoundRecord { t: -4, ..good.clone() };
        assert!(matches!(
            validate_record(&wrong_cell, dir.path()),
            Err(Error::VerificationFailed(_))
        ));
        let no_witness = BoundRecord { witness: None, ..good.clone() };
        assert!(matches!(
            validate_record(&no_witness, dir.path()),
            Err(Error::InvalidParameter(_))
        ));

        // Corrupt the stored code: replace a vector by one of wrong norm.
        let text = std::fs::read_to_string(dir.path().join("w.code")).unwrap();
        let tampered = text.replace("2 0 0", "1 0 0");
        std::fs::write(dir.path().join("w.code"), tampered).unwrap();
        assert!(validate_record(&good, dir.path()).is_err());
    }
}
