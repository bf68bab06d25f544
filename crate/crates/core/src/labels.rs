//! Label tables and record validation.

use std::collections::BTreeMap;

use crate::alphabet::{Alphabet, AmbiguityPolicy};
use crate::error::{Error, Result};
use crate::fasta::SequenceRecord;

/// Parse a two-column `id,label` table. A leading `id,label` header row is
/// skipped; fields are whitespace-trimmed.
pub fn load_labels(bytes: &[u8]) -> Result<BTreeMap<String, String>> {
    let text = String::from_utf8_lossy(bytes);
    let mut map = BTreeMap::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::MalformedRow(line_no));
        }
        let (id, label) = (fields[0], fields[1]);
        if line_no == 1 && id.eq_ignore_ascii_case("id") && label.eq_ignore_ascii_case("label") {
            continue;
        }
        if map.insert(id.to_string(), label.to_string()).is_some() {
            return Err(Error::DuplicateLabel(id.to_string()));
        }
    }
    Ok(map)
}

/// Attach labels to records and screen residues against the alphabet.
///
/// Under [`AmbiguityPolicy::Reject`] any residue outside the alphabet is an
/// error; under [`AmbiguityPolicy::MaskKmers`] it is kept as-is and the
/// spectrum stage skips the windows that overlap it.
pub fn validate_records(
    records: &[SequenceRecord],
    labels: &BTreeMap<String, String>,
    alphabet: &Alphabet,
    policy: AmbiguityPolicy,
) -> Result<Vec<SequenceRecord>> {
    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        let label = labels
            .get(&rec.id)
            .ok_or_else(|| Error::MissingLabel(rec.id.clone()))?;
        if policy == AmbiguityPolicy::Reject {
            if let Some(pos) = rec.residues.bytes().position(|b| !alphabet.contains(b)) {
                return Err(Error::InvalidResidue {
                    id: rec.id.clone(),
                    position: pos,
                    residue: rec.residues.as_bytes()[pos] as char,
                });
            }
        }
        out.push(SequenceRecord {
            id: rec.id.clone(),
            residues: rec.residues.clone(),
            label: Some(label.clone()),
        });
    }
    Ok(out)
}
