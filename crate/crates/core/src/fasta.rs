//! FASTA parsing and serialization.

use crate::error::{Error, Result};

/// One sequence with its identifier and, once validated, its class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRecord {
    /// Header text up to the first whitespace.
    pub id: String,
    /// Uppercased residue string.
    pub residues: String,
    /// Class label, attached by validation against the label table.
    pub label: Option<String>,
}

impl SequenceRecord {
    pub fn new(id: impl Into<String>, residues: impl Into<String>) -> SequenceRecord {
        SequenceRecord {
            id: id.into(),
            residues: residues.into().to_ascii_uppercase(),
            label: None,
        }
    }
}

/// Parse FASTA text into records.
///
/// Headers start with `>`; the id is the header text up to the first
/// whitespace; sequence lines until the next header are concatenated and
/// uppercased. Both LF and CRLF line endings are accepted. Labels are left
/// unset.
pub fn parse_fasta(bytes: &[u8]) -> Result<Vec<SequenceRecord>> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut records: Vec<SequenceRecord> = Vec::new();
    let mut current: Option<(String, String, usize)> = None; // id, residues, header line

    for (line_no, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line_no = line_no + 1;
        let line = trim_line(raw);
        if line.is_empty() {
            continue;
        }
        if line[0] == b'>' {
            if let Some(rec) = finish_record(current.take())? {
                records.push(rec);
            }
            let header = &line[1..];
            let id_end = header
                .iter()
                .position(|b| b.is_ascii_whitespace())
                .unwrap_or(header.len());
            let id = String::from_utf8_lossy(&header[..id_end]).into_owned();
            if id.is_empty() {
                return Err(Error::MalformedFasta {
                    line: line_no,
                    reason: "header has an empty id".into(),
                });
            }
            current = Some((id, String::new(), line_no));
        } else {
            match current.as_mut() {
                Some((_, residues, _)) => {
                    for &b in line {
                        residues.push(b.to_ascii_uppercase() as char);
                    }
                }
                None => {
                    return Err(Error::MalformedFasta {
                        line: line_no,
                        reason: "sequence data before the first header".into(),
                    });
                }
            }
        }
    }
    if let Some(rec) = finish_record(current)? {
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(records)
}

fn finish_record(current: Option<(String, String, usize)>) -> Result<Option<SequenceRecord>> {
    match current {
        None => Ok(None),
        Some((id, residues, header_line)) => {
            if residues.is_empty() {
                return Err(Error::MalformedFasta {
                    line: header_line,
                    reason: format!("header `{id}` has no sequence lines"),
                });
            }
            Ok(Some(SequenceRecord {
                id,
                residues,
                label: None,
            }))
        }
    }
}

fn trim_line(raw: &[u8]) -> &[u8] {
    let mut line = raw;
    while let Some((&last, rest)) = line.split_last() {
        if last == b'\r' || last == b' ' || last == b'\t' {
            line = rest;
        } else {
            break;
        }
    }
    line
}

/// Serialize records back to FASTA, one sequence line per record.
pub fn to_fasta(records: &[SequenceRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        out.push('>');
        out.push_str(&rec.id);
        out.push('\n');
        out.push_str(&rec.residues);
        out.push('\n');
    }
    out
}
