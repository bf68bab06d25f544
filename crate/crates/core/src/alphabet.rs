//! Residue alphabets and the policy for characters outside them.

use crate::error::{Error, Result};

/// How to treat residues that are not part of the alphabet
/// (ambiguity codes such as `N` for DNA or `X` for protein).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbiguityPolicy {
    /// Any non-alphabet residue is an error.
    Reject,
    /// Keep the residue; the spectrum stage skips every k-mer window that
    /// overlaps it.
    MaskKmers,
}

/// An ordered residue alphabet with O(1) byte-to-rank lookup.
#[derive(Debug, Clone)]
pub struct Alphabet {
    symbols: Vec<u8>,
    ranks: [Option<u8>; 256],
}

impl Alphabet {
    /// Build an alphabet from its ordered symbols.
    ///
    /// Symbols must be unique ASCII characters and there must be at least two;
    /// lowercase input is folded to uppercase.
    pub fn new(symbols: &str) -> Result<Alphabet> {
        let mut ranks = [None; 256];
        let mut bytes = Vec::with_capacity(symbols.len());
        for ch in symbols.chars() {
            if !ch.is_ascii() {
                return Err(Error::InvalidKmer(ch));
            }
            let b = ch.to_ascii_uppercase() as u8;
            if ranks[b as usize].is_some() {
                return Err(Error::Numerical(format!(
                    "alphabet symbol `{}` repeats",
                    b as char
                )));
            }
            ranks[b as usize] = Some(bytes.len() as u8);
            bytes.push(b);
        }
        if bytes.len() < 2 {
            return Err(Error::Numerical(
                "alphabet needs at least two symbols".into(),
            ));
        }
        Ok(Alphabet {
            symbols: bytes,
            ranks,
        })
    }

    /// DNA nucleotides `ACGT`.
    pub fn dna() -> Alphabet {
        Alphabet::new("ACGT").expect("static alphabet")
    }

    /// The 20 standard amino acids.
    pub fn protein() -> Alphabet {
        Alphabet::new("ACDEFGHIKLMNPQRSTVWY").expect("static alphabet")
    }

    /// Parse the CLI-style selector `dna`, `protein`, or `custom:<chars>`.
    pub fn parse_spec(spec: &str) -> Result<Alphabet> {
        match spec {
            "dna" => Ok(Alphabet::dna()),
            "protein" => Ok(Alphabet::protein()),
            other => match other.strip_prefix("custom:") {
                Some(chars) => Alphabet::new(chars),
                None => Err(Error::Numerical(format!(
                    "unknown alphabet `{other}` (expected dna, protein, or custom:<chars>)"
                ))),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Rank of a residue byte, or `None` when the byte is outside the alphabet.
    #[inline]
    pub fn rank(&self, byte: u8) -> Option<usize> {
        self.ranks[byte as usize].map(|r| r as usize)
    }

    #[inline]
    pub fn contains(&self, byte: u8) -> bool {
        self.ranks[byte as usize].is_some()
    }

    /// Symbol at a given rank.
    pub fn symbol(&self, rank: usize) -> u8 {
        self.symbols[rank]
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Number of distinct k-mers, i.e. `|Σ|^k`. Errors when the count would
    /// overflow `usize`.
    pub fn kmer_space(&self, k: usize) -> Result<usize> {
        let mut dim: usize = 1;
        for _ in 0..k {
            dim = dim
                .checked_mul(self.symbols.len())
                .ok_or_else(|| Error::Numerical(format!("|Σ|^{k} overflows usize")))?;
        }
        Ok(dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dna_ranks_are_ordered() {
        let dna = Alphabet::dna();
        assert_eq!(dna.len(), 4);
        assert_eq!(dna.rank(b'A'), Some(0));
        assert_eq!(dna.rank(b'C'), Some(1));
        assert_eq!(dna.rank(b'G'), Some(2));
        assert_eq!(dna.rank(b'T'), Some(3));
        assert_eq!(dna.rank(b'N'), None);
    }

    #[test]
    fn protein_has_twenty_symbols() {
        let p = Alphabet::protein();
        assert_eq!(p.len(), 20);
        for (i, &s) in p.symbols().iter().enumerate() {
            assert_eq!(p.rank(s), Some(i));
        }
    }

    #[test]
    fn custom_alphabet_uppercases() {
        let a = Alphabet::new("ab").unwrap();
        assert_eq!(a.rank(b'A'), Some(0));
        assert_eq!(a.rank(b'B'), Some(1));
    }

    #[test]
    fn rejects_duplicates_and_singletons() {
        assert!(Alphabet::new("AA").is_err());
        assert!(Alphabet::new("A").is_err());
    }

    #[test]
    fn kmer_space_counts() {
        let dna = Alphabet::dna();
        assert_eq!(dna.kmer_space(0).unwrap(), 1);
        assert_eq!(dna.kmer_space(3).unwrap(), 64);
        assert_eq!(dna.kmer_space(8).unwrap(), 65536);
    }
}
