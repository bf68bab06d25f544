//! k-mer spectrum encoding of sequences.
//!
//! A spectrum is the vector of counts (or frequencies) of every length-k
//! substring over the alphabet, indexed canonically base-|Σ|. Windows that
//! overlap a non-alphabet residue are skipped under
//! [`AmbiguityPolicy::MaskKmers`] and are an error under
//! [`AmbiguityPolicy::Reject`].

use rayon::prelude::*;

use crate::alphabet::{Alphabet, AmbiguityPolicy};
use crate::error::{Error, Result};
use crate::fasta::SequenceRecord;
use crate::matrix::DenseMatrix;

/// Fixed-length k-mer count/frequency vector of dimension `|Σ|^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KmerSpectrum {
    pub k: usize,
    pub counts: Vec<f64>,
    pub normalized: bool,
}

impl KmerSpectrum {
    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn is_all_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0.0)
    }
}

/// Canonical rank of a k-mer: `Σ_j rank(kmer[j]) · |Σ|^(k−1−j)`.
pub fn kmer_index(kmer: &str, alphabet: &Alphabet) -> Result<usize> {
    let mut index = 0usize;
    for ch in kmer.bytes() {
        let rank = alphabet.rank(ch).ok_or(Error::InvalidKmer(ch as char))?;
        index = index * alphabet.len() + rank;
    }
    Ok(index)
}

/// Inverse of [`kmer_index`]: the k-mer string at a given rank.
pub fn kmer_string(mut index: usize, k: usize, alphabet: &Alphabet) -> String {
    let mut bytes = vec![0u8; k];
    for slot in bytes.iter_mut().rev() {
        *slot = alphabet.symbol(index % alphabet.len());
        index /= alphabet.len();
    }
    String::from_utf8(bytes).expect("alphabet symbols are ASCII")
}

/// Count the sliding k-mer windows of one sequence.
///
/// Uses a rolling base-|Σ| index; the run length since the last non-alphabet
/// residue gates which windows are valid. With `normalize`, counts are
/// divided by the number of valid windows; an all-zero vector is left
/// untouched. Sequences shorter than k yield an all-zero spectrum.
pub fn compute_spectrum(
    seq: &SequenceRecord,
    k: usize,
    alphabet: &Alphabet,
    policy: AmbiguityPolicy,
    normalize: bool,
) -> Result<KmerSpectrum> {
    assert!(k >= 1, "k must be at least 1");
    let dim = alphabet.kmer_space(k)?;
    let base = alphabet.len();
    let high = dim / base; // |Σ|^(k−1)

    let mut counts = vec![0.0f64; dim];
    let mut windows = 0u64;
    let mut index = 0usize;
    let mut run = 0usize;
    for b in seq.residues.bytes() {
        match alphabet.rank(b) {
            Some(rank) => {
                index = (index % high) * base + rank;
                run += 1;
                if run >= k {
                    counts[index] += 1.0;
                    windows += 1;
                }
            }
            None => match policy {
                AmbiguityPolicy::Reject => return Err(Error::InvalidKmer(b as char)),
                AmbiguityPolicy::MaskKmers => {
                    index = 0;
                    run = 0;
                }
            },
        }
    }

    if normalize && windows > 0 {
        let total = windows as f64;
        for c in counts.iter_mut() {
            *c /= total;
        }
    }
    Ok(KmerSpectrum {
        k,
        counts,
        normalized: normalize,
    })
}

/// Spectra for a whole dataset, one row per record in input order.
///
/// Rows are computed in parallel; each row has a single writer so the result
/// is identical for any worker count.
pub fn spectrum_matrix(
    records: &[SequenceRecord],
    k: usize,
    alphabet: &Alphabet,
    policy: AmbiguityPolicy,
    normalize: bool,
) -> Result<DenseMatrix> {
    let dim = alphabet.kmer_space(k)?;
    let rows: Vec<Vec<f64>> = records
        .par_iter()
        .map(|rec| compute_spectrum(rec, k, alphabet, policy, normalize).map(|s| s.counts))
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Ok(DenseMatrix::zeros(0, dim));
    }
    Ok(DenseMatrix::from_rows(rows))
}

/// Write a spectrum matrix as TSV with the k-mer strings as column header.
pub fn write_spectrum_tsv<W: std::io::Write>(
    w: &mut W,
    matrix: &DenseMatrix,
    ids: &[String],
    k: usize,
    alphabet: &Alphabet,
) -> Result<()> {
    write!(w, "id")?;
    for j in 0..matrix.cols() {
        write!(w, "\t{}", kmer_string(j, k, alphabet))?;
    }
    writeln!(w)?;
    for (i, id) in ids.iter().enumerate() {
        write!(w, "{id}")?;
        for &v in matrix.row(i) {
            write!(w, "\t{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn record(residues: &str) -> SequenceRecord {
        SequenceRecord::new("t", residues)
    }

    /// Brute-force oracle: enumerate every window, count via a hash map.
    fn naive_spectrum(residues: &str, k: usize, alphabet: &Alphabet) -> Vec<f64> {
        let dim = alphabet.kmer_space(k).unwrap();
        let mut map: HashMap<usize, f64> = HashMap::new();
        let bytes = residues.as_bytes();
        if bytes.len() >= k {
            for start in 0..=(bytes.len() - k) {
                let window = &residues[start..start + k];
                if window.bytes().all(|b| alphabet.contains(b)) {
                    let idx = kmer_index(window, alphabet).unwrap();
                    *map.entry(idx).or_insert(0.0) += 1.0;
                }
            }
        }
        let mut counts = vec![0.0; dim];
        for (idx, c) in map {
            counts[idx] = c;
        }
        counts
    }

    #[test]
    fn kmer_index_examples() {
        let dna = Alphabet::dna();
        assert_eq!(kmer_index("AA", &dna).unwrap(), 0);
        assert_eq!(kmer_index("CG", &dna).unwrap(), 6);
        assert_eq!(kmer_index("GT", &dna).unwrap(), 11);
        assert!(matches!(
            kmer_index("AX", &dna),
            Err(Error::InvalidKmer('X'))
        ));
    }

    #[test]
    fn kmer_index_round_trips() {
        let dna = Alphabet::dna();
        for idx in 0..64 {
            let s = kmer_string(idx, 3, &dna);
            assert_eq!(kmer_index(&s, &dna).unwrap(), idx);
        }
    }

    #[test]
    fn acgt_k2_raw() {
        let s = compute_spectrum(
            &record("ACGT"),
            2,
            &Alphabet::dna(),
            AmbiguityPolicy::Reject,
            false,
        )
        .unwrap();
        let mut expected = vec![0.0; 16];
        expected[1] = 1.0; // AC
        expected[6] = 1.0; // CG
        expected[11] = 1.0; // GT
        assert_eq!(s.counts, expected);
    }

    #[test]
    fn aaaa_k2_normalized() {
        let s = compute_spectrum(
            &record("AAAA"),
            2,
            &Alphabet::dna(),
            AmbiguityPolicy::Reject,
            true,
        )
        .unwrap();
        assert_eq!(s.counts[0], 1.0);
        assert!(s.counts[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn masked_windows_are_skipped() {
        let masked = compute_spectrum(
            &record("ACXGT"),
            2,
            &Alphabet::dna(),
            AmbiguityPolicy::MaskKmers,
            false,
        )
        .unwrap();
        assert_eq!(masked.counts, naive_spectrum("ACXGT", 2, &Alphabet::dna()));
        assert_eq!(masked.counts[1], 1.0); // AC
        assert_eq!(masked.counts[11], 1.0); // GT
        assert_eq!(masked.counts.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn reject_policy_propagates() {
        assert!(matches!(
            compute_spectrum(
                &record("ACXGT"),
                2,
                &Alphabet::dna(),
                AmbiguityPolicy::Reject,
                false,
            ),
            Err(Error::InvalidKmer('X'))
        ));
    }

    #[test]
    fn shorter_than_k_is_all_zero() {
        let s = compute_spectrum(
            &record("AC"),
            3,
            &Alphabet::dna(),
            AmbiguityPolicy::Reject,
            true,
        )
        .unwrap();
        assert!(s.is_all_zero());
    }

    #[test]
    fn order_matters() {
        let ac = compute_spectrum(
            &record("AC"),
            2,
            &Alphabet::dna(),
            AmbiguityPolicy::Reject,
            false,
        )
        .unwrap();
        let ca = compute_spectrum(
            &record("CA"),
            2,
            &Alphabet::dna(),
            AmbiguityPolicy::Reject,
            false,
        )
        .unwrap();
        assert_ne!(ac.counts, ca.counts);
    }

    #[test]
    fn matrix_k1_counts() {
        let recs = vec![record("ACGT"), record("AAAA")];
        let m =
            spectrum_matrix(&recs, 1, &Alphabet::dna(), AmbiguityPolicy::Reject, false).unwrap();
        assert_eq!(m.row(0), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(m.row(1), &[4.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn matrix_is_identical_for_any_worker_count() {
        let mut rng = crate::rng::SplitMix64::new(23);
        let dna = Alphabet::dna();
        let records: Vec<SequenceRecord> = (0..40)
            .map(|i| {
                let len = 10 + rng.next_below(80) as usize;
                let residues: String = (0..len)
                    .map(|_| dna.symbol(rng.next_below(4) as usize) as char)
                    .collect();
                SequenceRecord::new(format!("r{i}"), residues)
            })
            .collect();
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let m1 = pool1
            .install(|| spectrum_matrix(&records, 3, &dna, AmbiguityPolicy::Reject, true).unwrap());
        let m4 = pool4
            .install(|| spectrum_matrix(&records, 3, &dna, AmbiguityPolicy::Reject, true).unwrap());
        assert_eq!(m1.data(), m4.data());
    }

    #[test]
    fn empty_input_gives_empty_matrix() {
        let m = spectrum_matrix(&[], 2, &Alphabet::dna(), AmbiguityPolicy::Reject, false).unwrap();
        assert_eq!(m.rows(), 0);
        assert_eq!(m.cols(), 16);
    }

    #[test]
    fn random_rows_sum_to_window_count() {
        let mut rng = crate::rng::SplitMix64::new(11);
        let dna = Alphabet::dna();
        for _ in 0..50 {
            let len = 3 + rng.next_below(60) as usize;
            let residues: String = (0..len)
                .map(|_| dna.symbol(rng.next_below(4) as usize) as char)
                .collect();
            let s = compute_spectrum(&record(&residues), 3, &dna, AmbiguityPolicy::Reject, false)
                .unwrap();
            assert_eq!(s.counts.iter().sum::<f64>(), (len - 2) as f64);
        }
    }

    proptest! {
        /// Rolling counter agrees with the brute-force window oracle,
        /// ambiguity characters included.
        #[test]
        fn agrees_with_naive_counter(
            residues in "[ACGTNX]{0,200}",
            k in 1usize..=4,
        ) {
            let dna = Alphabet::dna();
            let fast = compute_spectrum(
                &record(&residues), k, &dna, AmbiguityPolicy::MaskKmers, false,
            ).unwrap();
            prop_assert_eq!(fast.counts, naive_spectrum(&residues, k, &dna));
        }

        /// Normalized spectra with at least one valid window sum to 1.
        #[test]
        fn normalized_rows_sum_to_one(residues in "[ACGT]{3,100}") {
            let s = compute_spectrum(
                &record(&residues), 3, &Alphabet::dna(), AmbiguityPolicy::Reject, true,
            ).unwrap();
            let sum: f64 = s.counts.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        }
    }
}
