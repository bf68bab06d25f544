//! Synthetic mutation-tree datasets.
//!
//! A random root sequence spawns one founder per clade by per-site
//! substitution at the between-clade rate; each leaf copies its founder at
//! the within-clade rate. Leaves carry their clade as the class label,
//! which gives labeled data with the hierarchical structure the kernel is
//! built for — useful because the real datasets are access-restricted.

use crate::alphabet::Alphabet;
use crate::fasta::SequenceRecord;
use crate::rng::SplitMix64;

/// Stream label separating synthesis randomness from split randomness.
const SYNTH_STREAM: u64 = 2;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub classes: usize,
    pub n: usize,
    pub length: usize,
    /// Per-site substitution probability leaf vs founder.
    pub mu_within: f64,
    /// Per-site substitution probability founder vs root.
    pub mu_between: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: 4,
            n: 400,
            length: 300,
            mu_within: 0.02,
            mu_between: 0.15,
            seed: 0,
        }
    }
}

/// Generate a labeled mutation-tree dataset.
pub fn generate_mutation_tree(config: &SynthConfig, alphabet: &Alphabet) -> Vec<SequenceRecord> {
    assert!(config.classes >= 1, "need at least one clade");
    assert!(config.length >= 1, "sequences must be non-empty");
    let base = SplitMix64::new(config.seed).derive(SYNTH_STREAM);

    let mut root_rng = base.derive(0);
    let root: Vec<u8> = (0..config.length)
        .map(|_| alphabet.symbol(root_rng.next_below(alphabet.len() as u64) as usize))
        .collect();

    let per_class = config.n / config.classes;
    let remainder = config.n % config.classes;

    let mut records = Vec::with_capacity(config.n);
    let mut seq_index = 0usize;
    for clade in 0..config.classes {
        let clade_stream = base.derive(clade as u64 + 1);
        let mut founder_rng = clade_stream.derive(0);
        let founder = mutate(&root, config.mu_between, alphabet, &mut founder_rng);

        let leaves = per_class + usize::from(clade < remainder);
        for leaf in 0..leaves {
            let mut leaf_rng = clade_stream.derive(leaf as u64 + 1);
            let residues = mutate(&founder, config.mu_within, alphabet, &mut leaf_rng);
            records.push(SequenceRecord {
                id: format!("seq{seq_index:05}"),
                residues: String::from_utf8(residues).expect("alphabet symbols are ASCII"),
                label: Some(format!("clade{clade}")),
            });
            seq_index += 1;
        }
    }
    records
}

/// Copy a sequence, substituting each site with probability `mu` by a
/// uniformly random different symbol.
fn mutate(template: &[u8], mu: f64, alphabet: &Alphabet, rng: &mut SplitMix64) -> Vec<u8> {
    template
        .iter()
        .map(|&site| {
            if rng.next_f64() < mu {
                let current = alphabet.rank(site).expect("template is over the alphabet");
                let offset = 1 + rng.next_below(alphabet.len() as u64 - 1) as usize;
                alphabet.symbol((current + offset) % alphabet.len())
            } else {
                site
            }
        })
        .collect()
}
