//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("malformed FASTA at line {line}: {reason}")]
    MalformedFasta { line: usize, reason: String },

    #[error("duplicate label for id `{0}`")]
    DuplicateLabel(String),

    #[error("malformed label row at line {0}: expected `id,label`")]
    MalformedRow(usize),

    #[error("record `{0}` has no label")]
    MissingLabel(String),

    #[error("invalid residue `{residue}` in record `{id}` at position {position}")]
    InvalidResidue {
        id: String,
        position: usize,
        residue: char,
    },

    #[error("k-mer character `{0}` is outside the alphabet")]
    InvalidKmer(char),

    #[error("input vector contains a non-finite component")]
    InvalidVector,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// Lorentzian inner product fell below its lower bound by more than the
    /// rounding tolerance, which signals a non-lifted input rather than noise.
    #[error("Lorentz inner product {value} is below the domain bound{}", pair.map(|(i, j)| format!(" for pair ({i}, {j})")).unwrap_or_default())]
    Domain {
        value: f64,
        pair: Option<(usize, usize)>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("requested {0} components; at least 1 is required")]
    InvalidComponents(usize),

    /// The centered kernel has no positive eigenvalues to project onto.
    /// Callers may fall back to the `mds` transform.
    #[error("kernel is degenerate: no positive eigenvalues after centering")]
    DegenerateKernel,

    #[error("split infeasible: {0}")]
    SplitInfeasible(String),

    #[error("no training data")]
    NoTrainingData,

    #[error("nothing to evaluate")]
    EmptyEvaluation,

    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a run index to an error propagating out of a multi-run experiment.
    pub fn in_run(self, run: usize) -> Error {
        Error::Run {
            run,
            source: Box::new(self),
        }
    }
}
