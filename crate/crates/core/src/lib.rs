//! Hyperboloid-geometry kernels for biological sequence classification.
//!
//! The pipeline: parse FASTA sequences, encode each as a k-mer spectrum,
//! lift the spectra onto the forward sheet of the hyperboloid, build the
//! pairwise distance kernel matrix, adjust it to a PSD operator, project
//! through kernel PCA, and classify the resulting embeddings with kNN or
//! a nearest-centroid baseline. A Euclidean distance kernel is available
//! for side-by-side comparison.

pub mod alphabet;
pub mod classify;
pub mod eigen;
pub mod error;
pub mod experiment;
pub mod fasta;
pub mod heatmap;
pub mod hyperboloid;
pub mod kernel;
pub mod kernel_pca;
pub mod labels;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod spectrum;
pub mod split;
pub mod synth;

pub use alphabet::{Alphabet, AmbiguityPolicy};
pub use error::{Error, Result};
pub use fasta::SequenceRecord;
pub use hyperboloid::HyperboloidPoint;
pub use kernel::{KernelKind, KernelMatrix, PsdMode};
pub use kernel_pca::{Embedding, KpcaTransform};
pub use spectrum::KmerSpectrum;
