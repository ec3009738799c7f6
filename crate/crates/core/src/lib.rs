//! Covariate-specific word embeddings.
//!
//! A corpus split by a discrete covariate (author, forum, time slice) becomes an
//! order-3 co-occurrence tensor `A[i][j][k]`. Each covariate `k` gets a
//! non-negative weight vector `c_k`, each word a shared vector `v_i`, and the
//! covariate-specific embedding of word `i` is `c_k ⊙ v_i`. Fitting minimizes a
//! GloVe-style weighted least squares on `log A` with Adam.
//!
//! Pipeline: [`corpus`] builds the tensor, [`factorization`] trains the model,
//! [`analysis`] interprets it, [`eval`] holds oracles and benchmark metrics and
//! [`io`] reads and writes every on-disk format.

pub mod analysis;
pub mod corpus;
pub mod eval;
pub mod factorization;
pub mod io;
pub mod matrix;

pub use corpus::{CoocTensor, CorpusConfig, Entry, Vocabulary};
pub use factorization::{CoverModel, GradientSet, TrainConfig};
pub use matrix::Matrix;
