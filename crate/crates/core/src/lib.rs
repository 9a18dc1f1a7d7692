//! Sparse superposition codes over the additive white Gaussian noise channel.
//!
//! A message of `L` symbols, each in `{1, …, B}`, is mapped to a sparse
//! indicator vector with one nonzero entry per section of `B` entries and
//! transmitted as `F·X` through an AWGN channel. This crate provides:
//!
//! * [`model`]: code ensembles, message/signal mapping, Gaussian coding matrices, error metrics.
//! * [`channel`]: AWGN transmission and capacity.
//! * [`amp`]: the Bayesian approximate message passing decoder.
//! * [`de`]: density evolution of the decoder in the large-size limit.
//! * [`replica`]: the replica free-entropy potential, its maxima and the
//!   optimal / BP thresholds derived from it.
//! * [`oracle`]: exhaustive maximum-likelihood decoding and quadrature references.
//! * [`experiment`]: finite-size decoding protocols, phase diagrams and data emission.
//!
//! All randomness is derived from explicit 64-bit seeds, so every result is
//! reproducible bit-for-bit.

pub mod amp;
pub mod channel;
pub mod de;
pub mod error;
pub mod experiment;
pub mod measure;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod replica;
pub mod rng;

pub use amp::{AmpOptions, AmpOutcome, AmpState, TracePoint};
pub use channel::{capacity, transmit, ChannelOutput};
pub use de::{DeEngine, DeParams, DePoint, DeTrajectory};
pub use error::{Error, Result};
pub use measure::Estimate;
pub use model::{CodeParams, CodingMatrix, Message, SparseSignal};
pub use replica::{PotentialCurve, PotentialEvaluator};
