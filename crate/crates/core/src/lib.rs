//! Optimal eigenvalue shrinkage for covariance estimation in the spiked
//! covariance model.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: bulk edges, the spike ↔ sample-eigenvalue bijection and
//!   the eigenvector cosine.
//! * [`loss`]: the 26 decomposable losses, exact on 2×2 blocks and general
//!   on p×p matrices.
//! * [`shrinker`]: optimal shrinkers (closed form or numeric), hard
//!   thresholding, asymptotic loss, slopes, shifts and PPI.
//! * [`sim`]: Monte Carlo validation against the asymptotic predictions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod loss;
pub mod optimize;
pub mod shrinker;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use loss::{LossId, Norm, Pivot, Statistic};
pub use shrinker::{shrink, ShrinkerMethod, ShrinkerResult, SpikedModel};
pub use sim::{run_study, SimConfig, SimSummary};
pub use spectral::{AspectRatio, SpikeGeometry};
