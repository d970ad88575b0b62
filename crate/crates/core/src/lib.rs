//! Local binary descriptors (BRIEF and FREAK families) and their inversion.
//!
//! A descriptor is the sign of differences of box-averaged intensities taken
//! over a fixed measurement pattern. This crate computes such descriptors and
//! reconstructs image patches from them, either with a primal-dual l1 solver
//! for real-valued measurements or with binary iterative hard thresholding
//! for 1-bit descriptors, and assembles whole images from overlapping patch
//! reconstructions.

pub mod biht;
pub mod descfile;
pub mod error;
pub mod field;
pub mod pipeline;
pub mod primal_dual;
pub mod proxops;
pub mod sensing;
pub mod wavelet;

pub use biht::{reconstruct_binary, BihtConfig, BihtSolution, Sparsity};
pub use descfile::DescriptorFile;
pub use error::{LbdError, Result};
pub use field::{Field, Patch};
pub use pipeline::{GrayImage, Position, SamplingMode, SolverChoice};
pub use primal_dual::{reconstruct_real, PdConfig};
pub use sensing::{build_brief, build_freak, describe, Descriptor, FreakVariant, Pattern, PatternKind};
