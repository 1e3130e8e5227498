//! Two planar Cantor sets, the piecewise sup-norm radial homeomorphism that
//! carries one onto the other, and the numeric machinery used to study it:
//! closed-form distortion, integrals over frames, series ratio diagnostics,
//! and covering sums under log-log dimension gauges.
//!
//! The pre-image set is `C1 x C1`, where `C1` keeps eight middle intervals of
//! length `sigma^3` and then two middle sub-intervals of length `sigma^(k+1)`
//! inside each level-`k` interval. The image set uses lengths
//! `l_k = 2^-k (log k)^(-beta/2)` instead.
//!
//! Module map:
//!
//! * [`construction`]: parameters, cell addresses, squares, frames, radii.
//! * [`mapping`]: the frame maps, truncated evaluation and pointwise fields.
//! * [`analysis`]: frame integrals, series terms, ratio limits, thresholds.
//! * [`measure`]: gauges, covering sums, mass distribution, box dimension.
//! * [`cli`]: the command implementations behind the `cantor-distortion` binary.

pub mod analysis;
pub mod cli;
pub mod construction;
mod error;
pub mod mapping;
pub mod measure;
pub mod quad;

pub use error::{Error, Result};
