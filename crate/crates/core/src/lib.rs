//! Sum-MSE-optimal and heuristic linear precoders for correlated Gaussian
//! sources on fading MIMO multiple-access channels, together with the Monte
//! Carlo harness that measures them and a separation-based SDR upper bound.
//!
//! Layers, bottom-up:
//!
//! - [`linalg`]: dense complex matrices and factorizations.
//! - [`model`]: the MAC signal model, source/channel sampling, MMSE receiver
//!   and sum-MSE expressions.
//! - [`precoding`]: precoder constructions (full power, projected gradient,
//!   aligned MRT, MRT / nullspace-SVD directions with optimized gains, and
//!   the closed-form two-user solution).
//! - [`sdp`]: the semidefinite relaxation route for single-antenna users with
//!   a single receive antenna, with rank-1 extraction.
//! - [`bound`]: sum-capacity via iterative waterfilling, the distributed
//!   rate-distortion sum-rate bound, and the distortion equating the two.
//! - [`sim`]: experiment configuration, the deterministic parallel Monte
//!   Carlo engine, figure presets, and CSV input/output.

pub mod bound;
pub mod linalg;
pub mod model;
pub mod precoding;
pub mod sdp;
pub mod sim;
