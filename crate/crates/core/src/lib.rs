//! Secret-key rates for the high-dimensional extended B92 and high-dimensional
//! BB84 protocols, coupled to an elliptic-beam model of satellite optical links.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its arguments plus, for the Monte Carlo parts, an explicit seed.
//! File formats, the command line and parallel drivers live in the `satqkd`
//! crate.
//!
//! Layout:
//! - [`entropy`]: binary and Shannon entropy.
//! - [`ext_b92`]: observable statistics under a depolarizing channel, the
//!   conditional von Neumann entropy bound and the resulting key rate.
//! - [`bb84`]: HD-BB84 rate bound, QBER proxy, and noise tolerance search.
//! - [`atmosphere`]: link geometry, weather presets, beam-parameter moments and
//!   beam sampling.
//! - [`transmit`]: aperture transmittance, PDT/PDR estimation and averaged
//!   key rates.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod atmosphere;
pub mod bb84;
pub mod entropy;
mod error;
pub mod ext_b92;
mod protocol;
mod quadrature;
pub mod transmit;

pub use error::{Error, Result};
pub use protocol::Protocol;
