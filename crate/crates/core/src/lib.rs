//! Exact outage and error-rate analysis of transmit antenna selection with
//! space-time block coding (TAS/STBC) and joint transmit/receive antenna
//! selection (joint TRAS/STBC) over i.i.d. Nakagami-m fading, with a binary
//! symmetric feedback channel corrupting the selected subset index.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] - gamma family, hypergeometric functions, Gauss-Laguerre
//!   rules and multinomial coefficient tables.
//! * [`snr_model`] - exact exponential-polynomial distribution of the
//!   post-processing SNR for any transmit antenna subset combination.
//! * [`feedback`] - codebook, correct-feedback prior and metric mixing.
//! * [`performance`] - outage, MGF, BER/SER and asymptotic diversity.
//! * [`montecarlo`] - semi-analytic simulator used to validate all of the
//!   above.

pub mod error;
pub mod feedback;
pub mod montecarlo;
pub mod numeric;
pub mod performance;
pub mod snr_model;
pub mod specfun;

pub use error::{Error, Result};
