//! Numeric plumbing shared by the analytic engines: double-double
//! arithmetic and exact rational helpers.

mod dd;
mod exact;

pub use dd::Dd;
pub use exact::{binomial, factorial, q, rational_to_dd, Q};
