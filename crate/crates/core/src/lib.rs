//! Spinal code laboratory.
//!
//! The crate covers the full chain used to study rateless spinal codes:
//!
//! * [`codec`]: hash-chained spine computation and pseudo-random symbol generation,
//! * [`channel`]: AWGN and BSC simulation plus capacity bookkeeping,
//! * [`decode`]: exhaustive ML, bubble (beam) decoding, bubble decoding with memory
//!   and the operation-count ledger,
//! * [`bounds`]: finite-length frame-error-rate upper bounds,
//! * [`schedule`]: transmission plans, emission schedules and the greedy
//!   bound-driven plan optimizer,
//! * [`experiment`]: Monte-Carlo campaigns producing CSV rows.
//!
//! Monte-Carlo trials run on rayon when the `parallel` feature is enabled (the
//! default). Every trial derives its own seed, so results do not depend on the
//! execution mode.

pub mod bounds;
pub mod channel;
pub mod codec;
pub mod decode;
mod error;
pub mod experiment;
pub mod par;
mod params;
pub mod quadrature;
pub mod schedule;
pub mod special;

pub use error::{Error, Result};
pub use params::{CodeParams, DEFAULT_SALT};
