//! Conversions for an unknown horizon.
//!
//! * [`DoublingWrapper`]: fresh fixed-horizon EXP3 on blocks of length
//!   1, 2, 4, ...
//! * [`FtrlAnytimeEngine`]: exact `eta_t = sqrt(ln K / (K t))` schedule,
//!   recomputing all K weights every round.
//! * [`DelayedUpdateEngine`]: the same schedule held constant on K-round
//!   blocks, so any fast backend serves each block and the O(K) recompute at
//!   the block boundary coincides with the periodic rebuild.

mod delayed;
mod doubling;
mod ftrl;

pub use delayed::DelayedUpdateEngine;
pub use doubling::DoublingWrapper;
pub use ftrl::FtrlAnytimeEngine;
