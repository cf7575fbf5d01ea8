//! Limit spaces and limit operators along directions to infinity.
//!
//! A direction is a basepoint sequence. Balls around the basepoints are
//! matched against a canonical template; once the metric stabilises, the
//! compressions of `A` to the matched balls are compared entrywise and
//! averaged over the tail.

mod direction;
mod spectrum;
mod symbol;
mod window;

pub use direction::{Direction, Rule};
pub use spectrum::{ghost_profile, sample_spectrum, GhostPoint, SpectrumSample, WindowNu};
pub use window::{
    limit_operator, limit_space, shift_limit, window_distance, DeviationPoint, Divergence, Extraction, LimitSpace,
    LimitSpaceOutcome, LimitWindow, DEFAULT_TAIL,
};

/// `3·prop + 2`, enough for products of two windows to agree on the interior.
pub fn default_radius(prop: crate::space::Dist) -> crate::space::Dist {
    3 * prop + 2
}
