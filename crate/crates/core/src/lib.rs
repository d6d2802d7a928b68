//! Quasi-static crawlers on frictional substrates, modelled as rate-independent
//! systems.
//!
//! A crawler is a set of contact points joined by springs with programmable
//! rest lengths, resting on a substrate with (possibly anisotropic and
//! time-dependent) dry friction. [`solver::simulate`] evolves it by
//! incremental minimization; [`stasis`] describes the set of tensions for
//! which nothing moves; [`dissipation`] checks when the net motion is unique;
//! [`continuum`] turns an elastic bar into a discrete crawler and [`oracle`]
//! holds the closed-form results used as references.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuum;
pub mod dissipation;
pub mod error;
pub mod initial;
pub mod model;
pub mod oracle;
pub mod presets;
pub mod scenario;
pub mod solver;
pub mod stasis;
pub mod timeprog;

pub use error::{Error, Result};
