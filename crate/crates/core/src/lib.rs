//! Hypersurface geometry in hyperbolic 3-space and beyond.
//!
//! The crate covers graphs in the upper half-space model, parametrized
//! patches in the Poincaré ball, the isometry between the two models, a
//! Newton solver for the prescribed-curvature Monge-Ampère equation and a
//! set of curvature-estimate diagnostics. Exact derivatives come from
//! truncated Taylor jets ([`jet::Jet`]).

pub mod ball;
pub mod error;
pub mod expr;
pub mod estimates;
pub mod families;
pub mod fd;
pub mod fit;
pub mod halfspace;
pub mod jet;
pub mod jetmat;
pub mod solver;
pub mod transform;
pub mod verification;

pub use error::{Error, Result};
