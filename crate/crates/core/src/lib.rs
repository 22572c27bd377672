//! Adsorption-desorption of neutral particles in a slab whose bulk transport
//! obeys the Cattaneo (telegraph) equation, with Langmuir kinetics at the
//! surfaces and particle conservation closing the problem.
//!
//! Two independent engines compute the bulk density `N(z, t)` and the surface
//! coverage `σ(t)`: a modal expansion ([`spectral`]) and an explicit
//! finite-difference scheme ([`fdm`]). [`validate`] holds a parabolic reference
//! solver and the cross-checks between engines.

pub mod eigen;
pub mod error;
pub mod fdm;
pub mod params;
pub mod series;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};
pub use params::{InitialCondition, Params, PhysicalInputs, SampledProfile};
