//! Computational metric geometry on finite samples.
//!
//! The crate builds the classical constructions around Gromov hyperbolic
//! spaces on finite data and turns their comparability statements into
//! checkable certificates:
//!
//! - [`metric`]: finite metric and quasimetric spaces, cross-ratios, unit-sphere
//!   inversion and the chordal metric.
//! - [`sphericalize`]: the sphericalization quasimetric, chain metrization,
//!   spherical density, curve length and measure.
//! - [`hyperbolicity`]: Gromov products, four-point δ, Busemann-based products
//!   and rough starlikeness.
//! - [`boundary`]: Bourdon and Hamenstädt visual metrics on boundary charts,
//!   quasimöbius distortion profiles and the Bourdon/Hamenstädt comparability
//!   certificate.
//! - [`domains`]: Euclidean domains given by a shape algebra, their grid
//!   discretization and quasihyperbolic estimators.
//! - [`regularity`]: covering numbers, doubling constants and Ahlfors fits.

pub mod boundary;
pub mod domains;
mod error;
pub mod expr;
pub mod graph;
pub mod hyperbolicity;
pub mod metric;
pub mod regularity;
pub mod sphericalize;

pub use error::{Error, Result};
pub use metric::{FiniteMetricSpace, Matrix, QuasiMetricSpace, INFINITY_TOKEN};

/// Relative tolerance for every metric-axiom check.
pub const TAU_REL: f64 = 1e-9;

/// Absolute threshold below which a metrized distance counts as collapsed.
pub const TAU_ABS: f64 = 1e-12;
