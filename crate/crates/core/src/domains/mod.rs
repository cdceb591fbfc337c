//! Euclidean domains: a shape algebra, grid discretization, quasihyperbolic
//! estimators and the checks built on them.

pub mod annulus;
pub mod conditions;
pub mod grid;
pub mod growth;
pub mod shape;

pub use annulus::{annulus_classify, AnnulusClass, AnnulusKind};
pub use conditions::{
    geodesic_conditions, phi_uniform_profile, spherical_compare, uniformity_constant, ConditionReport, Pair,
    PhiProfile, SphericalComparison,
};
pub use grid::{discretize, euclidean_path, j_metric, qh_distance, GraphPath, QhGraph, Stencil, Window};
pub use growth::{integral_condition, IntegralOptions, IntegralReport, IntegralVariant, PsiTransfer, Verdict};
pub use shape::{DomainSpec, Shape};
