//! Iterated integrals on membranes, their generating series, and the shuffle
//! and homotopy laws.

mod engine;
mod geometry;
mod restriction;
mod series;

pub use engine::{
    exact_height, exact_height_reference, membrane_integral_restricted, membrane_integral_type_a,
    membrane_integral_type_b, membrane_integral_with, nested_reference, simplex_pair_volume, Integrator, Method,
    MAX_EXACT, MAX_TENSOR, MONTE_CARLO_TOLERANCE,
};
pub use geometry::{Axis, Membrane, MembranePoint, Mobius, Reparam, Shape};
pub use restriction::{DomainRestriction, Rect, Region};
pub use series::{
    generating_series_ja, generating_series_jb, generating_series_jb_restricted, verify_homotopy_invariance, verify_membrane_shuffle, verify_series_shuffle,
    verify_tag_collapse, verify_type_a_composition, MAX_SERIES_DEPTH,
};
