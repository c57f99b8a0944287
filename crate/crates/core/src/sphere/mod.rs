//! The Riemann sphere: Möbius elements, two-chart fields, the marked-point
//! slice and its projection, sections and their equivariant extension.

mod eval;
mod field;
mod mobius;
mod point;
mod section;
mod slice;

pub use eval::{
    evaluate, evaluation_identity_gap, mobius_act, translation_family_at, translation_parameter, Evaluate,
    MobiusAct,
};
pub use field::{standard_center, SphereField, DEFAULT_CHART_N};
pub use mobius::{
    marked_point_residual, mobius_from_triple, mobius_from_triple_local, sample_near_identity, MobiusElement, EPSILON_G,
};
pub use point::{chart_weight, point_weight, Chart, SpherePoint, POINT_TOLERANCE};
pub use section::{
    constant_section, equivariant_extension, RegularityWitness, SectionOnSlice, WITNESS_BAND_TOLERANCE,
    WITNESS_REFINEMENT_TOLERANCE,
};
pub use slice::{
    condition_number, marked_points, slice_projection, AffineConstraint, MarkedSolve, SliceProjection, SliceSpec,
    MAX_CONDITION, NEWTON_MAX_ITER, NEWTON_TOLERANCE,
};
