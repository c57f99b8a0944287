//! Diffeomorphism families of the torus, the composition operator and its
//! parameter derivatives, and partition-of-unity localization.

mod action;
mod families;
mod partition;

pub use action::{
    action_higher_partial, action_partial, action_partial_sequence, compose, jacobian_field, GroupParam,
};
pub use families::{
    builtin_family, BuiltinFamily, DiffeoFamily, FamilyKind, FamilyParams, MobiusPushforward, ShearBump,
    Translation, MIN_JACOBIAN, MOBIUS_RADIUS, TRANSLATION_RADIUS,
};
pub use partition::{partition_assemble, partition_localize, PartitionOfUnity};

pub(crate) use families::{periodic_delta, smooth_step};
