//! Finite groups, their unitary representations and irreducible characters.

mod group;
mod irreps;
mod rep;

pub use group::{from_permutations, validate_group, FiniteGroup, GroupHom, GroupSpec};
pub use irreps::{
    decompose, irrep_table, multiplicities, pushforward_hom, Component, Decomposition, IntMatrix,
    Irrep, IrrepJson, IrrepTable, IrrepTableJson, CLUSTER_GAP, IRREP_RESEEDS, MULTIPLICITY_TOL,
};
pub use rep::{regular_representation, UnitaryRep, EXACTNESS_TOL};
