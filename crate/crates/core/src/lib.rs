//! Finite-volume numerics for self-dual fermion systems: lattice
//! Bogoliubov-de Gennes Hamiltonians with disorder, spectral projections and
//! propagators, the Z2 projection index, spectral-flow transport along gapped
//! paths, Combes-Thomas decay checks, and Pfaffian evaluation of quasi-free
//! states with an exact Fock-space cross-check.

pub mod error;
pub mod linalg;
pub mod space;
pub mod operators;
pub mod lattice;
pub mod spectral;
pub mod decay;
pub mod flow;
pub mod z2;
pub mod pfaffian;
pub mod qf;
pub mod fock;
pub mod matio;

pub use error::{Error, Result, Tolerances};
pub use linalg::{CMatrix, CVector};
pub use space::{box_labels, Geometry, SelfDualSpace, SiteLabel, Tag};
pub use operators::{
    bogoliubov_parity, kernel_parity, random_bogoliubov, random_self_dual, BasisProjection,
    BogoliubovTransform, HamiltonianMeta, SelfDualHamiltonian,
};
