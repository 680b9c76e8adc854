//! Ferromagnetic q-state Potts model with external field, its random-cluster
//! representation with a ghost vertex, and exact and Monte Carlo checks of
//! GKS-type correlation inequalities for products of spin functions.
//!
//! The exact engines enumerate all spin configurations ([`model`]) or all
//! bond configurations of the augmented graph ([`random_cluster`]);
//! [`function_classes`] decides which spin functions the inequalities apply
//! to, [`verifier`] checks the inequalities themselves, and [`mc`] estimates
//! the same means by cluster Monte Carlo on larger graphs.

pub mod error;
pub mod function_classes;
pub mod io;
pub mod mc;
pub mod model;
pub mod random_cluster;
pub mod sum;
pub mod union_find;
pub mod verifier;

pub use error::{Error, Result};
pub use function_classes::{check_fq, check_fq_i, make_family, moments, FamilyKind, MembershipReport, MomentTable};
pub use model::{
    partition_function, potts_expectation, potts_weight, validate_model, Cap, Edge, Factor, PottsModel, Region,
    SpinConfig, SpinFunction,
};
pub use random_cluster::{augment, AugmentedGraph, BondConfig, ClusterPartition};
