//! Fixed points of multivalued mappings on R^n with finite-set images.
//!
//! The crate computes fixed points through averaged-operator (Krasnoselskii)
//! iterations and Górnicki-type descent, estimates contractive-class
//! constants of a sampled mapping, and checks fixed-point perturbation
//! bounds between two mappings.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certifier;
pub mod cli;
pub mod datadep;
pub mod error;
pub mod geometry;
pub mod mappings;
pub mod solver;
pub mod transform;

pub use datadep::{ClassConstants, DataDepClass, DataDepConfig, DataDependenceReport};
pub use error::{Error, Result};
pub use geometry::{affine_image, delta_distance, hausdorff, point_set_distance, FiniteSet, Point};
pub use mappings::{fixed_point_set, AffineBranch, Domain, MultiMap};
pub use solver::{Descent, IterationConfig, IterationTrace, Verdict};
