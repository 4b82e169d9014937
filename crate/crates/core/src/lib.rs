//! Landmark-based diffeomorphic shape analysis.
//!
//! A deformation is the endpoint of a flow of velocity fields spanned by a
//! Gaussian reproducing kernel over a finite set of control points.  Geodesic
//! flows are parameterized by initial momenta attached to the control points,
//! so every deformation is encoded by a finite-dimensional state that can be
//! shot forward with an explicit integrator, differentiated, and optimized.
//!
//! On top of that engine the crate builds:
//!
//! * inexact registration of corresponded meshes ([`registration`]),
//! * residual-corrected midpoints and geodesic symmetries ([`symmetric_ops`]),
//! * pole-ladder and fanning parallel transport ([`transport`]),
//! * a consistency-error suite quantifying how far the discrete operators are
//!   from their ideal symmetric-space behaviour ([`diagnostics`]),
//! * local area strain maps for comparing deformations ([`strain`]).
//!
//! The crate is `no_std`-compatible: disable default features and enable
//! `libm` to build against `core + alloc` only.  All computations are
//! deterministic; summation orders are fixed so repeated runs produce
//! bit-identical results.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod geodesics;
pub mod kernel;
mod linalg;
pub mod mesh;
pub mod registration;
pub mod strain;
pub mod symmetric_ops;
pub mod transport;

mod geom;

pub use error::{Error, Result};
pub use geodesics::{ControlSystem, GeodesicTrajectory, Scheme};
pub use kernel::{KernelParams, MomentaSet, PointSet};
pub use mesh::Mesh;
pub use registration::{RegistrationConfig, RegistrationResult};
pub use symmetric_ops::Variant;
