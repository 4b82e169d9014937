//! Residual-corrected midpoints and geodesic symmetries.
//!
//! Registration is inexact: after registering a mesh `A` onto `B`, the
//! deformed mesh `φ₁(A)` misses `B` by a residual `δ = B - φ₁(A)`.  The
//! operators here optionally feed that residual back into their geometric
//! constructions so that the *exactly reachable* part of the target is
//! handled by the geodesic and the leftover is handled additively, by vertex
//! index, in ambient space:
//!
//! * midpoint of `A, B`:  `M = φ_{1/2}(A) + δ/2`
//! * symmetry of `S` about a center `C`:  `s_C(S) = Exp_C(-Log_C(S)) - δ`
//!
//! The `without_residual` variants drop the `δ` terms and degrade visibly as
//! soon as registration stops being exact (large α²); the paired variants are
//! what [`crate::diagnostics`] quantifies.

use alloc::vec::Vec;

use crate::error::Result;
use crate::geodesics::shoot_with_points;
use crate::kernel::PointSet;
use crate::mesh::Mesh;
use crate::registration::{register, RegistrationConfig, RegistrationResult};

/// Whether an operator feeds the registration residual back into its output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    WithResidual,
    WithoutResidual,
}

impl Variant {
    /// Stable lowercase name used in reports and file formats.
    pub fn name(&self) -> &'static str {
        match self {
            Variant::WithResidual => "with_residual",
            Variant::WithoutResidual => "without_residual",
        }
    }
}

/// Result of a geodesic symmetry, keeping the registration it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOutcome<const D: usize> {
    pub result: Mesh<D>,
    pub registration: RegistrationResult<D>,
    pub variant: Variant,
}

/// Midpoint of the geodesic from `base` to `other`.
///
/// Registers `base → other`, flows `base`'s vertices to `t = 1/2` over
/// `⌈n_steps/2⌉` steps (same step size as the full-time flow), and — in the
/// `with_residual` variant — adds half the residual to every vertex.
pub fn midpoint<const D: usize>(
    base: &Mesh<D>,
    other: &Mesh<D>,
    cfg: &RegistrationConfig,
    variant: Variant,
) -> Result<(Mesh<D>, RegistrationResult<D>)> {
    let reg = register(base, other, cfg)?;
    let m = midpoint_from_registration(base, &reg, cfg, variant)?;
    Ok((m, reg))
}

/// Midpoint construction reusing an existing `base → other` registration.
pub fn midpoint_from_registration<const D: usize>(
    base: &Mesh<D>,
    reg: &RegistrationResult<D>,
    cfg: &RegistrationConfig,
    variant: Variant,
) -> Result<Mesh<D>> {
    let half_steps = cfg.n_steps.div_ceil(2);
    let x0 = PointSet::new(base.vertices().to_vec())?;
    let traj = shoot_with_points(&reg.system, &x0, half_steps, 0.5, cfg.scheme)?;
    let mut verts: Vec<[f64; D]> =
        traj.final_points().expect("trajectory carries vertices").to_vec();
    if variant == Variant::WithResidual {
        for (v, d) in verts.iter_mut().zip(&reg.delta) {
            for a in 0..D {
                v[a] += 0.5 * d[a];
            }
        }
    }
    base.with_vertices(verts)
}

/// Geodesic symmetry of `subject` about `center`.
///
/// Registers `center → subject` (never the other way around), shoots the
/// *negated* momenta from `center` to `t = 1`, and — in the `with_residual`
/// variant — subtracts the residual from every vertex.
pub fn symmetry<const D: usize>(
    center: &Mesh<D>,
    subject: &Mesh<D>,
    cfg: &RegistrationConfig,
    variant: Variant,
) -> Result<SymmetryOutcome<D>> {
    let reg = register(center, subject, cfg)?;
    let result = symmetry_from_registration(center, &reg, cfg, variant)?;
    Ok(SymmetryOutcome { result, registration: reg, variant })
}

/// Symmetry construction reusing an existing `center → subject` registration.
pub fn symmetry_from_registration<const D: usize>(
    center: &Mesh<D>,
    reg: &RegistrationResult<D>,
    cfg: &RegistrationConfig,
    variant: Variant,
) -> Result<Mesh<D>> {
    let reversed = reg.system.reversed();
    let x0 = PointSet::new(center.vertices().to_vec())?;
    let traj = shoot_with_points(&reversed, &x0, cfg.n_steps, 1.0, cfg.scheme)?;
    let mut verts: Vec<[f64; D]> =
        traj.final_points().expect("trajectory carries vertices").to_vec();
    if variant == Variant::WithResidual {
        for (v, d) in verts.iter_mut().zip(&reg.delta) {
            for a in 0..D {
                v[a] -= d[a];
            }
        }
    }
    center.with_vertices(verts)
}
