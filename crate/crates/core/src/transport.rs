//! Parallel transport of deformations along inter-shape geodesics.
//!
//! Given a template `T`, a subject `S`, and a follow-up shape `S'` of the same
//! subject, transport answers: *what does the change `S → S'` look like at
//! `T`?*  Two constructions are provided:
//!
//! * **Pole ladder** — a geometric ladder built entirely from the
//!   residual-corrected [`midpoint`](crate::symmetric_ops::midpoint) and
//!   [`symmetry`](crate::symmetric_ops::symmetry) operators: reflect `S'`
//!   through the midpoint of the segment, then through its endpoint. One rung
//!   per segment of the base geodesic.
//! * **Fanning scheme** — a first-order Jacobi-field integrator: at every time
//!   step two slightly perturbed geodesics are shot one step, their endpoint
//!   difference approximates the Jacobi field carrying the transported vector,
//!   and the vector's kernel-space norm is renormalized to stay conserved.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geodesics::{exponential, shoot, ControlSystem};
use crate::geom;
use crate::kernel::{self, KernelParams, MomentaSet, PointSet};
use crate::linalg::solve_spd;
use crate::mesh::Mesh;
use crate::registration::{RegistrationConfig, RegistrationResult};
use crate::symmetric_ops::{midpoint, symmetry, Variant};

/// One rung of the pole ladder: the segment midpoint, the reflection of the
/// carried shape through it, and the rung's transported output.
#[derive(Debug, Clone, PartialEq)]
pub struct RungRecord<const D: usize> {
    pub midpoint: Mesh<D>,
    pub reflected: Mesh<D>,
    pub transported: Mesh<D>,
    /// Convergence of the three registrations behind this rung:
    /// midpoint, first symmetry, second symmetry.
    pub converged: [bool; 3],
}

/// Intermediate shapes of a pole-ladder transport.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleLadderTrace<const D: usize> {
    /// Subdivision of the base geodesic: `base_points[0]` is the subject,
    /// the last entry is the template; one rung spans each consecutive pair.
    pub base_points: Vec<Mesh<D>>,
    /// Exactly `n_rungs` entries; each rung performed one midpoint and two
    /// symmetries.
    pub rungs: Vec<RungRecord<D>>,
}

/// Recursive dyadic subdivision of the segment `lo → hi` into `r` parts using
/// the residual-corrected midpoint (always shot from the `hi` side, like the
/// rungs themselves). For `r` not a power of two the parts are unequal.
fn subdivide<const D: usize>(
    lo: &Mesh<D>,
    hi: &Mesh<D>,
    r: usize,
    cfg: &RegistrationConfig,
    variant: Variant,
) -> Result<Vec<Mesh<D>>> {
    if r == 1 {
        return Ok(alloc::vec![lo.clone(), hi.clone()]);
    }
    let (m, _) = midpoint(hi, lo, cfg, variant)?;
    let r_lo = r / 2;
    let r_hi = r - r_lo;
    let mut chain = subdivide(lo, &m, r_lo, cfg, variant)?;
    let upper = subdivide(&m, hi, r_hi, cfg, variant)?;
    chain.extend(upper.into_iter().skip(1));
    Ok(chain)
}

/// Transports the deformation `subject → subject_deformed` to the template
/// along the subject–template geodesic, one pole-ladder rung per segment.
///
/// Each rung, spanning base points `A → B`, computes `M = midpoint(B, A)`
/// (shot from the template side) and replaces the carried shape `X` by
/// `s_B(s_M(X))`. Returns the final transported shape and the full trace.
pub fn pole_ladder<const D: usize>(
    template: &Mesh<D>,
    subject: &Mesh<D>,
    subject_deformed: &Mesh<D>,
    cfg: &RegistrationConfig,
    variant: Variant,
    n_rungs: usize,
) -> Result<(Mesh<D>, PoleLadderTrace<D>)> {
    if n_rungs == 0 {
        return Err(Error::InvalidParameter { name: "n_rungs", value: 0.0 });
    }
    let base_points = subdivide(subject, template, n_rungs, cfg, variant)?;
    let mut carried = subject_deformed.clone();
    let mut rungs = Vec::with_capacity(n_rungs);
    for i in 0..n_rungs {
        let a = &base_points[i];
        let b = &base_points[i + 1];
        let (m, reg_m) = midpoint(b, a, cfg, variant)?;
        let first = symmetry(&m, &carried, cfg, variant)?;
        let second = symmetry(b, &first.result, cfg, variant)?;
        carried = second.result.clone();
        rungs.push(RungRecord {
            midpoint: m,
            reflected: first.result,
            transported: second.result,
            converged: [
                reg_m.converged,
                first.registration.converged,
                second.registration.converged,
            ],
        });
    }
    Ok((carried, PoleLadderTrace { base_points, rungs }))
}

/// Output of the fanning transport: the deformed template together with the
/// transported vector (momenta at the endpoint control points).
#[derive(Debug, Clone, PartialEq)]
pub struct FanningTransport<const D: usize> {
    /// Template deformed by shooting the transported vector from the
    /// geodesic's endpoint.
    pub result: Mesh<D>,
    /// Control points at the end of the base geodesic.
    pub control_points: PointSet<D>,
    /// Transported momenta at those points.
    pub momenta: MomentaSet<D>,
}

fn hilbert_norm_sq<const D: usize>(
    c: &[[f64; D]],
    mu: &[[f64; D]],
    params: KernelParams,
) -> f64 {
    kernel::hilbert_product_slices(c, mu, c, mu, params)
}

/// Transports the tangent vector `w` (momenta at the base registration's
/// control points) along the base geodesic by per-step Jacobi-field
/// differences.
///
/// At each step the geodesic is re-shot with momenta `μ ± ε w` over one step
/// (`ε = 1e-3 ‖μ‖/‖w‖`, or `1e-3` when `‖μ‖ = 0`); the central difference of
/// the perturbed endpoints, divided by `ε` and the step size, is the
/// transported velocity at the new control points. Solving the kernel Gram
/// system turns it back into momenta, which are rescaled to conserve the
/// kernel-space norm `⟨w, w⟩` along the whole path.
pub fn fanning_transport<const D: usize>(
    template: &Mesh<D>,
    base_registration: &RegistrationResult<D>,
    w: &MomentaSet<D>,
    cfg: &RegistrationConfig,
) -> Result<FanningTransport<D>> {
    let sys = &base_registration.system;
    let params = sys.params();
    if w.len() != sys.len() {
        return Err(Error::ShapeMismatch { expected: sys.len(), found: w.len() });
    }
    let n = cfg.n_steps;
    let traj = shoot(sys, n, 1.0, cfg.scheme)?;
    let h = 1.0 / n as f64;

    let target_norm_sq =
        hilbert_norm_sq(sys.control_points().as_slice(), w.as_slice(), params);
    let end_points = PointSet::new(traj.final_control_points().to_vec())?;
    if target_norm_sq == 0.0 {
        // Transporting the zero vector: shooting it deforms nothing.
        return Ok(FanningTransport {
            result: template.clone(),
            momenta: MomentaSet::zeros(end_points.len())?,
            control_points: end_points,
        });
    }

    let mut w_cur: Vec<[f64; D]> = w.as_slice().to_vec();
    for k in 0..n {
        let c_k = traj.control_points_at(k);
        let mu_k = traj.momenta_at(k);
        let mu_norm = geom::frobenius(mu_k);
        let w_norm = geom::frobenius(&w_cur);
        if w_norm == 0.0 {
            return Err(Error::NonFiniteState { step: k + 1 });
        }
        let eps = if mu_norm == 0.0 { 1e-3 } else { 1e-3 * mu_norm / w_norm };

        let perturbed = |sign: f64| -> Result<Vec<[f64; D]>> {
            let mom: Vec<[f64; D]> =
                mu_k.iter().zip(&w_cur).map(|(m, wv)| geom::axpy(*m, sign * eps, *wv)).collect();
            let psys = ControlSystem::new(
                PointSet::new(c_k.to_vec())?,
                MomentaSet::new(mom)?,
                params,
            )?;
            let ptraj = shoot(&psys, 1, h, cfg.scheme)?;
            Ok(ptraj.final_control_points().to_vec())
        };
        let plus = perturbed(1.0)?;
        let minus = perturbed(-1.0)?;

        // Jacobi-field estimate at t+h, read as a velocity at the new points.
        let c_next = traj.control_points_at(k + 1);
        let velocity: Vec<[f64; D]> = plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| geom::scale(geom::sub(*p, *m), 1.0 / (2.0 * eps * h)))
            .collect();

        let gram = kernel::kernel_matrix(c_next, c_next, params);
        let mut w_next = solve_spd(&gram, &velocity)?;

        let norm_sq = hilbert_norm_sq(c_next, &w_next, params);
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::NonFiniteState { step: k + 1 });
        }
        let scale = (target_norm_sq / norm_sq).sqrt();
        for v in w_next.iter_mut() {
            *v = geom::scale(*v, scale);
        }
        w_cur = w_next;
    }

    let momenta = MomentaSet::new(w_cur)?;
    let end_sys = ControlSystem::new(end_points.clone(), momenta.clone(), params)?;
    let result = exponential(template, &end_sys, n, 1.0, cfg.scheme)?;
    Ok(FanningTransport { result, control_points: end_points, momenta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registration::register;

    fn cfg() -> RegistrationConfig {
        RegistrationConfig::new(0.8).with_alpha_squared(0.01)
    }

    fn square() -> Mesh<2> {
        Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![]).unwrap()
    }

    #[test]
    fn ladder_along_a_zero_length_geodesic_is_a_double_reflection() {
        let t = square();
        let sp = t
            .with_vertices(t.vertices().iter().map(|v| [v[0] + 0.05, v[1] - 0.02]).collect())
            .unwrap();
        let c = cfg();
        let (out, trace) = pole_ladder(&t, &t, &sp, &c, Variant::WithResidual, 1).unwrap();
        // midpoint(T, T) = T exactly, so the ladder is s_T ∘ s_T
        assert_eq!(trace.rungs.len(), 1);
        assert_eq!(trace.rungs[0].midpoint, t);
        let first = symmetry(&t, &sp, &c, Variant::WithResidual).unwrap();
        let second = symmetry(&t, &first.result, &c, Variant::WithResidual).unwrap();
        assert_eq!(out, second.result);
    }

    #[test]
    fn trace_is_structurally_complete() {
        let t = square();
        let s = t
            .with_vertices(t.vertices().iter().map(|v| [v[0] + 0.3, v[1]]).collect())
            .unwrap();
        let sp = s
            .with_vertices(s.vertices().iter().map(|v| [v[0], v[1] + 0.1]).collect())
            .unwrap();
        let c = cfg();
        for n_rungs in [1usize, 2, 3] {
            let (_, trace) = pole_ladder(&t, &s, &sp, &c, Variant::WithResidual, n_rungs).unwrap();
            assert_eq!(trace.rungs.len(), n_rungs);
            assert_eq!(trace.base_points.len(), n_rungs + 1);
            assert_eq!(trace.base_points[0], s);
            assert_eq!(*trace.base_points.last().unwrap(), t);
        }
    }

    #[test]
    fn zero_rungs_are_rejected() {
        let t = square();
        assert!(pole_ladder(&t, &t, &t, &cfg(), Variant::WithResidual, 0).is_err());
    }

    #[test]
    fn fanning_a_zero_vector_leaves_the_template_unchanged() {
        let t = square();
        let s = t
            .with_vertices(t.vertices().iter().map(|v| [v[0] + 0.2, v[1] + 0.1]).collect())
            .unwrap();
        let c = cfg();
        let reg = register(&s, &t, &c).unwrap();
        let w = MomentaSet::zeros(reg.system.len()).unwrap();
        let out = fanning_transport(&t, &reg, &w, &c).unwrap();
        assert_eq!(out.result, t);
        assert!(out.momenta.as_slice().iter().all(|m| *m == [0.0, 0.0]));
    }

    #[test]
    fn fanning_checks_vector_pairing() {
        let t = square();
        let c = cfg();
        let reg = register(&t, &t, &c).unwrap();
        let w = MomentaSet::<2>::new(vec![[1.0, 0.0]]).unwrap();
        if reg.system.len() != 1 {
            assert!(matches!(
                fanning_transport(&t, &reg, &w, &c),
                Err(Error::ShapeMismatch { .. })
            ));
        }
    }
}
