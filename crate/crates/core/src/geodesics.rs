//! Hamiltonian geodesic shooting for kernel-parameterized deformations.
//!
//! A deformation state is a set of control points `c` carrying momenta `μ`.
//! Geodesics of the induced metric solve
//!
//! ```text
//! ċ_k = Σ_j K(c_k, c_j) μ_j
//! μ̇_k = -Σ_j ∇₁K(c_k, c_j) (μ_kᵀ μ_j)
//! ```
//!
//! and any passive point `x` is advected by the same field, `ẋ = Σ_j K(x,
//! c_j) μ_j`.  The flow energy `½ Σ_ij K(c_i, c_j) μ_iᵀμ_j` is conserved by
//! the exact dynamics, which makes its drift a sharp check on integration
//! accuracy.
//!
//! Integration is explicit Euler or second-order Runge-Kutta (midpoint rule;
//! the default).  Passive points are advected inside the same state vector as
//! the control points, with the same stage evaluations, so flowing the control
//! points "as points" reproduces the control-point path bit-for-bit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom;
use crate::kernel::{self, KernelParams, MomentaSet, PointSet};
use crate::mesh::Mesh;

/// Explicit time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Euler,
    #[default]
    Rk2,
}

/// Control points, momenta, and the kernel they generate a velocity field with.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSystem<const D: usize> {
    control_points: PointSet<D>,
    momenta: MomentaSet<D>,
    params: KernelParams,
}

impl<const D: usize> ControlSystem<D> {
    pub fn new(
        control_points: PointSet<D>,
        momenta: MomentaSet<D>,
        params: KernelParams,
    ) -> Result<Self> {
        if control_points.len() != momenta.len() {
            return Err(Error::ShapeMismatch {
                expected: control_points.len(),
                found: momenta.len(),
            });
        }
        Ok(ControlSystem { control_points, momenta, params })
    }

    pub fn control_points(&self) -> &PointSet<D> {
        &self.control_points
    }

    pub fn momenta(&self) -> &MomentaSet<D> {
        &self.momenta
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.control_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.control_points.is_empty()
    }

    /// Same control points and kernel, momenta negated; shooting it undoes
    /// this system's deformation up to integration error.
    pub fn reversed(&self) -> Self {
        let neg: Vec<[f64; D]> =
            self.momenta.as_slice().iter().map(|m| geom::scale(*m, -1.0)).collect();
        ControlSystem {
            control_points: self.control_points.clone(),
            momenta: MomentaSet::new(neg).expect("negation preserves validity"),
            params: self.params,
        }
    }
}

/// Flow energy `½ ⟨v, v⟩` of the system's initial velocity field. Conserved
/// along exact geodesics.
pub fn hamiltonian_energy<const D: usize>(sys: &ControlSystem<D>) -> f64 {
    0.5 * kernel::hilbert_product_slices(
        sys.control_points.as_slice(),
        sys.momenta.as_slice(),
        sys.control_points.as_slice(),
        sys.momenta.as_slice(),
        sys.params,
    )
}

/// Discrete geodesic path: states at every accepted time, including both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTrajectory<const D: usize> {
    times: Vec<f64>,
    c_path: Vec<Vec<[f64; D]>>,
    mu_path: Vec<Vec<[f64; D]>>,
    x_path: Option<Vec<Vec<[f64; D]>>>,
    scheme: Scheme,
    params: KernelParams,
}

impl<const D: usize> GeodesicTrajectory<D> {
    /// Number of integration steps taken (`times.len() - 1`).
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    /// Control-point positions at step `k` (0 = initial state).
    pub fn control_points_at(&self, k: usize) -> &[[f64; D]] {
        &self.c_path[k]
    }

    pub fn momenta_at(&self, k: usize) -> &[[f64; D]] {
        &self.mu_path[k]
    }

    /// Advected passive points at step `k`, if the trajectory carries any.
    pub fn points_at(&self, k: usize) -> Option<&[[f64; D]]> {
        self.x_path.as_ref().map(|p| p[k].as_slice())
    }

    pub fn final_control_points(&self) -> &[[f64; D]] {
        self.c_path.last().expect("trajectory is never empty")
    }

    pub fn final_momenta(&self) -> &[[f64; D]] {
        self.mu_path.last().expect("trajectory is never empty")
    }

    pub fn final_points(&self) -> Option<&[[f64; D]]> {
        self.x_path.as_ref().map(|p| p.last().expect("trajectory is never empty").as_slice())
    }

    /// Control system at step `k`; useful for restarting integration.
    pub fn system_at(&self, k: usize) -> ControlSystem<D> {
        ControlSystem::new(
            PointSet::new(self.c_path[k].clone()).expect("stored states are valid"),
            MomentaSet::new(self.mu_path[k].clone()).expect("stored states are valid"),
            self.params,
        )
        .expect("stored states are paired")
    }

    /// Flow energy at step `k`; drift along the path measures integration error.
    pub fn energy_at(&self, k: usize) -> f64 {
        0.5 * kernel::hilbert_product_slices(
            &self.c_path[k],
            &self.mu_path[k],
            &self.c_path[k],
            &self.mu_path[k],
            self.params,
        )
    }
}

/// Mutable integration state: control points, momenta, and passive points.
pub(crate) struct RawState<const D: usize> {
    pub c: Vec<[f64; D]>,
    pub mu: Vec<[f64; D]>,
    pub x: Vec<[f64; D]>,
}

/// Time derivative of a state under the geodesic equations.
pub(crate) struct RawDeriv<const D: usize> {
    pub dc: Vec<[f64; D]>,
    pub dmu: Vec<[f64; D]>,
    pub dx: Vec<[f64; D]>,
}

/// Geodesic right-hand side. Momentum derivative sums run with `j` ascending
/// for bit-reproducibility; both control and passive points use the same
/// velocity evaluation code path.
pub(crate) fn eval_rhs<const D: usize>(
    c: &[[f64; D]],
    mu: &[[f64; D]],
    x: &[[f64; D]],
    params: KernelParams,
) -> RawDeriv<D> {
    let n = c.len();
    let mut dc = Vec::with_capacity(n);
    for k in 0..n {
        dc.push(kernel::velocity_at(c[k], c, mu, params));
    }
    let mut dmu = vec![[0.0; D]; n];
    for k in 0..n {
        let mut acc = [0.0; D];
        for j in 0..n {
            let mm = geom::dot(mu[k], mu[j]);
            let g = kernel::grad1_kernel(c[k], c[j], params);
            for a in 0..D {
                acc[a] -= mm * g[a];
            }
        }
        dmu[k] = acc;
    }
    let mut dx = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        dx.push(kernel::velocity_at(x[i], c, mu, params));
    }
    RawDeriv { dc, dmu, dx }
}

fn apply_step<const D: usize>(s: &RawState<D>, h: f64, d: &RawDeriv<D>) -> RawState<D> {
    RawState {
        c: s.c.iter().zip(&d.dc).map(|(v, dv)| geom::axpy(*v, h, *dv)).collect(),
        mu: s.mu.iter().zip(&d.dmu).map(|(v, dv)| geom::axpy(*v, h, *dv)).collect(),
        x: s.x.iter().zip(&d.dx).map(|(v, dv)| geom::axpy(*v, h, *dv)).collect(),
    }
}

/// One explicit step of the chosen scheme.
pub(crate) fn step_state<const D: usize>(
    s: &RawState<D>,
    h: f64,
    scheme: Scheme,
    params: KernelParams,
) -> RawState<D> {
    match scheme {
        Scheme::Euler => {
            let d = eval_rhs(&s.c, &s.mu, &s.x, params);
            apply_step(s, h, &d)
        }
        Scheme::Rk2 => {
            let d0 = eval_rhs(&s.c, &s.mu, &s.x, params);
            let mid = apply_step(s, 0.5 * h, &d0);
            let d1 = eval_rhs(&mid.c, &mid.mu, &mid.x, params);
            apply_step(s, h, &d1)
        }
    }
}

/// Blow-up guard radius: coordinates may not exceed 1e6 times the extent of
/// the initial configuration. σ is added so that degenerate single-point
/// systems (zero diagonal) still have a positive guard.
fn guard_radius<const D: usize>(c: &[[f64; D]], x: &[[f64; D]], params: KernelParams) -> f64 {
    let mut lo = c[0];
    let mut hi = c[0];
    for v in c.iter().chain(x.iter()) {
        for a in 0..D {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    1e6 * (geom::norm(geom::sub(hi, lo)) + params.sigma())
}

fn check_state<const D: usize>(s: &RawState<D>, guard: f64, step: usize) -> Result<()> {
    let within = |vs: &[[f64; D]]| {
        vs.iter().all(|v| v.iter().all(|val| val.is_finite() && val.abs() <= guard))
    };
    if within(&s.c) && within(&s.mu) && within(&s.x) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { step })
    }
}

fn integrate<const D: usize>(
    sys: &ControlSystem<D>,
    x0: Option<&[[f64; D]]>,
    n_steps: usize,
    t_end: f64,
    scheme: Scheme,
) -> Result<GeodesicTrajectory<D>> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter { name: "n_steps", value: 0.0 });
    }
    if !t_end.is_finite() || !(0.0..=1.0).contains(&t_end) {
        return Err(Error::InvalidParameter { name: "t_end", value: t_end });
    }
    let mut state = RawState {
        c: sys.control_points.as_slice().to_vec(),
        mu: sys.momenta.as_slice().to_vec(),
        x: x0.map(|p| p.to_vec()).unwrap_or_default(),
    };
    let guard = guard_radius(&state.c, &state.x, sys.params);

    let store_x = x0.is_some();
    let mut times = vec![0.0];
    let mut c_path = vec![state.c.clone()];
    let mut mu_path = vec![state.mu.clone()];
    let mut x_path: Option<Vec<Vec<[f64; D]>>> = store_x.then(|| vec![state.x.clone()]);

    if t_end > 0.0 {
        let h = t_end / n_steps as f64;
        for k in 0..n_steps {
            state = step_state(&state, h, scheme, sys.params);
            check_state(&state, guard, k + 1)?;
            times.push(h * (k + 1) as f64);
            c_path.push(state.c.clone());
            mu_path.push(state.mu.clone());
            if let Some(xp) = x_path.as_mut() {
                xp.push(state.x.clone());
            }
        }
    }

    Ok(GeodesicTrajectory { times, c_path, mu_path, x_path, scheme, params: sys.params })
}

/// Integrates the geodesic equations from `sys` over `[0, t_end]` in
/// `n_steps` uniform steps.
///
/// `t_end = 0` yields a single-state trajectory (no step taken).
pub fn shoot<const D: usize>(
    sys: &ControlSystem<D>,
    n_steps: usize,
    t_end: f64,
    scheme: Scheme,
) -> Result<GeodesicTrajectory<D>> {
    integrate(sys, None, n_steps, t_end, scheme)
}

/// Like [`shoot`], but also advects the passive points `x0` inside the same
/// state vector, so they see exactly the stage values the control points see.
pub fn shoot_with_points<const D: usize>(
    sys: &ControlSystem<D>,
    x0: &PointSet<D>,
    n_steps: usize,
    t_end: f64,
    scheme: Scheme,
) -> Result<GeodesicTrajectory<D>> {
    integrate(sys, Some(x0.as_slice()), n_steps, t_end, scheme)
}

/// Advects `x0` along an existing trajectory, reproducing the discretization
/// and stage arithmetic of the original integration.
///
/// Returns the full path of the points (`n_steps + 1` entries). Flowing the
/// trajectory's own control points reproduces its control path bit-for-bit.
pub fn flow_points<const D: usize>(
    x0: &PointSet<D>,
    traj: &GeodesicTrajectory<D>,
) -> Result<Vec<Vec<[f64; D]>>> {
    let params = traj.params;
    let mut x = x0.as_slice().to_vec();
    let mut path = Vec::with_capacity(traj.times.len());
    path.push(x.clone());
    // Recompute the step size exactly as the original integration did;
    // differencing `times` would round differently.
    let t_end = *traj.times.last().expect("trajectory has at least one state");
    let h = t_end / traj.n_steps().max(1) as f64;
    for k in 0..traj.n_steps() {
        let c = &traj.c_path[k];
        let mu = &traj.mu_path[k];
        match traj.scheme {
            Scheme::Euler => {
                for xi in x.iter_mut() {
                    let v = kernel::velocity_at(*xi, c, mu, params);
                    *xi = geom::axpy(*xi, h, v);
                }
            }
            Scheme::Rk2 => {
                // Rebuild the midpoint stage of the stored step with the same
                // arithmetic the combined integration used.
                let d0 = eval_rhs(c, mu, &[], params);
                let c_mid: Vec<[f64; D]> =
                    c.iter().zip(&d0.dc).map(|(v, dv)| geom::axpy(*v, 0.5 * h, *dv)).collect();
                let mu_mid: Vec<[f64; D]> =
                    mu.iter().zip(&d0.dmu).map(|(v, dv)| geom::axpy(*v, 0.5 * h, *dv)).collect();
                for xi in x.iter_mut() {
                    let v0 = kernel::velocity_at(*xi, c, mu, params);
                    let xm = geom::axpy(*xi, 0.5 * h, v0);
                    let v1 = kernel::velocity_at(xm, &c_mid, &mu_mid, params);
                    *xi = geom::axpy(*xi, h, v1);
                }
            }
        }
        if !geom::all_finite(&x) {
            return Err(Error::NonFiniteState { step: k + 1 });
        }
        path.push(x.clone());
    }
    Ok(path)
}

/// Deforms a mesh by the flow of `sys`: the Riemannian exponential applied to
/// every vertex, keeping connectivity.
pub fn exponential<const D: usize>(
    shape: &Mesh<D>,
    sys: &ControlSystem<D>,
    n_steps: usize,
    t_end: f64,
    scheme: Scheme,
) -> Result<Mesh<D>> {
    let x0 = PointSet::new(shape.vertices().to_vec())?;
    let traj = shoot_with_points(sys, &x0, n_steps, t_end, scheme)?;
    shape.with_vertices(traj.final_points().expect("trajectory carries points").to_vec())
}
