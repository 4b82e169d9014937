//! Inexact registration of corresponded meshes by geodesic shooting.
//!
//! Registration minimizes
//!
//! ```text
//! C(c, μ) = ‖S - φ₁(T)‖² + α² ‖v₀‖²
//! ```
//!
//! over the initial control points `c` and momenta `μ`, where `φ₁(T)` flows
//! the template's vertices to time 1 and `‖v₀‖²` is the kernel-space squared
//! norm of the initial velocity field.  The data term stacks vertices by
//! index: meshes must be corresponded.
//!
//! The gradient is the exact derivative of the *discrete* criterion: the
//! integrator's steps are differentiated in reverse (a hand-written adjoint
//! pass), so finite differences of `criterion` agree with
//! [`criterion_gradient`] to near machine precision.  Optimization is plain
//! gradient descent with a backtracking Armijo line search.
//!
//! The optimum is generally inexact; the leftover `δ = S - φ₁(T)` (see
//! [`residual`]) is what the residual-corrected operators in
//! [`crate::symmetric_ops`] feed back into their constructions.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geodesics::{
    eval_rhs, shoot_with_points, ControlSystem, GeodesicTrajectory, Scheme,
};
use crate::geom;
use crate::kernel::{self, KernelParams, MomentaSet, PointSet};
use crate::mesh::Mesh;

/// Settings for one registration problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationConfig {
    /// Kernel width; also the default control-point spacing.
    pub sigma: f64,
    /// Regularization weight α² in front of the squared field norm.
    /// Small values favour exact matching, large values shrink the
    /// deformation toward identity.
    pub alpha_squared: f64,
    /// Integration steps over `[0, 1]`.
    pub n_steps: usize,
    pub scheme: Scheme,
    /// Spacing of the initial control-point grid.
    pub control_point_spacing: f64,
    pub max_iterations: usize,
    /// Relative decrease of the criterion below which the optimization stops
    /// and reports convergence.
    pub convergence_tol: f64,
    /// First trial step of the very first line search.
    pub initial_step: f64,
    /// Keep control points fixed at the grid and optimize momenta only.
    pub freeze_control_points: bool,
}

impl RegistrationConfig {
    /// Defaults for a given kernel width: α² = 1, 10 RK2 steps, grid spacing
    /// σ, at most 200 iterations, tolerance 1e-6, initial step 1e-2.
    pub fn new(sigma: f64) -> Self {
        RegistrationConfig {
            sigma,
            alpha_squared: 1.0,
            n_steps: 10,
            scheme: Scheme::Rk2,
            control_point_spacing: sigma,
            max_iterations: 200,
            convergence_tol: 1e-6,
            initial_step: 1e-2,
            freeze_control_points: false,
        }
    }

    pub fn with_alpha_squared(mut self, alpha_squared: f64) -> Self {
        self.alpha_squared = alpha_squared;
        self
    }

    pub fn params(&self) -> Result<KernelParams> {
        KernelParams::new(self.sigma)
    }

    fn validate(&self) -> Result<()> {
        self.params()?;
        if !self.alpha_squared.is_finite() || self.alpha_squared <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha_squared",
                value: self.alpha_squared,
            });
        }
        if !self.control_point_spacing.is_finite() || self.control_point_spacing <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "control_point_spacing",
                value: self.control_point_spacing,
            });
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter { name: "n_steps", value: 0.0 });
        }
        if !self.convergence_tol.is_finite() || self.convergence_tol <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "convergence_tol",
                value: self.convergence_tol,
            });
        }
        if !self.initial_step.is_finite() || self.initial_step <= 0.0 {
            return Err(Error::InvalidParameter { name: "initial_step", value: self.initial_step });
        }
        Ok(())
    }
}

/// Criterion value split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionValue {
    pub total: f64,
    pub data_term: f64,
    /// Squared kernel-space norm of the initial velocity field.
    pub regularity_term: f64,
}

/// Output of [`register`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult<const D: usize> {
    /// Optimal initial control points and momenta; the initial velocity field
    /// is the logarithm of the recovered deformation.
    pub system: ControlSystem<D>,
    /// Deformed template `φ₁(T)` at the optimum.
    pub deformed: Mesh<D>,
    /// Per-vertex residual `δ = S - φ₁(T)`; `deformed + delta` rebuilds the
    /// target exactly.
    pub delta: Vec<[f64; D]>,
    pub data_term: f64,
    pub regularity_term: f64,
    pub total: f64,
    /// Accepted gradient-descent iterations.
    pub iterations: usize,
    /// True when the relative decrease fell below `convergence_tol` (or no
    /// descent direction remained); false when `max_iterations` ran out.
    pub converged: bool,
    /// Criterion totals of the accepted iterates, starting with the initial
    /// value; non-increasing by construction.
    pub history: Vec<f64>,
}

impl<const D: usize> RegistrationResult<D> {
    /// Root-mean-square vertex mismatch `sqrt(data_term / N)`.
    pub fn residual_rms(&self) -> f64 {
        (self.data_term / self.deformed.vertex_count() as f64).sqrt()
    }

    /// Kernel-space norm of the deformation, `‖v₀‖`.
    pub fn deformation_norm(&self) -> f64 {
        self.regularity_term.sqrt()
    }
}

/// Per-vertex residual `target - deformed`, paired by index.
pub fn residual<const D: usize>(
    target: &Mesh<D>,
    deformed: &Mesh<D>,
) -> Result<Vec<[f64; D]>> {
    if target.vertex_count() != deformed.vertex_count() {
        return Err(Error::ShapeMismatch {
            expected: target.vertex_count(),
            found: deformed.vertex_count(),
        });
    }
    Ok(target
        .vertices()
        .iter()
        .zip(deformed.vertices())
        .map(|(t, d)| geom::sub(*t, *d))
        .collect())
}

/// Regular control-point grid over the template's bounding box, inflated by
/// σ/2 on every side. Each axis gets `floor(extent / spacing) + 1` points (at
/// least one), centered on the box; the grid is emitted in row-major order
/// (last axis fastest).
pub fn init_control_grid<const D: usize>(
    template: &Mesh<D>,
    cfg: &RegistrationConfig,
) -> Result<PointSet<D>> {
    cfg.validate()?;
    let spacing = cfg.control_point_spacing;
    let (mut lo, mut hi) = template.bounding_box();
    for a in 0..D {
        lo[a] -= cfg.sigma / 2.0;
        hi[a] += cfg.sigma / 2.0;
    }
    let mut counts = [0usize; D];
    let mut starts = [0.0f64; D];
    let mut total: usize = 1;
    for a in 0..D {
        let extent = hi[a] - lo[a];
        let n = (extent / spacing).floor() as usize + 1;
        let n = n.max(1);
        counts[a] = n;
        let span = (n - 1) as f64 * spacing;
        starts[a] = 0.5 * (lo[a] + hi[a]) - 0.5 * span;
        total = total.saturating_mul(n);
    }
    if total > 1_000_000 {
        return Err(Error::InvalidParameter {
            name: "control_point_spacing",
            value: spacing,
        });
    }
    let mut points = Vec::with_capacity(total);
    let mut idx = [0usize; D];
    loop {
        let mut p = [0.0; D];
        for a in 0..D {
            p[a] = starts[a] + idx[a] as f64 * spacing;
        }
        points.push(p);
        // odometer increment, last axis fastest
        let mut a = D;
        loop {
            if a == 0 {
                return PointSet::new(points);
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < counts[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

fn check_pair<const D: usize>(template: &Mesh<D>, target: &Mesh<D>) -> Result<()> {
    if template.vertex_count() != target.vertex_count() {
        return Err(Error::ShapeMismatch {
            expected: template.vertex_count(),
            found: target.vertex_count(),
        });
    }
    Ok(())
}

fn forward<const D: usize>(
    sys: &ControlSystem<D>,
    template: &Mesh<D>,
    cfg: &RegistrationConfig,
) -> Result<GeodesicTrajectory<D>> {
    let x0 = PointSet::new(template.vertices().to_vec())?;
    shoot_with_points(sys, &x0, cfg.n_steps, 1.0, cfg.scheme)
}

fn value_from_trajectory<const D: usize>(
    sys: &ControlSystem<D>,
    traj: &GeodesicTrajectory<D>,
    target: &Mesh<D>,
    cfg: &RegistrationConfig,
) -> CriterionValue {
    let x_end = traj.final_points().expect("registration trajectories carry vertices");
    let mut data = 0.0;
    for (s, x) in target.vertices().iter().zip(x_end) {
        data += geom::sq_dist(*s, *x);
    }
    let c = sys.control_points().as_slice();
    let mu = sys.momenta().as_slice();
    let reg = kernel::hilbert_product_slices(c, mu, c, mu, sys.params());
    CriterionValue { total: data + cfg.alpha_squared * reg, data_term: data, regularity_term: reg }
}

/// Registration criterion at a given state: flows the template's vertices to
/// time 1 and adds the α²-weighted squared field norm.
pub fn criterion<const D: usize>(
    sys: &ControlSystem<D>,
    template: &Mesh<D>,
    target: &Mesh<D>,
    cfg: &RegistrationConfig,
) -> Result<CriterionValue> {
    cfg.validate()?;
    check_pair(template, target)?;
    let traj = forward(sys, template, cfg)?;
    Ok(value_from_trajectory(sys, &traj, target, cfg))
}

/// Adjoint accumulator for one state of the combined (c, μ, x) system.
struct Adjoint<const D: usize> {
    c: Vec<[f64; D]>,
    mu: Vec<[f64; D]>,
    x: Vec<[f64; D]>,
}

/// Vector-Jacobian product of the geodesic right-hand side: given cotangents
/// `(a.c, a.mu, a.x)` of the derivative outputs, accumulates the cotangents
/// of the state inputs. Mirrors `eval_rhs` term by term.
fn rhs_vjp<const D: usize>(
    c: &[[f64; D]],
    mu: &[[f64; D]],
    x: &[[f64; D]],
    params: KernelParams,
    a: &Adjoint<D>,
) -> Adjoint<D> {
    let n = c.len();
    let inv_s2 = params.inv_sigma_sq();
    let mut b = Adjoint {
        c: vec![[0.0; D]; n],
        mu: vec![[0.0; D]; n],
        x: vec![[0.0; D]; x.len()],
    };
    for k in 0..n {
        for j in 0..n {
            let r = geom::sub(c[k], c[j]);
            let kv = kernel::kernel_of_sq_dist(geom::dot(r, r), params);
            let g = geom::scale(r, -2.0 * inv_s2 * kv);

            // ċ_k = Σ_j K(c_k, c_j) μ_j
            for d in 0..D {
                b.mu[j][d] += kv * a.c[k][d];
            }
            let s1 = geom::dot(a.c[k], mu[j]);
            for d in 0..D {
                b.c[k][d] += s1 * g[d];
                b.c[j][d] -= s1 * g[d];
            }

            // μ̇_k = -Σ_j (μ_kᵀμ_j) ∇₁K(c_k, c_j)
            let mm = geom::dot(mu[k], mu[j]);
            let s2 = geom::dot(a.mu[k], g);
            for d in 0..D {
                b.mu[k][d] -= s2 * mu[j][d];
                b.mu[j][d] -= s2 * mu[k][d];
            }
            // d∇₁K/dc_k applied to a.mu[k]: -(2K/σ²)(I - (2/σ²) r rᵀ) a
            let ra = geom::dot(r, a.mu[k]);
            for d in 0..D {
                let w = -2.0 * inv_s2 * kv * (a.mu[k][d] - 2.0 * inv_s2 * r[d] * ra);
                b.c[k][d] -= mm * w;
                b.c[j][d] += mm * w;
            }
        }
    }
    for i in 0..x.len() {
        for j in 0..n {
            let r = geom::sub(x[i], c[j]);
            let kv = kernel::kernel_of_sq_dist(geom::dot(r, r), params);
            let p = geom::scale(r, -2.0 * inv_s2 * kv);

            // ẋ_i = Σ_j K(x_i, c_j) μ_j
            for d in 0..D {
                b.mu[j][d] += kv * a.x[i][d];
            }
            let s3 = geom::dot(a.x[i], mu[j]);
            for d in 0..D {
                b.x[i][d] += s3 * p[d];
                b.c[j][d] -= s3 * p[d];
            }
        }
    }
    b
}

fn axpy_into<const D: usize>(dst: &mut [[f64; D]], s: f64, src: &[[f64; D]]) {
    for (d, v) in dst.iter_mut().zip(src) {
        for a in 0..D {
            d[a] += s * v[a];
        }
    }
}

/// Gradient of the regularity term `‖v₀‖²` in (c, μ):
/// `∂/∂μ_m = 2 Σ_j K μ_j`, `∂/∂c_m = 2 Σ_j (μ_mᵀμ_j) ∇₁K(c_m, c_j)`.
fn regularity_gradient<const D: usize>(
    c: &[[f64; D]],
    mu: &[[f64; D]],
    params: KernelParams,
) -> (Vec<[f64; D]>, Vec<[f64; D]>) {
    let n = c.len();
    let mut gc = vec![[0.0; D]; n];
    let mut gmu = vec![[0.0; D]; n];
    for m in 0..n {
        let v = kernel::velocity_at(c[m], c, mu, params);
        gmu[m] = geom::scale(v, 2.0);
        let mut acc = [0.0; D];
        for j in 0..n {
            let mm = geom::dot(mu[m], mu[j]);
            let g = kernel::grad1_kernel(c[m], c[j], params);
            for a in 0..D {
                acc[a] += 2.0 * mm * g[a];
            }
        }
        gc[m] = acc;
    }
    (gc, gmu)
}

/// Criterion value together with its exact gradient in the initial control
/// points and momenta, computed by reversing the integrator's steps.
pub fn criterion_gradient<const D: usize>(
    sys: &ControlSystem<D>,
    template: &Mesh<D>,
    target: &Mesh<D>,
    cfg: &RegistrationConfig,
) -> Result<(CriterionValue, Vec<[f64; D]>, Vec<[f64; D]>)> {
    cfg.validate()?;
    check_pair(template, target)?;
    let traj = forward(sys, template, cfg)?;
    let value = value_from_trajectory(sys, &traj, target, cfg);
    let params = sys.params();
    let n = sys.len();

    // Seed: ∂data/∂x(1) = 2 (x(1) - S); control cotangents start at zero.
    let x_end = traj.final_points().expect("trajectory carries vertices");
    let mut adj = Adjoint {
        c: vec![[0.0; D]; n],
        mu: vec![[0.0; D]; n],
        x: x_end
            .iter()
            .zip(target.vertices())
            .map(|(x, s)| geom::scale(geom::sub(*x, *s), 2.0))
            .collect(),
    };

    // Reverse sweep over the stored steps.
    for k in (0..traj.n_steps()).rev() {
        let h = traj.times()[k + 1] - traj.times()[k];
        let c = traj.control_points_at(k);
        let mu = traj.momenta_at(k);
        let x = traj.points_at(k).expect("trajectory carries vertices");
        match traj.scheme() {
            Scheme::Euler => {
                // s' = s + h f(s)  =>  ā += h Jᵀ ā
                let b = rhs_vjp(c, mu, x, params, &adj);
                axpy_into(&mut adj.c, h, &b.c);
                axpy_into(&mut adj.mu, h, &b.mu);
                axpy_into(&mut adj.x, h, &b.x);
            }
            Scheme::Rk2 => {
                // Rebuild the midpoint stage, then
                //   L  = h Jf(m)ᵀ ā
                //   ā' = ā + L + (h/2) Jf(s)ᵀ L
                let d0 = eval_rhs(c, mu, x, params);
                let cm: Vec<[f64; D]> =
                    c.iter().zip(&d0.dc).map(|(v, dv)| geom::axpy(*v, 0.5 * h, *dv)).collect();
                let mum: Vec<[f64; D]> =
                    mu.iter().zip(&d0.dmu).map(|(v, dv)| geom::axpy(*v, 0.5 * h, *dv)).collect();
                let xm: Vec<[f64; D]> =
                    x.iter().zip(&d0.dx).map(|(v, dv)| geom::axpy(*v, 0.5 * h, *dv)).collect();

                let b1 = rhs_vjp(&cm, &mum, &xm, params, &adj);
                let l = Adjoint {
                    c: b1.c.iter().map(|v| geom::scale(*v, h)).collect(),
                    mu: b1.mu.iter().map(|v| geom::scale(*v, h)).collect(),
                    x: b1.x.iter().map(|v| geom::scale(*v, h)).collect(),
                };
                let b2 = rhs_vjp(c, mu, x, params, &l);
                for i in 0..n {
                    for a in 0..D {
                        adj.c[i][a] += l.c[i][a] + 0.5 * h * b2.c[i][a];
                        adj.mu[i][a] += l.mu[i][a] + 0.5 * h * b2.mu[i][a];
                    }
                }
                for i in 0..adj.x.len() {
                    for a in 0..D {
                        adj.x[i][a] += l.x[i][a] + 0.5 * h * b2.x[i][a];
                    }
                }
            }
        }
    }

    // Add the regularity term's direct dependence on the initial state.
    let c0 = sys.control_points().as_slice();
    let mu0 = sys.momenta().as_slice();
    let (rc, rmu) = regularity_gradient(c0, mu0, params);
    let mut grad_c = adj.c;
    let mut grad_mu = adj.mu;
    axpy_into(&mut grad_c, cfg.alpha_squared, &rc);
    axpy_into(&mut grad_mu, cfg.alpha_squared, &rmu);
    Ok((value, grad_c, grad_mu))
}

/// Registers `template` onto `target`: optimizes initial control points and
/// momenta by gradient descent with a backtracking (Armijo) line search.
///
/// Control points start on the grid of [`init_control_grid`], momenta at
/// zero. The line search halves the trial step until the Armijo condition
/// (constant 1e-4) holds, warm-starting each iteration at twice the last
/// accepted step. Failure to reach `convergence_tol` within
/// `max_iterations` is reported through the `converged` flag, not an error.
pub fn register<const D: usize>(
    template: &Mesh<D>,
    target: &Mesh<D>,
    cfg: &RegistrationConfig,
) -> Result<RegistrationResult<D>> {
    cfg.validate()?;
    check_pair(template, target)?;
    let params = cfg.params()?;

    let mut c = init_control_grid(template, cfg)?.into_inner();
    let mut mu = vec![[0.0; D]; c.len()];

    let make_sys = |c: &Vec<[f64; D]>, mu: &Vec<[f64; D]>| -> Result<ControlSystem<D>> {
        ControlSystem::new(PointSet::new(c.clone())?, MomentaSet::new(mu.clone())?, params)
    };

    let sys0 = make_sys(&c, &mu)?;
    let (mut value, mut grad_c, mut grad_mu) = criterion_gradient(&sys0, template, target, cfg)?;
    let mut history = vec![value.total];
    let mut iterations = 0usize;
    let mut converged = false;
    // Largest step the warm start may grow back to.
    let step_cap = cfg.initial_step.max(1.0);
    let mut trial = cfg.initial_step;

    for _ in 0..cfg.max_iterations {
        let mut g2 = 0.0;
        for m in &grad_mu {
            g2 += geom::dot(*m, *m);
        }
        if !cfg.freeze_control_points {
            for g in &grad_c {
                g2 += geom::dot(*g, *g);
            }
        }
        if g2 == 0.0 {
            converged = true;
            break;
        }

        let mut t = trial;
        let mut accepted: Option<(Vec<[f64; D]>, Vec<[f64; D]>, CriterionValue)> = None;
        for _ in 0..60 {
            let cand_mu: Vec<[f64; D]> =
                mu.iter().zip(&grad_mu).map(|(m, g)| geom::axpy(*m, -t, *g)).collect();
            let cand_c: Vec<[f64; D]> = if cfg.freeze_control_points {
                c.clone()
            } else {
                c.iter().zip(&grad_c).map(|(p, g)| geom::axpy(*p, -t, *g)).collect()
            };
            let cand_sys = make_sys(&cand_c, &cand_mu)?;
            match criterion(&cand_sys, template, target, cfg) {
                Ok(v) if v.total <= value.total - 1e-4 * t * g2 => {
                    accepted = Some((cand_c, cand_mu, v));
                    break;
                }
                // Too-long steps may blow up the flow; treat like an Armijo
                // failure and halve.
                Ok(_) | Err(Error::NonFiniteState { .. }) => {}
                Err(e) => return Err(e),
            }
            t *= 0.5;
        }

        match accepted {
            None => {
                // No decrease at any step length: descent is exhausted at
                // this precision.
                converged = true;
                break;
            }
            Some((new_c, new_mu, new_value)) => {
                let prev = value.total;
                c = new_c;
                mu = new_mu;
                iterations += 1;
                trial = (2.0 * t).min(step_cap);
                let sys = make_sys(&c, &mu)?;
                let (v, gc, gm) = criterion_gradient(&sys, template, target, cfg)?;
                value = v;
                grad_c = gc;
                grad_mu = gm;
                history.push(value.total);
                debug_assert!(new_value.total == value.total);
                let rel = (prev - value.total) / prev.abs().max(f64::MIN_POSITIVE);
                if rel < cfg.convergence_tol {
                    converged = true;
                    break;
                }
            }
        }
    }

    let system = make_sys(&c, &mu)?;
    let traj = forward(&system, template, cfg)?;
    let final_value = value_from_trajectory(&system, &traj, target, cfg);
    let deformed =
        template.with_vertices(traj.final_points().expect("carries vertices").to_vec())?;
    let delta = residual(target, &deformed)?;
    Ok(RegistrationResult {
        system,
        deformed,
        delta,
        data_term: final_value.data_term,
        regularity_term: final_value.regularity_term,
        total: final_value.total,
        iterations,
        converged,
        history,
    })
}
