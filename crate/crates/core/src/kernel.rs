//! Gaussian reproducing kernel, velocity fields, and their scalar product.
//!
//! A velocity field is a finite kernel expansion `v(x) = Σ_k K(x, c_k) μ_k`
//! over control points `c_k` carrying momentum vectors `μ_k`.  The kernel is
//!
//! ```text
//! K(x, y) = exp(-‖x - y‖² / σ²)
//! ```
//!
//! **Width convention:** the denominator is `σ²`, *not* `2σ²`.  Every width
//! used in this crate follows this convention; translating settings from
//! software that uses the `2σ²` form requires scaling σ by `√2`.
//!
//! All double sums run row-major (outer index first, inner index ascending)
//! and accumulate sequentially, so results are bit-reproducible run to run.

use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geom;

/// Width parameter of the Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    sigma: f64,
}

impl KernelParams {
    /// Requires `sigma` to be finite and strictly positive.
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParameter { name: "sigma", value: sigma });
        }
        Ok(KernelParams { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `1 / σ²`, the factor that appears in the exponent.
    #[inline]
    pub(crate) fn inv_sigma_sq(&self) -> f64 {
        1.0 / (self.sigma * self.sigma)
    }
}

/// A non-empty list of points with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<const D: usize> {
    points: Vec<[f64; D]>,
}

impl<const D: usize> PointSet<D> {
    pub fn new(points: Vec<[f64; D]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty { what: "point set" });
        }
        if !geom::all_finite(&points) {
            return Err(Error::NonFiniteInput { what: "point coordinates" });
        }
        Ok(PointSet { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn as_slice(&self) -> &[[f64; D]] {
        &self.points
    }

    pub fn into_inner(self) -> Vec<[f64; D]> {
        self.points
    }
}

/// Momentum vectors paired index-by-index with a [`PointSet`].
///
/// Zero momenta are allowed; only finiteness is required.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentaSet<const D: usize> {
    momenta: Vec<[f64; D]>,
}

impl<const D: usize> MomentaSet<D> {
    pub fn new(momenta: Vec<[f64; D]>) -> Result<Self> {
        if momenta.is_empty() {
            return Err(Error::Empty { what: "momenta set" });
        }
        if !geom::all_finite(&momenta) {
            return Err(Error::NonFiniteInput { what: "momentum coordinates" });
        }
        Ok(MomentaSet { momenta })
    }

    /// All-zero momenta paired with `n` points.
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty { what: "momenta set" });
        }
        Ok(MomentaSet { momenta: alloc::vec![[0.0; D]; n] })
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn as_slice(&self) -> &[[f64; D]] {
        &self.momenta
    }

    pub fn into_inner(self) -> Vec<[f64; D]> {
        self.momenta
    }
}

/// Kernel value from a squared distance. Single shared code path so every
/// caller agrees bit-for-bit.
#[inline]
pub(crate) fn kernel_of_sq_dist(sq: f64, params: KernelParams) -> f64 {
    (-sq * params.inv_sigma_sq()).exp()
}

/// `K(x, y) = exp(-‖x-y‖²/σ²)`.
#[inline]
pub fn eval_kernel<const D: usize>(x: [f64; D], y: [f64; D], params: KernelParams) -> f64 {
    kernel_of_sq_dist(geom::sq_dist(x, y), params)
}

/// Gradient of `K` in its first argument:
/// `∇₁K(x, y) = -(2/σ²) (x - y) K(x, y)`.
#[inline]
pub fn grad1_kernel<const D: usize>(x: [f64; D], y: [f64; D], params: KernelParams) -> [f64; D] {
    let k = eval_kernel(x, y, params);
    let s = -2.0 * params.inv_sigma_sq() * k;
    geom::scale(geom::sub(x, y), s)
}

/// Velocity of the kernel expansion at `x`: `Σ_j K(x, c_j) μ_j`,
/// summed over `j` ascending.
pub(crate) fn velocity_at<const D: usize>(
    x: [f64; D],
    c: &[[f64; D]],
    mu: &[[f64; D]],
    params: KernelParams,
) -> [f64; D] {
    let mut v = [0.0; D];
    for j in 0..c.len() {
        let k = eval_kernel(x, c[j], params);
        for a in 0..D {
            v[a] += k * mu[j][a];
        }
    }
    v
}

/// Evaluates the velocity field spanned by `(c, mu)` at the point `x`.
///
/// `c` and `mu` must be paired index-by-index.
pub fn eval_velocity<const D: usize>(
    x: [f64; D],
    c: &PointSet<D>,
    mu: &MomentaSet<D>,
    params: KernelParams,
) -> Result<[f64; D]> {
    if c.len() != mu.len() {
        return Err(Error::ShapeMismatch { expected: c.len(), found: mu.len() });
    }
    Ok(velocity_at(x, c.as_slice(), mu.as_slice(), params))
}

/// Slice-level scalar product; shared by the public API and the integrators.
pub(crate) fn hilbert_product_slices<const D: usize>(
    c: &[[f64; D]],
    mu: &[[f64; D]],
    c2: &[[f64; D]],
    mu2: &[[f64; D]],
    params: KernelParams,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..c.len() {
        for j in 0..c2.len() {
            acc += eval_kernel(c[i], c2[j], params) * geom::dot(mu[i], mu2[j]);
        }
    }
    acc
}

/// Scalar product of two kernel-expansion fields:
/// `⟨v, v'⟩ = Σ_i Σ_j K(c_i, c'_j) μ_iᵀ μ'_j`.
///
/// This is the reproducing-space inner product, so `hilbert_product(c, mu, c,
/// mu, ..)` is the squared field norm used as the regularizer and (halved) as
/// the flow energy.
pub fn hilbert_product<const D: usize>(
    c: &PointSet<D>,
    mu: &MomentaSet<D>,
    c2: &PointSet<D>,
    mu2: &MomentaSet<D>,
    params: KernelParams,
) -> Result<f64> {
    if c.len() != mu.len() {
        return Err(Error::ShapeMismatch { expected: c.len(), found: mu.len() });
    }
    if c2.len() != mu2.len() {
        return Err(Error::ShapeMismatch { expected: c2.len(), found: mu2.len() });
    }
    Ok(hilbert_product_slices(c.as_slice(), mu.as_slice(), c2.as_slice(), mu2.as_slice(), params))
}

/// Dense kernel matrix `K[i][j] = K(a_i, b_j)` in row-major order.
pub(crate) fn kernel_matrix<const D: usize>(
    a: &[[f64; D]],
    b: &[[f64; D]],
    params: KernelParams,
) -> Vec<f64> {
    let mut m = Vec::with_capacity(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            m.push(eval_kernel(a[i], b[j], params));
        }
    }
    m
}
