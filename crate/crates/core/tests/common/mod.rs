//! Shared helpers for the integration tests.
//!
//! Reference computations here are written independently of the library:
//! they spell out the kernel, the geodesic right-hand side, and a classical
//! RK4 integrator from scratch so the tests compare two separate derivations
//! of the same mathematics.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` vectors with coordinates uniform in `[-amp, amp]`.
pub fn random_vectors<const D: usize>(
    rng: &mut ChaCha8Rng,
    n: usize,
    amp: f64,
) -> Vec<[f64; D]> {
    (0..n)
        .map(|_| {
            let mut v = [0.0; D];
            for a in v.iter_mut() {
                *a = rng.gen_range(-amp..amp);
            }
            v
        })
        .collect()
}

/// Independently written Gaussian kernel: `exp(-‖x-y‖²/σ²)`.
pub fn ref_kernel<const D: usize>(x: [f64; D], y: [f64; D], sigma: f64) -> f64 {
    let mut s = 0.0;
    for a in 0..D {
        let d = x[a] - y[a];
        s += d * d;
    }
    (-s / (sigma * sigma)).exp()
}

/// Velocity of the kernel field at `x`, as a plain double loop.
pub fn ref_velocity<const D: usize>(
    x: [f64; D],
    c: &[[f64; D]],
    mu: &[[f64; D]],
    sigma: f64,
) -> [f64; D] {
    let mut v = [0.0; D];
    for (cj, mj) in c.iter().zip(mu) {
        let k = ref_kernel(x, *cj, sigma);
        for a in 0..D {
            v[a] += k * mj[a];
        }
    }
    v
}

/// Reproducing-kernel inner product of two fields, as a plain double loop.
pub fn ref_hilbert<const D: usize>(
    c: &[[f64; D]],
    mu: &[[f64; D]],
    c2: &[[f64; D]],
    mu2: &[[f64; D]],
    sigma: f64,
) -> f64 {
    let mut acc = 0.0;
    for (ci, mi) in c.iter().zip(mu) {
        for (cj, mj) in c2.iter().zip(mu2) {
            let k = ref_kernel(*ci, *cj, sigma);
            let mut dot = 0.0;
            for a in 0..D {
                dot += mi[a] * mj[a];
            }
            acc += k * dot;
        }
    }
    acc
}

/// State of the reference integrator: control points, momenta, passive points.
#[derive(Clone)]
pub struct RefState<const D: usize> {
    pub c: Vec<[f64; D]>,
    pub mu: Vec<[f64; D]>,
    pub x: Vec<[f64; D]>,
}

/// Hamiltonian right-hand side, derived by hand:
/// `ċ_k = Σ_j K(c_k, c_j) μ_j`,
/// `μ̇_k = (2/σ²) Σ_j (μ_k·μ_j) K(c_k, c_j) (c_k - c_j)`,
/// `ẋ_i = Σ_j K(x_i, c_j) μ_j`.
fn ref_rhs<const D: usize>(s: &RefState<D>, sigma: f64) -> RefState<D> {
    let n = s.c.len();
    let inv_s2 = 1.0 / (sigma * sigma);
    let mut dc = vec![[0.0; D]; n];
    let mut dmu = vec![[0.0; D]; n];
    for k in 0..n {
        dc[k] = ref_velocity(s.c[k], &s.c, &s.mu, sigma);
        for j in 0..n {
            let kern = ref_kernel(s.c[k], s.c[j], sigma);
            let mut mm = 0.0;
            for a in 0..D {
                mm += s.mu[k][a] * s.mu[j][a];
            }
            for a in 0..D {
                dmu[k][a] += 2.0 * inv_s2 * mm * kern * (s.c[k][a] - s.c[j][a]);
            }
        }
    }
    let dx = s.x.iter().map(|xi| ref_velocity(*xi, &s.c, &s.mu, sigma)).collect();
    RefState { c: dc, mu: dmu, x: dx }
}

fn ref_axpy<const D: usize>(y: &RefState<D>, h: f64, d: &RefState<D>) -> RefState<D> {
    let comb = |ys: &Vec<[f64; D]>, ds: &Vec<[f64; D]>| {
        ys.iter()
            .zip(ds)
            .map(|(v, dv)| {
                let mut o = [0.0; D];
                for a in 0..D {
                    o[a] = v[a] + h * dv[a];
                }
                o
            })
            .collect()
    };
    RefState { c: comb(&y.c, &d.c), mu: comb(&y.mu, &d.mu), x: comb(&y.x, &d.x) }
}

/// Classical fourth-order Runge–Kutta reference solution.
pub fn ref_rk4<const D: usize>(
    init: &RefState<D>,
    sigma: f64,
    n_steps: usize,
    t_end: f64,
) -> RefState<D> {
    let h = t_end / n_steps as f64;
    let mut y = init.clone();
    for _ in 0..n_steps {
        let k1 = ref_rhs(&y, sigma);
        let k2 = ref_rhs(&ref_axpy(&y, 0.5 * h, &k1), sigma);
        let k3 = ref_rhs(&ref_axpy(&y, 0.5 * h, &k2), sigma);
        let k4 = ref_rhs(&ref_axpy(&y, h, &k3), sigma);
        let mut step = y.clone();
        step = ref_axpy(&step, h / 6.0, &k1);
        step = ref_axpy(&step, h / 3.0, &k2);
        step = ref_axpy(&step, h / 3.0, &k3);
        step = ref_axpy(&step, h / 6.0, &k4);
        y = step;
    }
    y
}

/// Largest coordinate-wise distance between two point lists.
pub fn max_dist<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let mut s = 0.0f64;
            for i in 0..D {
                s += (p[i] - q[i]) * (p[i] - q[i]);
            }
            s.sqrt()
        })
        .fold(0.0, f64::max)
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
///
/// Written for test use only: `a` is a full symmetric matrix as rows.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    if n == 1 {
        return vec![a[0][0]];
    }
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[i][j].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}
