//! Small fixed-dimension vector helpers used by the numerical modules.

#[cfg(not(feature = "std"))]
use num_traits::Float;

#[cfg(test)]
#[inline]
pub(crate) fn add<const D: usize>(a: [f64; D], b: [f64; D]) -> [f64; D] {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = a[i] + b[i];
    }
    out
}

#[inline]
pub(crate) fn sub<const D: usize>(a: [f64; D], b: [f64; D]) -> [f64; D] {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = a[i] - b[i];
    }
    out
}

#[inline]
pub(crate) fn scale<const D: usize>(a: [f64; D], s: f64) -> [f64; D] {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = a[i] * s;
    }
    out
}

/// `a + s * b`, the workhorse of the integrators.
#[inline]
pub(crate) fn axpy<const D: usize>(a: [f64; D], s: f64, b: [f64; D]) -> [f64; D] {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = a[i] + s * b[i];
    }
    out
}

#[inline]
pub(crate) fn dot<const D: usize>(a: [f64; D], b: [f64; D]) -> f64 {
    let mut acc = 0.0;
    for i in 0..D {
        acc += a[i] * b[i];
    }
    acc
}

#[inline]
pub(crate) fn sq_dist<const D: usize>(a: [f64; D], b: [f64; D]) -> f64 {
    let mut acc = 0.0;
    for i in 0..D {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc
}

#[inline]
pub(crate) fn norm<const D: usize>(a: [f64; D]) -> f64 {
    dot(a, a).sqrt()
}

/// Frobenius norm of a list of vectors.
pub(crate) fn frobenius<const D: usize>(vs: &[[f64; D]]) -> f64 {
    let mut acc = 0.0;
    for v in vs {
        acc += dot(*v, *v);
    }
    acc.sqrt()
}

pub(crate) fn all_finite<const D: usize>(vs: &[[f64; D]]) -> bool {
    vs.iter().all(|v| v.iter().all(|x| x.is_finite()))
}
