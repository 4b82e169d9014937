//! Local area strain between corresponded triangle meshes.
//!
//! For each vertex, the strain averages the relative area change of its
//! incident triangles between a reference mesh and a deformed mesh with the
//! same connectivity. Positive values mean local contraction of the deformed
//! mesh relative to the reference; under a uniform scaling by `s` every
//! vertex gets exactly `1 − s²`.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geom;
use crate::mesh::Mesh;

/// Area of the triangle `(a, b, c)` from the Gram determinant of its edge
/// vectors: `½ √(‖u‖²‖v‖² − (u·v)²)`. Valid in any ambient dimension;
/// degenerate (collinear) triangles give `0`.
pub fn triangle_area<const D: usize>(a: [f64; D], b: [f64; D], c: [f64; D]) -> f64 {
    let u = geom::sub(b, a);
    let v = geom::sub(c, a);
    let uu = geom::dot(u, u);
    let vv = geom::dot(v, v);
    let uv = geom::dot(u, v);
    // Rounding can push the determinant of a near-degenerate triangle
    // slightly negative; clamp so the square root stays real.
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

/// Areas of all faces, in face order.
pub fn triangle_areas<const D: usize>(mesh: &Mesh<D>) -> Vec<f64> {
    let verts = mesh.vertices();
    mesh.faces()
        .iter()
        .map(|&[i, j, k]| triangle_area(verts[i], verts[j], verts[k]))
        .collect()
}

/// Per-vertex local area strain of `deformed` relative to `reference`.
///
/// For vertex `i` with incident faces `j` of reference area `a_j` and
/// deformed area `a'_j`, the strain is the mean of `(a_j − a'_j)/a_j` over
/// the incident faces. Faces whose reference area is below
/// `1e-12 · diag²` (with `diag` the reference bounding-box diagonal) are
/// skipped; a vertex whose every incident face is skipped — including a
/// vertex with no incident faces at all — is a
/// [`DegenerateNeighborhood`](Error::DegenerateNeighborhood) error.
///
/// Both meshes must have the same vertex count and identical face lists.
pub fn local_area_strain<const D: usize>(
    reference: &Mesh<D>,
    deformed: &Mesh<D>,
) -> Result<Vec<f64>> {
    if reference.vertex_count() != deformed.vertex_count() {
        return Err(Error::ShapeMismatch {
            expected: reference.vertex_count(),
            found: deformed.vertex_count(),
        });
    }
    if reference.faces() != deformed.faces() {
        return Err(Error::LengthMismatch {
            expected: reference.face_count(),
            found: deformed.face_count(),
        });
    }

    let areas_ref = triangle_areas(reference);
    let areas_def = triangle_areas(deformed);
    let diag = reference.bbox_diagonal();
    let min_area = 1e-12 * diag * diag;

    let n = reference.vertex_count();
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for (f, face) in reference.faces().iter().enumerate() {
        if areas_ref[f] <= min_area {
            continue;
        }
        let strain = (areas_ref[f] - areas_def[f]) / areas_ref[f];
        for &v in face {
            sums[v] += strain;
            counts[v] += 1;
        }
    }

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if counts[i] == 0 {
            return Err(Error::DegenerateNeighborhood { vertex: i });
        }
        out.push(sums[i] / counts[i] as f64);
    }
    Ok(out)
}

/// Euclidean distance between two per-vertex strain fields:
/// `√Σᵢ (aᵢ − bᵢ)²`.
pub fn area_strain_error(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), found: b.len() });
    }
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    Ok(acc.sqrt())
}
