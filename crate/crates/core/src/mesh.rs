//! Triangulated surface meshes (or bare landmark clouds when `faces` is empty).
//!
//! Meshes used throughout the crate are *corresponded*: vertex `i` of one mesh
//! matches vertex `i` of another, and comparisons, residuals, and strain maps
//! all pair vertices by index.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<const D: usize> {
    vertices: Vec<[f64; D]>,
    faces: Vec<[usize; 3]>,
}

impl<const D: usize> Mesh<D> {
    /// Requires at least one vertex, finite coordinates, and in-range face
    /// indices. `faces` may be empty (landmark cloud).
    pub fn new(vertices: Vec<[f64; D]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Empty { what: "mesh vertex list" });
        }
        if !geom::all_finite(&vertices) {
            return Err(Error::NonFiniteInput { what: "mesh vertices" });
        }
        for (f, face) in faces.iter().enumerate() {
            for &ix in face {
                if ix >= vertices.len() {
                    return Err(Error::InvalidFaceIndex {
                        face: f,
                        index: ix,
                        vertex_count: vertices.len(),
                    });
                }
            }
        }
        Ok(Mesh { vertices, faces })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[[f64; D]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Same connectivity, new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<[f64; D]>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::ShapeMismatch {
                expected: self.vertices.len(),
                found: vertices.len(),
            });
        }
        if !geom::all_finite(&vertices) {
            return Err(Error::NonFiniteInput { what: "mesh vertices" });
        }
        Ok(Mesh { vertices, faces: self.faces.clone() })
    }

    /// Axis-aligned bounding box as `(lower, upper)` corners.
    pub fn bounding_box(&self) -> ([f64; D], [f64; D]) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices[1..] {
            for a in 0..D {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        (lo, hi)
    }

    /// Length of the bounding-box diagonal; the natural size of the shape.
    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        geom::norm(geom::sub(hi, lo))
    }

    pub fn centroid(&self) -> [f64; D] {
        let mut c = [0.0; D];
        for v in &self.vertices {
            for a in 0..D {
                c[a] += v[a];
            }
        }
        let n = self.vertices.len() as f64;
        for a in 0..D {
            c[a] /= n;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn bounding_box_and_diagonal() {
        let m = Mesh::new(vec![[0.0, 0.0], [3.0, 4.0], [1.0, -1.0]], vec![]).unwrap();
        let (lo, hi) = m.bounding_box();
        assert_eq!(lo, [0.0, -1.0]);
        assert_eq!(hi, [3.0, 4.0]);
        assert!((m.bbox_diagonal() - (9.0f64 + 25.0).sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn face_indices_are_validated() {
        let bad = Mesh::new(vec![[0.0; 3], [1.0; 3], [2.0; 3]], vec![[0, 1, 3]]);
        assert_eq!(bad, Err(Error::InvalidFaceIndex { face: 0, index: 3, vertex_count: 3 }));
    }

    #[test]
    fn with_vertices_keeps_faces_and_checks_length() {
        let m = Mesh::new(vec![[0.0; 3], [1.0; 3], [2.0; 3]], vec![[0, 1, 2]]).unwrap();
        let moved = m.with_vertices(vec![[1.0; 3], [2.0; 3], [3.0; 3]]).unwrap();
        assert_eq!(moved.faces(), m.faces());
        assert!(m.with_vertices(vec![[0.0; 3]]).is_err());
    }

    #[test]
    fn centroid_averages_vertices() {
        let m = Mesh::new(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]], vec![]).unwrap();
        assert_eq!(m.centroid(), [1.0, 1.0]);
    }
}
