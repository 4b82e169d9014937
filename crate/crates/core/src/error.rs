//! Error type shared by all modules of the crate.

use core::fmt;

/// Everything that can go wrong in the numerical layer.
///
/// IO and parsing failures live in the companion crate; this enum only covers
/// violations of numerical contracts.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter is outside its documented range (e.g. `sigma <= 0`).
    InvalidParameter { name: &'static str, value: f64 },
    /// An input container holds a NaN or infinite coordinate.
    NonFiniteInput { what: &'static str },
    /// Time integration produced a non-finite value or left the guard region
    /// around the initial configuration (blow-up).
    NonFiniteState { step: usize },
    /// Two containers that must be paired element-by-element disagree in length.
    ShapeMismatch { expected: usize, found: usize },
    /// Two per-vertex scalar fields disagree in length.
    LengthMismatch { expected: usize, found: usize },
    /// Every face incident to this vertex is degenerate in the reference mesh,
    /// so its local area strain is undefined.
    DegenerateNeighborhood { vertex: usize },
    /// A face references a vertex index outside the mesh.
    InvalidFaceIndex { face: usize, index: usize, vertex_count: usize },
    /// An input that must contain at least one element is empty.
    Empty { what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "parameter `{name}` out of range: {value}")
            }
            Error::NonFiniteInput { what } => {
                write!(f, "non-finite value in {what}")
            }
            Error::NonFiniteState { step } => {
                write!(f, "integration blew up at step {step}")
            }
            Error::ShapeMismatch { expected, found } => {
                write!(f, "paired containers disagree: expected {expected} elements, found {found}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "scalar fields disagree: expected {expected} values, found {found}")
            }
            Error::DegenerateNeighborhood { vertex } => {
                write!(f, "vertex {vertex} has no non-degenerate incident face in the reference mesh")
            }
            Error::InvalidFaceIndex { face, index, vertex_count } => {
                write!(f, "face {face} references vertex {index}, but the mesh has {vertex_count} vertices")
            }
            Error::Empty { what } => write!(f, "{what} must not be empty"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
