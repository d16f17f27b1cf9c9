//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The grid carries no sign-change tetrahedra; there is nothing to subdivide.
    #[error("no surface: every tetrahedron has uniform SDF signs")]
    NoSurface,

    /// A surface operation received a mesh with no (non-degenerate) triangles.
    #[error("empty surface: mesh has no area to sample")]
    EmptySurface,

    /// Signed distance queries need a closed surface.
    #[error("open surface: mesh is not watertight ({0})")]
    OpenSurface(String),

    #[error("optimization diverged: {0}")]
    Diverged(String),

    #[error("unsupported face: {0}")]
    UnsupportedFace(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
