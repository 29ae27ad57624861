use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed STL: {0}")]
    MalformedStl(String),

    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("bounding box has zero extent")]
    DegenerateBounds,

    #[error("mesh is not watertight: {0}")]
    NotWatertight(String),

    #[error("invalid program at {path}: {message}")]
    InvalidProgram { path: String, message: String },

    #[error("corner feature: {0}")]
    CornerFeature(String),

    #[error("solid is empty")]
    EmptySolid,

    #[error("voxel grids are not comparable")]
    IncomparableGrids,

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("point cloud is degenerate (all points coincide)")]
    DegenerateCloud,

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("target grid is empty")]
    EmptyTarget,

    #[error("residual region is empty")]
    EmptyResidual,

    #[error("zero-length extrusion interval")]
    ZeroInterval,

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid_program(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidProgram {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable identifier used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MalformedStl(_) => "malformed_stl",
            Error::EmptyMesh => "empty_mesh",
            Error::InvalidMesh(_) => "invalid_mesh",
            Error::DegenerateBounds => "degenerate_bounds",
            Error::NotWatertight(_) => "not_watertight",
            Error::InvalidProgram { .. } => "invalid_program",
            Error::CornerFeature(_) => "corner_feature",
            Error::EmptySolid => "empty_solid",
            Error::IncomparableGrids => "incomparable_grids",
            Error::EmptyCloud => "empty_cloud",
            Error::DegenerateCloud => "degenerate_cloud",
            Error::Domain(_) => "domain",
            Error::EmptyTarget => "empty_target",
            Error::EmptyResidual => "empty_residual",
            Error::ZeroInterval => "zero_interval",
            Error::Config(_) => "config",
        }
    }
}
