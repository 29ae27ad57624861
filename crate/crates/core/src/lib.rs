//! Reconstruction of parametric CAD construction programs from watertight
//! triangle meshes.
//!
//! A program is an ordered list of extrude/revolve operations combined with
//! union and cut, optionally carrying 2D fillet/chamfer corner features. The
//! pipeline slices the target mesh into sketch profiles, sweeps operation
//! parameters against a one-sided Chamfer objective, assembles a compact
//! program by IoU-guided greedy selection and backward pruning, and then
//! refines it by fitting the under- and over-reconstructed residual regions.
//!
//! Modules:
//! - [`geometry`]: meshes, STL I/O, planes, slicing, sketch-plane proposal.
//! - [`sketch`]: 2D loops, profiles, containment grouping, primitive fitting.
//! - [`program`]: the program IR, implicit solid membership, tessellation.
//! - [`metrics`]: voxel IoU, Chamfer distance, alignment, residuals.
//! - [`candidates`]: extrude height sweeps and revolve axis fitting.
//! - [`assembly`]: greedy selection, pruning, residual iterations, finishing.
//! - [`prior`]: profile scoring and the stochastic budgeted filter.
//! - [`cli`]: the `cadfit` command implementations.

pub mod assembly;
pub mod candidates;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod prior;
pub mod program;
pub mod sketch;

pub use assembly::{iterative_fit, reconstruct_once, FitConfig, FitReport};
pub use error::{Error, Result};
pub use geometry::{load_mesh, normalize_mesh, Aabb, Plane, TriMesh, Vec2, Vec3};
pub use metrics::{Target, VoxelGrid};
pub use program::{Operation, Profile, Program, Solid};
