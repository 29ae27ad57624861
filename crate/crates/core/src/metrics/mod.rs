//! Volumetric IoU, Chamfer distance, similarity alignment, residual regions
//! and fitting targets.

mod align;
mod chamfer;
mod kdtree;
mod residual;
mod target;
mod voxel;

pub use align::{align_similarity, golden_section, golden_section_max, Alignment, Similarity};
pub use chamfer::{chamfer_distance, mean_distance_to, nearest_sq_distances, one_sided_to, ChamferMode};
pub use kdtree::KdTree;
pub use residual::{compute_residuals, error_decomposition, ErrorDecomposition, ResidualCounts, Residuals};
pub use target::{contour_plane, residual_target, GridTarget, MeshTarget, Target};
pub use voxel::{iou_exact, volumetric_iou, voxelize, voxelize_region, GridSpec, Iou, VoxelGrid};
