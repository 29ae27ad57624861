//! The construction-program representation and its execution: implicit
//! membership, tessellation, candidate surface sampling, 2D corner features
//! and the JSON and script encodings.

mod corner;
mod ir;
mod json;
mod sample;
mod script;
mod solid;
mod tessellate;

pub use corner::{apply_corner_feature, corner_limit, FILLET_POINTS};
pub use ir::{
    profile_left_of_axis, CornerFeature, FeatureKind, OpKind, Operation, Program, Role, HALF_PLANE_TOL,
};
pub use json::{deserialize_program, program_from_value, program_to_value, serialize_program, FORMAT_VERSION};
pub use sample::{sample_candidate_surface, sample_region, Boundary, SurfaceSample};
pub use script::emit_script;
pub use solid::{point_in_solid, Primitive, Solid};
pub use tessellate::{isosurface, tessellate_solid};

pub use crate::sketch::Profile;
