//! Triangle meshes, STL I/O, planes, plane slicing and sketch-plane proposal.

mod inside;
mod mesh;
mod planes;
mod sample;
mod slice;
pub mod stl;

pub use inside::{point_in_mesh, MeshIndex};
pub use mesh::{normalize_mesh, TriMesh};
pub use planes::{propose_sketch_planes, PlaneSource, SketchPlane};
pub use sample::sample_surface;
pub use slice::slice_with_plane;
pub use stl::{load_mesh, write_stl};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    /// An inverted box that acts as the identity for [`Aabb::union`].
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn intersection(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.sup(&other.min),
            max: self.max.inf(&other.max),
        }
    }

    pub fn inflate(&self, pad: f64) -> Aabb {
        Aabb {
            min: self.min - Vec3::repeat(pad),
            max: self.max + Vec3::repeat(pad),
        }
    }

    pub fn size(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        self.size().norm()
    }

    pub fn longest_side(&self) -> f64 {
        self.size().max()
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|i| other.min[i] >= self.min[i] && other.max[i] <= self.max[i])
    }
}

/// Oriented plane with an in-plane frame. `v_axis = normal × u_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub origin: Vec3,
    pub normal: Vec3,
    pub u_axis: Vec3,
}

impl Plane {
    /// Builds a plane from an origin and a (not necessarily unit) normal,
    /// choosing a deterministic `u_axis`.
    pub fn from_normal(origin: Vec3, normal: Vec3) -> Plane {
        let n = normal.normalize();
        // world axis least aligned with the normal
        let mut best = 0;
        for i in 1..3 {
            if n[i].abs() < n[best].abs() {
                best = i;
            }
        }
        let mut a = Vec3::zeros();
        a[best] = 1.0;
        let u = (a - n * n.dot(&a)).normalize();
        Plane {
            origin,
            normal: n,
            u_axis: u,
        }
    }

    pub fn new(origin: Vec3, normal: Vec3, u_axis: Vec3) -> Plane {
        Plane {
            origin,
            normal,
            u_axis,
        }
    }

    pub fn v_axis(&self) -> Vec3 {
        self.normal.cross(&self.u_axis)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        (self.normal.norm() - 1.0).abs() <= tol
            && (self.u_axis.norm() - 1.0).abs() <= tol
            && self.normal.dot(&self.u_axis).abs() <= tol
            && self.origin.iter().all(|c| c.is_finite())
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(&(p - self.origin))
    }

    /// Plane coordinates `(u, v)` of the orthogonal projection of `p`.
    pub fn to_local(&self, p: &Vec3) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(d.dot(&self.u_axis), d.dot(&self.v_axis()))
    }

    pub fn to_world(&self, uv: &Vec2) -> Vec3 {
        self.origin + self.u_axis * uv.x + self.v_axis() * uv.y
    }

    /// World point at plane coordinates `uv` lifted by `w` along the normal.
    pub fn to_world_lifted(&self, uv: &Vec2, w: f64) -> Vec3 {
        self.to_world(uv) + self.normal * w
    }

    pub fn offset(&self, distance: f64) -> Plane {
        Plane {
            origin: self.origin + self.normal * distance,
            ..*self
        }
    }
}

/// Closed 3D polyline; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop3D {
    pub points: Vec<Vec3>,
}

impl Loop3D {
    /// Drops consecutive (and wrap-around) duplicates closer than 1e-9;
    /// returns `None` when fewer than three points remain.
    pub fn from_points(points: Vec<Vec3>) -> Option<Loop3D> {
        let mut out: Vec<Vec3> = Vec::with_capacity(points.len());
        for p in points {
            if out.last().is_none_or(|q: &Vec3| (p - q).norm() > 1e-9) {
                out.push(p);
            }
        }
        while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= 1e-9 {
            out.pop();
        }
        (out.len() >= 3).then_some(Loop3D { points: out })
    }

    pub fn length(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| (self.points[(i + 1) % n] - self.points[i]).norm())
            .sum()
    }
}
