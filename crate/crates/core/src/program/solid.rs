use super::ir::{OpKind, Operation, Program, Role};
use crate::error::Result;
use crate::geometry::{Aabb, Plane, Vec2, Vec3};
use crate::metrics::{voxelize_region, GridSpec, VoxelGrid};
use crate::sketch::{PolygonIndex, Profile};

/// One operation's primitive, prepared for fast membership queries.
#[derive(Debug, Clone)]
pub struct Primitive {
    plane: Plane,
    shape: Shape,
    index: PolygonIndex,
    pub role: Role,
    pub bounds: Aabb,
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Extrude {
        height: f64,
    },
    Revolve {
        axis_origin: Vec3,
        axis_dir: Vec3,
        point: Vec2,
        dir: Vec2,
    },
}

impl Primitive {
    pub fn new(op: &Operation) -> Result<Self> {
        let profile = op.effective_profile()?;
        let plane = profile.plane;
        let index = profile.index();
        let (shape, bounds) = match op.kind {
            OpKind::Extrude { height } => {
                let mut b = Aabb::empty();
                for p in &profile.outer.points {
                    b.grow(&plane.to_world(p));
                    b.grow(&plane.to_world_lifted(p, height));
                }
                (Shape::Extrude { height }, b)
            }
            OpKind::Revolve {
                axis_point,
                axis_dir,
            } => {
                let axis_origin = plane.to_world(&axis_point);
                let axis_world = plane.u_axis * axis_dir.x + plane.v_axis() * axis_dir.y;
                (
                    Shape::Revolve {
                        axis_origin,
                        axis_dir: axis_world,
                        point: axis_point,
                        dir: axis_dir,
                    },
                    revolve_bounds(&profile, axis_point, axis_dir, axis_origin, axis_world),
                )
            }
        };
        Ok(Primitive {
            plane,
            shape,
            index,
            role: op.role,
            bounds,
        })
    }

    /// Occupancy of this primitive alone for cells whose centers lie in
    /// `region` (all other cells empty). Bit-identical to evaluating
    /// [`Primitive::contains`] at every such cell center.
    pub fn voxelize_region(&self, spec: &GridSpec, region: &Aabb) -> VoxelGrid {
        let region = region.intersection(&self.bounds);
        if region.is_empty() {
            return VoxelGrid::empty(*spec);
        }
        if let (Shape::Extrude { height }, Some((a, b, c))) = (self.shape, self.axis_frame()) {
            let ranges = spec.center_range(&region);
            let mut g = VoxelGrid::empty(*spec);
            let mut idx3 = [0usize; 3];
            for ib in ranges[b].0..ranges[b].1 {
                for ic in ranges[c].0..ranges[c].1 {
                    idx3[b] = ib;
                    idx3[c] = ic;
                    idx3[a] = ranges[a].0;
                    let p0 = spec.cell_center(idx3[0], idx3[1], idx3[2]);
                    if !self.index.contains(&self.plane.to_local(&p0)) {
                        continue;
                    }
                    for ia in ranges[a].0..ranges[a].1 {
                        idx3[a] = ia;
                        let p = spec.cell_center(idx3[0], idx3[1], idx3[2]);
                        let w = (p - self.plane.origin).dot(&self.plane.normal);
                        if region.contains(&p) && self.bounds.contains(&p) && (0.0..=height).contains(&w) {
                            g.set(spec.index(idx3[0], idx3[1], idx3[2]), true);
                        }
                    }
                }
            }
            return g;
        }
        voxelize_region(|p| self.contains(p), spec, &region)
    }

    pub fn voxelize(&self, spec: &GridSpec) -> VoxelGrid {
        self.voxelize_region(spec, &spec.bounds())
    }

    /// World axes `(normal, u, v)` when the plane frame is axis aligned.
    fn axis_frame(&self) -> Option<(usize, usize, usize)> {
        let axis_of = |v: &Vec3| {
            let k = v.iamax();
            (v[k].abs() == 1.0 && (0..3).all(|i| i == k || v[i] == 0.0)).then_some(k)
        };
        let a = axis_of(&self.plane.normal)?;
        let b = axis_of(&self.plane.u_axis)?;
        let c = axis_of(&self.plane.v_axis())?;
        Some((a, b, c))
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        if !self.bounds.contains(p) {
            return false;
        }
        match self.shape {
            Shape::Extrude { height } => {
                let w = (p - self.plane.origin).dot(&self.plane.normal);
                (0.0..=height).contains(&w) && self.index.contains(&self.plane.to_local(p))
            }
            Shape::Revolve {
                axis_origin,
                axis_dir,
                point,
                dir,
            } => {
                let d = p - axis_origin;
                let along = d.dot(&axis_dir);
                let radial = (d - axis_dir * along).norm();
                let q = point + dir * along + Vec2::new(-dir.y, dir.x) * radial;
                self.index.contains(&q)
            }
        }
    }
}

fn revolve_bounds(profile: &Profile, point: Vec2, dir: Vec2, origin: Vec3, axis: Vec3) -> Aabb {
    let (mut t0, mut t1, mut r) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for q in &profile.outer.points {
        let d = q - point;
        let along = d.dot(&dir);
        t0 = t0.min(along);
        t1 = t1.max(along);
        r = r.max((dir.x * d.y - dir.y * d.x).abs());
    }
    let ext = Vec3::from_fn(|i, _| r * (1.0 - axis[i] * axis[i]).max(0.0).sqrt());
    let a = origin + axis * t0;
    let b = origin + axis * t1;
    Aabb::new(a.inf(&b) - ext, a.sup(&b) + ext).inflate(1e-9)
}

/// An executed program: prepared primitives folded with union and cut.
#[derive(Debug, Clone)]
pub struct Solid {
    pub program: Program,
    prims: Vec<Primitive>,
    bounds: Aabb,
}

impl Solid {
    pub fn new(program: Program) -> Result<Self> {
        let prims = program
            .ops
            .iter()
            .map(Primitive::new)
            .collect::<Result<Vec<_>>>()?;
        let bounds = prims
            .iter()
            .filter(|p| p.role == Role::Union)
            .fold(Aabb::empty(), |b, p| b.union(&p.bounds));
        Ok(Solid {
            program,
            prims,
            bounds,
        })
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.prims
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        if !self.bounds.contains(p) {
            return false;
        }
        let mut inside = false;
        for prim in &self.prims {
            match prim.role {
                Role::Union => inside = inside || prim.contains(p),
                Role::Cut => inside = inside && !prim.contains(p),
            }
        }
        inside
    }

    /// Occupancy grid, composed from per-primitive grids with the same
    /// fold as [`Solid::contains`].
    pub fn voxelize(&self, spec: &GridSpec) -> VoxelGrid {
        let mut g = VoxelGrid::empty(*spec);
        for prim in &self.prims {
            let m = prim.voxelize(spec);
            match prim.role {
                Role::Union => g.or_assign(&m),
                Role::Cut => g.and_not_assign(&m),
            }
        }
        g
    }
}

/// Membership of `p` in the solid.
pub fn point_in_solid(solid: &Solid, p: &Vec3) -> bool {
    solid.contains(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::Loop2D;

    fn rect(plane: Plane, lo: Vec2, hi: Vec2) -> Profile {
        Profile::new(
            plane,
            Loop2D::new(vec![lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)]),
            vec![],
        )
    }

    fn xy() -> Plane {
        Plane::new(Vec3::zeros(), Vec3::z(), Vec3::x())
    }

    #[test]
    fn prism_and_cut() {
        let a = Operation::extrude(rect(xy(), Vec2::new(-0.5, -0.5), Vec2::new(0.5, 0.5)), 1.0, Role::Union);
        let s = Solid::new(Program::new(vec![a.clone()])).unwrap();
        assert!(s.contains(&Vec3::new(0.0, 0.0, 0.5)));
        let cut_plane = Plane::new(Vec3::new(0.0, 0.0, -1.0), Vec3::z(), Vec3::x());
        let b = Operation::extrude(rect(cut_plane, Vec2::new(-0.25, -0.25), Vec2::new(0.25, 0.25)), 3.0, Role::Cut);
        let s = Solid::new(Program::new(vec![a, b])).unwrap();
        assert!(!s.contains(&Vec3::new(0.0, 0.0, 0.5)));
        assert!(s.contains(&Vec3::new(0.4, 0.0, 0.5)));
    }

    #[test]
    fn annulus_revolve() {
        // profile u ∈ [0.2, 0.4], v ∈ [0, 1], revolved about the v axis
        let prof = rect(xy(), Vec2::new(0.2, 0.0), Vec2::new(0.4, 1.0));
        // left of a -v direction axis is +u
        let op = Operation::revolve(prof, Vec2::zeros(), Vec2::new(0.0, -1.0), Role::Union);
        op.validate("op").unwrap();
        let s = Solid::new(Program::new(vec![op])).unwrap();
        for a in [0.0f64, 1.0, 2.5, 4.0] {
            let r = |rad: f64| Vec3::new(rad * a.cos(), 0.5, rad * a.sin());
            assert!(s.contains(&r(0.3)));
            assert!(!s.contains(&r(0.1)));
            assert!(!s.contains(&r(0.5)));
        }
    }

    #[test]
    fn fast_voxelization_matches_membership() {
        let spec = GridSpec::covering(&Aabb::new(Vec3::repeat(-1.0), Vec3::repeat(1.0)), 40);
        let planes = [
            Plane::new(Vec3::new(0.1, -0.2, -0.6), Vec3::z(), Vec3::x()),
            Plane::new(Vec3::new(0.3, 0.0, 0.0), -Vec3::x(), Vec3::y()),
            Plane::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0).normalize(), Vec3::z()),
        ];
        for pl in planes {
            let prof = Profile::new(
                pl,
                Loop2D::new(vec![Vec2::new(-0.4, -0.3), Vec2::new(0.5, -0.2), Vec2::new(0.1, 0.6)]),
                vec![],
            );
            let op = Operation::extrude(prof, 0.9, Role::Union);
            let prim = Primitive::new(&op).unwrap();
            let slow = voxelize_region(|p| prim.contains(p), &spec, &spec.bounds());
            assert_eq!(prim.voxelize(&spec), slow);
            let s = Solid::new(Program::new(vec![op])).unwrap();
            assert_eq!(s.voxelize(&spec), crate::metrics::voxelize(|p| s.contains(p), &spec));
        }
    }

    #[test]
    fn cut_from_nothing_is_noop() {
        let prof = rect(xy(), Vec2::new(-0.5, -0.5), Vec2::new(0.5, 0.5));
        let s = Solid::new(Program::new(vec![Operation::extrude(prof, 1.0, Role::Cut)])).unwrap();
        assert!(!s.contains(&Vec3::new(0.0, 0.0, 0.5)));
        assert!(s.bounds().is_empty());
    }
}
