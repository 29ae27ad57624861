// Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use cadfit::program::{OpKind, Role};
use cadfit::sketch::Loop2D;
use cadfit::{Operation, Plane, Profile, Program, TriMesh, Vec2, Vec3};

pub fn xy_plane(z: f64) -> Plane {
    Plane::new(Vec3::new(0.0, 0.0, z), Vec3::z(), Vec3::x())
}

pub fn rect(lo: Vec2, hi: Vec2) -> Vec<Vec2> {
    vec![lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)]
}

pub fn rect_profile(plane: Plane, lo: Vec2, hi: Vec2) -> Profile {
    Profile::new(plane, Loop2D::new(rect(lo, hi)), vec![])
}

pub fn circle_points(c: Vec2, r: f64, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|i| {
            let t = i as f64 / n as f64 * TAU;
            c + Vec2::new(t.cos(), t.sin()) * r
        })
        .collect()
}

pub fn extrude_box(lo: Vec3, hi: Vec3, role: Role) -> Operation {
    Operation::extrude(
        rect_profile(xy_plane(lo.z), Vec2::new(lo.x, lo.y), Vec2::new(hi.x, hi.y)),
        hi.z - lo.z,
        role,
    )
}

/// Closed prism over a regular `n`-gon: radius `r`, axis z, from 0 to `h`.
pub fn cylinder_mesh(r: f64, h: f64, n: usize) -> TriMesh {
    let mut vertices = Vec::new();
    for z in [0.0, h] {
        for p in circle_points(Vec2::zeros(), r, n) {
            vertices.push(Vec3::new(p.x, p.y, z));
        }
    }
    let (bot, top) = (vertices.len(), vertices.len() + 1);
    vertices.push(Vec3::new(0.0, 0.0, 0.0));
    vertices.push(Vec3::new(0.0, 0.0, h));
    let mut faces = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        faces.push([i, j, n + j]);
        faces.push([i, n + j, n + i]);
        faces.push([bot, j, i]);
        faces.push([top, n + i, n + j]);
    }
    TriMesh::new(vertices, faces).expect("valid prism")
}

fn even_odd(rings: &[&[Vec2]], q: &Vec2) -> bool {
    let mut inside = false;
    for ring in rings {
        let n = ring.len();
        for i in 0..n {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            if (a.y > q.y) != (b.y > q.y) {
                let x = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if q.x < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

/// Membership of `p` in one operation, written from the operation
/// definitions without the library's prepared primitives.
pub fn op_contains(op: &Operation, p: &Vec3) -> bool {
    let prof = op.effective_profile().expect("valid profile");
    let pl = prof.plane;
    let v_axis = pl.normal.cross(&pl.u_axis);
    let d = p - pl.origin;
    let mut rings: Vec<&[Vec2]> = vec![&prof.outer.points];
    rings.extend(prof.holes.iter().map(|h| h.points.as_slice()));
    match op.kind {
        OpKind::Extrude { height } => {
            let w = d.dot(&pl.normal);
            w >= 0.0 && w <= height && even_odd(&rings, &Vec2::new(d.dot(&pl.u_axis), d.dot(&v_axis)))
        }
        OpKind::Revolve { axis_point, axis_dir } => {
            let dir = axis_dir.normalize();
            let origin = pl.origin + pl.u_axis * axis_point.x + v_axis * axis_point.y;
            let axis = pl.u_axis * dir.x + v_axis * dir.y;
            let r = p - origin;
            let t = r.dot(&axis);
            let rho = (r - axis * t).norm();
            // the profile lies to the left of the axis direction
            let q = axis_point + dir * t + Vec2::new(-dir.y, dir.x) * rho;
            even_odd(&rings, &q)
        }
    }
}

/// Set-theoretic fold of the program: unions add, cuts remove.
pub fn fold_oracle(program: &Program, p: &Vec3) -> bool {
    program.ops.iter().fold(false, |inside, op| match op.role {
        Role::Union => inside || op_contains(op, p),
        Role::Cut => inside && !op_contains(op, p),
    })
}

/// Parity of ray-triangle crossings along a fixed generic direction.
/// `None` when the ray passes too close to an edge to decide.
pub fn ray_parity(mesh: &TriMesh, p: &Vec3) -> Option<bool> {
    let dir = Vec3::new(0.3717, 0.5232, 0.7661).normalize();
    let mut hits = 0usize;
    for f in &mesh.faces {
        let [a, b, c] = [mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]];
        let e1 = b - a;
        let e2 = c - a;
        let h = dir.cross(&e2);
        let det = e1.dot(&h);
        if det.abs() < 1e-14 {
            continue;
        }
        let s = p - a;
        let u = s.dot(&h) / det;
        let q = s.cross(&e1);
        let v = dir.dot(&q) / det;
        let t = e2.dot(&q) / det;
        let eps = 1e-9;
        if u < -eps || v < -eps || u + v > 1.0 + eps || t < -eps {
            continue;
        }
        if u < eps || v < eps || u + v > 1.0 - eps || t < eps {
            return None;
        }
        hits += 1;
    }
    Some(hits % 2 == 1)
}
