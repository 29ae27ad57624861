use std::fmt::Write;

use super::ir::{FeatureKind, OpKind, Program, Role};
use crate::geometry::{Vec2, Vec3};
use crate::sketch::{arc_sweep, fit_primitives, Loop2D, Primitive};

/// Relative tolerance for rendering loops as primitive chains.
const SCRIPT_FIT_TOLERANCE: f64 = 0.005;

fn f(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn p2(p: &Vec2) -> String {
    format!("({}, {})", f(p.x), f(p.y))
}

fn p3(p: &Vec3) -> String {
    format!("({}, {}, {})", f(p.x), f(p.y), f(p.z))
}

fn arc_point(center: &Vec2, radius: f64, angle: f64) -> Vec2 {
    center + Vec2::new(angle.cos(), angle.sin()) * radius
}

fn emit_loop(out: &mut String, lp: &Loop2D) {
    let chain = fit_primitives(lp, SCRIPT_FIT_TOLERANCE);
    if let [Primitive::Circle { center, radius }] = chain.elements.as_slice() {
        let _ = writeln!(out, "    .moveTo{}.circle({})", p2(center), f(*radius));
        return;
    }
    let Some(start) = chain.junctions.first() else {
        return;
    };
    let _ = writeln!(out, "    .moveTo{}", p2(start));
    for (k, e) in chain.elements.iter().enumerate() {
        let end = chain.junctions[(k + 1) % chain.junctions.len()];
        match e {
            Primitive::LineSegment { .. } => {
                let _ = writeln!(out, "    .lineTo{}", p2(&end));
            }
            Primitive::Arc {
                center,
                radius,
                start_angle,
                end_angle,
                ccw,
            } => {
                let sweep = arc_sweep(*start_angle, *end_angle, *ccw);
                let mid = arc_point(center, *radius, start_angle + 0.5 * sweep);
                let _ = writeln!(out, "    .threePointArc({}, {})", p2(&mid), p2(&end));
            }
            Primitive::Circle { center, radius } => {
                let _ = writeln!(out, "    .moveTo{}.circle({})", p2(center), f(*radius));
            }
            Primitive::Polyline { points } => {
                for q in points {
                    let _ = writeln!(out, "    .lineTo{}", p2(q));
                }
                let _ = writeln!(out, "    .lineTo{}", p2(&end));
            }
        }
    }
    let _ = writeln!(out, "    .close()");
}

/// Renders the program as a CadQuery-style script. The text is meant for
/// people and external tools; nothing here executes it.
pub fn emit_script(program: &Program) -> String {
    let mut out = String::new();
    out.push_str("import cadquery as cq\n\n");
    if program.ops.is_empty() {
        out.push_str("result = cq.Workplane(\"XY\")\n");
        return out;
    }
    for (i, op) in program.ops.iter().enumerate() {
        let pl = &op.profile.plane;
        let _ = writeln!(
            out,
            "plane_{i} = cq.Plane(origin={}, xDir={}, normal={})",
            p3(&pl.origin),
            p3(&pl.u_axis),
            p3(&pl.normal)
        );
        let _ = writeln!(out, "op_{i} = (");
        let _ = writeln!(out, "    cq.Workplane(plane_{i})");
        for ring in op.profile.rings() {
            emit_loop(&mut out, ring);
        }
        match op.kind {
            OpKind::Extrude { height } => {
                let _ = writeln!(out, "    .extrude({})", f(height));
                for feat in &op.corner_features {
                    let corner = op.profile.outer.points[feat.corner];
                    let probe = pl.to_world_lifted(&corner, height / 2.0);
                    let call = match feat.kind {
                        FeatureKind::Fillet => "fillet",
                        FeatureKind::Chamfer => "chamfer",
                    };
                    let _ = writeln!(
                        out,
                        "    .edges(cq.selectors.NearestToPointSelector({})).{call}({})",
                        p3(&probe),
                        f(feat.param)
                    );
                }
            }
            OpKind::Revolve {
                axis_point,
                axis_dir,
            } => {
                let end = axis_point + axis_dir;
                let _ = writeln!(
                    out,
                    "    .revolve(360, ({}, {}, 0), ({}, {}, 0))",
                    f(axis_point.x),
                    f(axis_point.y),
                    f(end.x),
                    f(end.y)
                );
            }
        }
        out.push_str(")\n");
        if i == 0 {
            out.push_str("result = op_0\n");
        } else {
            let verb = match op.role {
                Role::Union => "union",
                Role::Cut => "cut",
            };
            let _ = writeln!(out, "result = result.{verb}(op_{i})");
        }
        out.push('\n');
    }
    out
}
