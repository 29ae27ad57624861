//! Canonical JSON form of a program.
//!
//! Numbers are written in shortest round-trip form, so deserializing a
//! serialized program reproduces every float bit for bit.

use serde_json::{json, Map, Value};

use super::ir::{CornerFeature, FeatureKind, OpKind, Operation, Program, Role};
use crate::error::{Error, Result};
use crate::geometry::{Plane, Vec2, Vec3};
use crate::sketch::{Loop2D, Profile};

pub const FORMAT_VERSION: u64 = 1;

fn v3(v: &Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

fn v2(v: &Vec2) -> Value {
    json!([v.x, v.y])
}

fn ring(l: &Loop2D) -> Value {
    Value::Array(l.points.iter().map(v2).collect())
}

pub fn program_to_value(program: &Program) -> Value {
    let ops: Vec<Value> = program
        .ops
        .iter()
        .map(|op| {
            let mut m = Map::new();
            let kind = match op.kind {
                OpKind::Extrude { .. } => "extrude",
                OpKind::Revolve { .. } => "revolve",
            };
            m.insert("kind".into(), json!(kind));
            m.insert(
                "role".into(),
                json!(match op.role {
                    Role::Union => "union",
                    Role::Cut => "cut",
                }),
            );
            let pl = &op.profile.plane;
            m.insert(
                "plane".into(),
                json!({"origin": v3(&pl.origin), "normal": v3(&pl.normal), "u_axis": v3(&pl.u_axis)}),
            );
            m.insert(
                "profile".into(),
                json!({
                    "outer": ring(&op.profile.outer),
                    "holes": op.profile.holes.iter().map(ring).collect::<Vec<_>>(),
                }),
            );
            match op.kind {
                OpKind::Extrude { height } => {
                    m.insert("height".into(), json!(height));
                }
                OpKind::Revolve {
                    axis_point,
                    axis_dir,
                } => {
                    m.insert("axis".into(), json!({"point": v2(&axis_point), "dir": v2(&axis_dir)}));
                }
            }
            m.insert(
                "corner_features".into(),
                Value::Array(
                    op.corner_features
                        .iter()
                        .map(|f| {
                            json!({
                                "corner": f.corner,
                                "kind": match f.kind {
                                    FeatureKind::Fillet => "fillet",
                                    FeatureKind::Chamfer => "chamfer",
                                },
                                "param": f.param,
                            })
                        })
                        .collect(),
                ),
            );
            Value::Object(m)
        })
        .collect();
    json!({"version": FORMAT_VERSION, "ops": ops})
}

/// Compact canonical JSON.
pub fn serialize_program(program: &Program) -> String {
    program_to_value(program).to_string()
}

/// Parses and validates a program; errors name the offending path.
pub fn deserialize_program(text: &str) -> Result<Program> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| Error::invalid_program("$", format!("not valid JSON: {e}")))?;
    let program = program_from_value(&v)?;
    program.validate()?;
    Ok(program)
}

struct Cursor<'a> {
    v: &'a Value,
    path: String,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::invalid_program(self.path.clone(), msg))
    }

    fn field(&self, name: &str) -> Result<Cursor<'a>> {
        let path = format!("{}.{name}", self.path);
        match self.v.as_object() {
            None => self.err("expected an object"),
            Some(m) => match m.get(name) {
                Some(v) => Ok(Cursor { v, path }),
                None => Err(Error::invalid_program(path, "missing field")),
            },
        }
    }

    fn opt_field(&self, name: &str) -> Option<Cursor<'a>> {
        self.v.get(name).map(|v| Cursor {
            v,
            path: format!("{}.{name}", self.path),
        })
    }

    fn only_fields(&self, allowed: &[&str]) -> Result<()> {
        if let Some(m) = self.v.as_object() {
            for k in m.keys() {
                if !allowed.contains(&k.as_str()) {
                    return Err(Error::invalid_program(format!("{}.{k}", self.path), "unknown field"));
                }
            }
        }
        Ok(())
    }

    fn items(&self) -> Result<Vec<Cursor<'a>>> {
        match self.v.as_array() {
            None => self.err("expected an array"),
            Some(a) => Ok(a
                .iter()
                .enumerate()
                .map(|(i, v)| Cursor {
                    v,
                    path: format!("{}[{i}]", self.path),
                })
                .collect()),
        }
    }

    fn number(&self) -> Result<f64> {
        match self.v.as_f64() {
            Some(x) if x.is_finite() => Ok(x),
            _ => self.err("expected a finite number"),
        }
    }

    fn string(&self) -> Result<&'a str> {
        self.v.as_str().map_or_else(|| self.err("expected a string"), Ok)
    }

    fn vec<const N: usize>(&self) -> Result<[f64; N]> {
        let items = self.items()?;
        if items.len() != N {
            return self.err(format!("expected {N} numbers"));
        }
        let mut out = [0.0; N];
        for (o, c) in out.iter_mut().zip(&items) {
            *o = c.number()?;
        }
        Ok(out)
    }

    fn vec2(&self) -> Result<Vec2> {
        self.vec::<2>().map(Vec2::from)
    }

    fn vec3(&self) -> Result<Vec3> {
        self.vec::<3>().map(Vec3::from)
    }

    fn ring(&self) -> Result<Loop2D> {
        let pts = self.items()?.iter().map(|c| c.vec2()).collect::<Result<Vec<_>>>()?;
        if pts.len() < 3 {
            return self.err("a loop needs at least 3 points");
        }
        Ok(Loop2D::new(pts))
    }
}

pub fn program_from_value(v: &Value) -> Result<Program> {
    let root = Cursor { v, path: "$".into() };
    root.only_fields(&["version", "ops"])?;
    let version = root.field("version")?;
    if version.v.as_u64() != Some(FORMAT_VERSION) {
        return version.err(format!("unsupported version (expected {FORMAT_VERSION})"));
    }
    let mut ops = Vec::new();
    for (i, c) in root.field("ops")?.items()?.into_iter().enumerate() {
        let c = Cursor {
            v: c.v,
            path: format!("ops[{i}]"),
        };
        ops.push(parse_op(&c)?);
    }
    Ok(Program { ops })
}

fn parse_op(c: &Cursor) -> Result<Operation> {
    c.only_fields(&["kind", "role", "plane", "profile", "height", "axis", "corner_features"])?;
    let role = match c.field("role")?.string()? {
        "union" => Role::Union,
        "cut" => Role::Cut,
        _ => return c.field("role")?.err("expected \"union\" or \"cut\""),
    };
    let pc = c.field("plane")?;
    pc.only_fields(&["origin", "normal", "u_axis"])?;
    let plane = Plane {
        origin: pc.field("origin")?.vec3()?,
        normal: pc.field("normal")?.vec3()?,
        u_axis: pc.field("u_axis")?.vec3()?,
    };
    if !plane.is_valid(1e-9) {
        return pc.err("normal and u_axis must be orthonormal");
    }
    let prc = c.field("profile")?;
    prc.only_fields(&["outer", "holes"])?;
    let outer = prc.field("outer")?.ring()?;
    let holes = match prc.opt_field("holes") {
        Some(h) => h.items()?.iter().map(|r| r.ring()).collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let profile = Profile::new(plane, outer, holes);
    let kind_c = c.field("kind")?;
    let kind = match kind_c.string()? {
        "extrude" => {
            if c.opt_field("axis").is_some() {
                return c.field("axis")?.err("extrusions take a height, not an axis");
            }
            OpKind::Extrude {
                height: c.field("height")?.number()?,
            }
        }
        "revolve" => {
            if c.opt_field("height").is_some() {
                return c.field("height")?.err("revolutions take an axis, not a height");
            }
            let ac = c.field("axis")?;
            ac.only_fields(&["point", "dir"])?;
            OpKind::Revolve {
                axis_point: ac.field("point")?.vec2()?,
                axis_dir: ac.field("dir")?.vec2()?,
            }
        }
        _ => return kind_c.err("expected \"extrude\" or \"revolve\""),
    };
    let mut corner_features = Vec::new();
    if let Some(fc) = c.opt_field("corner_features") {
        for f in fc.items()? {
            f.only_fields(&["corner", "kind", "param"])?;
            let corner = f.field("corner")?;
            let corner = corner
                .v
                .as_u64()
                .map_or_else(|| corner.err("expected a non-negative integer"), |x| Ok(x as usize))?;
            let kind = match f.field("kind")?.string()? {
                "fillet" => FeatureKind::Fillet,
                "chamfer" => FeatureKind::Chamfer,
                _ => return f.field("kind")?.err("expected \"fillet\" or \"chamfer\""),
            };
            corner_features.push(CornerFeature {
                corner,
                kind,
                param: f.field("param")?.number()?,
            });
        }
    }
    Ok(Operation {
        kind,
        profile,
        role,
        corner_features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_program() -> Program {
        let plane = Plane::from_normal(Vec3::new(0.1, -0.2, 0.3), Vec3::new(1.0, 2.0, 2.0).normalize());
        let sq = |s: f64| {
            Loop2D::new(vec![
                Vec2::new(-s, -s),
                Vec2::new(s, -s),
                Vec2::new(s, s),
                Vec2::new(-s, s),
            ])
        };
        let mut a = Operation::extrude(Profile::new(plane, sq(0.7), vec![sq(0.1)]), 0.123456789, Role::Union);
        a.corner_features.push(CornerFeature {
            corner: 2,
            kind: FeatureKind::Fillet,
            param: 0.1 / 3.0,
        });
        let b = Operation::revolve(
            Profile::new(plane, Loop2D::new(vec![Vec2::new(0.2, 0.0), Vec2::new(0.5, 0.0), Vec2::new(0.4, 0.3)]), vec![]),
            Vec2::zeros(),
            Vec2::new(1.0, 0.0),
            Role::Cut,
        );
        Program::new(vec![a, b])
    }

    #[test]
    fn round_trip_exact() {
        let p = sample_program();
        p.validate().unwrap();
        let text = serialize_program(&p);
        assert_eq!(deserialize_program(&text).unwrap(), p);
    }

    #[test]
    fn empty_program() {
        assert_eq!(serialize_program(&Program::default()), r#"{"version":1,"ops":[]}"#);
    }

    #[test]
    fn negative_height_names_path() {
        let mut p = sample_program();
        p.ops[0].kind = OpKind::Extrude { height: 1.0 };
        let text = serialize_program(&p).replace("\"height\":1.0", "\"height\":-1.0");
        match deserialize_program(&text) {
            Err(Error::InvalidProgram { path, message }) => {
                assert_eq!(path, "ops[0].height");
                assert!(message.contains("> 0"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        assert!(deserialize_program("{").is_err());
        match deserialize_program(r#"{"version":1,"ops":[{"kind":"loft"}]}"#) {
            Err(Error::InvalidProgram { path, .. }) => assert!(path.starts_with("ops[0]")),
            other => panic!("{other:?}"),
        }
        match deserialize_program(r#"{"version":2,"ops":[]}"#) {
            Err(Error::InvalidProgram { path, .. }) => assert_eq!(path, "$.version"),
            other => panic!("{other:?}"),
        }
    }
}
