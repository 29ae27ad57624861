//! Segmentation of a closed loop into lines, arcs and circles.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};

use super::polygon::{turn_angle, Loop2D};
use crate::geometry::Vec2;

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    LineSegment {
        p0: Vec2,
        p1: Vec2,
    },
    Arc {
        center: Vec2,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        ccw: bool,
    },
    Circle {
        center: Vec2,
        radius: f64,
    },
    Polyline {
        points: Vec<Vec2>,
    },
}

/// Closed chain of primitives. `junctions[k]` is where element `k` starts
/// (and element `k - 1` ends); a lone circle has no junctions.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveChain {
    pub elements: Vec<Primitive>,
    pub junctions: Vec<Vec2>,
}

/// Points per full turn used when polygonizing arcs and circles.
const ARC_SEGMENTS_PER_TURN: f64 = 96.0;

impl PrimitiveChain {
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0);
        for e in &self.elements {
            match e {
                Primitive::LineSegment { .. } => c.0 += 1,
                Primitive::Arc { .. } => c.1 += 1,
                Primitive::Circle { .. } => c.2 += 1,
                Primitive::Polyline { .. } => c.3 += 1,
            }
        }
        c
    }

    /// Closed polygon tracing the chain.
    pub fn to_polygon(&self) -> Vec<Vec2> {
        if let [Primitive::Circle { center, radius }] = self.elements.as_slice() {
            let n = ARC_SEGMENTS_PER_TURN as usize;
            return (0..n)
                .map(|i| {
                    let t = i as f64 / n as f64 * TAU;
                    center + Vec2::new(t.cos(), t.sin()) * *radius
                })
                .collect();
        }
        let n = self.elements.len();
        let mut out = Vec::new();
        for (k, e) in self.elements.iter().enumerate() {
            let start = self.junctions[k];
            let end = self.junctions[(k + 1) % n];
            out.push(start);
            match e {
                Primitive::LineSegment { .. } | Primitive::Circle { .. } => {}
                Primitive::Arc {
                    center, radius, ccw, ..
                } => {
                    let a0 = (start - center).y.atan2((start - center).x);
                    let a1 = (end - center).y.atan2((end - center).x);
                    let sweep = arc_sweep(a0, a1, *ccw);
                    let steps = ((sweep.abs() / TAU) * ARC_SEGMENTS_PER_TURN).ceil().max(2.0) as usize;
                    for s in 1..steps {
                        let t = a0 + sweep * s as f64 / steps as f64;
                        out.push(center + Vec2::new(t.cos(), t.sin()) * *radius);
                    }
                }
                Primitive::Polyline { points } => {
                    out.extend(points.iter().copied());
                }
            }
        }
        out
    }

    /// Densely samples the chain (including its junctions).
    pub fn sample(&self, per_element: usize) -> Vec<Vec2> {
        let poly = self.to_polygon();
        let m = poly.len();
        let mut out = Vec::with_capacity(m * per_element);
        for i in 0..m {
            let a = poly[i];
            let b = poly[(i + 1) % m];
            for s in 0..per_element {
                out.push(a + (b - a) * (s as f64 / per_element as f64));
            }
        }
        out
    }
}

/// Signed sweep from `a0` to `a1` going counter-clockwise (positive) or
/// clockwise (negative).
pub fn arc_sweep(a0: f64, a1: f64, ccw: bool) -> f64 {
    let mut d = a1 - a0;
    if ccw {
        while d <= 0.0 {
            d += TAU;
        }
        while d > TAU {
            d -= TAU;
        }
    } else {
        while d >= 0.0 {
            d -= TAU;
        }
        while d < -TAU {
            d += TAU;
        }
    }
    d
}

#[derive(Debug, Clone, Copy)]
struct LineFit {
    point: Vec2,
    dir: Vec2,
    max_dev: f64,
    sse: f64,
}

fn fit_line(pts: &[Vec2]) -> Option<LineFit> {
    let n = pts.len() as f64;
    let mean = pts.iter().sum::<Vec2>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // principal direction of the 2x2 covariance
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let dir = Vec2::new(theta.cos(), theta.sin());
    let normal = Vec2::new(-dir.y, dir.x);
    let (mut max_dev, mut sse): (f64, f64) = (0.0, 0.0);
    for p in pts {
        let e = (p - mean).dot(&normal);
        max_dev = max_dev.max(e.abs());
        sse += e * e;
    }
    max_dev.is_finite().then_some(LineFit {
        point: mean,
        dir,
        max_dev,
        sse,
    })
}

#[derive(Debug, Clone, Copy)]
struct CircleFit {
    center: Vec2,
    radius: f64,
    max_dev: f64,
    rms: f64,
    sse: f64,
}

/// Kåsa algebraic circle fit on mean-centered coordinates.
fn fit_circle(pts: &[Vec2]) -> Option<CircleFit> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mean = pts.iter().sum::<Vec2>() / n;
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for p in pts {
        let d = p - mean;
        let row = Vector3::new(d.x, d.y, 1.0);
        let rhs = -(d.x * d.x + d.y * d.y);
        ata += row * row.transpose();
        atb += row * rhs;
    }
    let sol = ata.lu().solve(&atb)?;
    let c = Vec2::new(-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = c.norm_squared() - sol[2];
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    let radius = r2.sqrt();
    let center = c + mean;
    let mut max_dev: f64 = 0.0;
    let mut ss = 0.0;
    for p in pts {
        let e = ((p - center).norm() - radius).abs();
        max_dev = max_dev.max(e);
        ss += e * e;
    }
    Some(CircleFit {
        center,
        radius,
        max_dev,
        rms: (ss / n).sqrt(),
        sse: ss,
    })
}

/// Largest angle between consecutive points that still counts as an arc
/// (sparse polygon vertices lie on their circumcircle).
const MAX_ARC_STEP_DEG: f64 = 25.0;

/// True when the points advance around `center` in one direction, in steps
/// of at most `MAX_ARC_STEP_DEG`, and cover less than a full turn.
fn winds_monotonically(pts: &[Vec2], center: &Vec2) -> bool {
    let mut total = 0.0;
    let mut sign = 0.0;
    for w in pts.windows(2) {
        let a = w[0] - center;
        let b = w[1] - center;
        let d = a.perp(&b).atan2(a.dot(&b));
        if d == 0.0 {
            continue;
        }
        if d.abs() > MAX_ARC_STEP_DEG.to_radians() {
            return false;
        }
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign {
            return false;
        }
        total += d;
    }
    total.abs() < TAU - 1e-6
}

fn window_points(pts: &[Vec2], i: usize, j: usize) -> Vec<Vec2> {
    let n = pts.len();
    (i..=j).map(|k| pts[k % n]).collect()
}

/// Greedy segmentation of `lp` into primitives whose maximum deviation from
/// the loop points stays within `tol × diameter`.
///
/// A whole-loop circle is tried first. Otherwise, starting at the sharpest
/// vertex, both a line and an arc are grown as far as they fit and the
/// longer one is kept (ties go to the line). Neighbouring pieces share a
/// vertex. Adjacent pieces of one kind are merged when they refit as one,
/// and line-line junctions move to the line intersection when that stays
/// within tolerance of the loop.
pub fn fit_primitives(lp: &Loop2D, tol: f64) -> PrimitiveChain {
    let diam = lp.diameter();
    let thr = tol * diam;
    let max_radius = diam;
    let n = lp.len();

    if let Some(c) = fit_circle(&lp.points) {
        if c.max_dev <= thr && winds_monotonically(&lp.points, &c.center) && n >= 8 {
            // a closed winding: require coverage close to a full turn
            return PrimitiveChain {
                elements: vec![Primitive::Circle {
                    center: c.center,
                    radius: c.radius,
                }],
                junctions: Vec::new(),
            };
        }
    }

    let start = (0..n)
        .max_by(|&a, &b| {
            turn_angle(&lp.points, a)
                .total_cmp(&turn_angle(&lp.points, b))
                .then(b.cmp(&a))
        })
        .unwrap_or(0);
    let mut pts = lp.points.clone();
    pts.rotate_left(start);

    // piece `k` covers indices first..=first+len (mod n) and shares its end
    // vertex with piece `k + 1`
    struct Piece {
        first: usize,
        len: usize,
        kind: PieceKind,
    }
    enum PieceKind {
        Line(LineFit),
        Arc(CircleFit),
    }

    let line_ok = |i: usize, j: usize| fit_line(&window_points(&pts, i, j)).filter(|l| l.max_dev <= thr);
    let arc_ok = |i: usize, j: usize| {
        if j < i + 3 {
            return None;
        }
        let w = window_points(&pts, i, j);
        fit_circle(&w).filter(|c| {
            c.max_dev <= thr && c.rms <= thr && c.radius <= max_radius && winds_monotonically(&w, &c.center)
        })
    };
    let refit = |kind: &PieceKind, first: usize, len: usize| -> Option<PieceKind> {
        match kind {
            PieceKind::Line(_) => line_ok(first, first + len).map(PieceKind::Line),
            PieceKind::Arc(_) => arc_ok(first, first + len).map(PieceKind::Arc),
        }
    };
    let sse = |k: &PieceKind| match k {
        PieceKind::Line(l) => l.sse,
        PieceKind::Arc(c) => c.sse,
    };
    let min_len = |k: &PieceKind| match k {
        PieceKind::Line(_) => 1,
        PieceKind::Arc(_) => 3,
    };
    let same_kind = |a: &PieceKind, b: &PieceKind| {
        matches!(
            (a, b),
            (PieceKind::Line(_), PieceKind::Line(_)) | (PieceKind::Arc(_), PieceKind::Arc(_))
        )
    };

    let mut pieces: Vec<Piece> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut jl = i + 1;
        let mut line = line_ok(i, jl).expect("two points always fit a line");
        while jl < n {
            match line_ok(i, jl + 1) {
                Some(l) => {
                    line = l;
                    jl += 1;
                }
                None => break,
            }
        }
        let mut ja = i + 3;
        let mut arc = if ja <= n { arc_ok(i, ja) } else { None };
        if arc.is_some() {
            while ja < n {
                match arc_ok(i, ja + 1) {
                    Some(c) => {
                        arc = Some(c);
                        ja += 1;
                    }
                    None => break,
                }
            }
        }
        let piece = match arc {
            Some(c) if ja > jl => Piece {
                first: i,
                len: ja - i,
                kind: PieceKind::Arc(c),
            },
            _ => Piece {
                first: i,
                len: jl - i,
                kind: PieceKind::Line(line),
            },
        };
        i += piece.len;
        pieces.push(piece);
    }

    // merge adjacent pieces of the same kind that still fit as one
    let merge = |pieces: Vec<Piece>| -> Vec<Piece> {
        let mut merged: Vec<Piece> = Vec::new();
        for p in pieces {
            if let Some(prev) = merged.last_mut() {
                if same_kind(&prev.kind, &p.kind) {
                    if let Some(k) = refit(&p.kind, prev.first, prev.len + p.len) {
                        prev.len += p.len;
                        prev.kind = k;
                        continue;
                    }
                }
            }
            merged.push(p);
        }
        if merged.len() > 2 {
            let last = merged.len() - 1;
            if same_kind(&merged[last].kind, &merged[0].kind) {
                let (first, len) = (merged[last].first, merged[last].len + merged[0].len);
                if let Some(k) = refit(&merged[0].kind, first, len) {
                    merged.pop();
                    merged[0] = Piece { first, len, kind: k };
                }
            }
        }
        merged
    };

    // move each shared vertex to where the two neighbours fit best in the
    // least-squares sense (arc radii otherwise absorb the ends of lines)
    let refine = |pieces: &mut Vec<Piece>| {
        let m = pieces.len();
        if m < 2 {
            return;
        }
        for k in 0..m {
            let next = (k + 1) % m;
            let first = pieces[k].first;
            let total = pieces[k].len + pieces[next].len;
            let cur = pieces[k].len;
            let mut best: Option<(f64, usize, PieceKind, PieceKind)> = None;
            for la in min_len(&pieces[k].kind)..=total.saturating_sub(min_len(&pieces[next].kind)) {
                let (Some(ka), Some(kb)) = (
                    refit(&pieces[k].kind, first, la),
                    refit(&pieces[next].kind, first + la, total - la),
                ) else {
                    continue;
                };
                let cost = sse(&ka) + sse(&kb);
                let better = match &best {
                    None => true,
                    Some(x) => cost < x.0 || (cost == x.0 && la == cur),
                };
                if better {
                    best = Some((cost, la, ka, kb));
                }
            }
            if let Some((_, la, ka, kb)) = best {
                pieces[k].len = la;
                pieces[k].kind = ka;
                pieces[next].first = (first + la) % n;
                pieces[next].len = total - la;
                pieces[next].kind = kb;
            }
        }
    };

    let mut merged = merge(pieces);
    for _ in 0..2 {
        refine(&mut merged);
        merged = merge(merged);
    }

    let m = merged.len();
    // junction between piece k-1 and piece k
    let mut junctions = Vec::with_capacity(m);
    for k in 0..m {
        let prev = &merged[(k + m - 1) % m];
        let cur = &merged[k];
        let shared = pts[cur.first % n];
        let j = match (&prev.kind, &cur.kind) {
            (PieceKind::Line(la), PieceKind::Line(lb)) => intersect(la, lb)
                .filter(|x| lp.distance_to_boundary(x) <= thr)
                .unwrap_or(shared),
            _ => shared,
        };
        junctions.push(j);
    }

    let elements = merged
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let s = junctions[k];
            let e = junctions[(k + 1) % m];
            match &p.kind {
                PieceKind::Line(_) => Primitive::LineSegment { p0: s, p1: e },
                PieceKind::Arc(c) => {
                    let a = pts[p.first % n] - c.center;
                    let b = pts[(p.first + p.len) % n] - c.center;
                    let mid = pts[(p.first + p.len / 2) % n] - c.center;
                    Primitive::Arc {
                        center: c.center,
                        radius: c.radius,
                        start_angle: (s - c.center).y.atan2((s - c.center).x),
                        end_angle: (e - c.center).y.atan2((e - c.center).x),
                        ccw: a.perp(&mid) + mid.perp(&b) > 0.0,
                    }
                }
            }
        })
        .collect();
    PrimitiveChain { elements, junctions }
}

fn intersect(a: &LineFit, b: &LineFit) -> Option<Vec2> {
    let denom = a.dir.perp(&b.dir);
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (b.point - a.point).perp(&b.dir) / denom;
    Some(a.point + a.dir * t)
}

/// Maximum distance from densely sampled chain points to the loop.
pub fn chain_deviation(chain: &PrimitiveChain, lp: &Loop2D) -> f64 {
    chain
        .sample(8)
        .iter()
        .map(|p| lp.distance_to_boundary(p))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::polygon::resample_closed;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn circle(c: Vec2, r: f64, n: usize) -> Loop2D {
        Loop2D::new(
            (0..n)
                .map(|i| {
                    let t = i as f64 / n as f64 * TAU;
                    c + Vec2::new(t.cos(), t.sin()) * r
                })
                .collect(),
        )
    }

    fn rounded_rect(w: f64, h: f64, r: f64) -> Vec<Vec2> {
        let mut pts = Vec::new();
        let corners = [
            (Vec2::new(w / 2.0 - r, h / 2.0 - r), 0.0),
            (Vec2::new(-w / 2.0 + r, h / 2.0 - r), PI / 2.0),
            (Vec2::new(-w / 2.0 + r, -h / 2.0 + r), PI),
            (Vec2::new(w / 2.0 - r, -h / 2.0 + r), 1.5 * PI),
        ];
        for (c, a0) in corners {
            for k in 0..=40 {
                let t = a0 + (PI / 2.0) * k as f64 / 40.0;
                pts.push(c + Vec2::new(t.cos(), t.sin()) * r);
            }
        }
        pts
    }

    #[test]
    fn resampled_square_is_four_lines() {
        let sq = vec![
            Vec2::new(-0.5, -0.5),
            Vec2::new(0.5, -0.5),
            Vec2::new(0.5, 0.5),
            Vec2::new(-0.5, 0.5),
        ];
        let lp = Loop2D::new(resample_closed(&sq, 128, 20.0));
        let chain = fit_primitives(&lp, 0.005);
        assert_eq!(chain.counts(), (4, 0, 0, 0));
        let poly = chain.to_polygon();
        assert_eq!(poly.len(), 4);
        assert_relative_eq!(super::super::signed_area(&poly), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn circle_fit_recovers_radius() {
        let chain = fit_primitives(&circle(Vec2::new(0.1, -0.2), 0.4, 128), 0.005);
        match chain.elements.as_slice() {
            [Primitive::Circle { center, radius }] => {
                assert!((radius - 0.4).abs() < 1e-3);
                assert!((center - Vec2::new(0.1, -0.2)).norm() < 1e-9);
            }
            other => panic!("expected a circle, got {other:?}"),
        }
    }

    #[test]
    fn rounded_rectangle_alternates_lines_and_arcs() {
        let lp = Loop2D::new(resample_closed(&rounded_rect(2.0, 1.2, 0.3), 128, 20.0));
        let chain = fit_primitives(&lp, 0.005);
        assert_eq!(chain.counts(), (4, 4, 0, 0), "{chain:?}");
        for (k, e) in chain.elements.iter().enumerate() {
            let is_line = matches!(e, Primitive::LineSegment { .. });
            let next_is_line = matches!(chain.elements[(k + 1) % 8], Primitive::LineSegment { .. });
            assert_ne!(is_line, next_is_line);
            if let Primitive::Arc { radius, .. } = e {
                assert!((radius - 0.3).abs() < 0.01, "radius {radius}");
            }
        }
        assert!(chain_deviation(&chain, &lp) <= 0.005 * lp.diameter() + 1e-12);
    }
}
