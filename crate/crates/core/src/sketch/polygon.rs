//! Closed 2D polylines and even-odd polygon membership.

use crate::geometry::Vec2;

/// Closed 2D polyline in plane coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop2D {
    pub points: Vec<Vec2>,
}

impl Loop2D {
    pub fn new(points: Vec<Vec2>) -> Self {
        Loop2D { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shoelace area, positive for counter-clockwise loops.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| (self.points[(i + 1) % n] - self.points[i]).norm())
            .sum()
    }

    /// Area centroid (vertex mean for degenerate loops).
    pub fn centroid(&self) -> Vec2 {
        let n = self.points.len();
        let a = self.signed_area();
        if a.abs() < 1e-300 {
            return self.points.iter().sum::<Vec2>() / n.max(1) as f64;
        }
        let mut c = Vec2::zeros();
        for i in 0..n {
            let p = self.points[i];
            let q = self.points[(i + 1) % n];
            let cross = p.x * q.y - q.x * p.y;
            c += (p + q) * cross;
        }
        c / (6.0 * a)
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::repeat(f64::INFINITY);
        let mut hi = Vec2::repeat(f64::NEG_INFINITY);
        for p in &self.points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    /// Diagonal of the bounding box; the scale used by fit tolerances.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        ring_crossings(&self.points, p) % 2 == 1
    }

    pub fn reversed(&self) -> Loop2D {
        let mut pts = self.points.clone();
        pts.reverse();
        Loop2D { points: pts }
    }

    /// Same loop with counter-clockwise (`ccw = true`) or clockwise order.
    pub fn oriented(&self, ccw: bool) -> Loop2D {
        if (self.signed_area() > 0.0) == ccw {
            self.clone()
        } else {
            self.reversed()
        }
    }

    /// Distance from `p` to the closest point on the loop boundary.
    pub fn distance_to_boundary(&self, p: &Vec2) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| point_segment_distance(p, &self.points[i], &self.points[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Exterior turn angle (radians, in `[0, π]`) at vertex `i`.
    pub fn turn_angle(&self, i: usize) -> f64 {
        turn_angle(&self.points, i)
    }
}

pub fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s
}

pub fn turn_angle(points: &[Vec2], i: usize) -> f64 {
    let n = points.len();
    let prev = points[(i + n - 1) % n];
    let cur = points[i];
    let next = points[(i + 1) % n];
    let e1 = cur - prev;
    let e2 = next - cur;
    let (l1, l2) = (e1.norm(), e2.norm());
    if l1 == 0.0 || l2 == 0.0 {
        return 0.0;
    }
    (e1.dot(&e2) / (l1 * l2)).clamp(-1.0, 1.0).acos()
}

pub fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_squared();
    let t = if l2 > 0.0 {
        ((p - a).dot(&ab) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

/// Crossings of the ray from `p` towards +u with the ring's edges.
pub fn ring_crossings(ring: &[Vec2], p: &Vec2) -> usize {
    let n = ring.len();
    let mut count = 0;
    for i in 0..n {
        if edge_crosses(&ring[i], &ring[(i + 1) % n], p) {
            count += 1;
        }
    }
    count
}

#[inline]
fn edge_crosses(a: &Vec2, b: &Vec2, p: &Vec2) -> bool {
    (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x
}

/// Resamples a closed polyline to `n` points equally spaced by arc length,
/// starting at the first vertex. Vertices with an exterior turn above
/// `corner_deg` are kept exactly by snapping the nearest sample onto them.
pub fn resample_closed(points: &[Vec2], n: usize, corner_deg: f64) -> Vec<Vec2> {
    let m = points.len();
    if m < 2 || n < 3 {
        return points.to_vec();
    }
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for i in 0..m {
        let d = (points[(i + 1) % m] - points[i]).norm();
        cum.push(cum[i] + d);
    }
    let total = cum[m];
    if total <= 0.0 {
        return points.to_vec();
    }
    let step = total / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        let s = k as f64 * step;
        while seg + 1 < m && cum[seg + 1] <= s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        out.push(points[seg] + (points[(seg + 1) % m] - points[seg]) * t);
    }
    let corner = corner_deg.to_radians();
    let mut taken = vec![false; n];
    for i in 0..m {
        if turn_angle(points, i) <= corner {
            continue;
        }
        let k = ((cum[i] / step).round() as usize) % n;
        if !taken[k] {
            taken[k] = true;
            out[k] = points[i];
        }
    }
    out
}

/// Even-odd membership for a set of rings, with edges bucketed into
/// horizontal bands. Gives the same answer as testing every edge.
#[derive(Debug, Clone)]
pub struct PolygonIndex {
    edges: Vec<(Vec2, Vec2)>,
    v_min: f64,
    v_max: f64,
    band_height: f64,
    bands: Vec<Vec<u32>>,
}

impl PolygonIndex {
    pub fn new<'a>(rings: impl IntoIterator<Item = &'a [Vec2]>) -> Self {
        let mut edges = Vec::new();
        for ring in rings {
            let n = ring.len();
            for i in 0..n {
                let (a, b) = (ring[i], ring[(i + 1) % n]);
                if a.y != b.y {
                    edges.push((a, b));
                }
            }
        }
        let v_min = edges
            .iter()
            .map(|(a, b)| a.y.min(b.y))
            .fold(f64::INFINITY, f64::min);
        let v_max = edges
            .iter()
            .map(|(a, b)| a.y.max(b.y))
            .fold(f64::NEG_INFINITY, f64::max);
        let nb = ((edges.len() as f64).sqrt().ceil() as usize).clamp(1, 128);
        let band_height = if v_max > v_min {
            (v_max - v_min) / nb as f64
        } else {
            1.0
        };
        let mut index = PolygonIndex {
            edges,
            v_min,
            v_max,
            band_height,
            bands: vec![Vec::new(); nb],
        };
        for (e, (a, b)) in index.edges.iter().enumerate() {
            let lo = index.band_of(a.y.min(b.y));
            let hi = index.band_of(a.y.max(b.y));
            for band in &mut index.bands[lo..=hi] {
                band.push(e as u32);
            }
        }
        index
    }

    fn band_of(&self, v: f64) -> usize {
        let k = ((v - self.v_min) / self.band_height).floor();
        (k.max(0.0) as usize).min(self.bands.len() - 1)
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        if self.edges.is_empty() || !(p.y >= self.v_min && p.y <= self.v_max) {
            return false;
        }
        let mut inside = false;
        for &e in &self.bands[self.band_of(p.y)] {
            let (a, b) = &self.edges[e as usize];
            if edge_crosses(a, b, p) {
                inside = !inside;
            }
        }
        inside
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn square(c: Vec2, s: f64) -> Vec<Vec2> {
        let h = s / 2.0;
        vec![
            Vec2::new(c.x - h, c.y - h),
            Vec2::new(c.x + h, c.y - h),
            Vec2::new(c.x + h, c.y + h),
            Vec2::new(c.x - h, c.y + h),
        ]
    }

    #[test]
    fn square_area_and_centroid() {
        let l = Loop2D::new(square(Vec2::new(1.0, 2.0), 2.0));
        assert_relative_eq!(l.signed_area(), 4.0);
        assert_relative_eq!(l.reversed().signed_area(), -4.0);
        assert_relative_eq!(l.centroid(), Vec2::new(1.0, 2.0), epsilon = 1e-12);
        assert_relative_eq!(l.perimeter(), 8.0);
    }

    #[test]
    fn resampled_square_keeps_corners() {
        let pts = resample_closed(&square(Vec2::zeros(), 1.0), 128, 10.0);
        assert_eq!(pts.len(), 128);
        assert_relative_eq!(signed_area(&pts), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn resampled_circle_perimeter() {
        let circle: Vec<Vec2> = (0..1000)
            .map(|i| {
                let t = i as f64 / 1000.0 * std::f64::consts::TAU;
                Vec2::new(0.5 * t.cos(), 0.5 * t.sin())
            })
            .collect();
        let l = Loop2D::new(resample_closed(&circle, 128, 10.0));
        assert!((l.perimeter() - std::f64::consts::PI).abs() < 0.005 * std::f64::consts::PI);
    }

    proptest! {
        #[test]
        fn index_matches_brute_force(
            seed_pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..40),
            probes in prop::collection::vec((-1.2f64..1.2, -1.2f64..1.2), 50),
        ) {
            let ring: Vec<Vec2> = seed_pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
            let hole: Vec<Vec2> = ring.iter().map(|p| p * 0.3).collect();
            let idx = PolygonIndex::new([ring.as_slice(), hole.as_slice()]);
            for &(x, y) in &probes {
                let p = Vec2::new(x, y);
                let brute = (ring_crossings(&ring, &p) + ring_crossings(&hole, &p)) % 2 == 1;
                prop_assert_eq!(idx.contains(&p), brute);
            }
        }
    }
}
