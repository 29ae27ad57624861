use crate::geometry::Vec3;

const LEAF: usize = 8;

/// Static kd-tree for exact nearest-neighbour queries.
///
/// The tree is implicit: `order` is permuted so that every subrange
/// `[lo, hi)` stores its splitting point at the midpoint.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<u32>,
    axis: Vec<u8>,
}

impl KdTree {
    pub fn new(points: Vec<Vec3>) -> Self {
        let n = points.len();
        let mut t = KdTree {
            order: (0..n as u32).collect(),
            axis: vec![0; n],
            points,
        };
        t.build(0, n);
        t
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi - lo <= LEAF {
            return;
        }
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for &i in &self.order[lo..hi] {
            let p = &self.points[i as usize];
            min = min.inf(p);
            max = max.sup(p);
        }
        let a = (max - min).imax();
        let mid = (lo + hi) / 2;
        let pts = &self.points;
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&x, &y| {
            pts[x as usize][a]
                .total_cmp(&pts[y as usize][a])
                .then(x.cmp(&y))
        });
        self.axis[mid] = a as u8;
        self.build(lo, mid);
        self.build(mid + 1, hi);
    }

    /// Index and squared distance of the nearest point; `None` if empty.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(q, 0, self.points.len(), &mut best);
        Some(best)
    }

    /// Squared distance to the nearest point (infinite if empty).
    pub fn nearest_dist2(&self, q: &Vec3) -> f64 {
        self.nearest(q).map_or(f64::INFINITY, |b| b.1)
    }

    fn consider(&self, q: &Vec3, i: u32, best: &mut (usize, f64)) {
        let d = (self.points[i as usize] - q).norm_squared();
        if d < best.1 || (d == best.1 && (i as usize) < best.0) {
            *best = (i as usize, d);
        }
    }

    fn search(&self, q: &Vec3, lo: usize, hi: usize, best: &mut (usize, f64)) {
        if hi - lo <= LEAF {
            for &i in &self.order[lo..hi] {
                self.consider(q, i, best);
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let a = self.axis[mid] as usize;
        let i = self.order[mid];
        self.consider(q, i, best);
        let d = q[a] - self.points[i as usize][a];
        let (first, second) = if d < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, first.0, first.1, best);
        if d * d <= best.1 {
            self.search(q, second.0, second.1, best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_brute_force(
            pts in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..200),
            qs in prop::collection::vec(prop::array::uniform3(-1.5f64..1.5), 1..20),
        ) {
            let pts: Vec<Vec3> = pts.into_iter().map(Vec3::from).collect();
            let tree = KdTree::new(pts.clone());
            for q in qs.into_iter().map(Vec3::from) {
                let brute = pts.iter().map(|p| (p - q).norm_squared()).fold(f64::INFINITY, f64::min);
                let (i, d) = tree.nearest(&q).unwrap();
                prop_assert_eq!(d, brute);
                prop_assert_eq!((pts[i] - q).norm_squared(), d);
            }
        }
    }

    #[test]
    fn empty_tree() {
        let t = KdTree::new(Vec::new());
        assert!(t.nearest(&Vec3::zeros()).is_none());
    }
}
