use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{TriMesh, Vec3};

/// Area-weighted uniform surface samples, deterministic for a given seed.
pub fn sample_surface(mesh: &TriMesh, n: usize, seed: u64) -> Vec<Vec3> {
    let mut cum = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f);
        cum.push(total);
    }
    if total <= 0.0 || n == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rng.random::<f64>() * total;
            let f = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
            let [a, b, c] = mesh.triangle(f);
            let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            a + (b - a) * u + (c - a) * v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_centroid() {
        let m = TriMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let pts = sample_surface(&m, 10_000, 7);
        let c = pts.iter().sum::<Vec3>() / pts.len() as f64;
        assert!((c - Vec3::new(0.5, 0.5, 0.0)).norm() < 0.02);
    }

    #[test]
    fn deterministic_per_seed() {
        let m = TriMesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0));
        assert_eq!(sample_surface(&m, 500, 3), sample_surface(&m, 500, 3));
        assert_ne!(sample_surface(&m, 500, 3), sample_surface(&m, 500, 4));
    }

    #[test]
    fn cube_faces_share_evenly() {
        let m = TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5));
        let pts = sample_surface(&m, 60_000, 11);
        let mut counts = [0usize; 6];
        for p in &pts {
            let axis = (0..3).max_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs())).unwrap();
            let side = if p[axis] > 0.0 { 1 } else { 0 };
            counts[2 * axis + side] += 1;
        }
        for c in counts {
            let share = c as f64 / pts.len() as f64;
            assert!((share - 1.0 / 6.0).abs() < 0.05 / 6.0, "share {share}");
        }
    }
}
