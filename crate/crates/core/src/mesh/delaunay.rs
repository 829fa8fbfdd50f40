//! Bowyer-Watson Delaunay triangulation, used to generate unstructured
//! test meshes of the unit square.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{orient2d, Point, SurfaceMesh};
use crate::error::Result;

fn in_circumcircle(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    det > 0.0
}

/// Delaunay triangulation of a point set. Quadratic time; meant for a few
/// thousand points at most.
pub fn triangulate(points: &[Point]) -> Result<SurfaceMesh> {
    let n = points.len();
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi - lo).norm().max(1.0) * 1e3;
    let mid = Point::from((lo.coords + hi.coords) * 0.5);
    let mut all: Vec<Point> = points.to_vec();
    all.push(Point::new(mid.x - 2.0 * span, mid.y - span));
    all.push(Point::new(mid.x + 2.0 * span, mid.y - span));
    all.push(Point::new(mid.x, mid.y + 2.0 * span));

    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for i in 0..n {
        let p = all[i];
        let (bad, keep): (Vec<_>, Vec<_>) = tris
            .into_iter()
            .partition(|t| in_circumcircle(&all[t[0]], &all[t[1]], &all[t[2]], &p));
        let mut boundary: Vec<[usize; 2]> = Vec::new();
        for t in &bad {
            for k in 0..3 {
                let e = [t[k], t[(k + 1) % 3]];
                if let Some(pos) = boundary.iter().position(|b| *b == [e[1], e[0]]) {
                    boundary.swap_remove(pos);
                } else {
                    boundary.push(e);
                }
            }
        }
        tris = keep;
        tris.extend(boundary.into_iter().map(|[a, b]| [a, b, i]));
    }
    tris.retain(|t| t.iter().all(|&v| v < n));
    tris.retain(|t| orient2d(&all[t[0]], &all[t[1]], &all[t[2]]).abs() > 1e-14);
    all.truncate(n);
    SurfaceMesh::new(all, tris)
}

/// Delaunay mesh of the unit square through its four corners and
/// `n_interior` uniformly random interior points.
pub fn random_unit_square(n_interior: usize, seed: u64) -> Result<SurfaceMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];
    while pts.len() < n_interior + 4 {
        let p = Point::new(rng.random_range(0.02..0.98), rng.random_range(0.02..0.98));
        if pts.iter().all(|q| (q - p).norm() > 0.01) {
            pts.push(p);
        }
    }
    triangulate(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_meshes_cover_the_square() {
        for seed in 0..5 {
            let m = random_unit_square(60, seed).unwrap();
            assert!((m.total_area() - 1.0).abs() < 1e-12, "seed {seed}");
            assert_eq!(m.euler_characteristic(), 1);
            assert_eq!(m.n_facets(), 2 * 64 - 4 - 2);
        }
    }

    #[test]
    fn empty_circumcircles() {
        let m = random_unit_square(40, 7).unwrap();
        for f in 0..m.n_facets() {
            let [a, b, c] = m.facet_points(f);
            for p in m.coords() {
                assert!(!in_circumcircle(&a, &b, &c, p) || [a, b, c].contains(p));
            }
        }
    }
}
