//! Planar triangulated surfaces, refinement, and the barycentric dual mesh.

mod complex;
pub mod delaunay;
mod dual;
pub mod io;
mod refine;

use std::ops::Deref;

use nalgebra::{Point2, Vector2};

pub use complex::{CellRef, Complex};
pub use dual::DualMesh;
pub use refine::BarycentricRefinement;

use crate::error::{Error, Result};

pub type Point = Point2<f64>;

/// Twice the signed area of the triangle `(a, b, c)`.
#[inline]
pub fn orient2d(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Scalar cross product of two plane vectors.
#[inline]
pub fn cross(u: &Vector2<f64>, v: &Vector2<f64>) -> f64 {
    u.x * v.y - u.y * v.x
}

/// A triangulated planar surface: node coordinates plus an oriented
/// [`Complex`] whose facets are all counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    coords: Vec<Point>,
    complex: Complex,
}

impl Deref for SurfaceMesh {
    type Target = Complex;

    fn deref(&self) -> &Complex {
        &self.complex
    }
}

impl SurfaceMesh {
    /// Validates the triangulation and builds edges and incidence matrices.
    /// Clockwise facets are flipped to counterclockwise.
    pub fn new(coords: Vec<Point>, facets: Vec<[usize; 3]>) -> Result<Self> {
        let n = coords.len();
        let mut oriented = Vec::with_capacity(facets.len());
        for (f, &tri) in facets.iter().enumerate() {
            for &v in &tri {
                if v >= n {
                    return Err(Error::InvalidNodeIndex {
                        facet: f,
                        node: v,
                        n_nodes: n,
                    });
                }
            }
            let [a, b, c] = tri;
            let twice = orient2d(&coords[a], &coords[b], &coords[c]);
            let scale = [(a, b), (b, c), (c, a)]
                .iter()
                .map(|&(p, q)| (coords[p] - coords[q]).norm_squared())
                .fold(0.0, f64::max);
            if twice.abs() <= 1e-14 * scale {
                return Err(Error::DegenerateFacet {
                    facet: f,
                    area: 0.5 * twice,
                });
            }
            oriented.push(if twice > 0.0 { tri } else { [a, c, b] });
        }
        let complex = Complex::from_oriented_facets(n, oriented)?;
        Ok(Self { coords, complex })
    }

    pub(crate) fn from_parts(coords: Vec<Point>, complex: Complex) -> Self {
        debug_assert_eq!(coords.len(), complex.n_nodes());
        Self { coords, complex }
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn node(&self, n: usize) -> Point {
        self.coords[n]
    }

    pub fn facet_points(&self, f: usize) -> [Point; 3] {
        let [a, b, c] = self.complex.facet(f);
        [self.coords[a], self.coords[b], self.coords[c]]
    }

    pub fn facet_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.facet_points(f);
        0.5 * orient2d(&a, &b, &c)
    }

    pub fn facet_centroid(&self, f: usize) -> Point {
        let [a, b, c] = self.facet_points(f);
        Point::from((a.coords + b.coords + c.coords) / 3.0)
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        let [a, b] = self.complex.edge(e);
        [self.coords[a], self.coords[b]]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_points(e);
        (b - a).norm()
    }

    /// Largest edge length, used as the mesh size `h`.
    pub fn max_edge_length(&self) -> f64 {
        (0..self.n_edges())
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_facets()).map(|f| self.facet_area(f)).sum()
    }

    /// Barycentric coordinates of `p` with respect to facet `f`.
    pub fn barycentric(&self, f: usize, p: &Point) -> [f64; 3] {
        let [a, b, c] = self.facet_points(f);
        let det = orient2d(&a, &b, &c);
        let l0 = orient2d(p, &b, &c) / det;
        let l1 = orient2d(&a, p, &c) / det;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Applies `map` to every node coordinate, keeping the topology.
    /// The map must preserve orientation.
    pub fn map_coords(&self, map: impl Fn(&Point) -> Point) -> Result<Self> {
        let coords: Vec<Point> = self.coords.iter().map(map).collect();
        for f in 0..self.n_facets() {
            let [a, b, c] = self.complex.facet(f);
            let twice = orient2d(&coords[a], &coords[b], &coords[c]);
            if twice <= 0.0 {
                return Err(Error::DegenerateFacet {
                    facet: f,
                    area: 0.5 * twice,
                });
            }
        }
        Ok(Self {
            coords,
            complex: self.complex.clone(),
        })
    }

    /// Splits every facet at its edge midpoints into four similar triangles.
    /// New nodes: original nodes first, then one midpoint per edge in edge order.
    pub fn refine_uniform(&self) -> SurfaceMesh {
        let n = self.n_nodes();
        let mut coords = self.coords.clone();
        coords.extend((0..self.n_edges()).map(|e| {
            let [a, b] = self.edge_points(e);
            Point::from((a.coords + b.coords) * 0.5)
        }));
        let mut facets = Vec::with_capacity(4 * self.n_facets());
        for f in 0..self.n_facets() {
            let v = self.complex.facet(f);
            let m = self.complex.facet_edges(f).map(|(e, _)| n + e);
            facets.push([v[0], m[2], m[1]]);
            facets.push([v[1], m[0], m[2]]);
            facets.push([v[2], m[1], m[0]]);
            facets.push([m[0], m[1], m[2]]);
        }
        let complex = Complex::from_oriented_facets(coords.len(), facets)
            .expect("uniform refinement of a valid mesh is valid");
        Self { coords, complex }
    }

    /// Applies [`refine_uniform`](Self::refine_uniform) `levels` times.
    pub fn refine_uniform_n(&self, levels: usize) -> SurfaceMesh {
        let mut mesh = self.clone();
        for _ in 0..levels {
            mesh = mesh.refine_uniform();
        }
        mesh
    }

    pub fn refine_barycentric(&self) -> BarycentricRefinement {
        BarycentricRefinement::of_mesh(self)
    }
}

/// Structured triangulation of the unit square with `n x n` squares.
/// Each square is split along its SW-NE diagonal when `ne_diagonal` is set,
/// otherwise along its SE-NW diagonal.
pub fn unit_square_grid(n: usize, ne_diagonal: bool) -> SurfaceMesh {
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let coords = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| Point::new(i as f64 / n as f64, j as f64 / n as f64)))
        .collect();
    let mut facets = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (sw, se, nw, ne) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            if ne_diagonal {
                facets.push([sw, se, ne]);
                facets.push([sw, ne, nw]);
            } else {
                facets.push([sw, se, nw]);
                facets.push([se, ne, nw]);
            }
        }
    }
    SurfaceMesh::new(coords, facets).expect("structured grid is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> SurfaceMesh {
        unit_square_grid(1, true)
    }

    #[test]
    fn single_triangle() {
        let m = SurfaceMesh::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!((m.n_edges(), m.n_facets()), (3, 1));
        assert!((m.d0() * m.d1()).values().iter().all(|&v| v == 0));
    }

    #[test]
    fn square_two_triangles() {
        let m = square();
        assert_eq!(m.n_edges(), 5);
        assert_eq!(m.boundary_edge_count(), 4);
        assert_eq!(m.n_edges() - m.boundary_edge_count(), 1);
    }

    #[test]
    fn clockwise_input_is_flipped() {
        let m = SurfaceMesh::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
            vec![[0, 2, 1]],
        )
        .unwrap();
        assert!(m.facet_area(0) > 0.0);
        assert_eq!(m.facet(0), [0, 1, 2]);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let err = SurfaceMesh::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateFacet { facet: 0, .. }));
    }

    #[test]
    fn uniform_refinement_counts_and_area() {
        let m = square();
        let r = m.refine_uniform();
        assert_eq!((r.n_nodes(), r.n_facets()), (9, 8));
        assert!((r.total_area() - 1.0).abs() < 1e-12);
        assert_eq!(r.euler_characteristic(), m.euler_characteristic());

        let r3 = m.refine_uniform_n(3);
        assert_eq!(r3.n_facets(), 64 * m.n_facets());
        assert!((r3.total_area() - m.total_area()).abs() < 1e-12);
        assert!((r3.d0() * r3.d1()).values().iter().all(|&v| v == 0));
    }

    #[test]
    fn refinement_is_deterministic() {
        let a = unit_square_grid(3, false).refine_uniform_n(2);
        let b = unit_square_grid(3, false).refine_uniform_n(2);
        assert_eq!(a.coords(), b.coords());
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.facets(), b.facets());
    }

    #[test]
    fn grid_counts() {
        assert_eq!(unit_square_grid(2, true).n_facets(), 8);
        assert_eq!(unit_square_grid(3, false).n_facets(), 18);
    }
}
