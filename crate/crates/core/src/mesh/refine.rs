use super::{CellRef, Complex, Point, SurfaceMesh};

/// Barycentric refinement of a complex: every facet is split into six
/// triangles using its edge midpoints and its barycenter.
///
/// Refined node order: primal nodes, then one midpoint per primal edge, then
/// one barycenter per primal facet. Refined facets come in groups of six per
/// primal facet; refined facet `6f + 2k + s` contains local vertex `k` of
/// primal facet `f`.
#[derive(Clone, Debug)]
pub struct BarycentricRefinement {
    primal_counts: [usize; 3],
    refined: Complex,
    coords: Option<Vec<Point>>,
    node_parent: Vec<CellRef>,
    edge_parent: Vec<CellRef>,
    facet_parent: Vec<usize>,
    facet_corner: Vec<usize>,
}

impl BarycentricRefinement {
    /// Topological refinement of a complex without coordinates.
    pub fn of_complex(primal: &Complex) -> Self {
        Self::build(primal, None)
    }

    pub fn of_mesh(mesh: &SurfaceMesh) -> Self {
        let mut coords = mesh.coords().to_vec();
        coords.extend((0..mesh.n_edges()).map(|e| {
            let [a, b] = mesh.edge_points(e);
            Point::from((a.coords + b.coords) * 0.5)
        }));
        coords.extend((0..mesh.n_facets()).map(|f| mesh.facet_centroid(f)));
        Self::build(mesh.complex(), Some(coords))
    }

    fn build(primal: &Complex, coords: Option<Vec<Point>>) -> Self {
        let (n, e, f) = (primal.n_nodes(), primal.n_edges(), primal.n_facets());
        let mut facets = Vec::with_capacity(6 * f);
        let mut facet_parent = Vec::with_capacity(6 * f);
        let mut facet_corner = Vec::with_capacity(6 * f);
        for t in 0..f {
            let v = primal.facet(t);
            let m = primal.facet_edges(t).map(|(edge, _)| n + edge);
            let b = n + e + t;
            for k in 0..3 {
                facets.push([v[k], m[(k + 2) % 3], b]);
                facets.push([v[k], b, m[(k + 1) % 3]]);
                facet_parent.extend([t, t]);
                facet_corner.extend([v[k], v[k]]);
            }
        }
        let refined = Complex::from_oriented_facets(n + e + f, facets)
            .expect("barycentric refinement of a valid complex is valid");

        let node_parent = (0..n + e + f)
            .map(|x| {
                if x < n {
                    CellRef::Node(x)
                } else if x < n + e {
                    CellRef::Edge(x - n)
                } else {
                    CellRef::Facet(x - n - e)
                }
            })
            .collect();
        let edge_parent = refined
            .edges()
            .iter()
            .enumerate()
            .map(|(w, &[_, hi])| {
                if hi < n + e {
                    // primal node to midpoint: half of a primal edge
                    CellRef::Edge(hi - n)
                } else {
                    CellRef::Facet(refined.edge_facets(w).first().map_or(0, |&(g, _)| facet_parent[g]))
                }
            })
            .collect();

        Self {
            primal_counts: [n, e, f],
            refined,
            coords,
            node_parent,
            edge_parent,
            facet_parent,
            facet_corner,
        }
    }

    pub fn complex(&self) -> &Complex {
        &self.refined
    }

    /// Refined mesh with coordinates, if the primal had coordinates.
    pub fn refined_mesh(&self) -> Option<SurfaceMesh> {
        self.coords
            .as_ref()
            .map(|c| SurfaceMesh::from_parts(c.clone(), self.refined.clone()))
    }

    /// `[N, E, F]` of the primal complex.
    pub fn primal_counts(&self) -> [usize; 3] {
        self.primal_counts
    }

    pub fn midpoint_node(&self, primal_edge: usize) -> usize {
        self.primal_counts[0] + primal_edge
    }

    pub fn barycenter_node(&self, primal_facet: usize) -> usize {
        self.primal_counts[0] + self.primal_counts[1] + primal_facet
    }

    /// Primal cell whose barycenter is refined node `w`.
    pub fn node_parent(&self, w: usize) -> CellRef {
        self.node_parent[w]
    }

    /// The primal edge or facet containing refined edge `w`.
    pub fn edge_parent(&self, w: usize) -> CellRef {
        self.edge_parent[w]
    }

    pub fn facet_parent(&self, w: usize) -> usize {
        self.facet_parent[w]
    }

    /// The primal node that is a vertex of refined facet `w`.
    pub fn facet_corner(&self, w: usize) -> usize {
        self.facet_corner[w]
    }

    /// Refined facets of primal facet `t`.
    pub fn children_of_facet(&self, t: usize) -> std::ops::Range<usize> {
        6 * t..6 * t + 6
    }

    /// The two refined half-edges of primal edge `e`, ordered as
    /// (half at the lower endpoint, half at the higher endpoint).
    pub fn halves_of_edge(&self, primal: &Complex, e: usize) -> [usize; 2] {
        let [a, b] = primal.edge(e);
        let m = self.midpoint_node(e);
        [
            self.refined.find_edge(a, m).expect("half edge exists"),
            self.refined.find_edge(b, m).expect("half edge exists"),
        ]
    }
}
