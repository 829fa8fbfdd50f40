//! Purely combinatorial part of a triangulated surface: cells, orientations
//! and incidence matrices. Nothing here looks at coordinates.

use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};

/// Reference to a cell of a 2-complex by dimension and index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellRef {
    Node(usize),
    Edge(usize),
    Facet(usize),
}

/// An oriented simplicial 2-complex.
///
/// Edges carry the intrinsic orientation from the lower to the higher node
/// index and are enumerated in lexicographic order. Facets keep the vertex
/// order they were given in; adjacent facets must induce opposite
/// orientations on their shared edge.
///
/// Local edge `k` of a facet joins local vertices `k+1` and `k+2` (mod 3),
/// i.e. it is the edge opposite local vertex `k`.
#[derive(Clone, Debug)]
pub struct Complex {
    n_nodes: usize,
    edges: Vec<[usize; 2]>,
    facets: Vec<[usize; 3]>,
    facet_edges: Vec<[(usize, i32); 3]>,
    edge_facets: Vec<Vec<(usize, i32)>>,
    node_edges: Vec<Vec<usize>>,
    node_facets: Vec<Vec<usize>>,
    boundary_nodes: Vec<bool>,
    boundary_edges: Vec<bool>,
    d0: CsrMatrix<i32>,
    d1: CsrMatrix<i32>,
}

impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        self.n_nodes == other.n_nodes && self.facets == other.facets
    }
}

impl Complex {
    /// Builds the complex from facets that are already consistently oriented.
    pub fn from_oriented_facets(n_nodes: usize, facets: Vec<[usize; 3]>) -> Result<Self> {
        for (f, tri) in facets.iter().enumerate() {
            for &v in tri {
                if v >= n_nodes {
                    return Err(Error::InvalidNodeIndex {
                        facet: f,
                        node: v,
                        n_nodes,
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::RepeatedNode {
                    facet: f,
                    nodes: *tri,
                });
            }
        }

        let mut keyed: Vec<([usize; 3], usize)> = facets
            .iter()
            .enumerate()
            .map(|(f, tri)| {
                let mut k = *tri;
                k.sort_unstable();
                (k, f)
            })
            .collect();
        keyed.sort_unstable();
        for pair in keyed.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateFacet {
                    facet: pair[1].1,
                    first: pair[0].1,
                });
            }
        }

        // (sorted edge, facet, local edge, sign)
        let mut sides: Vec<([usize; 2], usize, usize, i32)> = Vec::with_capacity(3 * facets.len());
        for (f, tri) in facets.iter().enumerate() {
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let (key, sign) = if a < b { ([a, b], 1) } else { ([b, a], -1) };
                sides.push((key, f, k, sign));
            }
        }
        sides.sort_unstable();

        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut edge_facets: Vec<Vec<(usize, i32)>> = Vec::new();
        let mut facet_edges = vec![[(0usize, 0i32); 3]; facets.len()];
        let mut i = 0;
        while i < sides.len() {
            let key = sides[i].0;
            let mut j = i;
            while j < sides.len() && sides[j].0 == key {
                j += 1;
            }
            let group = &sides[i..j];
            if group.len() > 2 {
                return Err(Error::NonManifoldEdge {
                    edge: key,
                    count: group.len(),
                });
            }
            if group.len() == 2 && group[0].3 == group[1].3 {
                return Err(Error::InconsistentOrientation { edge: key });
            }
            let e = edges.len();
            edges.push(key);
            edge_facets.push(group.iter().map(|s| (s.1, s.3)).collect());
            for s in group {
                facet_edges[s.1][s.2] = (e, s.3);
            }
            i = j;
        }

        let mut node_edges = vec![Vec::new(); n_nodes];
        for (e, &[a, b]) in edges.iter().enumerate() {
            node_edges[a].push(e);
            node_edges[b].push(e);
        }
        let mut node_facets = vec![Vec::new(); n_nodes];
        for (f, tri) in facets.iter().enumerate() {
            for &v in tri {
                node_facets[v].push(f);
            }
        }

        let boundary_edges: Vec<bool> = edge_facets.iter().map(|fs| fs.len() == 1).collect();
        let mut boundary_nodes = vec![false; n_nodes];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if boundary_edges[e] {
                boundary_nodes[a] = true;
                boundary_nodes[b] = true;
            }
        }

        let mut d0 = CooMatrix::new(n_nodes, edges.len());
        for (e, &[a, b]) in edges.iter().enumerate() {
            d0.push(a, e, -1);
            d0.push(b, e, 1);
        }
        let mut d1 = CooMatrix::new(edges.len(), facets.len());
        for (f, fe) in facet_edges.iter().enumerate() {
            for &(e, s) in fe {
                d1.push(e, f, s);
            }
        }

        Ok(Self {
            n_nodes,
            edges,
            facets,
            facet_edges,
            edge_facets,
            node_edges,
            node_facets,
            boundary_nodes,
            boundary_edges,
            d0: CsrMatrix::from(&d0),
            d1: CsrMatrix::from(&d1),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_facets(&self) -> usize {
        self.facets.len()
    }

    /// Number of cells of dimension `dim` (0, 1 or 2).
    pub fn n_cells(&self, dim: usize) -> usize {
        match dim {
            0 => self.n_nodes,
            1 => self.edges.len(),
            2 => self.facets.len(),
            _ => 0,
        }
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn facets(&self) -> &[[usize; 3]] {
        &self.facets
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn facet(&self, f: usize) -> [usize; 3] {
        self.facets[f]
    }

    /// Edges of facet `f` with the sign relating the facet orientation to the
    /// intrinsic edge orientation; entry `k` is the edge opposite local vertex `k`.
    pub fn facet_edges(&self, f: usize) -> [(usize, i32); 3] {
        self.facet_edges[f]
    }

    /// Facets incident to edge `e` together with the incidence sign.
    pub fn edge_facets(&self, e: usize) -> &[(usize, i32)] {
        &self.edge_facets[e]
    }

    pub fn node_edges(&self, n: usize) -> &[usize] {
        &self.node_edges[n]
    }

    pub fn node_facets(&self, n: usize) -> &[usize] {
        &self.node_facets[n]
    }

    /// Index of the edge joining `a` and `b`, in either order.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { [a, b] } else { [b, a] };
        self.edges.binary_search(&key).ok()
    }

    /// Facets sharing an edge with `f`.
    pub fn facet_neighbors(&self, f: usize) -> impl Iterator<Item = usize> + '_ {
        self.facet_edges[f].iter().flat_map(move |&(e, _)| {
            self.edge_facets[e]
                .iter()
                .map(|&(g, _)| g)
                .filter(move |&g| g != f)
        })
    }

    pub fn is_boundary_node(&self, n: usize) -> bool {
        self.boundary_nodes[n]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edges[e]
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary_edges.iter().any(|&b| b)
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.boundary_edges.iter().filter(|&&b| b).count()
    }

    /// Node-to-edge incidence, `N x E`: `-1` at the tail, `+1` at the head.
    pub fn d0(&self) -> &CsrMatrix<i32> {
        &self.d0
    }

    /// Edge-to-facet incidence, `E x F`.
    pub fn d1(&self) -> &CsrMatrix<i32> {
        &self.d1
    }

    /// Signed incidence `D0[n, e]`.
    pub fn d0_entry(&self, n: usize, e: usize) -> i32 {
        let [a, b] = self.edges[e];
        if n == a {
            -1
        } else if n == b {
            1
        } else {
            0
        }
    }

    /// Signed incidence `D1[e, f]`.
    pub fn d1_entry(&self, e: usize, f: usize) -> i32 {
        self.facet_edges[f]
            .iter()
            .find(|&&(g, _)| g == e)
            .map_or(0, |&(_, s)| s)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_nodes as i64 - self.edges.len() as i64 + self.facets.len() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle_counts_and_boundary() {
        let c = Complex::from_oriented_facets(3, vec![[0, 1, 2]]).unwrap();
        assert_eq!((c.n_nodes(), c.n_edges(), c.n_facets()), (3, 3, 1));
        assert_eq!(c.edges(), &[[0, 1], [0, 2], [1, 2]]);
        assert!(c.has_boundary());
        assert_eq!(c.boundary_edge_count(), 3);
        let prod = c.d0() * c.d1();
        assert!(prod.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn d1_columns_have_three_unit_entries() {
        let c = Complex::from_oriented_facets(4, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        let d1t = c.d1().transpose();
        for row in d1t.row_iter() {
            assert_eq!(row.nnz(), 3);
            assert!(row.values().iter().all(|v| v.abs() == 1));
        }
        let shared = c.find_edge(2, 0).unwrap();
        let signs: Vec<i32> = c.edge_facets(shared).iter().map(|x| x.1).collect();
        assert_eq!(signs.iter().sum::<i32>(), 0);
    }

    #[test]
    fn rejects_non_manifold_edge() {
        let err = Complex::from_oriented_facets(5, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap_err();
        assert!(matches!(err, Error::NonManifoldEdge { edge: [0, 1], count: 3 }));
    }

    #[test]
    fn rejects_duplicate_facet() {
        let err = Complex::from_oriented_facets(3, vec![[0, 1, 2], [1, 2, 0]]).unwrap_err();
        assert!(matches!(err, Error::DuplicateFacet { facet: 1, first: 0 }));
    }

    #[test]
    fn rejects_inconsistent_orientation() {
        let err = Complex::from_oriented_facets(4, vec![[0, 1, 2], [0, 1, 3]]).unwrap_err();
        assert!(matches!(err, Error::InconsistentOrientation { edge: [0, 1] }));
    }

    #[test]
    fn rejects_bad_index() {
        let err = Complex::from_oriented_facets(3, vec![[0, 1, 3]]).unwrap_err();
        assert!(matches!(err, Error::InvalidNodeIndex { facet: 0, node: 3, .. }));
    }

    #[test]
    fn closed_octahedron_has_no_boundary() {
        let c = Complex::from_oriented_facets(
            6,
            vec![
                [0, 2, 4],
                [2, 1, 4],
                [1, 3, 4],
                [3, 0, 4],
                [2, 0, 5],
                [1, 2, 5],
                [3, 1, 5],
                [0, 3, 5],
            ],
        )
        .unwrap();
        assert!(!c.has_boundary());
        assert_eq!(c.euler_characteristic(), 2);
    }
}
