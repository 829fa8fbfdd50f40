//! Barycentric dual mesh, stored as chains over the barycentric refinement.
//!
//! Dual cells are indexed like the primal cells they are star-images of:
//! dual node `t` belongs to primal facet `t`, dual edge `s` to primal edge
//! `s`, dual facet `p` to primal node `p`. Inner orientations satisfy the
//! convention that `(*t, t)` is positively oriented: dual edges cross their
//! primal edge from its left facet to its right facet, dual facets share the
//! orientation of the surface. At the boundary the dual is truncated, so a
//! boundary edge has a one-segment dual edge.

use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::{BarycentricRefinement, Complex};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct DualMesh {
    node_chains: Vec<usize>,
    edge_chains: Vec<Vec<(usize, i32)>>,
    facet_chains: Vec<Vec<(usize, i32)>>,
    c0: CsrMatrix<i32>,
    c1: CsrMatrix<i32>,
    c2: CsrMatrix<i32>,
}

impl DualMesh {
    pub fn build(primal: &Complex, refinement: &BarycentricRefinement) -> Result<Self> {
        let fine = refinement.complex();

        let node_chains: Vec<usize> = (0..primal.n_facets())
            .map(|t| refinement.barycenter_node(t))
            .collect();

        let mut edge_chains = Vec::with_capacity(primal.n_edges());
        for s in 0..primal.n_edges() {
            let mid = refinement.midpoint_node(s);
            let mut chain = Vec::with_capacity(2);
            for &(t, sign) in primal.edge_facets(s) {
                let bary = refinement.barycenter_node(t);
                let w = fine.find_edge(mid, bary).ok_or(Error::DualOrientation {
                    kind: "edge",
                    cell: s,
                })?;
                // Intrinsic orientation of w is mid -> bary (mid has the lower index).
                // The chain runs from the left facet (sign +1) to the right facet.
                chain.push((w, -sign));
            }
            chain.sort_unstable();
            // Boundary of the chain must be  -sum_t D1[s,t] *t  on dual nodes.
            let mut bnd: Vec<(usize, i32)> = Vec::new();
            for &(w, c) in &chain {
                let [lo, hi] = fine.edge(w);
                bnd.push((lo, -c));
                bnd.push((hi, c));
            }
            for &(t, sign) in primal.edge_facets(s) {
                let bary = refinement.barycenter_node(t);
                let got: i32 = bnd.iter().filter(|x| x.0 == bary).map(|x| x.1).sum();
                if got != -sign {
                    return Err(Error::DualOrientation { kind: "edge", cell: s });
                }
            }
            edge_chains.push(chain);
        }

        let mut facet_chains = vec![Vec::new(); primal.n_nodes()];
        for w in 0..fine.n_facets() {
            facet_chains[refinement.facet_corner(w)].push((w, 1));
        }

        let [n, e, f] = refinement.primal_counts();
        let mut c0 = CooMatrix::new(f, fine.n_nodes());
        for (t, &w) in node_chains.iter().enumerate() {
            c0.push(t, w, 1);
        }
        let mut c1 = CooMatrix::new(e, fine.n_edges());
        for (s, chain) in edge_chains.iter().enumerate() {
            for &(w, c) in chain {
                c1.push(s, w, c);
            }
        }
        let mut c2 = CooMatrix::new(n, fine.n_facets());
        for (p, chain) in facet_chains.iter().enumerate() {
            for &(w, c) in chain {
                c2.push(p, w, c);
            }
        }

        Ok(Self {
            node_chains,
            edge_chains,
            facet_chains,
            c0: CsrMatrix::from(&c0),
            c1: CsrMatrix::from(&c1),
            c2: CsrMatrix::from(&c2),
        })
    }

    /// Number of dual cells of dimension `q`.
    pub fn n_cells(&self, q: usize) -> usize {
        match q {
            0 => self.node_chains.len(),
            1 => self.edge_chains.len(),
            2 => self.facet_chains.len(),
            _ => 0,
        }
    }

    /// Chain of dual `q`-cell `v` as (refined `q`-cell, coefficient) pairs.
    pub fn chain(&self, q: usize, v: usize) -> Vec<(usize, i32)> {
        match q {
            0 => vec![(self.node_chains[v], 1)],
            1 => self.edge_chains[v].clone(),
            2 => self.facet_chains[v].clone(),
            _ => Vec::new(),
        }
    }

    /// Number of refined cells making up dual cell `v`.
    pub fn n_v(&self, q: usize, v: usize) -> usize {
        match q {
            0 => 1,
            1 => self.edge_chains[v].len(),
            2 => self.facet_chains[v].len(),
            _ => 0,
        }
    }

    /// Chain matrix `C^q`: rows are dual cells, columns refined cells.
    pub fn chain_matrix(&self, q: usize) -> &CsrMatrix<i32> {
        match q {
            0 => &self.c0,
            1 => &self.c1,
            _ => &self.c2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cross, unit_square_grid, SurfaceMesh};

    fn setup(mesh: &SurfaceMesh) -> (BarycentricRefinement, DualMesh) {
        let r = mesh.refine_barycentric();
        let d = DualMesh::build(mesh.complex(), &r).unwrap();
        (r, d)
    }

    #[test]
    fn chain_lengths() {
        let m = unit_square_grid(3, false);
        let (_, d) = setup(&m);
        for s in 0..m.n_edges() {
            let expect = if m.is_boundary_edge(s) { 1 } else { 2 };
            assert_eq!(d.n_v(1, s), expect);
            assert_eq!(d.chain_matrix(1).row(s).nnz(), expect);
        }
        for p in 0..m.n_nodes() {
            assert_eq!(d.n_v(2, p), 2 * m.node_facets(p).len());
            assert_eq!(d.chain_matrix(2).row(p).nnz(), d.n_v(2, p));
        }
        // interior node of the 3x3 grid has six facets
        let centre = 5;
        assert!(!m.is_boundary_node(centre));
        assert_eq!(m.node_facets(centre).len(), 6);
        assert_eq!(d.chain(2, centre).len(), 12);
        assert!(d.chain(2, centre).iter().all(|&(_, c)| c == 1));
    }

    #[test]
    fn interior_dual_edge_is_directed_path() {
        let m = unit_square_grid(1, true);
        let (r, d) = setup(&m);
        let fine = r.complex();
        let diag = m.find_edge(0, 3).unwrap();
        let chain = d.chain(1, diag);
        assert_eq!(chain.len(), 2);
        // walking the chain: tails and heads must link up through the midpoint
        let mid = r.midpoint_node(diag);
        let mut heads = 0;
        let mut tails = 0;
        for &(w, c) in &chain {
            let [lo, hi] = fine.edge(w);
            let (tail, head) = if c > 0 { (lo, hi) } else { (hi, lo) };
            heads += (head == mid) as i32;
            tails += (tail == mid) as i32;
        }
        assert_eq!((heads, tails), (1, 1));
    }

    #[test]
    fn dual_edges_cross_primal_edges_positively() {
        let m = unit_square_grid(2, false).refine_uniform();
        let (r, d) = setup(&m);
        let fine = r.refined_mesh().unwrap();
        for s in 0..m.n_edges() {
            let [a, b] = m.edge_points(s);
            let primal_dir = b - a;
            for (w, c) in d.chain(1, s) {
                let [p, q] = fine.edge_points(w);
                let dual_dir = (q - p) * c as f64;
                assert!(cross(&dual_dir, &primal_dir) > 0.0, "edge {s}");
            }
        }
    }

    #[test]
    fn boundary_chain_identities() {
        let m = unit_square_grid(3, false).refine_uniform();
        let (r, d) = setup(&m);
        let fine = r.complex();
        // q = 1:  C1 * D~0^T = -D1 * C0  on interior refined nodes
        let lhs = d.chain_matrix(1) * &fine.d0().transpose();
        let rhs = m.d1() * d.chain_matrix(0);
        let lhs = nalgebra::DMatrix::from(&lhs);
        let rhs = nalgebra::DMatrix::from(&rhs);
        for s in 0..m.n_edges() {
            for w in 0..fine.n_nodes() {
                if !fine.is_boundary_node(w) {
                    assert_eq!(lhs[(s, w)], -rhs[(s, w)]);
                }
            }
        }
        // q = 2:  C2 * D~1^T = D0 * C1  on interior refined edges
        let lhs = nalgebra::DMatrix::from(&(d.chain_matrix(2) * &fine.d1().transpose()));
        let rhs = nalgebra::DMatrix::from(&(m.d0() * d.chain_matrix(1)));
        for p in 0..m.n_nodes() {
            for w in 0..fine.n_edges() {
                if !fine.is_boundary_edge(w) {
                    assert_eq!(lhs[(p, w)], rhs[(p, w)]);
                }
            }
        }
    }
}
