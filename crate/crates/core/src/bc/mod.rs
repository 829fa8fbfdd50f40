//! Buffa-Christiansen basis forms as linear combinations of Whitney forms
//! on the barycentric refinement.
//!
//! Row `v` of the coefficient matrix `R^q` expresses the basis `q`-form of
//! dual cell `v` in the Whitney `q`-forms of the refined mesh. The rows of
//! `R^2` are fixed by equal weights on the dual facet; the rows of `R^1` and
//! `R^0` follow from the discrete exterior derivative identities
//!
//! ```text
//! R^1 D~^1 = (D^0)^T R^2,        R^0 D~^0 = -(D^1)^T R^1
//! ```
//!
//! solved one refined cell at a time inside the support of each basis form.

mod verify;

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra_sparse::{CooMatrix, CsrMatrix};

pub use verify::{
    complex_residual, conformity_defect, exterior_derivative_residual, interpolation_deviation,
    partition_of_unity_sums, verify_space, Check,
};

use crate::error::{Error, Result};
use crate::forms::{whitney_at, Degree, FormValue};
use crate::mesh::{BarycentricRefinement, Complex, DualMesh, Point, SurfaceMesh};

/// Residual above which a coefficient equation counts as violated.
pub const CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcVariant {
    /// Surface without boundary; rejects meshes with boundary.
    Closed,
    /// Dual mesh truncated at the boundary; basis forms have vanishing
    /// boundary trace.
    ZeroTrace,
}

/// Coefficient matrices `R^q` (rows: dual cells, columns: refined cells)
/// together with the supports `U^q_v` as sorted lists of refined facets.
#[derive(Clone, Debug)]
pub struct BcBasis {
    variant: BcVariant,
    r: [CsrMatrix<f64>; 3],
    rt: [CsrMatrix<f64>; 3],
    supports: [Vec<Vec<usize>>; 3],
}

/// Refined facets making up the supports `U^q_v`, indexed `[q][v]`.
///
/// `U^2_p` is the closed dual facet of node `p`, `U^1` of a dual edge is the
/// union of the supports of the two dual facets it bounds, and `U^0` of a
/// dual node the union over its three dual edges.
pub fn support_sets(primal: &Complex, refinement: &BarycentricRefinement) -> [Vec<Vec<usize>>; 3] {
    let fine = refinement.complex();
    let mut u2 = vec![Vec::new(); primal.n_nodes()];
    for z in 0..fine.n_facets() {
        u2[refinement.facet_corner(z)].push(z);
    }
    let merge = |nodes: &[usize]| {
        let mut out: Vec<usize> = nodes.iter().flat_map(|&p| u2[p].iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let u1 = primal.edges().iter().map(|e| merge(e)).collect();
    let u0 = primal.facets().iter().map(|t| merge(t)).collect();
    [u0, u1, u2]
}

fn entry(m: &CsrMatrix<f64>, i: usize, j: usize) -> f64 {
    let row = m.row(i);
    match row.col_indices().binary_search(&j) {
        Ok(k) => row.values()[k],
        Err(_) => 0.0,
    }
}

fn row_entries(m: &CsrMatrix<f64>, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
    let range = m.row_offsets()[i]..m.row_offsets()[i + 1];
    m.col_indices()[range.clone()].iter().copied().zip(m.values()[range].iter().copied())
}

fn to_csr(n_rows: usize, n_cols: usize, rows: &[Vec<(usize, f64)>]) -> CsrMatrix<f64> {
    let mut coo = CooMatrix::new(n_rows, n_cols);
    for (v, row) in rows.iter().enumerate() {
        for &(w, x) in row {
            coo.push(v, w, x);
        }
    }
    CsrMatrix::from(&coo)
}

/// `R^2`: every refined facet of the dual facet gets `c / n_v`.
pub fn build_bc_2forms(dual: &DualMesh, n_refined_facets: usize) -> CsrMatrix<f64> {
    let rows: Vec<Vec<(usize, f64)>> = (0..dual.n_cells(2))
        .map(|p| {
            let n = dual.n_v(2, p) as f64;
            let mut row: Vec<(usize, f64)> = dual.chain(2, p).into_iter().map(|(w, c)| (w, c as f64 / n)).collect();
            row.sort_unstable_by_key(|x| x.0);
            row
        })
        .collect();
    to_csr(dual.n_cells(2), n_refined_facets, &rows)
}

/// Reusable membership marks over refined cells.
struct Marks {
    stamp: Vec<usize>,
    current: usize,
}

impl Marks {
    fn new(n: usize) -> Self {
        Self {
            stamp: vec![usize::MAX; n],
            current: 0,
        }
    }

    fn reset(&mut self, id: usize, cells: &[usize]) {
        self.current = id;
        for &c in cells {
            self.stamp[c] = id;
        }
    }

    fn contains(&self, c: usize) -> bool {
        self.stamp[c] == self.current
    }
}

fn set_known(known: &mut Vec<(usize, f64)>, w: usize, value: f64) {
    match known.iter_mut().find(|k| k.0 == w) {
        Some(k) => debug_assert!(k.1 == value, "conflicting prescription on refined cell {w}"),
        None => known.push((w, value)),
    }
}

fn lookup(known: &[(usize, f64)], w: usize) -> Option<f64> {
    known.iter().find(|k| k.0 == w).map(|k| k.1)
}

/// `R^1`, one row per primal edge `e = (a, b)`.
///
/// Chain edges of the dual edge get `c / n_v`; edges on the boundary of the
/// support (including the domain boundary) get 0; the two refined halves of
/// `e` get 0 at every interior endpoint. The remaining coefficients come
/// from `sum_w R[w] D~1[w, z] = R2[b, z] - R2[a, z]` over refined facets `z`
/// of the support, each solved once it has a single unknown. Every equation
/// is then checked, which covers the one redundant equation per fan.
pub fn build_bc_1forms(
    primal: &Complex,
    refinement: &BarycentricRefinement,
    dual: &DualMesh,
    r2: &CsrMatrix<f64>,
    supports: &[Vec<usize>],
) -> Result<CsrMatrix<f64>> {
    let fine = refinement.complex();
    let mut marks = Marks::new(fine.n_facets());
    let mut rows = Vec::with_capacity(primal.n_edges());
    for e in 0..primal.n_edges() {
        let [a, b] = primal.edge(e);
        let u = &supports[e];
        marks.reset(e, u);

        let mut known: Vec<(usize, f64)> = Vec::new();
        let n_v = dual.n_v(1, e) as f64;
        for (w, c) in dual.chain(1, e) {
            set_known(&mut known, w, c as f64 / n_v);
        }
        for &z in u {
            for (w, _) in fine.facet_edges(z) {
                let inside = fine.edge_facets(w).iter().filter(|&&(g, _)| marks.contains(g)).count();
                if inside < 2 {
                    set_known(&mut known, w, 0.0);
                }
            }
        }
        for (half, endpoint) in refinement.halves_of_edge(primal, e).into_iter().zip([a, b]) {
            if !primal.is_boundary_node(endpoint) {
                set_known(&mut known, half, 0.0);
            }
        }

        let rhs = |z: usize| entry(r2, b, z) - entry(r2, a, z);
        let mut pending: Vec<usize> = u.clone();
        loop {
            let before = pending.len();
            pending.retain(|&z| {
                let edges = fine.facet_edges(z);
                let unknown: Vec<(usize, i32)> =
                    edges.iter().copied().filter(|&(w, _)| lookup(&known, w).is_none()).collect();
                match unknown.as_slice() {
                    [] => false,
                    [(w, sign)] => {
                        let rest: f64 = edges
                            .iter()
                            .filter(|&&(x, _)| x != *w)
                            .map(|&(x, s)| s as f64 * lookup(&known, x).unwrap_or(0.0))
                            .sum();
                        known.push((*w, (rhs(z) - rest) / *sign as f64));
                        false
                    }
                    _ => true,
                }
            });
            if pending.is_empty() || pending.len() == before {
                break;
            }
        }
        if !pending.is_empty() {
            return Err(Error::Underdetermined {
                degree: 1,
                dual_cell: e,
                remaining: pending.len(),
            });
        }
        for &z in u {
            let lhs: f64 = fine
                .facet_edges(z)
                .iter()
                .map(|&(w, s)| s as f64 * lookup(&known, w).unwrap_or(0.0))
                .sum();
            let residual = (lhs - rhs(z)).abs();
            if residual > CONSISTENCY_TOL {
                return Err(Error::ConsistencyResidual {
                    degree: 1,
                    dual_cell: e,
                    residual,
                });
            }
        }
        known.retain(|k| k.1 != 0.0);
        known.sort_unstable_by_key(|k| k.0);
        rows.push(known);
    }
    Ok(to_csr(primal.n_edges(), fine.n_edges(), &rows))
}

/// `R^0`, one row per primal facet `t`.
///
/// The barycenter of `t` gets 1 and nodes on the boundary of the support
/// (including domain boundary nodes) get 0. Differences along refined edges,
/// `R[head] - R[tail] = -sum_s D1[s, t] R1[s, w]`, are propagated over a
/// breadth-first spanning tree rooted at the barycenter; the equations of
/// all remaining edges are checked afterwards.
pub fn build_bc_0forms(
    primal: &Complex,
    refinement: &BarycentricRefinement,
    r1: &CsrMatrix<f64>,
    supports: &[Vec<usize>],
) -> Result<CsrMatrix<f64>> {
    let fine = refinement.complex();
    let mut marks = Marks::new(fine.n_facets());
    let mut rows = Vec::with_capacity(primal.n_facets());
    for t in 0..primal.n_facets() {
        let u = &supports[t];
        marks.reset(t, u);
        let sides = primal.facet_edges(t);
        let rhs = |w: usize| -> f64 { -sides.iter().map(|&(s, d)| d as f64 * entry(r1, s, w)).sum::<f64>() };

        let mut nodes: Vec<usize> = u.iter().flat_map(|&z| fine.facet(z)).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut edges: Vec<usize> = u.iter().flat_map(|&z| fine.facet_edges(z).map(|x| x.0)).collect();
        edges.sort_unstable();
        edges.dedup();

        let mut known: Vec<(usize, f64)> = Vec::new();
        let centre = refinement.barycenter_node(t);
        set_known(&mut known, centre, 1.0);
        let mut interior = Vec::new();
        for &n in &nodes {
            let on_rim = fine.is_boundary_node(n) || fine.node_facets(n).iter().any(|&g| !marks.contains(g));
            if on_rim {
                set_known(&mut known, n, 0.0);
            } else {
                interior.push(n);
            }
        }

        let mut queue: VecDeque<usize> = VecDeque::from([centre]);
        while let Some(n) = queue.pop_front() {
            let value = lookup(&known, n).expect("queued nodes are known");
            for &w in fine.node_edges(n) {
                let [lo, hi] = fine.edge(w);
                let (other, next) = if lo == n {
                    (hi, value + rhs(w))
                } else {
                    (lo, value - rhs(w))
                };
                if interior.binary_search(&other).is_ok() && lookup(&known, other).is_none() {
                    known.push((other, next));
                    queue.push_back(other);
                }
            }
        }
        let remaining = interior.iter().filter(|&&n| lookup(&known, n).is_none()).count();
        if remaining > 0 {
            return Err(Error::Underdetermined {
                degree: 0,
                dual_cell: t,
                remaining,
            });
        }
        for &w in &edges {
            let [lo, hi] = fine.edge(w);
            let diff = lookup(&known, hi).unwrap_or(0.0) - lookup(&known, lo).unwrap_or(0.0);
            let residual = (diff - rhs(w)).abs();
            if residual > CONSISTENCY_TOL {
                return Err(Error::ConsistencyResidual {
                    degree: 0,
                    dual_cell: t,
                    residual,
                });
            }
        }
        known.retain(|k| k.1 != 0.0);
        known.sort_unstable_by_key(|k| k.0);
        rows.push(known);
    }
    Ok(to_csr(primal.n_facets(), fine.n_nodes(), &rows))
}

impl BcBasis {
    /// Builds all three coefficient matrices. Uses only the topology of the
    /// meshes, never coordinates.
    pub fn build(
        primal: &Complex,
        refinement: &BarycentricRefinement,
        dual: &DualMesh,
        variant: BcVariant,
    ) -> Result<Self> {
        if variant == BcVariant::Closed && primal.has_boundary() {
            return Err(Error::MeshHasBoundary);
        }
        let supports = support_sets(primal, refinement);
        let r2 = build_bc_2forms(dual, refinement.complex().n_facets());
        let r1 = build_bc_1forms(primal, refinement, dual, &r2, &supports[1])?;
        let r0 = build_bc_0forms(primal, refinement, &r1, &supports[0])?;
        let r = [r0, r1, r2];
        let rt = [r[0].transpose(), r[1].transpose(), r[2].transpose()];
        Ok(Self {
            variant,
            r,
            rt,
            supports,
        })
    }

    pub fn variant(&self) -> BcVariant {
        self.variant
    }

    /// `R^q`.
    pub fn matrix(&self, q: usize) -> &CsrMatrix<f64> {
        &self.r[q]
    }

    /// Mutable access to `R^q`, for tampering in tests of the verification suite.
    pub fn matrix_mut(&mut self, q: usize) -> &mut CsrMatrix<f64> {
        &mut self.r[q]
    }

    /// Dual cells whose basis `q`-form has a nonzero coefficient on refined
    /// `q`-cell `w`, with the coefficients.
    pub fn column(&self, q: usize, w: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        row_entries(&self.rt[q], w)
    }

    pub fn row(&self, q: usize, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        row_entries(&self.r[q], v)
    }

    /// Support `U^q_v` as sorted refined facets.
    pub fn support(&self, q: usize, v: usize) -> &[usize] {
        &self.supports[q][v]
    }

    pub fn n_basis(&self, q: usize) -> usize {
        self.r[q].nrows()
    }

    /// Coordinate text, one `q v w value` line per stored coefficient.
    pub fn to_coo_text(&self) -> String {
        let mut s = String::new();
        for q in 0..3 {
            for v in 0..self.r[q].nrows() {
                for (w, x) in self.row(q, v) {
                    let _ = writeln!(s, "{q} {v} {w} {x:?}");
                }
            }
        }
        s
    }
}

/// B-C complex of a planar mesh with everything needed to evaluate it.
#[derive(Clone, Debug)]
pub struct BcSpace {
    primal: Arc<SurfaceMesh>,
    refinement: BarycentricRefinement,
    refined: Arc<SurfaceMesh>,
    dual: DualMesh,
    basis: BcBasis,
}

impl BcSpace {
    pub fn new(primal: Arc<SurfaceMesh>, variant: BcVariant) -> Result<Self> {
        let refinement = primal.refine_barycentric();
        let refined = Arc::new(refinement.refined_mesh().expect("geometric refinement has coordinates"));
        let dual = DualMesh::build(primal.complex(), &refinement)?;
        let basis = BcBasis::build(primal.complex(), &refinement, &dual, variant)?;
        Ok(Self {
            primal,
            refinement,
            refined,
            dual,
            basis,
        })
    }

    pub fn primal(&self) -> &Arc<SurfaceMesh> {
        &self.primal
    }

    pub fn refinement(&self) -> &BarycentricRefinement {
        &self.refinement
    }

    pub fn refined(&self) -> &Arc<SurfaceMesh> {
        &self.refined
    }

    pub fn dual(&self) -> &DualMesh {
        &self.dual
    }

    pub fn basis(&self) -> &BcBasis {
        &self.basis
    }

    pub fn basis_mut(&mut self) -> &mut BcBasis {
        &mut self.basis
    }

    /// Values at barycentric coordinates `bary` of refined facet `z` of all
    /// basis `q`-forms that do not vanish there, as `(dual cell, value)`.
    pub fn local_values(&self, q: Degree, z: usize, bary: &[f64; 3]) -> Vec<(usize, FormValue)> {
        let local = whitney_at(&self.refined, q, z, bary);
        let mut out: Vec<(usize, FormValue)> = Vec::new();
        for (w, value) in local.iter() {
            for (v, c) in self.basis.column(q.as_usize(), w) {
                match out.iter_mut().find(|x| x.0 == v) {
                    Some(x) => x.1 = x.1.axpy(c, &value),
                    None => out.push((v, value.scaled(c))),
                }
            }
        }
        out.sort_unstable_by_key(|x| x.0);
        out
    }
}

/// Value of the basis `q`-form of dual cell `v` at `p` in refined facet `z`.
/// Zero outside the support.
pub fn eval_bc_form(space: &BcSpace, q: Degree, v: usize, z: usize, p: &Point) -> Result<FormValue> {
    let qi = q.as_usize();
    if space.basis.support(qi, v).binary_search(&z).is_err() {
        return Ok(FormValue::zero(q));
    }
    let local = crate::forms::eval_whitney(&space.refined, q, z, p)?;
    let m = space.basis.matrix(qi);
    Ok(local
        .iter()
        .fold(FormValue::zero(q), |acc, (w, value)| acc.axpy(entry(m, v, w), &value)))
}

#[cfg(test)]
mod tests;
