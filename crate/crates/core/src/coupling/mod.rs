//! Operators transferring Whitney forms from a source mesh to a target mesh.
//!
//! The projection methods determine `w_j` on the target from
//! `b(beta, w_j) = b(beta, w_i)` for all multipliers `beta`, that is
//! `M_own w_j = M_cross w_i`. The multipliers are the B-C forms of the target
//! with the wedge pairing (`Bc`), or the Whitney forms of the target with the
//! Euclidean `L2` pairing (`Galerkin`). `DeRham` applies the de Rham map of
//! the target to the Whitney interpolant on the source.

mod solver;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra_sparse::{CooMatrix, CsrMatrix};

pub use solver::{
    condition_number, condition_number_dense, matvec, solve_cgs, solve_dense, SolveReport, SolverSettings,
};

use crate::bc::{BcSpace, BcVariant};
use crate::error::{Error, Result};
use crate::forms::{exterior_derivative, norm_l2, whitney_at, Degree, FormDoFs, FormValue};
use crate::mesh::{Point, SurfaceMesh};
use crate::overlay::quadrature::{quad_points, GAUSS_LEGENDRE_2};
use crate::overlay::{intersect_meshes, Locator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    DeRham,
    Galerkin,
    Bc,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::DeRham, Method::Galerkin, Method::Bc];

    /// Whether the method solves a linear system.
    pub fn is_projection(self) -> bool {
        self != Method::DeRham
    }

    pub fn pairing(self) -> Option<PairingKind> {
        match self {
            Method::DeRham => None,
            Method::Galerkin => Some(PairingKind::EuclideanL2),
            Method::Bc => Some(PairingKind::Wedge),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::DeRham => "derham",
            Method::Galerkin => "galerkin",
            Method::Bc => "bc",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "derham" => Ok(Method::DeRham),
            "galerkin" => Ok(Method::Galerkin),
            "bc" => Ok(Method::Bc),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairingKind {
    /// `b(beta, w) = int beta ^ w`, degrees adding up to 2; metric-free.
    Wedge,
    /// Euclidean inner product of proxies, equal degrees.
    EuclideanL2,
}

impl PairingKind {
    pub fn eval(self, left: &FormValue, right: &FormValue) -> Result<f64> {
        match self {
            PairingKind::Wedge => left.wedge(right),
            PairingKind::EuclideanL2 => left.inner(right),
        }
    }
}

/// A cell of integration: triangle, facet for the left factor, facet for the right factor.
type Cell = ([Point; 3], usize, usize);

fn local(mesh: &SurfaceMesh, degree: Degree, f: usize, p: &Point) -> Vec<(usize, FormValue)> {
    whitney_at(mesh, degree, f, &mesh.barycentric(f, p)).iter().collect()
}

/// Integrates `pairing(left_i, right_j)` over the cells with the degree-4 rule.
fn assemble<L, R>(n_rows: usize, n_cols: usize, cells: &[Cell], left: L, right: R, pairing: PairingKind) -> Result<CsrMatrix<f64>>
where
    L: Fn(usize, &Point) -> Vec<(usize, FormValue)>,
    R: Fn(usize, &Point) -> Vec<(usize, FormValue)>,
{
    let mut coo = CooMatrix::new(n_rows, n_cols);
    for (tri, fl, fr) in cells {
        let qp = quad_points(tri, 4)?;
        let mut block: Vec<(usize, usize, f64)> = Vec::new();
        for q in &qp {
            let lv = left(*fl, &q.point);
            let rv = right(*fr, &q.point);
            for (i, a) in &lv {
                for (j, b) in &rv {
                    let x = q.weight * pairing.eval(a, b)?;
                    match block.iter_mut().find(|e| e.0 == *i && e.1 == *j) {
                        Some(e) => e.2 += x,
                        None => block.push((*i, *j, x)),
                    }
                }
            }
        }
        for (i, j, x) in block {
            coo.push(i, j, x);
        }
    }
    Ok(CsrMatrix::from(&coo))
}

fn require_space<'a>(space: Option<&'a BcSpace>, target: &Arc<SurfaceMesh>) -> Result<&'a BcSpace> {
    let space = space.ok_or_else(|| Error::Config("B-C method needs the B-C space of the target".into()))?;
    if !crate::forms::same_mesh(space.primal(), target) {
        return Err(Error::Config("B-C space belongs to a different mesh".into()));
    }
    Ok(space)
}

/// Square pairing matrix on the target: rows are multipliers, columns the
/// Whitney `r`-forms of the target.
pub fn assemble_own(
    target: &Arc<SurfaceMesh>,
    method: Method,
    r: Degree,
    space: Option<&BcSpace>,
) -> Result<CsrMatrix<f64>> {
    let n = target.n_cells(r.as_usize());
    match method {
        Method::DeRham => Err(Error::Config("the de Rham method assembles no pairing matrix".into())),
        Method::Galerkin => {
            let cells: Vec<Cell> = (0..target.n_facets()).map(|t| (target.facet_points(t), t, t)).collect();
            let ev = |f: usize, p: &Point| local(target, r, f, p);
            assemble(n, n, &cells, ev, ev, PairingKind::EuclideanL2)
        }
        Method::Bc => {
            let space = require_space(space, target)?;
            let q = r.complement();
            let fine = space.refined();
            let cells: Vec<Cell> = (0..fine.n_facets())
                .map(|z| (fine.facet_points(z), z, space.refinement().facet_parent(z)))
                .collect();
            let left = |z: usize, p: &Point| space.local_values(q, z, &fine.barycentric(z, p));
            let right = |f: usize, p: &Point| local(target, r, f, p);
            assemble(space.basis().n_basis(q.as_usize()), n, &cells, left, right, PairingKind::Wedge)
        }
    }
}

/// Rectangular pairing matrix between target multipliers and source Whitney forms,
/// integrated over the overlay of the two meshes.
pub fn assemble_cross(
    target: &Arc<SurfaceMesh>,
    source: &Arc<SurfaceMesh>,
    method: Method,
    r: Degree,
    space: Option<&BcSpace>,
) -> Result<CsrMatrix<f64>> {
    let n_src = source.n_cells(r.as_usize());
    let right = |f: usize, p: &Point| local(source, r, f, p);
    match method {
        Method::DeRham => Err(Error::Config("the de Rham method assembles no pairing matrix".into())),
        Method::Galerkin => {
            let overlay = intersect_meshes(target, source)?;
            let cells: Vec<Cell> = overlay.cells().iter().map(|c| (c.points, c.parent_a, c.parent_b)).collect();
            let left = |f: usize, p: &Point| local(target, r, f, p);
            assemble(target.n_cells(r.as_usize()), n_src, &cells, left, right, PairingKind::EuclideanL2)
        }
        Method::Bc => {
            let space = require_space(space, target)?;
            let q = r.complement();
            let fine = space.refined();
            let overlay = intersect_meshes(fine, source)?;
            let cells: Vec<Cell> = overlay.cells().iter().map(|c| (c.points, c.parent_a, c.parent_b)).collect();
            let left = |z: usize, p: &Point| space.local_values(q, z, &fine.barycentric(z, p));
            assemble(space.basis().n_basis(q.as_usize()), n_src, &cells, left, right, PairingKind::Wedge)
        }
    }
}

/// Matrix of the de Rham operator: target degrees of freedom of the source
/// Whitney interpolant. Nodal values by point location, edge circulations
/// by clipping target edges against the source and two-point Gauss rules on
/// each piece, facet fluxes from overlay areas.
pub fn assemble_de_rham(target: &Arc<SurfaceMesh>, source: &Arc<SurfaceMesh>, r: Degree) -> Result<CsrMatrix<f64>> {
    let n_t = target.n_cells(r.as_usize());
    let n_s = source.n_cells(r.as_usize());
    let mut coo = CooMatrix::new(n_t, n_s);
    match r {
        Degree::Zero => {
            let locator = Locator::new(source);
            for (n, p) in target.coords().iter().enumerate() {
                let (f, bary) = locator.locate(p)?;
                for (k, &node) in source.facet(f).iter().enumerate() {
                    if bary[k] != 0.0 {
                        coo.push(n, node, bary[k]);
                    }
                }
            }
        }
        Degree::One => {
            let locator = Locator::new(source);
            for e in 0..target.n_edges() {
                let [a, b] = target.edge_points(e);
                let mut row: Vec<(usize, f64)> = Vec::new();
                for piece in locator.clip_segment(&a, &b)? {
                    let d = piece.end - piece.start;
                    for [s, w] in GAUSS_LEGENDRE_2 {
                        let p = piece.start + d * s;
                        for (id, v) in local(source, Degree::One, piece.facet, &p) {
                            let FormValue::Covector(c) = v else { unreachable!() };
                            let x = w * c.dot(&d);
                            match row.iter_mut().find(|y| y.0 == id) {
                                Some(y) => y.1 += x,
                                None => row.push((id, x)),
                            }
                        }
                    }
                }
                for (id, x) in row {
                    coo.push(e, id, x);
                }
            }
        }
        Degree::Two => {
            let overlay = intersect_meshes(target, source)?;
            for c in overlay.cells() {
                coo.push(c.parent_a, c.parent_b, c.area() / source.facet_area(c.parent_b));
            }
        }
    }
    Ok(CsrMatrix::from(&coo))
}

/// A transfer operator `Q^r` from a source mesh to a target mesh.
#[derive(Clone, Debug)]
pub struct CouplingOperator {
    method: Method,
    degree: Degree,
    source: Arc<SurfaceMesh>,
    target: Arc<SurfaceMesh>,
    m_own: Option<CsrMatrix<f64>>,
    m_cross: Option<CsrMatrix<f64>>,
    interpolation: Option<CsrMatrix<f64>>,
    settings: SolverSettings,
}

impl CouplingOperator {
    /// Assembles the operator. The B-C method needs the B-C space of the
    /// target; it is built on the fly when `space` is `None`.
    pub fn new(
        method: Method,
        degree: Degree,
        source: &Arc<SurfaceMesh>,
        target: &Arc<SurfaceMesh>,
        space: Option<&BcSpace>,
    ) -> Result<Self> {
        let mut op = Self {
            method,
            degree,
            source: source.clone(),
            target: target.clone(),
            m_own: None,
            m_cross: None,
            interpolation: None,
            settings: SolverSettings::default(),
        };
        match method {
            Method::DeRham => op.interpolation = Some(assemble_de_rham(target, source, degree)?),
            Method::Galerkin => {
                op.m_own = Some(assemble_own(target, method, degree, None)?);
                op.m_cross = Some(assemble_cross(target, source, method, degree, None)?);
            }
            Method::Bc => {
                let built;
                let space = match space {
                    Some(s) => s,
                    None => {
                        built = BcSpace::new(target.clone(), BcVariant::ZeroTrace)?;
                        &built
                    }
                };
                op.m_own = Some(assemble_own(target, method, degree, Some(space))?);
                op.m_cross = Some(assemble_cross(target, source, method, degree, Some(space))?);
            }
        }
        Ok(op)
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn set_settings(&mut self, settings: SolverSettings) {
        self.settings = settings;
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn source(&self) -> &Arc<SurfaceMesh> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SurfaceMesh> {
        &self.target
    }

    pub fn m_own(&self) -> Option<&CsrMatrix<f64>> {
        self.m_own.as_ref()
    }

    pub fn m_cross(&self) -> Option<&CsrMatrix<f64>> {
        self.m_cross.as_ref()
    }

    /// De Rham interpolation matrix (de Rham method only).
    pub fn interpolation(&self) -> Option<&CsrMatrix<f64>> {
        self.interpolation.as_ref()
    }

    /// Applies the operator, returning the target form and, for projection
    /// methods, the solver report.
    pub fn apply_with_report(&self, w: &FormDoFs) -> Result<(FormDoFs, Option<SolveReport>)> {
        if w.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree.as_usize(),
                found: w.degree().as_usize(),
            });
        }
        if !crate::forms::same_mesh(w.mesh(), &self.source) {
            return Err(Error::DimensionMismatch("form does not live on the source mesh".into()));
        }
        if let Some(p) = &self.interpolation {
            let out = FormDoFs::new(self.target.clone(), self.degree, matvec(p, w.coeffs()))?;
            return Ok((out, None));
        }
        let (own, cross) = (self.m_own.as_ref().unwrap(), self.m_cross.as_ref().unwrap());
        let rhs = matvec(cross, w.coeffs());
        let report = solve_cgs(own, &rhs, &self.settings)?;
        let out = FormDoFs::new(self.target.clone(), self.degree, report.x.clone())?;
        Ok((out, Some(report)))
    }

    pub fn apply(&self, w: &FormDoFs) -> Result<FormDoFs> {
        self.apply_with_report(w).map(|x| x.0)
    }

    /// `kappa(M_own)`; `None` for the de Rham method.
    pub fn condition_number(&self) -> Option<f64> {
        self.m_own.as_ref().map(condition_number)
    }

    /// Text header describing the operator.
    pub fn metadata(&self, kappa: Option<f64>) -> String {
        let (rows, cols) = self
            .m_own
            .as_ref()
            .or(self.interpolation.as_ref())
            .map_or((0, 0), |m| (m.nrows(), m.ncols()));
        let mut s = format!(
            "# method={} degree={} rows={} cols={} source_cells={}",
            self.method,
            self.degree,
            rows,
            cols,
            self.source.n_cells(self.degree.as_usize())
        );
        if let Some(k) = kappa {
            s.push_str(&format!(" kappa={k:.6e}"));
        }
        s.push('\n');
        s
    }
}

/// Coordinate text, one `i j value` line per stored entry.
pub fn matrix_to_coo_text(m: &CsrMatrix<f64>) -> String {
    let mut s = String::new();
    for (i, row) in m.row_iter().enumerate() {
        for (j, v) in row.col_indices().iter().zip(row.values()) {
            s.push_str(&format!("{i} {j} {v:?}\n"));
        }
    }
    s
}

/// `|d Q^r w - Q^{r+1} d w|` in `L2` on the target; zero for commuting operators.
pub fn check_commuting(q_r: &CouplingOperator, q_next: &CouplingOperator, w: &FormDoFs) -> Result<f64> {
    if q_next.degree() != q_r.degree().next().ok_or(Error::UnsupportedDegree(2))? {
        return Err(Error::DegreeMismatch {
            expected: q_r.degree().as_usize() + 1,
            found: q_next.degree().as_usize(),
        });
    }
    let lhs = exterior_derivative(&q_r.apply(w)?)?;
    let rhs = q_next.apply(&exterior_derivative(w)?)?;
    Ok(norm_l2(&lhs.sub(&rhs)?))
}
