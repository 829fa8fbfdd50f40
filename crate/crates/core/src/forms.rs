//! Lowest-order Whitney forms on planar meshes: evaluation, de Rham maps,
//! the discrete exterior derivative and L2 norms.
//!
//! Forms are represented by Euclidean proxies: a scalar for 0-forms, a
//! covector `(a, b)` for `a dx + b dy`, and a density `c` for `c dx^dy`.
//! Edge degrees of freedom follow the intrinsic edge orientation (lower node
//! index to higher), facet degrees of freedom the counterclockwise one.

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::mesh::{Point, SurfaceMesh};
use crate::overlay::quadrature::{quad_points, triangle_rule, GAUSS_LEGENDRE_5};
use crate::overlay::Overlay;

/// Tolerance on barycentric coordinates for "point lies in facet".
pub const INSIDE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Degree {
    Zero,
    One,
    Two,
}

impl Degree {
    pub fn new(r: usize) -> Result<Self> {
        match r {
            0 => Ok(Degree::Zero),
            1 => Ok(Degree::One),
            2 => Ok(Degree::Two),
            other => Err(Error::UnsupportedDegree(other)),
        }
    }

    pub fn as_usize(self) -> usize {
        self as usize
    }

    /// Degree of the exterior derivative, if any.
    pub fn next(self) -> Option<Self> {
        match self {
            Degree::Zero => Some(Degree::One),
            Degree::One => Some(Degree::Two),
            Degree::Two => None,
        }
    }

    /// Complementary degree `2 - r`.
    pub fn complement(self) -> Self {
        match self {
            Degree::Zero => Degree::Two,
            Degree::One => Degree::One,
            Degree::Two => Degree::Zero,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_usize())
    }
}

fn check_degree(expected: Degree, found: Degree) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DegreeMismatch {
            expected: expected.as_usize(),
            found: found.as_usize(),
        })
    }
}

/// Pointwise value of a form through its Euclidean proxy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FormValue {
    Scalar(f64),
    Covector(Vector2<f64>),
    Density(f64),
}

impl FormValue {
    pub fn zero(degree: Degree) -> Self {
        match degree {
            Degree::Zero => FormValue::Scalar(0.0),
            Degree::One => FormValue::Covector(Vector2::zeros()),
            Degree::Two => FormValue::Density(0.0),
        }
    }

    pub fn degree(&self) -> Degree {
        match self {
            FormValue::Scalar(_) => Degree::Zero,
            FormValue::Covector(_) => Degree::One,
            FormValue::Density(_) => Degree::Two,
        }
    }

    pub fn scaled(self, s: f64) -> Self {
        match self {
            FormValue::Scalar(v) => FormValue::Scalar(s * v),
            FormValue::Covector(v) => FormValue::Covector(v * s),
            FormValue::Density(v) => FormValue::Density(s * v),
        }
    }

    /// `self + s * other`; both values must have the same degree.
    pub fn axpy(self, s: f64, other: &FormValue) -> Self {
        match (self, other) {
            (FormValue::Scalar(a), FormValue::Scalar(b)) => FormValue::Scalar(a + s * b),
            (FormValue::Covector(a), FormValue::Covector(b)) => FormValue::Covector(a + b * s),
            (FormValue::Density(a), FormValue::Density(b)) => FormValue::Density(a + s * b),
            _ => panic!("axpy on form values of different degree"),
        }
    }

    /// Coefficient of `dx^dy` in `self ^ other`; degrees must add up to 2.
    pub fn wedge(&self, other: &FormValue) -> Result<f64> {
        match (self, other) {
            (FormValue::Scalar(a), FormValue::Density(b)) => Ok(a * b),
            (FormValue::Density(a), FormValue::Scalar(b)) => Ok(a * b),
            (FormValue::Covector(a), FormValue::Covector(b)) => Ok(a.x * b.y - a.y * b.x),
            _ => Err(Error::DegreeMismatch {
                expected: 2 - self.degree().as_usize(),
                found: other.degree().as_usize(),
            }),
        }
    }

    /// Euclidean inner product of proxies of equal degree.
    pub fn inner(&self, other: &FormValue) -> Result<f64> {
        match (self, other) {
            (FormValue::Scalar(a), FormValue::Scalar(b)) => Ok(a * b),
            (FormValue::Covector(a), FormValue::Covector(b)) => Ok(a.dot(b)),
            (FormValue::Density(a), FormValue::Density(b)) => Ok(a * b),
            _ => Err(Error::DegreeMismatch {
                expected: self.degree().as_usize(),
                found: other.degree().as_usize(),
            }),
        }
    }

    pub fn norm_squared(&self) -> f64 {
        match self {
            FormValue::Scalar(v) | FormValue::Density(v) => v * v,
            FormValue::Covector(v) => v.norm_squared(),
        }
    }
}

/// Values of the (at most three) Whitney basis forms supported on a facet.
#[derive(Clone, Copy, Debug)]
pub struct LocalBasis {
    pub ids: [usize; 3],
    pub values: [FormValue; 3],
    pub len: usize,
}

impl LocalBasis {
    pub fn iter(&self) -> impl Iterator<Item = (usize, FormValue)> + '_ {
        (0..self.len).map(move |k| (self.ids[k], self.values[k]))
    }
}

/// Whitney basis of degree `degree` on facet `f` at barycentric coordinates `bary`.
pub(crate) fn whitney_at(mesh: &SurfaceMesh, degree: Degree, f: usize, bary: &[f64; 3]) -> LocalBasis {
    let nodes = mesh.facet(f);
    match degree {
        Degree::Zero => LocalBasis {
            ids: nodes,
            values: bary.map(FormValue::Scalar),
            len: 3,
        },
        Degree::One => {
            let p = mesh.facet_points(f);
            let twice_area = 2.0 * mesh.facet_area(f);
            let grad = |k: usize| {
                let d = p[(k + 2) % 3] - p[(k + 1) % 3];
                Vector2::new(-d.y, d.x) / twice_area
            };
            let g = [grad(0), grad(1), grad(2)];
            let edges = mesh.facet_edges(f);
            let mut values = [FormValue::zero(Degree::One); 3];
            let mut ids = [0; 3];
            for k in 0..3 {
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                let (e, sign) = edges[k];
                let w = g[j] * bary[i] - g[i] * bary[j];
                ids[k] = e;
                values[k] = FormValue::Covector(w * sign as f64);
            }
            LocalBasis { ids, values, len: 3 }
        }
        Degree::Two => LocalBasis {
            ids: [f, 0, 0],
            values: [
                FormValue::Density(1.0 / mesh.facet_area(f)),
                FormValue::Density(0.0),
                FormValue::Density(0.0),
            ],
            len: 1,
        },
    }
}

fn bary_inside(mesh: &SurfaceMesh, f: usize, p: &Point) -> Result<[f64; 3]> {
    let b = mesh.barycentric(f, p);
    let min = b.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -INSIDE_TOL {
        return Err(Error::PointOutsideFacet {
            facet: f,
            x: p.x,
            y: p.y,
            min_bary: min,
        });
    }
    Ok(b)
}

/// Values of all Whitney basis forms of degree `degree` supported on facet `f` at `p`.
pub fn eval_whitney(mesh: &SurfaceMesh, degree: Degree, f: usize, p: &Point) -> Result<LocalBasis> {
    let b = bary_inside(mesh, f, p)?;
    Ok(whitney_at(mesh, degree, f, &b))
}

type ScalarFn = dyn Fn(&Point) -> f64 + Send + Sync;
type CovectorFn = dyn Fn(&Point) -> Vector2<f64> + Send + Sync;

/// A smooth form given by a closure evaluating its proxy.
#[derive(Clone)]
pub enum AnalyticForm {
    Scalar(Arc<ScalarFn>),
    OneForm(Arc<CovectorFn>),
    Density(Arc<ScalarFn>),
}

impl fmt::Debug for AnalyticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnalyticForm(degree {})", self.degree())
    }
}

impl AnalyticForm {
    pub fn scalar(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        AnalyticForm::Scalar(Arc::new(f))
    }

    pub fn one_form(f: impl Fn(&Point) -> Vector2<f64> + Send + Sync + 'static) -> Self {
        AnalyticForm::OneForm(Arc::new(f))
    }

    pub fn density(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        AnalyticForm::Density(Arc::new(f))
    }

    pub fn degree(&self) -> Degree {
        match self {
            AnalyticForm::Scalar(_) => Degree::Zero,
            AnalyticForm::OneForm(_) => Degree::One,
            AnalyticForm::Density(_) => Degree::Two,
        }
    }

    pub fn eval(&self, p: &Point) -> FormValue {
        match self {
            AnalyticForm::Scalar(f) => FormValue::Scalar(f(p)),
            AnalyticForm::OneForm(f) => FormValue::Covector(f(p)),
            AnalyticForm::Density(f) => FormValue::Density(f(p)),
        }
    }
}

/// Coefficients of a Whitney form on a mesh.
#[derive(Clone, Debug)]
pub struct FormDoFs {
    mesh: Arc<SurfaceMesh>,
    degree: Degree,
    coeffs: Vec<f64>,
}

impl FormDoFs {
    pub fn new(mesh: Arc<SurfaceMesh>, degree: Degree, coeffs: Vec<f64>) -> Result<Self> {
        let expected = mesh.n_cells(degree.as_usize());
        if coeffs.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Self { mesh, degree, coeffs })
    }

    pub fn zeros(mesh: Arc<SurfaceMesh>, degree: Degree) -> Self {
        let n = mesh.n_cells(degree.as_usize());
        Self {
            mesh,
            degree,
            coeffs: vec![0.0; n],
        }
    }

    pub fn mesh(&self) -> &Arc<SurfaceMesh> {
        &self.mesh
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self - other` on the same mesh.
    pub fn sub(&self, other: &FormDoFs) -> Result<Self> {
        check_degree(self.degree, other.degree)?;
        if !same_mesh(&self.mesh, &other.mesh) {
            return Err(Error::DimensionMismatch("forms live on different meshes".into()));
        }
        Ok(Self {
            mesh: self.mesh.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// Text dump: `degree n` header, then one coefficient per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.degree, self.coeffs.len());
        for c in &self.coeffs {
            s.push_str(&format!("{c:?}\n"));
        }
        s
    }

    pub fn from_text(mesh: Arc<SurfaceMesh>, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty form file".into(),
        })?;
        let parts: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?;
        if parts.len() != 2 {
            return Err(Error::Parse {
                line: 1,
                message: "expected `degree n`".into(),
            });
        }
        let degree = Degree::new(parts[0])?;
        let coeffs = lines
            .take(parts[1])
            .map(|(i, l)| {
                l.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(mesh, degree, coeffs)
    }
}

pub(crate) fn same_mesh(a: &Arc<SurfaceMesh>, b: &Arc<SurfaceMesh>) -> bool {
    Arc::ptr_eq(a, b) || (a.coords() == b.coords() && a.complex() == b.complex())
}

/// Degrees of freedom of a smooth form: nodal values, edge circulations
/// (5-point Gauss-Legendre) or facet fluxes (degree-4 triangle rule).
pub fn de_rham_map(mesh: &Arc<SurfaceMesh>, form: &AnalyticForm) -> FormDoFs {
    let coeffs = match form {
        AnalyticForm::Scalar(f) => mesh.coords().iter().map(|p| f(p)).collect(),
        AnalyticForm::OneForm(f) => (0..mesh.n_edges())
            .map(|e| {
                let [a, b] = mesh.edge_points(e);
                let t = b - a;
                GAUSS_LEGENDRE_5
                    .iter()
                    .map(|&[s, w]| w * f(&(a + t * s)).dot(&t))
                    .sum()
            })
            .collect(),
        AnalyticForm::Density(f) => (0..mesh.n_facets())
            .map(|t| {
                quad_points(&mesh.facet_points(t), 4)
                    .expect("order 4 is supported")
                    .iter()
                    .map(|q| q.weight * f(&q.point))
                    .sum()
            })
            .collect(),
    };
    FormDoFs {
        mesh: mesh.clone(),
        degree: form.degree(),
        coeffs,
    }
}

/// `d w`: applies the transposed incidence matrix to the coefficients.
pub fn exterior_derivative(w: &FormDoFs) -> Result<FormDoFs> {
    let mesh = &w.mesh;
    let (degree, coeffs) = match w.degree {
        Degree::Zero => (
            Degree::One,
            mesh.edges().iter().map(|&[a, b]| w.coeffs[b] - w.coeffs[a]).collect(),
        ),
        Degree::One => (
            Degree::Two,
            (0..mesh.n_facets())
                .map(|f| {
                    mesh.facet_edges(f)
                        .iter()
                        .map(|&(e, s)| s as f64 * w.coeffs[e])
                        .sum()
                })
                .collect(),
        ),
        Degree::Two => return Err(Error::UnsupportedDegree(2)),
    };
    Ok(FormDoFs {
        mesh: mesh.clone(),
        degree,
        coeffs,
    })
}

pub(crate) fn combine(basis: &LocalBasis, coeffs: &[f64], degree: Degree) -> FormValue {
    basis
        .iter()
        .fold(FormValue::zero(degree), |acc, (id, v)| acc.axpy(coeffs[id], &v))
}

/// Value of the Whitney interpolant `w` at a point of facet `f`.
pub fn eval_form(w: &FormDoFs, f: usize, p: &Point) -> Result<FormValue> {
    let basis = eval_whitney(&w.mesh, w.degree, f, p)?;
    Ok(combine(&basis, &w.coeffs, w.degree))
}

/// `L2` norm of the Euclidean proxy of `w`.
pub fn norm_l2(w: &FormDoFs) -> f64 {
    let rule = triangle_rule(4).expect("order 4 is supported");
    let mesh = &w.mesh;
    let mut sum = 0.0;
    for f in 0..mesh.n_facets() {
        let area = mesh.facet_area(f);
        for (b, wt) in rule {
            let v = combine(&whitney_at(mesh, w.degree, f, b), &w.coeffs, w.degree);
            sum += wt * area * v.norm_squared();
        }
    }
    sum.sqrt()
}

/// `L2` distance between two Whitney forms, possibly on different meshes
/// (integrated over their overlay).
pub fn diff_norm_l2(a: &FormDoFs, b: &FormDoFs) -> Result<f64> {
    check_degree(a.degree, b.degree)?;
    if same_mesh(&a.mesh, &b.mesh) {
        return Ok(norm_l2(&a.sub(&FormDoFs {
            mesh: a.mesh.clone(),
            degree: b.degree,
            coeffs: b.coeffs.clone(),
        })?));
    }
    let overlay = Overlay::intersect(&a.mesh, &b.mesh)?;
    diff_norm_l2_on(&overlay, a, b)
}

/// As [`diff_norm_l2`] with a precomputed overlay of `a.mesh()` and `b.mesh()`.
pub fn diff_norm_l2_on(overlay: &Overlay, a: &FormDoFs, b: &FormDoFs) -> Result<f64> {
    check_degree(a.degree, b.degree)?;
    let mut sum = 0.0;
    for cell in overlay.cells() {
        for q in quad_points(&cell.points, 4)? {
            let ba = a.mesh.barycentric(cell.parent_a, &q.point);
            let bb = b.mesh.barycentric(cell.parent_b, &q.point);
            let va = combine(&whitney_at(&a.mesh, a.degree, cell.parent_a, &ba), &a.coeffs, a.degree);
            let vb = combine(&whitney_at(&b.mesh, b.degree, cell.parent_b, &bb), &b.coeffs, b.degree);
            sum += q.weight * va.axpy(-1.0, &vb).norm_squared();
        }
    }
    Ok(sum.sqrt())
}

/// `L2` distance between a Whitney form and a smooth form (degree-4 quadrature per facet).
pub fn diff_norm_l2_analytic(w: &FormDoFs, form: &AnalyticForm) -> Result<f64> {
    check_degree(w.degree, form.degree())?;
    let mut sum = 0.0;
    for f in 0..w.mesh.n_facets() {
        for q in quad_points(&w.mesh.facet_points(f), 4)? {
            let v = combine(&whitney_at(&w.mesh, w.degree, f, &q.bary), &w.coeffs, w.degree);
            sum += q.weight * v.axpy(-1.0, &form.eval(&q.point)).norm_squared();
        }
    }
    Ok(sum.sqrt())
}

/// `L2` norm of a smooth form over a mesh domain (degree-4 quadrature per facet).
pub fn norm_l2_analytic(mesh: &SurfaceMesh, form: &AnalyticForm) -> f64 {
    let mut sum = 0.0;
    for f in 0..mesh.n_facets() {
        for q in quad_points(&mesh.facet_points(f), 4).expect("order 4 is supported") {
            sum += q.weight * form.eval(&q.point).norm_squared();
        }
    }
    sum.sqrt()
}

/// `H(d)` seminorm of the difference: the `L2` distance of the exterior derivatives.
pub fn seminorm_hd(a: &FormDoFs, b: &FormDoFs) -> Result<f64> {
    diff_norm_l2(&exterior_derivative(a)?, &exterior_derivative(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_square_grid;
    use std::f64::consts::PI;

    fn tri() -> Arc<SurfaceMesh> {
        Arc::new(
            SurfaceMesh::new(
                vec![Point::new(0.1, 0.0), Point::new(1.0, 0.2), Point::new(0.3, 0.8)],
                vec![[0, 1, 2]],
            )
            .unwrap(),
        )
    }

    fn line_integral(mesh: &SurfaceMesh, w: &FormDoFs, f: usize, a: Point, b: Point) -> f64 {
        let t = b - a;
        GAUSS_LEGENDRE_5
            .iter()
            .map(|&[s, wt]| match eval_form(w, f, &(a + t * s)).unwrap() {
                FormValue::Covector(v) => wt * v.dot(&t),
                _ => unreachable!(),
            })
            .sum::<f64>()
            + 0.0 * mesh.facet_area(f)
    }

    #[test]
    fn nodal_basis_is_lagrange() {
        let m = tri();
        for k in 0..3 {
            let basis = eval_whitney(&m, Degree::Zero, 0, &m.node(k)).unwrap();
            for (id, v) in basis.iter() {
                let expect = if id == k { 1.0 } else { 0.0 };
                assert_eq!(v, FormValue::Scalar(expect));
            }
        }
    }

    #[test]
    fn edge_basis_duality() {
        let m = tri();
        for e in 0..3 {
            let mut c = vec![0.0; 3];
            c[e] = 1.0;
            let w = FormDoFs::new(m.clone(), Degree::One, c).unwrap();
            for g in 0..3 {
                let [a, b] = m.edge_points(g);
                let got = line_integral(&m, &w, 0, a, b);
                let expect = if g == e { 1.0 } else { 0.0 };
                assert!((got - expect).abs() < 1e-14, "edge {e} on {g}: {got}");
            }
        }
    }

    #[test]
    fn facet_basis_normalised() {
        let m = tri();
        let w = FormDoFs::new(m.clone(), Degree::Two, vec![1.0]).unwrap();
        let integral: f64 = quad_points(&m.facet_points(0), 4)
            .unwrap()
            .iter()
            .map(|q| match eval_form(&w, 0, &q.point).unwrap() {
                FormValue::Density(d) => q.weight * d,
                _ => unreachable!(),
            })
            .sum();
        assert!((integral - 1.0).abs() < 1e-14);
        let w = FormDoFs::new(m.clone(), Degree::Two, vec![3.0]).unwrap();
        assert_eq!(
            eval_form(&w, 0, &m.facet_centroid(0)).unwrap(),
            FormValue::Density(3.0 / m.facet_area(0))
        );
    }

    #[test]
    fn outside_point_rejected() {
        let m = tri();
        let err = eval_whitney(&m, Degree::Zero, 0, &Point::new(2.0, 2.0)).unwrap_err();
        assert!(matches!(err, Error::PointOutsideFacet { facet: 0, .. }));
    }

    #[test]
    fn de_rham_examples() {
        let m = Arc::new(unit_square_grid(2, true));
        let one = de_rham_map(&m, &AnalyticForm::scalar(|_| 1.0));
        assert!(one.coeffs().iter().all(|&c| c == 1.0));
        for f in 0..m.n_facets() {
            let v = eval_form(&one, f, &m.facet_centroid(f)).unwrap();
            assert!(matches!(v, FormValue::Scalar(s) if (s - 1.0).abs() < 1e-15));
        }

        let w0 = de_rham_map(&m, &AnalyticForm::scalar(|p| (PI * p.x).sin() * (PI * p.y).sin()));
        let centre = m.coords().iter().position(|p| *p == Point::new(0.5, 0.5)).unwrap();
        assert!((w0.coeffs()[centre] - 1.0).abs() < 1e-15);

        let w1 = de_rham_map(
            &m,
            &AnalyticForm::one_form(|p| Vector2::new((PI * p.y).sin(), (PI * p.x).sin())),
        );
        let bottom = m.find_edge(0, 1).unwrap();
        assert!(w1.coeffs()[bottom].abs() < 1e-15);
    }

    #[test]
    fn edge_midpoint_tangential_value() {
        // single facet: tangential component at an edge midpoint = coefficient / length
        let m = tri();
        let w = FormDoFs::new(m.clone(), Degree::One, vec![0.7, -1.3, 2.1]).unwrap();
        for e in 0..3 {
            let [a, b] = m.edge_points(e);
            let mid = Point::from((a.coords + b.coords) * 0.5);
            let t = (b - a) / m.edge_length(e);
            let v = match eval_form(&w, 0, &mid).unwrap() {
                FormValue::Covector(v) => v,
                _ => unreachable!(),
            };
            assert!((v.dot(&t) - w.coeffs()[e] / m.edge_length(e)).abs() < 1e-14);
        }
    }

    #[test]
    fn exterior_derivative_properties() {
        let m = Arc::new(unit_square_grid(3, false).refine_uniform());
        let c = FormDoFs::new(m.clone(), Degree::Zero, vec![2.5; m.n_nodes()]).unwrap();
        assert!(exterior_derivative(&c).unwrap().coeffs().iter().all(|&v| v == 0.0));

        let w = FormDoFs::new(
            m.clone(),
            Degree::Zero,
            (0..m.n_nodes()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect(),
        )
        .unwrap();
        let dd = exterior_derivative(&exterior_derivative(&w).unwrap()).unwrap();
        assert!(dd.coeffs().iter().all(|&v| v == 0.0));
        assert!(matches!(exterior_derivative(&dd), Err(Error::UnsupportedDegree(2))));
    }

    #[test]
    fn de_rham_commutes_with_d() {
        let m = Arc::new(unit_square_grid(2, true).refine_uniform_n(2));
        let f = AnalyticForm::scalar(|p| (PI * p.x).sin() * (PI * p.y).sin());
        let df = AnalyticForm::one_form(|p| {
            Vector2::new(
                PI * (PI * p.x).cos() * (PI * p.y).sin(),
                PI * (PI * p.x).sin() * (PI * p.y).cos(),
            )
        });
        let lhs = de_rham_map(&m, &df);
        let rhs = exterior_derivative(&de_rham_map(&m, &f)).unwrap();
        let err = lhs.coeffs().iter().zip(rhs.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // 5-point Gauss on an edge of length <= 0.18 with the smooth data
        assert!(err < 1e-10, "{err}");

        let g = AnalyticForm::one_form(|p| Vector2::new((PI * p.y).sin(), (PI * p.x).sin()));
        let dg = AnalyticForm::density(|p| PI * (PI * p.x).cos() - PI * (PI * p.y).cos());
        let lhs = de_rham_map(&m, &dg);
        let rhs = exterior_derivative(&de_rham_map(&m, &g)).unwrap();
        let err = lhs.coeffs().iter().zip(rhs.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn whitney_interpolation_then_de_rham_is_identity() {
        let m = Arc::new(unit_square_grid(2, false).refine_uniform());
        for degree in [Degree::Zero, Degree::One, Degree::Two] {
            let n = m.n_cells(degree.as_usize());
            let coeffs: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 / 7.0 - 0.9).collect();
            let w = Arc::new(FormDoFs::new(m.clone(), degree, coeffs).unwrap());
            let mesh = m.clone();
            let ww = w.clone();
            let locate = move |p: &Point| {
                (0..mesh.n_facets())
                    .find(|&f| mesh.barycentric(f, p).iter().all(|&b| b > -1e-12))
                    .unwrap()
            };
            let form = match degree {
                Degree::Zero => AnalyticForm::scalar(move |p| match eval_form(&ww, locate(p), p).unwrap() {
                    FormValue::Scalar(v) => v,
                    _ => unreachable!(),
                }),
                Degree::One => AnalyticForm::one_form(move |p| match eval_form(&ww, locate(p), p).unwrap() {
                    FormValue::Covector(v) => v,
                    _ => unreachable!(),
                }),
                Degree::Two => AnalyticForm::density(move |p| match eval_form(&ww, locate(p), p).unwrap() {
                    FormValue::Density(v) => v,
                    _ => unreachable!(),
                }),
            };
            let back = de_rham_map(&m, &form);
            for (a, b) in back.coeffs().iter().zip(w.coeffs()) {
                assert!((a - b).abs() < 1e-12, "degree {degree}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn norms() {
        let m = Arc::new(unit_square_grid(2, true).refine_uniform_n(2));
        assert_eq!(norm_l2(&FormDoFs::zeros(m.clone(), Degree::One)), 0.0);
        let f = AnalyticForm::scalar(|p| (PI * p.x).sin() * (PI * p.y).sin());
        // int sin^2(pi x) sin^2(pi y) = 1/4 over the unit square
        let analytic = norm_l2_analytic(&m, &f);
        assert!((analytic - 0.5).abs() < 1e-3, "{analytic}");
        let fine = Arc::new(unit_square_grid(2, true).refine_uniform_n(5));
        assert!((norm_l2_analytic(&fine, &f) - 0.5).abs() < 1e-8);

        let w = de_rham_map(&m, &f);
        assert!(diff_norm_l2(&w, &w).unwrap() < 1e-14);
        let n = norm_l2(&w);
        assert!((norm_l2(&w.scaled(-3.0)) - 3.0 * n).abs() < 1e-14 * n * 3.0);
        assert!(matches!(
            diff_norm_l2(&w, &FormDoFs::zeros(m.clone(), Degree::One)),
            Err(Error::DegreeMismatch { .. })
        ));
        assert_eq!(seminorm_hd(&w, &w).unwrap(), 0.0);
    }

    #[test]
    fn text_round_trip() {
        let m = Arc::new(unit_square_grid(2, true));
        let w = de_rham_map(&m, &AnalyticForm::scalar(|p| p.x - 0.3 * p.y));
        let back = FormDoFs::from_text(m.clone(), &w.to_text()).unwrap();
        assert_eq!(back.coeffs(), w.coeffs());
        assert_eq!(back.degree(), Degree::Zero);
    }
}
