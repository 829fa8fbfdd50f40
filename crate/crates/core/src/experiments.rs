//! Test meshes, smooth initial data and the two round-trip experiments.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector2;

use crate::bc::{verify_space, BcSpace, BcVariant, Check};
use crate::coupling::{check_commuting, matvec, CouplingOperator, Method, SolverSettings};
use crate::error::{Error, Result};
use crate::forms::{de_rham_map, exterior_derivative, norm_l2, AnalyticForm, Degree, FormDoFs};
use crate::mesh::{unit_square_grid, SurfaceMesh};
use crate::overlay::Overlay;

/// Solver settings used where the commuting property is measured: the
/// residual must sit far below the asserted bound.
pub const TIGHT_SOLVER: SolverSettings = SolverSettings {
    tol: 1e-12,
    max_iter: 500,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Verify,
    /// Repeated round trips at one level.
    Exp1,
    /// One round trip per level, with regression rates.
    Exp2,
    Cond,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub methods: Vec<Method>,
    pub degree: Degree,
    pub level: usize,
    /// Number of round trips `nu_max`.
    pub steps: usize,
    pub max_level: usize,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            methods: Method::ALL.to_vec(),
            degree: Degree::Zero,
            level: 2,
            steps: 100,
            max_level: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no method selected".into()));
        }
        if self.degree == Degree::Two {
            return Err(Error::Config("experiments take degree 0 or 1".into()));
        }
        match self.kind {
            ExperimentKind::Exp1 if self.steps == 0 => Err(Error::Config("at least one round trip".into())),
            ExperimentKind::Exp2 if self.max_level < 3 => {
                Err(Error::Config("regression needs levels 1..=3 at least".into()))
            }
            _ => Ok(()),
        }
    }
}

/// The nonconforming pair on the unit square: a 2x2 grid split along the
/// NE diagonal and a 3x3 grid split along the NW diagonal, both uniformly
/// refined `level` times.
pub fn gen_test_meshes(level: usize) -> (Arc<SurfaceMesh>, Arc<SurfaceMesh>) {
    (
        Arc::new(unit_square_grid(2, true).refine_uniform_n(level)),
        Arc::new(unit_square_grid(3, false).refine_uniform_n(level)),
    )
}

/// Smooth data `omega^r` and its exterior derivative for `r = 0, 1`.
pub fn initial_data(r: Degree) -> Result<(AnalyticForm, AnalyticForm)> {
    match r {
        Degree::Zero => Ok((
            AnalyticForm::scalar(|p| (PI * p.x).sin() * (PI * p.y).sin()),
            AnalyticForm::one_form(|p| {
                Vector2::new(
                    PI * (PI * p.x).cos() * (PI * p.y).sin(),
                    PI * (PI * p.x).sin() * (PI * p.y).cos(),
                )
            }),
        )),
        Degree::One => Ok((
            AnalyticForm::one_form(|p| Vector2::new((PI * p.y).sin(), (PI * p.x).sin())),
            AnalyticForm::density(|p| PI * (PI * p.x).cos() - PI * (PI * p.y).cos()),
        )),
        Degree::Two => Err(Error::UnsupportedDegree(2)),
    }
}

/// Both test meshes at one level with their B-C spaces.
pub struct MeshPair {
    pub level: usize,
    pub mesh_i: Arc<SurfaceMesh>,
    pub mesh_j: Arc<SurfaceMesh>,
    pub space_i: BcSpace,
    pub space_j: BcSpace,
}

impl MeshPair {
    pub fn new(level: usize) -> Result<Self> {
        let (mesh_i, mesh_j) = gen_test_meshes(level);
        Ok(Self {
            level,
            space_i: BcSpace::new(mesh_i.clone(), BcVariant::ZeroTrace)?,
            space_j: BcSpace::new(mesh_j.clone(), BcVariant::ZeroTrace)?,
            mesh_i,
            mesh_j,
        })
    }

    /// `(Q_ji, Q_ij)`: from mesh i to mesh j and back.
    pub fn round_trip(&self, method: Method, r: Degree) -> Result<(CouplingOperator, CouplingOperator)> {
        Ok((
            CouplingOperator::new(method, r, &self.mesh_i, &self.mesh_j, Some(&self.space_j))?,
            CouplingOperator::new(method, r, &self.mesh_j, &self.mesh_i, Some(&self.space_i))?,
        ))
    }
}

/// One round trip `Q_ij Q_ji w`, collecting the CGS iteration counts.
pub fn round_trip_once(
    ops: &(CouplingOperator, CouplingOperator),
    w: &FormDoFs,
    iterations: &mut Vec<usize>,
) -> Result<FormDoFs> {
    let (there, rep_a) = ops.0.apply_with_report(w)?;
    let (back, rep_b) = ops.1.apply_with_report(&there)?;
    iterations.extend(rep_a.iter().chain(&rep_b).map(|r| r.iterations));
    Ok(back)
}

/// Relative error after `nu` round trips, in percent, for `nu = 0..=steps`.
#[derive(Clone, Debug)]
pub struct RoundTripSeries {
    pub method: Method,
    pub degree: Degree,
    pub level: usize,
    pub errors: Vec<f64>,
    /// CGS iterations of every solve in the series.
    pub iterations: Vec<usize>,
}

pub fn experiment1(pair: &MeshPair, method: Method, r: Degree, steps: usize) -> Result<RoundTripSeries> {
    let (omega, _) = initial_data(r)?;
    let ops = pair.round_trip(method, r)?;
    let w0 = de_rham_map(&pair.mesh_i, &omega);
    let scale = 100.0 / norm_l2(&w0);
    let mut errors = vec![0.0];
    let mut iterations = Vec::new();
    let mut w = w0.clone();
    for nu in 1..=steps {
        w = round_trip_once(&ops, &w, &mut iterations).map_err(|e| Error::Config(format!("round trip {nu}: {e}")))?;
        errors.push(norm_l2(&w.sub(&w0)?) * scale);
    }
    Ok(RoundTripSeries {
        method,
        degree: r,
        level: pair.level,
        errors,
        iterations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Hd,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L2 => "L2",
            NormKind::Hd => "Hd",
        })
    }
}

/// Round-trip error `|(Q_ij Q_ji - Id) w_i|` at one level.
#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub level: usize,
    /// Longest edge of mesh i.
    pub h: f64,
    pub error: f64,
    pub norm: NormKind,
    pub method: Method,
    pub degree: Degree,
}

/// Errors of one round trip at every level in `levels`, in `L2` and in the
/// `H(d)` seminorm. Returns the records and all CGS iteration counts.
pub fn experiment2(
    method: Method,
    r: Degree,
    levels: impl IntoIterator<Item = usize>,
) -> Result<(Vec<ConvergenceRecord>, Vec<usize>)> {
    let (omega, _) = initial_data(r)?;
    let mut records = Vec::new();
    let mut iterations = Vec::new();
    for level in levels {
        let pair = MeshPair::new(level)?;
        let ops = pair.round_trip(method, r)?;
        let w0 = de_rham_map(&pair.mesh_i, &omega);
        let back = round_trip_once(&ops, &w0, &mut iterations)
            .map_err(|e| Error::Config(format!("level {level}: {e}")))?;
        let diff = back.sub(&w0)?;
        let h = pair.mesh_i.max_edge_length();
        for (norm, error) in [(NormKind::L2, norm_l2(&diff)), (NormKind::Hd, norm_l2(&exterior_derivative(&diff)?))] {
            records.push(ConvergenceRecord {
                level,
                h,
                error,
                norm,
                method,
                degree: r,
            });
        }
    }
    Ok((records, iterations))
}

/// Least-squares slope of `log error` against `log h` over the records of one norm.
pub fn regression_rate(records: &[ConvergenceRecord], norm: NormKind) -> f64 {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.norm == norm)
        .map(|r| (r.h.ln(), r.error.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `|d Q^1_ji d w|` for `w` the interpolant of the scalar data on mesh i,
/// relative to `|d w|`. Zero for commuting operators since `d d = 0`.
pub fn gradient_chain_residual(pair: &MeshPair, method: Method, settings: SolverSettings) -> Result<f64> {
    let (omega, _) = initial_data(Degree::Zero)?;
    let dw = exterior_derivative(&de_rham_map(&pair.mesh_i, &omega))?;
    let q1 = CouplingOperator::new(method, Degree::One, &pair.mesh_i, &pair.mesh_j, Some(&pair.space_j))?
        .with_settings(settings);
    let curl = exterior_derivative(&q1.apply(&dw)?)?;
    Ok(norm_l2(&curl) / norm_l2(&dw))
}

/// `kappa(M_own)` of one projection method on one mesh.
#[derive(Clone, Debug)]
pub struct ConditionRecord {
    pub method: Method,
    pub degree: Degree,
    pub level: usize,
    /// Longest edge of mesh j.
    pub h: f64,
    pub rows: usize,
    pub kappa: f64,
}

/// Condition numbers of the projection systems on mesh j for `r = 0, 1`
/// at levels `0..=max_level`.
pub fn condition_report(max_level: usize) -> Result<Vec<ConditionRecord>> {
    let mut out = Vec::new();
    for level in 0..=max_level {
        let pair = MeshPair::new(level)?;
        for method in [Method::Galerkin, Method::Bc] {
            for r in [Degree::Zero, Degree::One] {
                let own = crate::coupling::assemble_own(&pair.mesh_j, method, r, Some(&pair.space_j))?;
                out.push(ConditionRecord {
                    method,
                    degree: r,
                    level,
                    h: pair.mesh_j.max_edge_length(),
                    rows: own.nrows(),
                    kappa: crate::coupling::condition_number(&own),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Expected violation, reported without affecting the outcome.
    FailByDesign,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::FailByDesign => "FAIL-BY-DESIGN",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ReportLine {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
}

impl ReportLine {
    fn from_check(prefix: &str, c: Check) -> Self {
        Self {
            name: format!("{prefix} {}", c.name),
            status: if c.passed { Status::Pass } else { Status::Fail },
            value: c.value,
            tolerance: c.tolerance,
        }
    }
}

impl fmt::Display for ReportLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{:.6e},{:.1e}", self.status, self.name, self.value, self.tolerance)
    }
}

/// All hard invariants at one level; the outcome is a pass when no line
/// has status [`Status::Fail`].
pub fn verify_report(level: usize) -> Result<Vec<ReportLine>> {
    let pair = MeshPair::new(level)?;
    let mut lines = Vec::new();
    for (name, space) in [("mesh_i", &pair.space_i), ("mesh_j", &pair.space_j)] {
        lines.extend(verify_space(space, 1000, 7).into_iter().map(|c| ReportLine::from_check(name, c)));
    }

    let overlay = Overlay::intersect(&pair.mesh_i, &pair.mesh_j)?;
    lines.push(ReportLine::from_check(
        "overlay",
        Check::at_most("area deviation", (overlay.total_area() - 1.0).abs(), 1e-10),
    ));

    let (omega0, _) = initial_data(Degree::Zero)?;
    let (omega1, _) = initial_data(Degree::One)?;
    let w0 = de_rham_map(&pair.mesh_i, &omega0);
    let w1 = de_rham_map(&pair.mesh_i, &omega1);
    for method in Method::ALL {
        let ops: Vec<CouplingOperator> = [Degree::Zero, Degree::One, Degree::Two]
            .into_iter()
            .map(|r| {
                CouplingOperator::new(method, r, &pair.mesh_i, &pair.mesh_j, Some(&pair.space_j))
                    .map(|op| op.with_settings(TIGHT_SOLVER))
            })
            .collect::<Result<_>>()?;
        let mut values = vec![
            ("commuting r=0", check_commuting(&ops[0], &ops[1], &w0)? / norm_l2(&w0)),
            ("commuting r=1", check_commuting(&ops[1], &ops[2], &w1)? / norm_l2(&w1)),
            ("gradient chain", gradient_chain_residual(&pair, method, TIGHT_SOLVER)?),
        ];
        if method.is_projection() {
            // the solver contract at the default tolerance
            let op = ops[0].clone().with_settings(SolverSettings::default());
            let out = op.apply(&w0)?;
            let rhs = matvec(op.m_cross().unwrap(), w0.coeffs());
            let res: Vec<f64> = matvec(op.m_own().unwrap(), out.coeffs())
                .iter()
                .zip(&rhs)
                .map(|(a, b)| a - b)
                .collect();
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            values.push(("defining relation", norm(&res) / norm(&rhs)));
        }
        for (name, value) in values {
            let tolerance = if name == "defining relation" { 1e-6 } else { 1e-8 };
            let status = match (value <= tolerance, method) {
                (true, _) => Status::Pass,
                (false, Method::Galerkin) if name != "defining relation" => Status::FailByDesign,
                (false, _) => Status::Fail,
            };
            lines.push(ReportLine {
                name: format!("{method} {name}"),
                status,
                value,
                tolerance,
            });
        }
    }
    Ok(lines)
}
