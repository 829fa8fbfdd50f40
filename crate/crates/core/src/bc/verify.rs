//! Invariant checks for a constructed B-C basis.

use std::fmt;

use nalgebra_sparse::CsrMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BcBasis, BcSpace, CONSISTENCY_TOL};
use crate::forms::{Degree, FormValue};
use crate::mesh::{BarycentricRefinement, Complex, DualMesh, Point};
use crate::overlay::Locator;

/// Outcome of one invariant check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} value={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

fn to_f64(m: &CsrMatrix<i32>) -> CsrMatrix<f64> {
    CsrMatrix::try_from_pattern_and_values(m.pattern().clone(), m.values().iter().map(|&v| v as f64).collect())
        .expect("same pattern")
}

fn max_abs(m: &CsrMatrix<f64>) -> f64 {
    m.values().iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `max |C^q (R^q)^T - I|` for `q = 0, 1, 2`: integrals of the basis forms
/// over the dual cells.
pub fn interpolation_deviation(basis: &BcBasis, dual: &DualMesh) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (q, slot) in out.iter_mut().enumerate() {
        let p = &to_f64(dual.chain_matrix(q)) * &basis.matrix(q).transpose();
        let mut dev: f64 = 0.0;
        for i in 0..p.nrows() {
            let row = p.row(i);
            let mut diagonal = 0.0;
            for (&j, &v) in row.col_indices().iter().zip(row.values()) {
                if j == i {
                    diagonal = v;
                } else {
                    dev = dev.max(v.abs());
                }
            }
            dev = dev.max((diagonal - 1.0).abs());
        }
        *slot = dev;
    }
    out
}

/// Entrywise residuals of `R^1 D~^1 - (D^0)^T R^2` and `R^0 D~^0 + (D^1)^T R^1`.
pub fn exterior_derivative_residual(
    basis: &BcBasis,
    primal: &Complex,
    refinement: &BarycentricRefinement,
) -> [f64; 2] {
    let fine = refinement.complex();
    let lhs1 = basis.matrix(1) * &to_f64(fine.d1());
    let rhs1 = &to_f64(primal.d0()).transpose() * basis.matrix(2);
    let lhs0 = basis.matrix(0) * &to_f64(fine.d0());
    let rhs0 = &to_f64(primal.d1()).transpose() * basis.matrix(1);
    [max_abs(&(&lhs1 - &rhs1)), max_abs(&(&lhs0 + &rhs0))]
}

/// `max |R^0 D~^0 D~^1|`: the exterior derivative applied twice to B-C 0-forms.
pub fn complex_residual(basis: &BcBasis, refinement: &BarycentricRefinement) -> f64 {
    let fine = refinement.complex();
    max_abs(&(&(basis.matrix(0) * &to_f64(fine.d0())) * &to_f64(fine.d1())))
}

/// Nodal values on the refined mesh of the sum of all basis 0-forms.
pub fn partition_of_unity_sums(basis: &BcBasis, n_refined_nodes: usize) -> Vec<f64> {
    (0..n_refined_nodes)
        .map(|w| basis.column(0, w).map(|(_, c)| c).sum())
        .collect()
}

/// Largest jump across interior refined edges, sampled at edge midpoints:
/// of the basis 0-forms, and of the tangential component of the basis 1-forms.
pub fn conformity_defect(space: &BcSpace) -> [f64; 2] {
    let fine = space.refined();
    let mut jump: [f64; 2] = [0.0; 2];
    for w in 0..fine.n_edges() {
        let sides = fine.edge_facets(w);
        if sides.len() != 2 {
            continue;
        }
        let [a, b] = fine.edge_points(w);
        let mid = Point::from((a.coords + b.coords) * 0.5);
        let tangent = b - a;
        for (slot, q) in [Degree::Zero, Degree::One].into_iter().enumerate() {
            let eval = |z: usize| space.local_values(q, z, &fine.barycentric(z, &mid));
            let (left, right) = (eval(sides[0].0), eval(sides[1].0));
            let trace = |v: &FormValue| match v {
                FormValue::Scalar(s) => *s,
                FormValue::Covector(c) => c.dot(&tangent),
                FormValue::Density(d) => *d,
            };
            let mut values: Vec<(usize, f64)> = left.iter().map(|(v, x)| (*v, trace(x))).collect();
            for (v, x) in &right {
                match values.iter_mut().find(|y| y.0 == *v) {
                    Some(y) => y.1 -= trace(x),
                    None => values.push((*v, -trace(x))),
                }
            }
            for (_, d) in values {
                jump[slot] = jump[slot].max(d.abs());
            }
        }
    }
    jump
}

/// Runs every invariant check on a B-C space. Partition of unity is sampled
/// at `samples` random points (fixed `seed`): the sum must be 1 away from the
/// outmost layer of refined facets and lie in `[0, 1]` inside it.
pub fn verify_space(space: &BcSpace, samples: usize, seed: u64) -> Vec<Check> {
    let basis = space.basis();
    let primal = space.primal();
    let mut checks = Vec::new();
    let interp = interpolation_deviation(basis, space.dual());
    for (q, dev) in interp.iter().enumerate() {
        checks.push(Check::at_most(format!("interpolation q={q}"), *dev, CONSISTENCY_TOL));
    }
    let [r1, r0] = exterior_derivative_residual(basis, primal.complex(), space.refinement());
    checks.push(Check::at_most("exterior derivative q=1", r1, CONSISTENCY_TOL));
    checks.push(Check::at_most("exterior derivative q=0", r0, CONSISTENCY_TOL));
    checks.push(Check::at_most(
        "complex property",
        complex_residual(basis, space.refinement()),
        CONSISTENCY_TOL,
    ));

    let (inner, outer) = partition_of_unity_samples(space, samples, seed);
    checks.push(Check::at_most("partition of unity interior", inner, CONSISTENCY_TOL));
    checks.push(Check::at_most("partition of unity outmost layer in [0,1]", outer, CONSISTENCY_TOL));

    let [c0, c1] = conformity_defect(space);
    checks.push(Check::at_most("continuity of 0-forms", c0, CONSISTENCY_TOL));
    checks.push(Check::at_most("tangential continuity of 1-forms", c1, CONSISTENCY_TOL));
    checks
}

/// Returns the largest deviation of the sum of basis 0-forms from 1 at
/// sample points away from the boundary layer, and the largest excursion out
/// of `[0, 1]` inside it.
pub(crate) fn partition_of_unity_samples(space: &BcSpace, samples: usize, seed: u64) -> (f64, f64) {
    let fine = space.refined();
    let sums = partition_of_unity_sums(space.basis(), fine.n_nodes());
    let locator = Locator::new(fine);
    let (mut lo, mut hi) = (fine.node(0), fine.node(0));
    for p in fine.coords() {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut inner, mut outer): (f64, f64) = (0.0, 0.0);
    let mut taken = 0;
    let mut tries = 0;
    while taken < samples && tries < 100 * samples.max(1) {
        tries += 1;
        let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        let Ok((z, bary)) = locator.locate(&p) else {
            continue;
        };
        taken += 1;
        let nodes = fine.facet(z);
        let sum: f64 = (0..3).map(|k| bary[k] * sums[nodes[k]]).sum();
        if nodes.iter().any(|&n| fine.is_boundary_node(n)) {
            outer = outer.max(-sum).max(sum - 1.0);
        } else {
            inner = inner.max((sum - 1.0).abs());
        }
    }
    (inner, outer)
}
