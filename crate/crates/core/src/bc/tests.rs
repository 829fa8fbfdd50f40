use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::mesh::delaunay::random_unit_square;
use crate::mesh::unit_square_grid;
use crate::overlay::quadrature::quad_points;

fn space(mesh: SurfaceMesh) -> BcSpace {
    BcSpace::new(Arc::new(mesh), BcVariant::ZeroTrace).unwrap()
}

/// Periodic `n x n` grid: a triangulated torus.
fn torus(n: usize) -> Complex {
    let idx = |i: usize, j: usize| (j % n) * n + (i % n);
    let mut facets = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (sw, se, nw, ne) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            facets.push([sw, se, ne]);
            facets.push([sw, ne, nw]);
        }
    }
    Complex::from_oriented_facets(n * n, facets).unwrap()
}

fn octahedron() -> Complex {
    // poles 0 and 5 around the equator 1-2-3-4
    let facets = vec![
        [0, 1, 2],
        [0, 2, 3],
        [0, 3, 4],
        [0, 4, 1],
        [5, 2, 1],
        [5, 3, 2],
        [5, 4, 3],
        [5, 1, 4],
    ];
    Complex::from_oriented_facets(6, facets).unwrap()
}

fn closed_basis(primal: &Complex) -> (BarycentricRefinement, DualMesh, BcBasis) {
    let r = BarycentricRefinement::of_complex(primal);
    let d = DualMesh::build(primal, &r).unwrap();
    let b = BcBasis::build(primal, &r, &d, BcVariant::Closed).unwrap();
    (r, d, b)
}

#[test]
fn two_form_coefficients() {
    let s = space(unit_square_grid(3, false));
    let m = s.primal();
    let centre = 5;
    assert_eq!(m.node_facets(centre).len(), 6);
    let row: Vec<_> = s.basis().row(2, centre).collect();
    assert_eq!(row.len(), 12);
    assert!(row.iter().all(|&(_, c)| c == 1.0 / 12.0));

    let s = space(unit_square_grid(2, true));
    assert_eq!(s.primal().node_facets(0).len(), 2);
    let row: Vec<_> = s.basis().row(2, 0).collect();
    assert_eq!(row.len(), 4);
    assert!(row.iter().all(|&(_, c)| c == 0.25));

    for p in 0..s.primal().n_nodes() {
        let total: f64 = s.basis().row(2, p).map(|(_, c)| c.abs()).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }
}

#[test]
fn support_examples() {
    let m = unit_square_grid(3, false);
    let r = m.refine_barycentric();
    let u = support_sets(m.complex(), &r);
    assert_eq!(u[2][5].len(), 12);
    for e in 0..m.n_edges() {
        let [a, b] = m.edge(e);
        assert_eq!(u[1][e].len(), u[2][a].len() + u[2][b].len());
    }
    for t in 0..m.n_facets() {
        let expect: usize = m.facet(t).iter().map(|&p| u[2][p].len()).sum();
        assert_eq!(u[0][t].len(), expect);
    }
}

#[test]
fn one_form_chain_and_stability_coefficients() {
    let s = space(unit_square_grid(3, false).refine_uniform());
    let m = s.primal();
    let basis = s.basis();
    for e in 0..m.n_edges() {
        let row: Vec<_> = basis.row(1, e).collect();
        let get = |w: usize| row.iter().find(|x| x.0 == w).map_or(0.0, |x| x.1);
        let expect = if m.is_boundary_edge(e) { 1.0 } else { 0.5 };
        for (w, c) in s.dual().chain(1, e) {
            assert_eq!(get(w), c as f64 * expect);
        }
        let [a, b] = m.edge(e);
        let halves = s.refinement().halves_of_edge(m.complex(), e);
        for (half, p) in halves.into_iter().zip([a, b]) {
            if !m.is_boundary_node(p) || m.is_boundary_edge(e) {
                assert_eq!(get(half), 0.0, "edge {e}");
            }
        }
    }
}

#[test]
fn zero_form_centre_and_rim() {
    let s = space(unit_square_grid(2, true).refine_uniform());
    let basis = s.basis();
    let fine = s.refined();
    for t in 0..s.primal().n_facets() {
        let centre = s.refinement().barycenter_node(t);
        let row: Vec<_> = basis.row(0, t).collect();
        assert_eq!(row.iter().find(|x| x.0 == centre).unwrap().1, 1.0);
        for (w, _) in row {
            assert!(!fine.is_boundary_node(w));
        }
    }
}

#[test]
fn closed_surfaces_satisfy_all_identities() {
    for primal in [torus(4), torus(5), octahedron()] {
        let (r, d, b) = closed_basis(&primal);
        for dev in interpolation_deviation(&b, &d) {
            assert!(dev <= 1e-12, "{dev}");
        }
        for res in exterior_derivative_residual(&b, &primal, &r) {
            assert!(res <= 1e-12, "{res}");
        }
        assert!(complex_residual(&b, &r) <= 1e-12);
        // without boundary the partition of unity holds at every refined node
        let sums = partition_of_unity_sums(&b, r.complex().n_nodes());
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-12));
        for e in 0..primal.n_edges() {
            for (w, c) in d.chain(1, e) {
                assert_eq!(b.row(1, e).find(|x| x.0 == w).unwrap().1, 0.5 * c as f64);
            }
        }
    }
}

#[test]
fn closed_variant_rejects_boundary() {
    let m = unit_square_grid(2, true);
    let r = m.refine_barycentric();
    let d = DualMesh::build(m.complex(), &r).unwrap();
    assert!(matches!(
        BcBasis::build(m.complex(), &r, &d, BcVariant::Closed),
        Err(Error::MeshHasBoundary)
    ));
}

#[test]
fn structured_meshes_pass_verification() {
    for mesh in [unit_square_grid(2, true).refine_uniform(), unit_square_grid(3, false).refine_uniform()] {
        let s = space(mesh);
        for check in verify_space(&s, 500, 1) {
            assert!(check.passed, "{check}");
        }
    }
}

#[test]
fn coefficients_are_small_rationals() {
    let s = space(unit_square_grid(3, false).refine_uniform());
    let max_valence = (0..s.primal().n_nodes())
        .map(|p| s.primal().node_facets(p).len())
        .max()
        .unwrap();
    let denominators: Vec<f64> = (1..=2 * 2 * max_valence).map(|d| d as f64).collect();
    for q in 0..3 {
        for &x in s.basis().matrix(q).values() {
            assert!(
                denominators.iter().any(|d| ((x * d).round() - x * d).abs() < 1e-12),
                "coefficient {x} of degree {q}"
            );
        }
    }
}

#[test]
fn mutation_breaks_the_identity() {
    let mut s = space(unit_square_grid(2, true).refine_uniform());
    s.basis_mut().matrix_mut(1).values_mut()[3] += 1e-3;
    let [r1, r0] = exterior_derivative_residual(s.basis(), s.primal().complex(), s.refinement());
    assert!(r1 > 1e-4 && r0 > 1e-4);
}

#[test]
fn metric_free() {
    let m = random_unit_square(40, 4).unwrap();
    let distorted = m.map_coords(|p| Point::new(3.0 * p.x + 0.7 * p.y - 2.0, -0.4 * p.x + 1.3 * p.y + 5.0)).unwrap();
    let a = space(m);
    let b = space(distorted);
    for q in 0..3 {
        let (ma, mb) = (a.basis().matrix(q), b.basis().matrix(q));
        assert_eq!(ma.col_indices(), mb.col_indices());
        assert_eq!(ma.row_offsets(), mb.row_offsets());
        let bits = |m: &CsrMatrix<f64>| m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(ma), bits(mb));
    }
}

#[test]
fn evaluation() {
    let s = space(unit_square_grid(2, true));
    let fine = s.refined();
    let p = 4; // centre node
    let support = s.basis().support(2, p);
    let outside = (0..fine.n_facets()).find(|z| support.binary_search(z).is_err()).unwrap();
    let c = fine.facet_centroid(outside);
    assert_eq!(eval_bc_form(&s, Degree::Two, p, outside, &c).unwrap(), FormValue::Density(0.0));
    let support1 = s.basis().support(1, 0);
    let outside1 = (0..fine.n_facets()).find(|z| support1.binary_search(z).is_err()).unwrap();
    let c1 = fine.facet_centroid(outside1);
    assert_eq!(eval_bc_form(&s, Degree::One, 0, outside1, &c1).unwrap(), FormValue::zero(Degree::One));

    for &z in support {
        let c = fine.facet_centroid(z);
        let coeff = s.basis().row(2, p).find(|x| x.0 == z).unwrap().1;
        match eval_bc_form(&s, Degree::Two, p, z, &c).unwrap() {
            FormValue::Density(d) => assert!((d - coeff / fine.facet_area(z)).abs() < 1e-13 * d.abs()),
            other => panic!("{other:?}"),
        }
    }

    // unit integral of every basis 2-form, by quadrature over its support
    for p in 0..s.primal().n_nodes() {
        let total: f64 = s
            .basis()
            .support(2, p)
            .iter()
            .flat_map(|&z| quad_points(&fine.facet_points(z), 2).unwrap().into_iter().map(move |q| (z, q)))
            .map(|(z, q)| match eval_bc_form(&s, Degree::Two, p, z, &q.point).unwrap() {
                FormValue::Density(d) => d * q.weight,
                _ => unreachable!(),
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-13);
    }
}

#[test]
fn coordinate_export() {
    let s = space(unit_square_grid(1, true));
    let text = s.basis().to_coo_text();
    let nnz: usize = (0..3).map(|q| s.basis().matrix(q).nnz()).sum();
    assert_eq!(text.lines().count(), nnz);
    let first: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(first.len(), 4);
    assert_eq!(first[0], "0");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_delaunay_meshes(n in 20usize..220, seed in any::<u64>()) {
        let m = random_unit_square(n, seed).unwrap();
        prop_assume!(m.n_facets() >= 50);
        let s = space(m);
        for dev in interpolation_deviation(s.basis(), s.dual()) {
            prop_assert!(dev <= 1e-12);
        }
        for res in exterior_derivative_residual(s.basis(), s.primal().complex(), s.refinement()) {
            prop_assert!(res <= 1e-12);
        }
        prop_assert!(complex_residual(s.basis(), s.refinement()) <= 1e-12);
    }
}
