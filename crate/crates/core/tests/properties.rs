use std::sync::Arc;

use alefem::ale::{
    cofactor2d, jacobian, max_abs, mat_mul, scl_residual, DisplacementField, IntervalGeometry, IntervalMotion,
};
use alefem::fem::{reference_basis, FeSpace, SparseMatrix};
use alefem::mesh::build_unit_square_mesh;
use alefem::poly::TimePoly;
use proptest::prelude::*;

fn bary() -> impl Strategy<Value = [f64; 3]> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| {
        let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
        [1.0 - a - b, a, b]
    })
}

/// Random node displacements small enough to keep a 4×4 mesh untangled.
fn small_field(n_nodes: usize) -> impl Strategy<Value = DisplacementField> {
    prop::collection::vec((-0.04..0.04f64, -0.04..0.04f64), n_nodes)
        .prop_map(|v| DisplacementField(v.into_iter().map(|(x, y)| [x, y]).collect()))
}

fn pinned(mut d: DisplacementField, mesh: &alefem::mesh::Mesh) -> DisplacementField {
    for node in mesh.boundary_node_set() {
        d.0[node] = [0.0, 0.0];
    }
    d
}

proptest! {
    #[test]
    fn cofactor_is_adjugate(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64, d in -5.0..5.0f64) {
        let g = [[a, b], [c, d]];
        let p = mat_mul(&g, &cofactor2d(&g));
        let det = jacobian(&g);
        let scale = 1.0 + det.abs();
        prop_assert!((p[0][0] - det).abs() <= 1e-12 * scale);
        prop_assert!((p[1][1] - det).abs() <= 1e-12 * scale);
        prop_assert!(p[0][1].abs() <= 1e-12 * scale && p[1][0].abs() <= 1e-12 * scale);
    }

    #[test]
    fn basis_partitions_unity(degree in 1usize..=2, l in bary()) {
        let b = reference_basis(degree, l).unwrap();
        let sum: f64 = b.values.iter().sum();
        let grad = b.gradients.iter().fold([0.0, 0.0], |acc, g| [acc[0] + g[0], acc[1] + g[1]]);
        prop_assert!((sum - 1.0).abs() < 1e-13);
        prop_assert!(grad[0].abs() < 1e-12 && grad[1].abs() < 1e-12);
    }

    #[test]
    fn poly_product_evaluates_pointwise(
        a in prop::collection::vec(-3.0..3.0f64, 3),
        b in prop::collection::vec(-3.0..3.0f64, 3),
        t in 0.0..1.0f64,
    ) {
        let (p, q) = (TimePoly::from_coeffs(&a), TimePoly::from_coeffs(&b));
        prop_assert!(((p * q).eval(t) - p.eval(t) * q.eval(t)).abs() < 1e-11);
    }

    #[test]
    fn velocity_integrates_to_displacement_jump(
        u0 in small_field(25), u1 in small_field(25), w in small_field(25), dt in 0.01..0.5f64,
    ) {
        let w: Vec<_> = w.0.iter().map(|v| [v[0] / dt, v[1] / dt]).collect();
        for motion in [
            IntervalMotion::piecewise_constant(u0.clone(), u1.clone(), dt).unwrap(),
            IntervalMotion::continuous(u0.clone(), u1.clone(), &w, dt).unwrap(),
        ] {
            for (k, i) in motion.velocity.integral().iter().enumerate() {
                for c in 0..2 {
                    prop_assert!((i[c] - (u1.0[k][c] - u0.0[k][c])).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn scl_holds_for_random_motion(u0 in small_field(25), u1 in small_field(25), w in small_field(25)) {
        let mesh = build_unit_square_mesh(4, 4).unwrap();
        let (u0, u1) = (pinned(u0, &mesh), pinned(u1, &mesh));
        let space = FeSpace::new(Arc::new(mesh.clone()), 1).unwrap();
        let w = pinned(w, &mesh).0;
        for motion in [
            IntervalMotion::piecewise_constant(u0.clone(), u1.clone(), 0.1).unwrap(),
            IntervalMotion::continuous(u0.clone(), u1.clone(), &w, 0.1).unwrap(),
        ] {
            let geom = IntervalGeometry::build(&mesh, &motion).unwrap();
            prop_assert!(max_abs(&scl_residual(&space, &geom)) <= 1e-12);
        }
    }

    #[test]
    fn linear_combination_matches_dense(
        vals in prop::collection::vec(-2.0..2.0f64, 6), s in -3.0..3.0f64, t in -3.0..3.0f64,
    ) {
        let pos = [(0, 0), (0, 2), (1, 1), (2, 0), (2, 2), (1, 2)];
        let trip_a: Vec<_> = pos.iter().zip(&vals).map(|(&(i, j), &v)| (i, j, v)).collect();
        let trip_b: Vec<_> = pos.iter().zip(vals.iter().rev()).map(|(&(i, j), &v)| (i, j, v)).collect();
        let a = SparseMatrix::from_triplets(3, &trip_a);
        let b = SparseMatrix::from_triplets(3, &trip_b);
        let c = SparseMatrix::linear_combination(&[(s, &a), (t, &b)]);
        let (da, db, dc) = (a.to_dense(), b.to_dense(), c.to_dense());
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((dc[i][j] - (s * da[i][j] + t * db[i][j])).abs() < 1e-13);
            }
        }
    }
}
