use super::assembly::QuadPoint;
use super::basis::ShapeTable;
use super::quadrature::QuadratureRule;
use super::space::FeSpace;
use crate::Point;

fn integrate_squared(space: &FeSpace, field: &[f64], jac: &[f64], rule: &QuadratureRule, exact: impl Fn(&QuadPoint) -> f64) -> f64 {
    assert_eq!(field.len(), space.n_dofs());
    assert_eq!(jac.len(), space.mesh().n_elements());
    let mesh = space.mesh();
    let table = ShapeTable::new(space.degree(), rule.points().map(|(b, _)| b));
    let mut acc = 0.0;
    for elem in 0..mesh.n_elements() {
        let area = mesh.element_area(elem).expect("validated mesh");
        let v: [Point; 3] = mesh.element_vertices(elem);
        let dofs = space.element_dofs(elem);
        for (q, (b, w)) in rule.points().enumerate() {
            let uh: f64 = dofs.iter().zip(&table.values[q]).map(|(&d, s)| field[d] * s).sum();
            let qp = QuadPoint {
                elem,
                bary: *b,
                xhat: [0, 1].map(|c| b[0] * v[0][c] + b[1] * v[1][c] + b[2] * v[2][c]),
            };
            let e = uh - exact(&qp);
            acc += 2.0 * area * w * jac[elem] * e * e;
        }
    }
    acc
}

/// `‖u‖_{L²(Ω(t))} = (∫ û² Ĵ dx̂)^{1/2}` with `Ĵ` constant per element.
pub fn l2_norm_current_domain(space: &FeSpace, field: &[f64], jac: &[f64]) -> f64 {
    let rule = QuadratureRule::for_degree(2 * space.degree());
    integrate_squared(space, field, jac, &rule, |_| 0.0).sqrt()
}

/// `(∫ (û_h − û)² Ĵ dx̂)^{1/2}` with the exact solution evaluated at the
/// given rule's points.
pub fn l2_error_vs_exact(
    space: &FeSpace,
    field: &[f64],
    jac: &[f64],
    rule: &QuadratureRule,
    exact: impl Fn(&QuadPoint) -> f64,
) -> f64 {
    integrate_squared(space, field, jac, rule, exact).sqrt()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::build_unit_square_mesh;

    fn space(n: usize, deg: usize) -> FeSpace {
        FeSpace::new(Arc::new(build_unit_square_mesh(n, n).unwrap()), deg).unwrap()
    }

    fn bump(x: Point) -> f64 {
        1600.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])
    }

    #[test]
    fn zero_field_zero_norm() {
        let s = space(3, 2);
        assert_eq!(l2_norm_current_domain(&s, &vec![0.0; s.n_dofs()], &vec![1.0; 18]), 0.0);
    }

    #[test]
    fn unit_field_on_scaled_square() {
        let s = space(3, 1);
        let n = l2_norm_current_domain(&s, &vec![1.0; s.n_dofs()], &vec![4.0; 18]);
        assert!((n - 2.0).abs() < 1e-14);
    }

    #[test]
    fn initial_bump_norm() {
        // ∫₀¹ x²(1−x)² dx = 1/30, so ‖u₀‖ = 1600/30
        let exact = 160.0 / 3.0;
        let s2 = space(20, 2);
        let u = s2.interpolate(bump);
        let n2 = l2_norm_current_domain(&s2, &u.0, &vec![1.0; 800]);
        assert!((n2 - exact).abs() < 1e-3, "{n2}");
        let s1 = space(20, 1);
        let n1 = l2_norm_current_domain(&s1, &s1.interpolate(bump).0, &vec![1.0; 800]);
        assert!((n1 - exact).abs() < 0.5, "{n1}");
    }

    #[test]
    fn p2_interpolation_error_is_third_order() {
        let f = |x: Point| (x[0] * x[0] * x[1] * x[1]) * (1.0 + x[0]);
        let rule = QuadratureRule::collapsed_gauss(5);
        let errs: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|&n| {
                let s = space(n, 2);
                let u = s.interpolate(f);
                l2_error_vs_exact(&s, &u.0, &vec![1.0; 2 * n * n], &rule, |qp| f(qp.xhat))
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!((rate - 3.0).abs() < 0.15, "rate {rate}");
        }
    }

    #[test]
    fn error_against_zero_is_norm_and_constant_is_exact() {
        let s = space(4, 2);
        let u = s.interpolate(bump);
        let j = vec![1.0; 32];
        let rule = QuadratureRule::degree4();
        let e = l2_error_vs_exact(&s, &u.0, &j, &rule, |_| 0.0);
        assert!((e - l2_norm_current_domain(&s, &u.0, &j)).abs() < 1e-12);
        let c = vec![2.5; s.n_dofs()];
        assert!(l2_error_vs_exact(&s, &c, &j, &rule, |_| 2.5) < 1e-14);
    }
}
