//! Assembly of the pulled-back weak-form operators on the referent mesh, and
//! direct assembly on deformed coordinates used as a change-of-variables
//! oracle.

use super::basis::ShapeTable;
use super::quadrature::QuadratureRule;
use super::space::FeSpace;
use super::sparse::SparseMatrix;
use crate::ale::Mat2;
use crate::mesh::Mesh;
use crate::{Error, Point, Result};

/// A quadrature point passed to source callbacks.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub elem: usize,
    pub bary: [f64; 3],
    /// Referent coordinates.
    pub xhat: Point,
}

fn check_jacobians(space: &FeSpace, jac: &[f64]) -> Result<()> {
    let ne = space.mesh().n_elements();
    if jac.len() != ne {
        return Err(Error::LengthMismatch {
            expected: ne,
            got: jac.len(),
        });
    }
    match jac.iter().position(|&j| !(j > 0.0)) {
        Some(elem) => Err(Error::NonPositiveJacobian {
            elem,
            jacobian: jac[elem],
        }),
        None => Ok(()),
    }
}

fn bary_point(v: &[Point; 3], b: &[f64; 3]) -> Point {
    [
        b[0] * v[0][0] + b[1] * v[1][0] + b[2] * v[2][0],
        b[0] * v[0][1] + b[1] * v[1][1] + b[2] * v[2][1],
    ]
}

/// Element loop shared by all bilinear forms. `kernel` receives the element,
/// quadrature index, `2·area·weight`, the shape table and the element's
/// barycentric gradients, and accumulates into the dense local matrix.
fn assemble_bilinear(
    space: &FeSpace,
    mesh: &Mesh,
    rule: &QuadratureRule,
    mut kernel: impl FnMut(usize, usize, f64, &ShapeTable, &[Point], &mut [f64]),
) -> Result<SparseMatrix> {
    let table = ShapeTable::new(space.degree(), rule.points().map(|(b, _)| b));
    let nl = table.n_local;
    let mut m = SparseMatrix::for_space(space);
    let mut local = vec![0.0; nl * nl];
    let mut grads = vec![[0.0; 2]; nl];
    for elem in 0..mesh.n_elements() {
        let area = mesh.element_area(elem)?;
        let gl = mesh.barycentric_gradients(elem)?;
        local.fill(0.0);
        for (q, (_, w)) in rule.points().enumerate() {
            table.gradients(q, &gl, &mut grads);
            kernel(elem, q, 2.0 * area * w, &table, &grads, &mut local);
        }
        m.add_local(space.element_dofs(elem), &local);
    }
    Ok(m)
}

fn mass_kernel(scale: f64, q: usize, table: &ShapeTable, local: &mut [f64]) {
    let nl = table.n_local;
    let v = &table.values[q];
    for a in 0..nl {
        for b in 0..nl {
            local[a * nl + b] += scale * v[a] * v[b];
        }
    }
}

/// `M_ij = ∫ ψ_i ψ_j J` with `J` constant per element.
pub fn assemble_weighted_mass(space: &FeSpace, jac: &[f64]) -> Result<SparseMatrix> {
    check_jacobians(space, jac)?;
    let rule = QuadratureRule::for_degree(2 * space.degree());
    assemble_bilinear(space, space.mesh(), &rule, |elem, q, dx, table, _, local| {
        mass_kernel(dx * jac[elem], q, table, local)
    })
}

/// `A_ij = Δt ∫ α J⁻¹ (Cᵀ∇ψ_j)·(Cᵀ∇ψ_i)`, the diffusion form pulled back
/// with the cofactor `C` and Jacobian `J` of one time instant.
pub fn assemble_pulled_back_stiffness(
    space: &FeSpace,
    alpha: f64,
    dt: f64,
    cofactor: &[Mat2],
    jac: &[f64],
) -> Result<SparseMatrix> {
    check_jacobians(space, jac)?;
    if cofactor.len() != jac.len() {
        return Err(Error::LengthMismatch {
            expected: jac.len(),
            got: cofactor.len(),
        });
    }
    let rule = QuadratureRule::for_degree(2 * (space.degree() - 1).max(1));
    let mut pulled = vec![[0.0; 2]; space.n_local()];
    assemble_bilinear(space, space.mesh(), &rule, |elem, _, dx, table, grads, local| {
        let c = &cofactor[elem];
        for (p, g) in pulled.iter_mut().zip(grads) {
            *p = [c[0][0] * g[0] + c[1][0] * g[1], c[0][1] * g[0] + c[1][1] * g[1]];
        }
        let s = dx * alpha * dt / jac[elem];
        let nl = table.n_local;
        for a in 0..nl {
            for b in 0..nl {
                local[a * nl + b] += s * (pulled[a][0] * pulled[b][0] + pulled[a][1] * pulled[b][1]);
            }
        }
    })
}

/// `𝓜_ij = ∫ ψ_i (F·∇ψ_j) + ∫ ψ_i ψ_j div F` where `F` is the per-element
/// linear flux given by its three vertex values and constant divergence.
pub fn assemble_mesh_motion_operator(space: &FeSpace, flux: &[([Point; 3], f64)]) -> Result<SparseMatrix> {
    let ne = space.mesh().n_elements();
    if flux.len() != ne {
        return Err(Error::LengthMismatch {
            expected: ne,
            got: flux.len(),
        });
    }
    let rule = QuadratureRule::for_degree(2 * space.degree());
    let bary: Vec<[f64; 3]> = rule.points().map(|(b, _)| *b).collect();
    assemble_bilinear(space, space.mesh(), &rule, |elem, q, dx, table, grads, local| {
        let (vf, div) = &flux[elem];
        let f = bary_point(vf, &bary[q]);
        let v = &table.values[q];
        let nl = table.n_local;
        for a in 0..nl {
            for b in 0..nl {
                local[a * nl + b] += dx * v[a] * (f[0] * grads[b][0] + f[1] * grads[b][1] + v[b] * div);
            }
        }
    })
}

/// `b_i = Δt ∫ ψ_i f J` with `f` sampled at the quadrature points of a
/// degree-4 rule.
pub fn assemble_load(space: &FeSpace, dt: f64, jac: &[f64], f: impl Fn(&QuadPoint) -> f64) -> Result<Vec<f64>> {
    check_jacobians(space, jac)?;
    let mesh = space.mesh();
    let rule = QuadratureRule::degree4();
    let table = ShapeTable::new(space.degree(), rule.points().map(|(b, _)| b));
    let mut b = vec![0.0; space.n_dofs()];
    for elem in 0..mesh.n_elements() {
        let area = mesh.element_area(elem)?;
        let verts = mesh.element_vertices(elem);
        let dofs = space.element_dofs(elem);
        for (q, (bary, w)) in rule.points().enumerate() {
            let qp = QuadPoint {
                elem,
                bary: *bary,
                xhat: bary_point(&verts, bary),
            };
            let s = dt * 2.0 * area * w * jac[elem] * f(&qp);
            for (&dof, v) in dofs.iter().zip(&table.values[q]) {
                b[dof] += s * v;
            }
        }
    }
    Ok(b)
}

fn deformed_mesh(space: &FeSpace, node_coords: &[Point]) -> Result<Mesh> {
    let mesh = space.mesh();
    if node_coords.len() != mesh.n_nodes() {
        return Err(Error::LengthMismatch {
            expected: mesh.n_nodes(),
            got: node_coords.len(),
        });
    }
    Mesh::from_parts(
        node_coords.to_vec(),
        mesh.triangles().to_vec(),
        mesh.boundary_edges().to_vec(),
    )
}

/// Standard mass matrix assembled directly on the triangulation with the
/// same connectivity and the given (deformed) node positions.
pub fn assemble_mass_on_coords(space: &FeSpace, node_coords: &[Point]) -> Result<SparseMatrix> {
    let mesh = deformed_mesh(space, node_coords)?;
    let rule = QuadratureRule::for_degree(2 * space.degree());
    assemble_bilinear(space, &mesh, &rule, |_, q, dx, table, _, local| mass_kernel(dx, q, table, local))
}

/// `Δt ∫ α ∇ψ_j·∇ψ_i` assembled directly on deformed node positions.
pub fn assemble_stiffness_on_coords(
    space: &FeSpace,
    alpha: f64,
    dt: f64,
    node_coords: &[Point],
) -> Result<SparseMatrix> {
    let mesh = deformed_mesh(space, node_coords)?;
    let rule = QuadratureRule::for_degree(2 * (space.degree() - 1).max(1));
    assemble_bilinear(space, &mesh, &rule, |_, _, dx, table, grads, local| {
        let nl = table.n_local;
        for a in 0..nl {
            for b in 0..nl {
                local[a * nl + b] += dx * alpha * dt * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::ale::{
        sample_displacement, IntervalGeometry, IntervalMotion, PrescribedMap, DisplacementField,
    };
    use crate::mesh::build_unit_square_mesh;

    fn space(n: usize, deg: usize) -> FeSpace {
        FeSpace::new(Arc::new(build_unit_square_mesh(n, n).unwrap()), deg).unwrap()
    }

    fn ones(space: &FeSpace, c: f64) -> Vec<f64> {
        vec![c; space.mesh().n_elements()]
    }

    fn scale_geometry(mesh: &Mesh, a0: f64, a1: f64, dt: f64) -> IntervalGeometry {
        let f = |a: f64| DisplacementField(mesh.nodes().iter().map(|x| [(a - 1.0) * x[0], (a - 1.0) * x[1]]).collect());
        let motion = IntervalMotion::piecewise_constant(f(a0), f(a1), dt).unwrap();
        IntervalGeometry::build(mesh, &motion).unwrap()
    }

    #[test]
    fn p1_mass_on_single_cell() {
        let s = space(1, 1);
        let m = assemble_weighted_mass(&s, &ones(&s, 1.0)).unwrap();
        let total: f64 = m.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        // diagonal nodes 0 and 3 touch both triangles: 2 · (1/2)/6
        assert!((m.get(0, 0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.get(1, 1) - 1.0 / 12.0).abs() < 1e-15);
        assert!((m.get(0, 3) - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(m.get(1, 2), 0.0);
    }

    #[test]
    fn mass_is_linear_in_jacobian() {
        for deg in [1, 2] {
            let s = space(3, deg);
            let m1 = assemble_weighted_mass(&s, &ones(&s, 1.0)).unwrap();
            let m4 = assemble_weighted_mass(&s, &ones(&s, 4.0)).unwrap();
            assert_eq!(m4.max_abs_diff(&m1.scaled(4.0)), 0.0);
        }
    }

    #[test]
    fn mass_of_one_is_current_area() {
        let s = space(4, 2);
        let map = PrescribedMap::stability();
        for t in [0.01, 0.025, 0.033] {
            let (a, _) = map.scale_factor(t).unwrap();
            let m = assemble_weighted_mass(&s, &ones(&s, a * a)).unwrap();
            let one = vec![1.0; s.n_dofs()];
            let q: f64 = m.mul_vec(&one).iter().sum();
            assert!((q - a * a).abs() < 1e-13);
        }
    }

    #[test]
    fn nonpositive_jacobian_rejected() {
        let s = space(2, 1);
        let mut j = ones(&s, 1.0);
        j[3] = 0.0;
        assert!(matches!(
            assemble_weighted_mass(&s, &j),
            Err(Error::NonPositiveJacobian { elem: 3, .. })
        ));
    }

    #[test]
    fn identity_stiffness_annihilates_constants() {
        for deg in [1, 2] {
            let s = space(4, deg);
            let c = vec![crate::ale::IDENTITY; s.mesh().n_elements()];
            let a = assemble_pulled_back_stiffness(&s, 0.3, 0.1, &c, &ones(&s, 1.0)).unwrap();
            let r = a.mul_vec(&vec![1.0; s.n_dofs()]);
            assert!(r.iter().all(|x| x.abs() < 1e-13));
            let direct = assemble_stiffness_on_coords(&s, 0.3, 0.1, s.mesh().nodes()).unwrap();
            assert!(a.max_abs_diff(&direct) < 1e-15);
        }
    }

    #[test]
    fn p1_stiffness_is_five_point_laplacian_inside() {
        let s = space(4, 1);
        let c = vec![crate::ale::IDENTITY; s.mesh().n_elements()];
        let a = assemble_pulled_back_stiffness(&s, 1.0, 1.0, &c, &ones(&s, 1.0)).unwrap();
        let centre = 2 * 5 + 2;
        assert!((a.get(centre, centre) - 4.0).abs() < 1e-13);
        for nb in [centre - 1, centre + 1, centre - 5, centre + 5] {
            assert!((a.get(centre, nb) + 1.0).abs() < 1e-13);
        }
        assert!(a.get(centre, centre + 6).abs() < 1e-13);
    }

    #[test]
    fn stiffness_is_scale_invariant() {
        let s = space(3, 2);
        let n = s.mesh().n_elements();
        let a0 = assemble_pulled_back_stiffness(&s, 0.1, 0.05, &vec![crate::ale::IDENTITY; n], &ones(&s, 1.0)).unwrap();
        let a = 1.7;
        let a1 = assemble_pulled_back_stiffness(&s, 0.1, 0.05, &vec![[[a, 0.0], [0.0, a]]; n], &ones(&s, a * a)).unwrap();
        assert!(a0.max_abs_diff(&a1) < 1e-14);
    }

    #[test]
    fn pulled_back_operators_match_deformed_assembly() {
        let mesh = Arc::new(build_unit_square_mesh(6, 6).unwrap());
        for deg in [1, 2] {
            let s = FeSpace::new(mesh.clone(), deg).unwrap();
            for (map, t) in [(PrescribedMap::MapB, 0.5), (PrescribedMap::MapA, 0.3)] {
                let u = sample_displacement(&map, &mesh, t);
                let motion = IntervalMotion::stationary(u.clone(), 0.1).unwrap();
                let g = IntervalGeometry::build(&mesh, &motion).unwrap();
                let coords = u.deformed_nodes(&mesh);
                let a = assemble_pulled_back_stiffness(&s, 0.1, 0.2, &g.cofactor_end(), &g.jacobian_end()).unwrap();
                let b = assemble_stiffness_on_coords(&s, 0.1, 0.2, &coords).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12, "stiffness {}", a.max_abs_diff(&b));
                let m = assemble_weighted_mass(&s, &g.jacobian_end()).unwrap();
                let md = assemble_mass_on_coords(&s, &coords).unwrap();
                assert!(m.max_abs_diff(&md) < 1e-12);
            }
        }
    }

    #[test]
    fn zero_motion_gives_zero_operator() {
        let s = space(3, 2);
        let flux = vec![([[0.0; 2]; 3], 0.0); s.mesh().n_elements()];
        assert_eq!(assemble_mesh_motion_operator(&s, &flux).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn translation_flux_is_convection_matrix() {
        // Rows annihilate constants; the interior part is skew.
        let s = space(4, 1);
        let v = [0.3, -0.2];
        let flux = vec![([v; 3], 0.0); s.mesh().n_elements()];
        let m = assemble_mesh_motion_operator(&s, &flux).unwrap();
        let r = m.mul_vec(&vec![1.0; s.n_dofs()]);
        assert!(r.iter().all(|x| x.abs() < 1e-15));
        let centre = 2 * 5 + 2;
        for j in 0..s.n_dofs() {
            assert!((m.get(centre, j) + m.get(j, centre)).abs() < 1e-15);
        }
        // Two triangles share the edge; their gradients of ψ_{c+1} sum to (2, −1)/h.
        let h = 0.25;
        assert!((m.get(centre, centre + 1) - (v[0] * h / 3.0 - v[1] * h / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn motion_on_constants_matches_flux_divergence() {
        let s = space(5, 1);
        let g = scale_geometry(s.mesh(), 1.0, 2.0, 0.1);
        let m = assemble_mesh_motion_operator(&s, &g.exact_flux()).unwrap();
        let total: f64 = m.mul_vec(&vec![1.0; s.n_dofs()]).iter().sum();
        assert!((total - 3.0).abs() < 1e-13);
        let scl = crate::ale::scl_residual(&s, &g);
        let m1 = m.mul_vec(&vec![1.0; s.n_dofs()]);
        let mass = assemble_weighted_mass(&s, &ones(&s, 1.0)).unwrap();
        let dj = mass.mul_vec(&vec![3.0; s.n_dofs()]);
        for i in 0..s.n_dofs() {
            assert!((dj[i] - m1[i] - scl[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn load_sums() {
        let s = space(3, 1);
        let zero = assemble_load(&s, 1.0, &ones(&s, 1.0), |_| 0.0).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
        let b = assemble_load(&s, 1.0, &ones(&s, 1.0), |_| 1.0).unwrap();
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let b4 = assemble_load(&s, 0.3, &ones(&s, 4.0), |_| 1.0).unwrap();
        assert!((b4.iter().sum::<f64>() - 1.2).abs() < 1e-14);
    }

    #[test]
    fn load_quadrature_points_lie_in_element() {
        let s = space(2, 2);
        let b = assemble_load(&s, 1.0, &ones(&s, 1.0), |qp| qp.xhat[0]).unwrap();
        // ∫ x over the unit square
        assert!((b.iter().sum::<f64>() - 0.5).abs() < 1e-14);
    }
}
