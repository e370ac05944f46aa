use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use super::basis::{eval_bary, n_local};
use super::sparse::SparseMatrix;
use crate::ale::DisplacementField;
use crate::mesh::{edge_key, Mesh};
use crate::{Error, Point, Result};

/// Continuous Lagrange space of degree 1 or 2 on the referent mesh.
///
/// Vertex dofs share the node numbering. P2 edge dofs follow, numbered in
/// order of first appearance when sweeping the elements.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    n_local: usize,
    dof_map: Vec<usize>,
    dof_coords: Vec<Point>,
    dof_parents: Vec<[usize; 2]>,
    boundary_dofs: Vec<usize>,
    template: OnceLock<SparseMatrix>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::UnsupportedDegree(degree));
        }
        let nl = n_local(degree);
        let nn = mesh.n_nodes();
        let mut dof_map = Vec::with_capacity(nl * mesh.n_elements());
        let mut dof_coords = mesh.nodes().to_vec();
        let mut dof_parents: Vec<[usize; 2]> = (0..nn).map(|i| [i, i]).collect();
        let mut edge_dofs: HashMap<[usize; 2], usize> = HashMap::new();

        for tri in mesh.triangles() {
            dof_map.extend_from_slice(tri);
            if degree == 2 {
                for (a, b) in [(1, 2), (2, 0), (0, 1)] {
                    let key = edge_key(tri[a], tri[b]);
                    let next = dof_coords.len();
                    let dof = *edge_dofs.entry(key).or_insert_with(|| {
                        let (p, q) = (mesh.nodes()[key[0]], mesh.nodes()[key[1]]);
                        dof_coords.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                        dof_parents.push(key);
                        next
                    });
                    dof_map.push(dof);
                }
            }
        }

        let boundary_nodes = mesh.boundary_node_set();
        let mut boundary_dofs: Vec<usize> = boundary_nodes.iter().copied().collect();
        if degree == 2 {
            for e in mesh.boundary_edges() {
                if let Some(&d) = edge_dofs.get(&edge_key(e.nodes[0], e.nodes[1])) {
                    boundary_dofs.push(d);
                }
            }
        }
        boundary_dofs.sort_unstable();
        boundary_dofs.dedup();

        Ok(Self {
            mesh,
            degree,
            n_local: nl,
            dof_map,
            dof_coords,
            dof_parents,
            boundary_dofs,
            template: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn element_dofs(&self, elem: usize) -> &[usize] {
        &self.dof_map[elem * self.n_local..(elem + 1) * self.n_local]
    }

    /// Referent coordinates of every dof.
    pub fn dof_coords(&self) -> &[Point] {
        &self.dof_coords
    }

    /// The two mesh nodes whose midpoint is the dof (`[i, i]` for vertices).
    pub fn dof_parents(&self) -> &[[usize; 2]] {
        &self.dof_parents
    }

    /// Sorted dofs on the boundary of the square.
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    /// Zero matrix with this space's coupling pattern. The pattern is built
    /// once and shared by every matrix assembled on the space.
    pub fn zero_matrix(&self) -> SparseMatrix {
        self.template.get_or_init(|| SparseMatrix::pattern_of(self)).zeros_like()
    }

    /// Physical dof positions under a P1 displacement.
    pub fn deformed_dof_coords(&self, disp: &DisplacementField) -> Vec<Point> {
        self.dof_coords
            .iter()
            .zip(&self.dof_parents)
            .map(|(x, [a, b])| {
                let (ua, ub) = (disp.0[*a], disp.0[*b]);
                [x[0] + 0.5 * (ua[0] + ub[0]), x[1] + 0.5 * (ua[1] + ub[1])]
            })
            .collect()
    }

    /// Nodal interpolant of `f` given at referent dof positions.
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> ScalarField {
        ScalarField(self.dof_coords.iter().map(|&x| f(x)).collect())
    }

    /// Value of `field` at a barycentric point of element `elem`.
    pub fn evaluate(&self, field: &[f64], elem: usize, bary: [f64; 3]) -> f64 {
        let mut vals = [0.0; 6];
        let mut d = [[0.0; 3]; 6];
        eval_bary(self.degree, &bary, &mut vals[..self.n_local], &mut d[..self.n_local]);
        self.element_dofs(elem)
            .iter()
            .zip(&vals)
            .map(|(&dof, v)| field[dof] * v)
            .sum()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_dofs() {
            return Err(Error::LengthMismatch {
                expected: self.n_dofs(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Dof coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

impl ScalarField {
    pub fn zeros(space: &FeSpace) -> Self {
        Self(vec![0.0; space.n_dofs()])
    }

    pub fn constant(space: &FeSpace, c: f64) -> Self {
        Self(vec![c; space.n_dofs()])
    }

    pub fn from_values(space: &FeSpace, values: Vec<f64>) -> Result<Self> {
        space.check_len(values.len())?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_unit_square_mesh;

    fn space(n: usize, deg: usize) -> FeSpace {
        FeSpace::new(Arc::new(build_unit_square_mesh(n, n).unwrap()), deg).unwrap()
    }

    #[test]
    fn dof_counts() {
        assert_eq!(space(2, 1).n_dofs(), 9);
        // (2n+1)² nodes of the twice-refined grid
        assert_eq!(space(2, 2).n_dofs(), 25);
        assert_eq!(space(40, 2).n_dofs(), 81 * 81);
        assert_eq!(space(3, 2).boundary_dofs().len(), 4 * 6);
        assert_eq!(space(3, 1).boundary_dofs().len(), 12);
    }

    #[test]
    fn shared_edges_share_dofs() {
        let s = space(3, 2);
        let mut owners: HashMap<usize, usize> = HashMap::new();
        for e in 0..s.mesh().n_elements() {
            for &d in &s.element_dofs(e)[3..] {
                *owners.entry(d).or_default() += 1;
            }
        }
        let interior_edges = owners.values().filter(|&&c| c == 2).count();
        let boundary_edges = owners.values().filter(|&&c| c == 1).count();
        assert_eq!(boundary_edges, 12);
        // 12 horizontal + 12 vertical + 9 diagonal edges
        assert_eq!(interior_edges, 33 - 12);
        assert_eq!(owners.len(), s.n_dofs() - 16);
    }

    #[test]
    fn dof_coords_match_local_basis() {
        let s = space(2, 2);
        for e in 0..s.mesh().n_elements() {
            let v = s.mesh().element_vertices(e);
            for (k, &d) in s.element_dofs(e).iter().enumerate() {
                let bary = match k {
                    0..=2 => {
                        let mut b = [0.0; 3];
                        b[k] = 1.0;
                        b
                    }
                    3 => [0.0, 0.5, 0.5],
                    4 => [0.5, 0.0, 0.5],
                    _ => [0.5, 0.5, 0.0],
                };
                let x = [0, 1].map(|c| bary[0] * v[0][c] + bary[1] * v[1][c] + bary[2] * v[2][c]);
                assert!((x[0] - s.dof_coords()[d][0]).abs() < 1e-15);
                assert!((x[1] - s.dof_coords()[d][1]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_quadratics() {
        let s = space(3, 2);
        let f = |x: Point| 1.0 + x[0] - 2.0 * x[1] + 3.0 * x[0] * x[1] - x[1] * x[1];
        let u = s.interpolate(f);
        for e in 0..s.mesh().n_elements() {
            let v = s.mesh().element_vertices(e);
            let bary = [0.2, 0.5, 0.3];
            let x = [0, 1].map(|c| bary[0] * v[0][c] + bary[1] * v[1][c] + bary[2] * v[2][c]);
            assert!((s.evaluate(&u.0, e, bary) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_degree_and_length() {
        let m = Arc::new(build_unit_square_mesh(1, 1).unwrap());
        assert!(FeSpace::new(m.clone(), 3).is_err());
        let s = FeSpace::new(m, 1).unwrap();
        assert!(ScalarField::from_values(&s, vec![0.0; 3]).is_err());
    }
}
