//! Referent triangulation of the unit square.
//!
//! The mesh never changes during a run; domain motion lives entirely in
//! displacement fields defined on its nodes.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::{Error, Point, Result};

/// Side of the unit square a boundary edge lies on. Every side carries
/// Dirichlet data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundarySide {
    Bottom,
    Right,
    Top,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub side: BoundarySide,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    /// Builds a mesh from raw parts, checking only that node indices are in
    /// range. Use [`Mesh::validate`] for the geometric invariants.
    pub fn from_parts(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let n = nodes.len();
        for &idx in triangles
            .iter()
            .flatten()
            .chain(boundary_edges.iter().flat_map(|e| e.nodes.iter()))
        {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        Ok(Self {
            nodes,
            triangles,
            boundary_edges,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    /// Vertex coordinates of element `elem`.
    pub fn element_vertices(&self, elem: usize) -> [Point; 3] {
        let t = self.triangles[elem];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    /// Half the cross product of the edge vectors. Negative for clockwise
    /// triangles, zero for collinear ones.
    pub fn signed_area(&self, elem: usize) -> Result<f64> {
        if elem >= self.triangles.len() {
            return Err(Error::IndexOutOfRange {
                index: elem,
                len: self.triangles.len(),
            });
        }
        Ok(signed_area(self.element_vertices(elem)))
    }

    /// Area of element `elem`; degenerate or inverted elements are an error.
    pub fn element_area(&self, elem: usize) -> Result<f64> {
        let area = self.signed_area(elem)?;
        if area <= 0.0 {
            return Err(Error::DegenerateElement { elem, area });
        }
        Ok(area)
    }

    /// Referent gradients of the three barycentric coordinates, constant on
    /// the element.
    pub fn barycentric_gradients(&self, elem: usize) -> Result<[Point; 3]> {
        let area = self.element_area(elem)?;
        let [p0, p1, p2] = self.element_vertices(elem);
        let inv = 1.0 / (2.0 * area);
        Ok([
            [(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv],
            [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv],
            [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv],
        ])
    }

    /// Nodes incident to at least one boundary edge.
    pub fn boundary_node_set(&self) -> BTreeSet<usize> {
        self.boundary_edges
            .iter()
            .flat_map(|e| e.nodes.iter().copied())
            .collect()
    }

    /// Checks orientation, boundary-edge ownership, and index ranges.
    pub fn validate(&self) -> Result<()> {
        for elem in 0..self.n_elements() {
            self.element_area(elem)?;
        }
        let mut owners: HashMap<[usize; 2], usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *owners.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        for edge in &self.boundary_edges {
            let count = owners
                .get(&edge_key(edge.nodes[0], edge.nodes[1]))
                .copied()
                .unwrap_or(0);
            if count != 1 {
                return Err(Error::Config(format!(
                    "boundary edge {:?} belongs to {count} triangles",
                    edge.nodes
                )));
            }
        }
        Ok(())
    }

    /// Plain-text listing: `i x y` per node, then `e n0 n1 n2` per triangle.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "{i} {:.17e} {:.17e}", p[0], p[1]);
        }
        for (e, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(out, "{e} {} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub fn signed_area(v: [Point; 3]) -> f64 {
    let e1 = [v[1][0] - v[0][0], v[1][1] - v[0][1]];
    let e2 = [v[2][0] - v[0][0], v[2][1] - v[0][1]];
    0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
}

/// Structured triangulation of `[0,1]²` with `nx × ny` cells, each split along
/// its bottom-left to top-right diagonal. Node `(i, j)` has index
/// `j * (nx + 1) + i`.
pub fn build_unit_square_mesh(nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMeshSize { nx, ny });
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;

    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([i as f64 / nx as f64, j as f64 / ny as f64]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (n00, n10, n01, n11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([n00, n10, n11]);
            triangles.push([n00, n11, n01]);
        }
    }

    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(i, 0), idx(i + 1, 0)],
            side: BoundarySide::Bottom,
        });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(nx, j), idx(nx, j + 1)],
            side: BoundarySide::Right,
        });
    }
    for i in (0..nx).rev() {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(i + 1, ny), idx(i, ny)],
            side: BoundarySide::Top,
        });
    }
    for j in (0..ny).rev() {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(0, j + 1), idx(0, j)],
            side: BoundarySide::Left,
        });
    }

    Ok(Mesh {
        nodes,
        triangles,
        boundary_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid() {
        let m = build_unit_square_mesh(1, 1).unwrap();
        assert_eq!(m.n_nodes(), 4);
        assert_eq!(m.n_elements(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.boundary_node_set().len(), 4);
        m.validate().unwrap();
    }

    #[test]
    fn two_by_two() {
        let m = build_unit_square_mesh(2, 2).unwrap();
        assert_eq!(m.n_nodes(), 9);
        assert_eq!(m.n_elements(), 8);
        let total: f64 = (0..8).map(|e| m.element_area(e).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for e in 0..8 {
            assert!((m.element_area(e).unwrap() - 0.125).abs() < 1e-15);
        }
        let b = m.boundary_node_set();
        assert_eq!(b.len(), 8);
        assert!(!b.contains(&4));
    }

    #[test]
    fn twenty_by_twenty() {
        let m = build_unit_square_mesh(20, 20).unwrap();
        assert_eq!(m.n_nodes(), 441);
        assert_eq!(m.n_elements(), 800);
        let min = (0..800)
            .map(|e| m.element_area(e).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((min - 1.0 / 800.0).abs() < 1e-15);
        let total: f64 = (0..800).map(|e| m.element_area(e).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_count_is_perimeter() {
        for (nx, ny) in [(1, 3), (4, 2), (7, 5), (10, 10)] {
            let m = build_unit_square_mesh(nx, ny).unwrap();
            assert_eq!(m.boundary_node_set().len(), 2 * (nx + ny));
            m.validate().unwrap();
        }
    }

    #[test]
    fn rejects_zero_counts() {
        assert!(matches!(
            build_unit_square_mesh(0, 3),
            Err(Error::InvalidMeshSize { .. })
        ));
        assert!(build_unit_square_mesh(3, 0).is_err());
    }

    #[test]
    fn reference_triangle_area() {
        let m = Mesh::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![],
        )
        .unwrap();
        assert_eq!(m.element_area(0).unwrap(), 0.5);
        assert!(m.element_area(1).is_err());
    }

    #[test]
    fn degenerate_triangle_flagged() {
        let m = Mesh::from_parts(
            vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]],
            vec![[0, 1, 2]],
            vec![],
        )
        .unwrap();
        assert_eq!(m.signed_area(0).unwrap(), 0.0);
        assert!(matches!(
            m.element_area(0),
            Err(Error::DegenerateElement { .. })
        ));
        assert!(m.validate().is_err());
    }

    #[test]
    fn out_of_range_connectivity_rejected() {
        assert!(Mesh::from_parts(vec![[0.0, 0.0]], vec![[0, 1, 2]], vec![]).is_err());
    }

    #[test]
    fn dump_lists_nodes_then_elements() {
        let m = build_unit_square_mesh(1, 1).unwrap();
        let text = m.dump();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("0 "));
        assert_eq!(lines[4], "0 0 1 3");
        assert_eq!(lines[5], "1 0 3 2");
    }
}
