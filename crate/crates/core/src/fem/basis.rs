//! Lagrange shape functions in barycentric form.
//!
//! Local ordering: vertices 0, 1, 2; for P2 then the midpoints of edges
//! (1,2), (2,0), (0,1) as local dofs 3, 4, 5.

use crate::{Error, Point, Result};

/// Shape function values and gradients with respect to the reference
/// coordinates `(ξ, η)` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    pub values: Vec<f64>,
    pub gradients: Vec<Point>,
}

pub(crate) fn n_local(degree: usize) -> usize {
    match degree {
        1 => 3,
        2 => 6,
        _ => unreachable!("degree validated at space construction"),
    }
}

/// Values and barycentric partial derivatives `∂ψ/∂λ_k` of every local
/// shape function.
pub(crate) fn eval_bary(degree: usize, l: &[f64; 3], values: &mut [f64], dbary: &mut [[f64; 3]]) {
    match degree {
        1 => {
            for k in 0..3 {
                values[k] = l[k];
                dbary[k] = [0.0; 3];
                dbary[k][k] = 1.0;
            }
        }
        2 => {
            for k in 0..3 {
                values[k] = l[k] * (2.0 * l[k] - 1.0);
                dbary[k] = [0.0; 3];
                dbary[k][k] = 4.0 * l[k] - 1.0;
            }
            for (m, (a, b)) in [(1, 2), (2, 0), (0, 1)].into_iter().enumerate() {
                values[3 + m] = 4.0 * l[a] * l[b];
                dbary[3 + m] = [0.0; 3];
                dbary[3 + m][a] = 4.0 * l[b];
                dbary[3 + m][b] = 4.0 * l[a];
            }
        }
        _ => unreachable!("degree validated at space construction"),
    }
}

/// Lagrange basis of degree 1 or 2 at a barycentric point of the reference
/// triangle.
pub fn reference_basis(degree: usize, bary: [f64; 3]) -> Result<LocalBasis> {
    if !(1..=2).contains(&degree) {
        return Err(Error::UnsupportedDegree(degree));
    }
    let n = n_local(degree);
    let mut values = vec![0.0; n];
    let mut dbary = vec![[0.0; 3]; n];
    eval_bary(degree, &bary, &mut values, &mut dbary);
    // λ0 = 1 − ξ − η, λ1 = ξ, λ2 = η
    let gradients = dbary.iter().map(|d| [d[1] - d[0], d[2] - d[0]]).collect();
    Ok(LocalBasis { values, gradients })
}

/// Values and referent gradients of the local shape functions tabulated at
/// a fixed set of quadrature points for one element.
pub(crate) struct ShapeTable {
    pub n_local: usize,
    pub values: Vec<Vec<f64>>,
    pub dbary: Vec<Vec<[f64; 3]>>,
}

impl ShapeTable {
    pub fn new<'a>(degree: usize, points: impl Iterator<Item = &'a [f64; 3]>) -> Self {
        let n = n_local(degree);
        let mut values = Vec::new();
        let mut dbary = Vec::new();
        for p in points {
            let mut v = vec![0.0; n];
            let mut d = vec![[0.0; 3]; n];
            eval_bary(degree, p, &mut v, &mut d);
            values.push(v);
            dbary.push(d);
        }
        Self {
            n_local: n,
            values,
            dbary,
        }
    }

    /// Gradients at quadrature point `q` given the element's barycentric
    /// gradients.
    pub fn gradients(&self, q: usize, grad_lambda: &[Point; 3], out: &mut [Point]) {
        for (i, d) in self.dbary[q].iter().enumerate() {
            out[i] = [
                d[0] * grad_lambda[0][0] + d[1] * grad_lambda[1][0] + d[2] * grad_lambda[2][0],
                d[0] * grad_lambda[0][1] + d[1] * grad_lambda[1][1] + d[2] * grad_lambda[2][1],
            ];
        }
    }
}
