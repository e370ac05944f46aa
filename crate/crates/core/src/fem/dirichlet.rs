use super::sparse::SparseMatrix;

/// Symmetric elimination of Dirichlet constraints: column contributions of
/// the constrained values move to the right-hand side, constrained rows and
/// columns are zeroed, and their diagonal set to one.
pub fn apply_dirichlet(a: &mut SparseMatrix, b: &mut [f64], dofs: &[usize], values: &[f64]) {
    assert_eq!(dofs.len(), values.len(), "one value per constrained dof");
    assert_eq!(b.len(), a.n());
    let mut fixed: Vec<Option<f64>> = vec![None; a.n()];
    for (&d, &v) in dofs.iter().zip(values) {
        fixed[d] = Some(v);
    }
    for i in 0..a.n() {
        let (cols, vals) = a.row_mut(i);
        if let Some(g) = fixed[i] {
            for (&j, v) in cols.iter().zip(vals.iter_mut()) {
                *v = if j == i { 1.0 } else { 0.0 };
            }
            b[i] = g;
        } else {
            for (&j, v) in cols.iter().zip(vals.iter_mut()) {
                if let Some(g) = fixed[j] {
                    b[i] -= *v * g;
                    *v = 0.0;
                }
            }
        }
    }
}
