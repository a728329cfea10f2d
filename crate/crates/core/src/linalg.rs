//! Thin helpers over `nalgebra` for the dense complex linear algebra used by
//! the rank tests and the per-fibre eigensolves.

use nalgebra as na;
use num_complex::Complex64;

pub type CMatrix = na::DMatrix<Complex64>;

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns)
/// of a hermitian matrix.
pub fn hermitian_eigh(m: CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), m);
    }
    let eig = na::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with singular values below `rel_tol · σ_max` treated as zero.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Orthonormal basis (as columns) of the kernel of `m`.
///
/// Computed from the eigenvectors of `m^H m` whose eigenvalues fall below
/// `(rel_tol · σ_max)²`; this keeps the full column space available even when
/// `m` has fewer rows than columns.
pub fn nullspace(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let k = m.ncols();
    if k == 0 {
        return CMatrix::zeros(0, 0);
    }
    let gram = m.adjoint() * m;
    let (values, vectors) = hermitian_eigh(gram);
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let cut = if top == 0.0 { 0.5 } else { (rel_tol * rel_tol) * top };
    let keep: Vec<usize> = (0..k).filter(|&i| values[i] <= cut).collect();
    CMatrix::from_fn(k, keep.len(), |r, c| vectors[(r, keep[c])])
}

/// Euclidean distance from `v` to the column space of `m`, with singular
/// values below `rel_tol · σ_max` discarded.
pub fn projection_residual(m: &CMatrix, v: &na::DVector<Complex64>, rel_tol: f64) -> f64 {
    if m.ncols() == 0 || m.nrows() == 0 {
        return v.norm();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut proj = v.clone();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > rel_tol * top && top > 0.0 {
            let col = u.column(i);
            let c = col.dotc(v);
            proj -= col * c;
        }
    }
    proj.norm()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        // Rows (1, i, 0) and (0, 0, 1): kernel is spanned by (i, -1, 0)/√2.
        let m = CMatrix::from_row_slice(2, 3, &[one, i, 0.0.into(), 0.0.into(), 0.0.into(), one]);
        let n = nullspace(&m, 1e-10);
        assert_eq!(n.ncols(), 1);
        assert!(max_abs(&(&m * &n)) < 1e-12);
        assert_eq!(rank(&m, 1e-10), 2);
    }

    #[test]
    fn projection_onto_span() {
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let m = CMatrix::from_row_slice(3, 1, &[one, one, z]);
        let inside = na::DVector::from_vec(vec![one * 2.0, one * 2.0, z]);
        let outside = na::DVector::from_vec(vec![z, z, one]);
        assert!(projection_residual(&m, &inside, 1e-12) < 1e-14);
        assert!((projection_residual(&m, &outside, 1e-12) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let a = CMatrix::from_fn(4, 4, |r, c| {
            let x = (r * 3 + c * 5) as f64;
            Complex64::new(x.sin() + (if r == c { 2.0 } else { 0.0 }), 0.0)
        });
        let h = &a + a.adjoint();
        let (vals, vecs) = hermitian_eigh(h.clone());
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&na::DVector::from_iterator(
            4,
            vals.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let rec = &vecs * d * vecs.adjoint();
        assert!(max_abs(&(rec - h)) < 1e-12);
    }
}
