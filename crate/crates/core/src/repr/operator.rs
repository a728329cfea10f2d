use std::io::Write;
use std::ops::Range;

use num_complex::Complex64;
use serde::Serialize;

use super::window::{SpinStructure, TruncatedWindow, ENUMERATION_ORDER};
use crate::algebra::Theta;
use crate::linalg::CMatrix;
use crate::{Error, Result};

/// One sparse column: `(row, value)` pairs sorted by row, no duplicates.
pub type Column = Vec<(u32, Complex64)>;

/// A linear operator on `ℓ²(window) ⊗ ℂ²`, stored column-wise.
///
/// `margin` bounds the index shift (in sup norm over `k, l, m`) between the
/// row and column of any nonzero entry. Sums take the larger margin, products
/// add them.
#[derive(Clone, Debug)]
pub struct MatrixOperator {
    window: TruncatedWindow,
    cols: Vec<Column>,
    margin: u32,
    hermitian: bool,
}

/// Scalar type convention for `σ¹, σ², σ³`, written into export headers.
pub const PAULI_CONVENTION: &str =
    "sigma1=[[0,1],[1,0]] sigma2=[[0,-i],[i,0]] sigma3=[[1,0],[0,-1]]; J = i*sigma2 . J0";

#[cfg(feature = "parallel")]
fn build_columns<F>(n: usize, f: F) -> Vec<Column>
where
    F: Fn(usize) -> Column + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn build_columns<F>(n: usize, f: F) -> Vec<Column>
where
    F: Fn(usize) -> Column,
{
    (0..n).map(f).collect()
}

/// Sorts by row and merges duplicate rows; exact zeros are dropped.
fn normalize(mut col: Vec<(u32, Complex64)>) -> Column {
    col.sort_unstable_by_key(|e| e.0);
    let mut out: Column = Vec::with_capacity(col.len());
    for (r, z) in col {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 += z,
            _ => out.push((r, z)),
        }
    }
    out.retain(|e| e.1 != Complex64::new(0.0, 0.0));
    out
}

impl MatrixOperator {
    /// Builds an operator column by column. `f(j)` lists the entries of
    /// column `j` in any order; duplicates are summed.
    pub fn from_column_fn<F>(window: TruncatedWindow, margin: u32, f: F) -> Self
    where
        F: Fn(usize) -> Vec<(u32, Complex64)> + Sync + Send,
    {
        let cols = build_columns(window.dim(), |j| normalize(f(j)));
        MatrixOperator {
            window,
            cols,
            margin,
            hermitian: false,
        }
    }

    pub fn zeros(window: TruncatedWindow) -> Self {
        MatrixOperator {
            window,
            cols: vec![Vec::new(); window.dim()],
            margin: 0,
            hermitian: true,
        }
    }

    pub fn identity(window: TruncatedWindow) -> Self {
        Self::diagonal(window, |_| Complex64::new(1.0, 0.0)).with_hermitian(true)
    }

    pub fn diagonal<F>(window: TruncatedWindow, f: F) -> Self
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        Self::from_column_fn(window, 0, |j| vec![(j as u32, f(j))])
    }

    pub(crate) fn with_hermitian(mut self, flag: bool) -> Self {
        self.hermitian = flag;
        self
    }

    /// Sets the hermitian flag after checking `‖T − T†‖ < tol`.
    pub fn mark_hermitian(mut self, tol: f64) -> Result<Self> {
        let r = self.hermitian_residual();
        if r >= tol {
            return Err(Error::NotHermitian(r));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn window(&self) -> &TruncatedWindow {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn margin(&self) -> u32 {
        self.margin
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn column(&self, j: usize) -> &[(u32, Complex64)] {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let c = &self.cols[col];
        match c.binary_search_by_key(&(row as u32), |e| e.0) {
            Ok(i) => c[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    fn check_window(&self, other: &Self) -> Result<()> {
        if self.window != other.window {
            return Err(Error::WindowMismatch);
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.check_window(other)?;
        let cols = build_columns(self.dim(), |j| {
            let mut v = self.cols[j].clone();
            v.extend(other.cols[j].iter().map(|&(r, z)| (r, z * sign)));
            normalize(v)
        });
        Ok(MatrixOperator {
            window: self.window,
            cols,
            margin: self.margin.max(other.margin),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        MatrixOperator {
            window: self.window,
            cols: self
                .cols
                .iter()
                .map(|col| normalize(col.iter().map(|&(r, z)| (r, z * c)).collect()))
                .collect(),
            margin: self.margin,
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    /// Matrix product `self · other` of the truncated matrices.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_window(other)?;
        let cols = build_columns(self.dim(), |j| {
            let mut acc = Vec::new();
            for &(k, b) in &other.cols[j] {
                acc.extend(self.cols[k as usize].iter().map(|&(r, a)| (r, a * b)));
            }
            normalize(acc)
        });
        Ok(MatrixOperator {
            window: self.window,
            cols,
            margin: self.margin + other.margin,
            hermitian: false,
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        MatrixOperator {
            window: self.window,
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().map(|&(r, z)| (r, z.conj())).collect())
                .collect(),
            margin: self.margin,
            hermitian: self.hermitian,
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut rows: Vec<Vec<(u32, Complex64)>> = vec![Vec::new(); self.dim()];
        for (j, col) in self.cols.iter().enumerate() {
            for &(r, z) in col {
                rows[r as usize].push((j as u32, z.conj()));
            }
        }
        MatrixOperator {
            window: self.window,
            cols: rows.into_iter().map(normalize).collect(),
            margin: self.margin,
            hermitian: self.hermitian,
        }
    }

    /// Largest entry modulus of `T − T†`.
    pub fn hermitian_residual(&self) -> f64 {
        self.sub(&self.adjoint())
            .map(|d| d.max_abs())
            .unwrap_or(f64::INFINITY)
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_on(0..self.dim())
    }

    pub fn max_abs_on(&self, cols: impl IntoIterator<Item = usize>) -> f64 {
        cols.into_iter()
            .flat_map(|j| self.cols[j].iter().map(|e| e.1.norm()))
            .fold(0.0, f64::max)
    }

    /// Largest Euclidean column norm over columns at interior `margin`.
    pub fn max_column_norm(&self, margin: u32) -> f64 {
        self.window
            .interior_indices(margin)
            .map(|j| self.cols[j].iter().map(|e| e.1.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `self − other` over columns that are interior at
    /// `margin`.
    pub fn interior_residual(&self, other: &Self, margin: u32) -> Result<f64> {
        Ok(self.sub(other)?.interior_norm(margin))
    }

    /// Largest entry over columns that are interior at `margin`.
    pub fn interior_norm(&self, margin: u32) -> f64 {
        self.max_abs_on(self.window.interior_indices(margin))
    }

    /// Largest entry connecting different fibres (`m` of row ≠ `m` of column).
    pub fn off_fibre_norm(&self) -> f64 {
        let fd = self.window.fibre_dim() as u32;
        let mut worst: f64 = 0.0;
        for (j, col) in self.cols.iter().enumerate() {
            let fj = j as u32 / fd;
            for &(r, z) in col {
                if r / fd != fj {
                    worst = worst.max(z.norm());
                }
            }
        }
        worst
    }

    /// Dense submatrix with rows and columns in `range`.
    pub fn dense_block(&self, range: Range<usize>) -> CMatrix {
        let n = range.len();
        let mut m = CMatrix::zeros(n, n);
        for (c, j) in range.clone().enumerate() {
            for &(r, z) in &self.cols[j] {
                let r = r as usize;
                if range.contains(&r) {
                    m[(r - range.start, c)] = z;
                }
            }
        }
        m
    }

    pub fn to_dense(&self) -> CMatrix {
        self.dense_block(0..self.dim())
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (j, col) in self.cols.iter().enumerate() {
            if v[j] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &(r, z) in col {
                out[r as usize] += z * v[j];
            }
        }
        out
    }

    /// Rebuilds the operator with every column transformed by `f`.
    pub(crate) fn map_columns<F>(&self, margin: u32, f: F) -> Self
    where
        F: Fn(usize, &[(u32, Complex64)]) -> Vec<(u32, Complex64)> + Sync + Send,
    {
        MatrixOperator {
            window: self.window,
            cols: build_columns(self.dim(), |j| normalize(f(j, &self.cols[j]))),
            margin,
            hermitian: false,
        }
    }

    pub fn header(&self) -> ExportHeader {
        ExportHeader {
            dim: self.dim(),
            window_cutoff: self.window.cutoff(),
            spin: self.window.spin(),
            theta: self.window.theta(),
            margin: self.margin,
            hermitian: self.hermitian,
            fibre_diagonal: self.off_fibre_norm() == 0.0,
            enumeration_order: ENUMERATION_ORDER,
            pauli_convention: PAULI_CONVENTION,
            layout: "column-major complex128 little-endian (re, im)",
        }
    }

    /// Writes the dense matrix column-major as little-endian `(re, im)` pairs.
    pub fn write_dense(&self, mut out: impl Write) -> std::io::Result<()> {
        let n = self.dim();
        let mut buf = vec![0u8; n * 16];
        for col in &self.cols {
            buf.iter_mut().for_each(|b| *b = 0);
            for &(r, z) in col {
                let at = r as usize * 16;
                buf[at..at + 8].copy_from_slice(&z.re.to_le_bytes());
                buf[at + 8..at + 16].copy_from_slice(&z.im.to_le_bytes());
            }
            out.write_all(&buf)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExportHeader {
    pub dim: usize,
    pub window_cutoff: u32,
    pub spin: SpinStructure,
    pub theta: Theta,
    pub margin: u32,
    pub hermitian: bool,
    pub fibre_diagonal: bool,
    pub enumeration_order: &'static str,
    pub pauli_convention: &'static str,
    pub layout: &'static str,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> TruncatedWindow {
        TruncatedWindow::new(1, SpinStructure::INTEGRAL, Theta::zero()).unwrap()
    }

    fn shift(w: TruncatedWindow) -> MatrixOperator {
        let n = w.dim();
        MatrixOperator::from_column_fn(w, 1, move |j| {
            if j + 2 < n {
                vec![((j + 2) as u32, Complex64::new(1.0, 1.0))]
            } else {
                vec![]
            }
        })
    }

    #[test]
    fn product_matches_dense() {
        let w = window();
        let a = shift(w);
        let b = a.adjoint().scale(Complex64::new(0.0, 2.0)).add(&a).unwrap();
        let p = a.mul(&b).unwrap();
        let dense = a.to_dense() * b.to_dense();
        assert!(crate::linalg::max_abs(&(p.to_dense() - dense)) < 1e-14);
        assert_eq!(p.margin(), 2);
    }

    #[test]
    fn hermitian_flag_is_checked() {
        let w = window();
        let a = shift(w);
        assert!(matches!(a.clone().mark_hermitian(1e-12), Err(Error::NotHermitian(_))));
        let h = a.add(&a.adjoint()).unwrap().mark_hermitian(1e-12).unwrap();
        assert!(h.is_hermitian());
        assert!(MatrixOperator::identity(w).is_hermitian());
    }

    #[test]
    fn dense_export_layout() {
        let w = window();
        let a = shift(w);
        let mut bytes = Vec::new();
        a.write_dense(&mut bytes).unwrap();
        let n = w.dim();
        assert_eq!(bytes.len(), n * n * 16);
        // Entry (2, 0) sits at column 0, row 2.
        let re = f64::from_le_bytes(bytes[32..40].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[40..48].try_into().unwrap());
        assert_eq!((re, im), (1.0, 1.0));
        let header = serde_json::to_value(a.header()).unwrap();
        assert_eq!(header["enumeration_order"], ENUMERATION_ORDER);
    }

    #[test]
    fn mismatched_windows_rejected() {
        let w = window();
        let w2 = TruncatedWindow::new(1, SpinStructure::new(true, false), Theta::zero()).unwrap();
        let err = MatrixOperator::identity(w)
            .add(&MatrixOperator::identity(w2))
            .unwrap_err();
        assert_eq!(err, Error::WindowMismatch);
    }
}
