use std::ops::Range;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::Theta;
use crate::connections::{lifted_dirac, twisted_dirac, Connection};
use crate::dirac::DiracBundleDecomposition;
use crate::linalg::{hermitian_eigh, CMatrix};
use crate::repr::{MatrixOperator, TruncatedWindow, ENUMERATION_ORDER, PAULI_CONVENTION};
use crate::{Error, Result, IDENTITY_TOL};

/// Eigenpairs of one connected block of a fibre.
#[derive(Clone, Debug)]
pub struct EigenComponent {
    /// Global basis indices spanned by the block.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Columns are eigenvectors in the order of `values`.
    pub vectors: CMatrix,
}

impl EigenComponent {
    /// `diag(V† T_II V)`: expectation values of `t` in the eigenvectors.
    pub fn expectations(&self, t: &MatrixOperator) -> Vec<Complex64> {
        let block = restrict(t, &self.indices);
        let tv = &block * &self.vectors;
        (0..self.values.len())
            .map(|c| self.vectors.column(c).dotc(&tv.column(c)))
            .collect()
    }
}

/// The eigendecomposition of a fibre block, split along its sparsity graph.
#[derive(Clone, Debug)]
pub struct FibreEigensystem {
    pub k: i32,
    pub components: Vec<EigenComponent>,
    /// `max ‖B − VΛV†‖ / ‖B‖` over the components, entrywise.
    pub backward_error: f64,
}

impl FibreEigensystem {
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.components.iter().flat_map(|c| c.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Index sets of the connected components of `t` restricted to `range`.
fn components(t: &MatrixOperator, range: Range<usize>) -> Vec<Vec<usize>> {
    let n = range.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in range.clone() {
        for &(r, _) in t.column(j) {
            let r = r as usize;
            if range.contains(&r) {
                let a = find(&mut parent, j - range.start);
                let b = find(&mut parent, r - range.start);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        groups[root].push(range.start + i);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// The dense submatrix of `t` on the sorted index set `idx`.
pub(crate) fn restrict(t: &MatrixOperator, idx: &[usize]) -> CMatrix {
    let mut m = CMatrix::zeros(idx.len(), idx.len());
    for (c, &j) in idx.iter().enumerate() {
        for &(r, z) in t.column(j) {
            if let Ok(pos) = idx.binary_search(&(r as usize)) {
                m[(pos, c)] = z;
            }
        }
    }
    m
}

fn decompose_component(t: &MatrixOperator, indices: Vec<usize>) -> (EigenComponent, f64) {
    let block = restrict(t, &indices);
    let (values, vectors) = hermitian_eigh(block.clone());
    let lambda = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    let recon = &vectors * lambda * vectors.adjoint();
    let scale = block.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = (&block - recon).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rel = if scale > 0.0 { err / scale } else { err };
    (
        EigenComponent {
            indices,
            values,
            vectors,
        },
        rel,
    )
}

#[cfg(feature = "parallel")]
fn map_all<T: Send, U: Send>(items: Vec<T>, f: impl Fn(T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_all<T, U>(items: Vec<T>, f: impl Fn(T) -> U) -> Vec<U> {
    items.into_iter().map(f).collect()
}

/// Eigendecomposition of the fibre-`k` block of a fibre-preserving
/// hermitian operator.
pub fn fibre_eigensystem(t: &MatrixOperator, k: i32) -> Result<FibreEigensystem> {
    let w = t.window();
    let range = w.fibre_range(k)?;
    let mut off: f64 = 0.0;
    let mut herm: f64 = 0.0;
    for j in range.clone() {
        for &(r, z) in t.column(j) {
            let r = r as usize;
            if range.contains(&r) {
                herm = herm.max((z - t.entry(j, r).conj()).norm());
            } else {
                off = off.max(z.norm());
            }
        }
    }
    if off > IDENTITY_TOL {
        return Err(Error::NotFibreDiagonal(off));
    }
    if herm > IDENTITY_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let solved = map_all(components(t, range), |idx| decompose_component(t, idx));
    let backward_error = solved.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(FibreEigensystem {
        k,
        components: solved.into_iter().map(|s| s.0).collect(),
        backward_error,
    })
}

/// Sorted eigenvalues of the fibre-`k` block.
pub fn fibre_spectrum(t: &MatrixOperator, k: i32) -> Result<Vec<f64>> {
    Ok(fibre_eigensystem(t, k)?.eigenvalues())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowMeta {
    pub cutoff: u32,
    pub eps1: f64,
    pub eps2: f64,
    pub theta: Theta,
    pub dim: usize,
    pub enumeration_order: &'static str,
    pub pauli_convention: &'static str,
}

impl WindowMeta {
    pub fn of(w: &TruncatedWindow) -> Self {
        WindowMeta {
            cutoff: w.cutoff(),
            eps1: w.spin().eps1(),
            eps2: w.spin().eps2(),
            theta: w.theta(),
            dim: w.dim(),
            enumeration_order: ENUMERATION_ORDER,
            pauli_convention: PAULI_CONVENTION,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FibreSpectrum {
    pub k: i32,
    pub eigenvalues: Vec<f64>,
}

pub const SPECTRAL_REPORT_SCHEMA: &str = "torus-bundle/spectral-report/v1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub schema: &'static str,
    pub operator: String,
    pub window: WindowMeta,
    pub fibres: Vec<FibreSpectrum>,
    pub residual_bound: f64,
}

/// Spectra of `t` on the listed fibres.
pub fn spectral_report(label: &str, t: &MatrixOperator, fibres: &[i32]) -> Result<SpectralReport> {
    let mut out = Vec::with_capacity(fibres.len());
    let mut bound: f64 = 0.0;
    for &k in fibres {
        let es = fibre_eigensystem(t, k)?;
        bound = bound.max(es.backward_error);
        out.push(FibreSpectrum {
            k,
            eigenvalues: es.eigenvalues(),
        });
    }
    Ok(SpectralReport {
        schema: SPECTRAL_REPORT_SCHEMA,
        operator: label.to_string(),
        window: WindowMeta::of(t.window()),
        fibres: out,
        residual_bound: bound,
    })
}

/// Largest difference after sorting both lists; `None` if lengths differ.
fn sorted_mismatch(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Some(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

fn relation(total: &MatrixOperator, base: &MatrixOperator, k: i32, shift: f64) -> Result<f64> {
    let abs: Vec<f64> = fibre_spectrum(total, k)?.into_iter().map(f64::abs).collect();
    let pred: Vec<f64> = fibre_spectrum(base, k)?
        .into_iter()
        .map(|l| (shift * shift + l * l).sqrt())
        .collect();
    sorted_mismatch(abs, pred).ok_or(Error::WindowMismatch)
}

/// `|spec(D_h + D_v)|` on fibre `k` against `{√(k²/ℓ² + λ²) : λ ∈ spec(D_h)}`.
pub fn spectrum_relation_check(dec: &DiracBundleDecomposition, k: i32) -> Result<f64> {
    relation(&dec.projectable_part()?, &dec.d_h, k, k as f64 / dec.ell)
}

/// `|spec(𝒟_ω)|` on fibre `k` against `{√(k² + μ²) : μ ∈ spec(D_ω)}`.
///
/// The relation rests on `Γδ` anticommuting with `D_ω`, which holds for
/// `ℓ = 1`.
pub fn lifted_relation_check(conn: &Connection, dec: &DiracBundleDecomposition, k: i32) -> Result<f64> {
    relation(&lifted_dirac(conn, dec)?, &twisted_dirac(conn, dec)?, k, k as f64)
}
