//! Truncated Hilbert space `ℓ²(window) ⊗ ℂ²` and the matrices acting on it.
//!
//! The basis vector `e_n = U^n Ω` carries the left action
//! `π(U^s) e_n = e^{2πi c(s,n)} e_{n+s}` and the right action
//! `R(U^s) e_n = e^{2πi c(n,s)} e_{n+s}`, both with the cocycle of
//! [`Theta::cocycle`]. Lattice points may be half-integral in `k, l`.
//!
//! The reflection `J₀ e_n = e^{2πi c(n,n)} e_{−n}` is the modular conjugation
//! of the trace state in this basis: it satisfies `J₀ π(x) J₀ = R(x*)`, so
//! `J π(b*) J⁻¹` is right multiplication by `b`. The real structure is
//! `J = iσ² ∘ J₀`.

mod operator;
mod window;

use nalgebra::Matrix2;
use num_complex::Complex64;

pub use operator::{Column, ExportHeader, MatrixOperator, PAULI_CONVENTION};
pub use window::{Axis, Site, SpinStructure, TruncatedWindow, ENUMERATION_ORDER};

use crate::algebra::{Theta, TorusElement};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// The Pauli matrix `σʲ`, `j ∈ {1, 2, 3}`.
pub fn pauli(j: usize) -> Result<Matrix2<Complex64>> {
    match j {
        1 => Ok(Matrix2::new(ZERO, ONE, ONE, ZERO)),
        2 => Ok(Matrix2::new(ZERO, -I, I, ZERO)),
        3 => Ok(Matrix2::new(ONE, ZERO, ZERO, -ONE)),
        _ => Err(Error::InvalidAxis(j)),
    }
}

/// `s ⊗ id` on the window.
pub fn spinor_operator(s: &Matrix2<Complex64>, w: &TruncatedWindow) -> MatrixOperator {
    let s = *s;
    let herm = (s - s.adjoint()).norm() == 0.0;
    MatrixOperator::from_column_fn(*w, 0, move |j| {
        let base = (j - j % 2) as u32;
        let sp = j % 2;
        vec![(base, s[(0, sp)]), (base + 1, s[(1, sp)])]
    })
    .with_hermitian(herm)
}

/// `σʲ ⊗ id`.
pub fn pauli_operator(j: usize, w: &TruncatedWindow) -> Result<MatrixOperator> {
    Ok(spinor_operator(&pauli(j)?, w))
}

fn check_theta(a: &TorusElement, w: &TruncatedWindow) -> Result<()> {
    if a.theta() != w.theta() {
        return Err(Error::ThetaMismatch(a.theta(), w.theta()));
    }
    Ok(())
}

fn multiplication(a: &TorusElement, w: &TruncatedWindow, right: bool) -> Result<MatrixOperator> {
    check_theta(a, w)?;
    let theta = w.theta();
    let terms: Vec<_> = a.terms().collect();
    let win = *w;
    Ok(MatrixOperator::from_column_fn(*w, a.margin(), move |j| {
        let (site, sp) = win.coords(j);
        let n = win.values(site);
        terms
            .iter()
            .filter_map(|&(e, c)| {
                let target = win.shift(site, e)?;
                let s = [e[0] as f64, e[1] as f64, e[2] as f64];
                let ph = if right {
                    theta.phase(n, s)
                } else {
                    theta.phase(s, n)
                };
                Some((win.index(target, sp) as u32, c * ph))
            })
            .collect()
    }))
}

/// `π(a) ⊗ id`; entries leaving the window are dropped.
pub fn represent(a: &TorusElement, w: &TruncatedWindow) -> Result<MatrixOperator> {
    multiplication(a, w, false)
}

/// Right multiplication `R(a) ⊗ id`, equal to `J π(a*) J⁻¹`.
pub fn represent_right(a: &TorusElement, w: &TruncatedWindow) -> Result<MatrixOperator> {
    multiplication(a, w, true)
}

/// The diagonal derivation `δⱼ`, with spin offsets on `j = 1, 2`.
pub fn delta_operator(j: usize, w: &TruncatedWindow) -> Result<MatrixOperator> {
    if !(1..=3).contains(&j) {
        return Err(Error::InvalidAxis(j));
    }
    let win = *w;
    Ok(
        MatrixOperator::diagonal(*w, move |i| Complex64::new(win.values(win.coords(i).0)[j - 1], 0.0))
            .with_hermitian(true),
    )
}

/// Image index and coefficient of `J e_{n,s} = μ e_{−n,s'}`.
fn j_image(w: &TruncatedWindow, theta: &Theta, index: usize) -> (usize, Complex64) {
    let (site, sp) = w.coords(index);
    let n = w.values(site);
    let phase = theta.phase(n, n);
    let target = w.reflect(site);
    // iσ² = [[0, 1], [−1, 0]]
    if sp == 0 {
        (w.index(target, 1), -phase)
    } else {
        (w.index(target, 0), phase)
    }
}

/// The antilinear real structure `J v = M v̄`.
pub fn apply_j(v: &[Complex64], w: &TruncatedWindow) -> Result<Vec<Complex64>> {
    w.check_reflection()?;
    if v.len() != w.dim() {
        return Err(Error::Invalid(format!(
            "vector length {} does not match window dimension {}",
            v.len(),
            w.dim()
        )));
    }
    let theta = w.theta();
    let mut out = vec![ZERO; v.len()];
    for (i, z) in v.iter().enumerate() {
        let (t, mu) = j_image(w, &theta, i);
        out[t] = mu * z.conj();
    }
    Ok(out)
}

/// The unitary `M` with `J v = M v̄`.
pub fn j_unitary(w: &TruncatedWindow) -> Result<MatrixOperator> {
    w.check_reflection()?;
    let theta = w.theta();
    let win = *w;
    Ok(MatrixOperator::from_column_fn(*w, 0, move |i| {
        let (t, mu) = j_image(&win, &theta, i);
        vec![(t as u32, mu)]
    }))
}

/// The linear operator `J T J⁻¹ = M T̄ M†`.
pub fn conjugate_by_j(t: &MatrixOperator) -> Result<MatrixOperator> {
    let w = *t.window();
    w.check_reflection()?;
    let theta = w.theta();
    let images: Vec<(usize, Complex64)> = (0..w.dim()).map(|i| j_image(&w, &theta, i)).collect();
    let mut preimage = vec![0usize; w.dim()];
    for (i, &(t, _)) in images.iter().enumerate() {
        preimage[t] = i;
    }
    let out = t.map_columns(t.margin(), |col, _| {
        // Column π(b) of the result is built from column b of T.
        let b = preimage[col];
        let mu_b = images[b].1;
        t.column(b)
            .iter()
            .map(|&(a, z)| {
                let (pa, mu_a) = images[a as usize];
                (pa as u32, mu_b.conj() * mu_a * z.conj())
            })
            .collect()
    });
    Ok(out.with_hermitian(t.is_hermitian()))
}

/// Span of basis vectors whose indices stay `margin` away from the window
/// boundary in every direction.
#[derive(Clone, Copy, Debug)]
pub struct InteriorSubspace {
    pub window: TruncatedWindow,
    pub margin: u32,
}

impl InteriorSubspace {
    pub fn new(window: TruncatedWindow, margin: u32) -> Self {
        InteriorSubspace { window, margin }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.window.interior_indices(self.margin).collect()
    }

    pub fn dim(&self) -> usize {
        self.window.interior_indices(self.margin).count()
    }

    /// Largest entry of `op` over the subspace's columns.
    pub fn norm(&self, op: &MatrixOperator) -> f64 {
        op.interior_norm(self.margin)
    }
}
