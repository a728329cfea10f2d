//! Dirac operators on the truncated window and their bundle decomposition.
//!
//! `D = Σ σʲ δⱼ` acts blockwise: on `e_n ⊗ ℂ²` it is the 2×2 matrix `σ·n`.
//! A U(1)-invariant gauge potential `A = (A₁, A₂, A₃)` with `Aⱼ ∈ T²_θ`
//! selfadjoint fluctuates it to
//!
//! ```text
//! D_A = D + σʲ π(Aⱼ) + J σʲ π(Aⱼ) J⁻¹ = D + σʲ (π(Aⱼ) − R(Aⱼ)),
//! ```
//!
//! using `J σʲ J⁻¹ = −σʲ` and `J π(x) J⁻¹ = R(x*)`.

mod axioms;

use num_complex::Complex64;
use serde::Serialize;

pub use axioms::{axiom_suite, projectability_report, z_commutator_witness, AxiomConfig};

use crate::algebra::{Theta, TorusElement};
use crate::linalg::{max_abs, CMatrix};
use crate::repr::{
    delta_operator, j_unitary, pauli_operator, represent, represent_right, MatrixOperator,
    TruncatedWindow,
};
use crate::{Error, Result, IDENTITY_TOL};

/// Gauge potential `(A₁, A₂, A₃)`, each selfadjoint and in the invariant
/// subalgebra `T²_θ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluctuationA {
    components: [TorusElement; 3],
}

impl FluctuationA {
    pub fn new(a1: TorusElement, a2: TorusElement, a3: TorusElement) -> Result<Self> {
        let theta = a1.theta();
        for (i, a) in [&a1, &a2, &a3].into_iter().enumerate() {
            if a.theta() != theta {
                return Err(Error::ThetaMismatch(theta, a.theta()));
            }
            if !a.is_selfadjoint(IDENTITY_TOL) {
                return Err(Error::NotSelfadjoint(i + 1));
            }
            if !a.in_base() {
                return Err(Error::NotInvariant(i + 1));
            }
        }
        Ok(FluctuationA {
            components: [a1, a2, a3],
        })
    }

    pub fn zero(theta: Theta) -> Self {
        let z = TorusElement::zero(theta);
        FluctuationA {
            components: [z.clone(), z.clone(), z],
        }
    }

    pub fn theta(&self) -> Theta {
        self.components[0].theta()
    }

    /// `Aⱼ` for `j ∈ {1, 2, 3}`.
    pub fn component(&self, j: usize) -> Result<&TorusElement> {
        if !(1..=3).contains(&j) {
            return Err(Error::InvalidAxis(j));
        }
        Ok(&self.components[j - 1])
    }

    pub fn components(&self) -> &[TorusElement; 3] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(TorusElement::is_empty)
    }

    pub fn has_vertical_part(&self) -> bool {
        !self.components[2].is_empty()
    }

    pub fn margin(&self) -> u32 {
        self.components.iter().map(TorusElement::margin).max().unwrap_or(0)
    }
}

/// `D = Σ σʲ δⱼ`.
pub fn build_dirac(w: &TruncatedWindow) -> MatrixOperator {
    let win = *w;
    MatrixOperator::from_column_fn(*w, 0, move |i| {
        let (site, sp) = win.coords(i);
        let [n1, n2, n3] = win.values(site);
        let base = (i - sp) as u32;
        // σ·n = [[n3, n1 − i n2], [n1 + i n2, −n3]]
        if sp == 0 {
            vec![(base, Complex64::new(n3, 0.0)), (base + 1, Complex64::new(n1, n2))]
        } else {
            vec![(base, Complex64::new(n1, -n2)), (base + 1, Complex64::new(-n3, 0.0))]
        }
    })
    .mark_hermitian(IDENTITY_TOL)
    .expect("σ·n is hermitian")
}

/// `σʲ (π(x) − R(x))`, the inner-fluctuation term of one direction.
pub fn fluctuation_term(j: usize, x: &TorusElement, w: &TruncatedWindow) -> Result<MatrixOperator> {
    let lr = represent(x, w)?.sub(&represent_right(x, w)?)?;
    pauli_operator(j, w)?.mul(&lr)
}

/// `D_A = D + Σ σʲ (π(Aⱼ) − R(Aⱼ))`.
pub fn build_fluctuated(a: &FluctuationA, w: &TruncatedWindow) -> Result<MatrixOperator> {
    if a.theta() != w.theta() {
        return Err(Error::ThetaMismatch(a.theta(), w.theta()));
    }
    let mut d = build_dirac(w);
    for j in 1..=3 {
        let x = a.component(j)?;
        if !x.is_empty() {
            d = d.add(&fluctuation_term(j, x, w)?)?;
        }
    }
    d.mark_hermitian(IDENTITY_TOL)
}

/// `Γ = σ³ ⊗ id`.
pub fn grading(w: &TruncatedWindow) -> MatrixOperator {
    pauli_operator(3, w).expect("σ³ exists")
}

/// `D = D_h + D_v + Z` with `D_h = ½Γ[Γ, D]` and `D_v = ℓ⁻¹ Γ δ₃`.
#[derive(Clone, Debug)]
pub struct DiracBundleDecomposition {
    pub d_full: MatrixOperator,
    pub d_h: MatrixOperator,
    pub d_v: MatrixOperator,
    pub z: MatrixOperator,
    pub gamma: MatrixOperator,
    pub ell: f64,
}

/// Splits a hermitian, fibre-preserving operator into horizontal, vertical
/// and zero-order parts.
pub fn decompose(d: &MatrixOperator, gamma: &MatrixOperator, ell: f64) -> Result<DiracBundleDecomposition> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::Invalid(format!("fibre length {ell} must be positive")));
    }
    let off = d.off_fibre_norm();
    if off > IDENTITY_TOL {
        return Err(Error::NotFibreDiagonal(off));
    }
    let herm = d.hermitian_residual();
    if herm > IDENTITY_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let w = d.window();
    let gdg = gamma.mul(d)?.mul(gamma)?;
    let d_h = d.sub(&gdg)?.scale(Complex64::new(0.5, 0.0)).mark_hermitian(IDENTITY_TOL)?;
    let d_v = gamma
        .mul(&delta_operator(3, w)?)?
        .scale(Complex64::new(ell.recip(), 0.0))
        .mark_hermitian(IDENTITY_TOL)?;
    let z = d.sub(&d_h)?.sub(&d_v)?;
    Ok(DiracBundleDecomposition {
        d_full: d.clone(),
        d_h,
        d_v,
        z,
        gamma: gamma.clone(),
        ell,
    })
}

impl DiracBundleDecomposition {
    /// `‖D − (D_h + D_v + Z)‖`, entrywise.
    pub fn reassembly_residual(&self) -> Result<f64> {
        let sum = self.d_h.add(&self.d_v)?.add(&self.z)?;
        Ok(self.d_full.sub(&sum)?.max_abs())
    }

    /// `D_h + D_v`.
    pub fn projectable_part(&self) -> Result<MatrixOperator> {
        self.d_h.add(&self.d_v)?.mark_hermitian(IDENTITY_TOL)
    }
}

/// The dense block of `t` on the fibre `ℋ_k`.
pub fn fibre_block(t: &MatrixOperator, k: i32) -> Result<CMatrix> {
    let off = t.off_fibre_norm();
    if off > IDENTITY_TOL {
        return Err(Error::NotFibreDiagonal(off));
    }
    Ok(t.dense_block(t.window().fibre_range(k)?))
}

/// The charge-`k` base data `(D_k, γ_k)`, plus the restricted real
/// structure `j₀ v = M₀ v̄` when `k = 0`.
#[derive(Clone, Debug)]
pub struct BaseTriple {
    pub k: i32,
    pub d: CMatrix,
    pub gamma: CMatrix,
    pub j0_unitary: Option<CMatrix>,
}

pub fn base_triple(decomp: &DiracBundleDecomposition, k: i32) -> Result<BaseTriple> {
    let d = fibre_block(&decomp.d_h, k)?;
    let gamma = fibre_block(&decomp.gamma, k)?;
    let j0_unitary = if k == 0 {
        // J maps ℋ_k onto ℋ_{−k}, so only the k = 0 block is an endomorphism.
        let w = decomp.d_full.window();
        Some(j_unitary(w)?.dense_block(w.fibre_range(0)?))
    } else {
        None
    };
    Ok(BaseTriple {
        k,
        d,
        gamma,
        j0_unitary,
    })
}

impl BaseTriple {
    /// `‖γ_k D_k + D_k γ_k‖`.
    pub fn grading_residual(&self) -> f64 {
        max_abs(&(&self.gamma * &self.d + &self.d * &self.gamma))
    }

    fn j_conjugate(&self, t: &CMatrix) -> Option<CMatrix> {
        self.j0_unitary
            .as_ref()
            .map(|m| m * t.map(|z| z.conj()) * m.adjoint())
    }

    /// `‖j₀D₀j₀⁻¹ − D₀‖`.
    pub fn reality_residual(&self) -> Option<f64> {
        self.j_conjugate(&self.d).map(|c| max_abs(&(c - &self.d)))
    }

    /// `‖j₀γ₀j₀⁻¹ + γ₀‖`.
    pub fn j_grading_residual(&self) -> Option<f64> {
        self.j_conjugate(&self.gamma).map(|c| max_abs(&(c + &self.gamma)))
    }

    /// `‖j₀² + 1‖`.
    pub fn j_square_residual(&self) -> Option<f64> {
        self.j0_unitary.as_ref().map(|m| {
            let sq = m * m.map(|z| z.conj());
            max_abs(&(sq + CMatrix::identity(m.nrows(), m.ncols())))
        })
    }
}

/// Largest entry of `op` on columns interior at `margin`, or `None` when no
/// such column exists.
pub(crate) fn interior(op: &MatrixOperator, margin: u32) -> Option<f64> {
    let w = op.window();
    let mut cols = w.interior_indices(margin).peekable();
    cols.peek()?;
    Some(op.max_abs_on(cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::{conjugate_by_j, SpinStructure};

    fn window(n: u32) -> TruncatedWindow {
        TruncatedWindow::new(n, SpinStructure::INTEGRAL, Theta::default()).unwrap()
    }

    fn cos_gen(th: Theta, j: usize) -> TorusElement {
        let mut e = [0, 0, 0];
        e[j - 1] = 1;
        TorusElement::cosine(th, e, 1.0)
    }

    #[test]
    fn dirac_blocks_and_reality() {
        let w = window(3);
        let d = build_dirac(&w);
        let origin = w.index([3, 3, 3], 0);
        assert_eq!(d.column(origin).len(), 0);
        let block = fibre_block(&d, 2).unwrap();
        let vals = crate::linalg::hermitian_eigenvalues(block);
        // Analytic 2×2 eigenvalues ±|n| over the fibre.
        let mut expect = Vec::new();
        for k in -3..=3 {
            for l in -3..=3 {
                let r = ((k * k + l * l + 4) as f64).sqrt();
                expect.extend([r, -r]);
            }
        }
        expect.sort_by(f64::total_cmp);
        assert!(vals.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-12));
        let jd = conjugate_by_j(&d).unwrap();
        assert!(jd.sub(&d).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn fluctuation_validation() {
        let th = Theta::default();
        let u1 = TorusElement::generator(th, 1).unwrap();
        let zero = TorusElement::zero(th);
        assert_eq!(
            FluctuationA::new(u1.clone(), zero.clone(), zero.clone()).unwrap_err(),
            Error::NotSelfadjoint(1)
        );
        let u3c = cos_gen(th, 3);
        assert_eq!(
            FluctuationA::new(zero.clone(), u3c, zero.clone()).unwrap_err(),
            Error::NotInvariant(2)
        );
        let w = window(2);
        let a0 = FluctuationA::zero(th);
        let d = build_fluctuated(&a0, &w).unwrap();
        assert_eq!(d.sub(&build_dirac(&w)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn fluctuation_matches_j_conjugate_form() {
        let th = Theta::default();
        let w = window(3);
        let a1 = cos_gen(th, 1).scale(Complex64::new(0.5, 0.0));
        let zero = TorusElement::zero(th);
        let a = FluctuationA::new(a1.clone(), zero.clone(), zero).unwrap();
        let da = build_fluctuated(&a, &w).unwrap();
        let s1a = pauli_operator(1, &w).unwrap().mul(&represent(&a1, &w).unwrap()).unwrap();
        let expect = build_dirac(&w).add(&s1a).unwrap().add(&conjugate_by_j(&s1a).unwrap()).unwrap();
        assert!(da.sub(&expect).unwrap().max_abs() < 1e-14);
        assert!(da.hermitian_residual() < 1e-14);
    }

    #[test]
    fn decomposition_of_free_dirac() {
        let w = window(2);
        let d = build_dirac(&w);
        let dec = decompose(&d, &grading(&w), 1.0).unwrap();
        assert_eq!(dec.z.max_abs(), 0.0);
        let s1d1 = pauli_operator(1, &w).unwrap().mul(&delta_operator(1, &w).unwrap()).unwrap();
        let s2d2 = pauli_operator(2, &w).unwrap().mul(&delta_operator(2, &w).unwrap()).unwrap();
        assert!(dec.d_h.sub(&s1d1.add(&s2d2).unwrap()).unwrap().max_abs() < 1e-15);
        assert!(dec.reassembly_residual().unwrap() < 1e-15);
        let dec2 = decompose(&d, &grading(&w), 2.0).unwrap();
        // With ℓ = 2 the leftover ½σ³δ₃ lands in Z.
        assert!((dec2.z.max_abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decomposition_rejects_bad_input() {
        let w = window(1);
        let th = w.theta();
        let u3 = represent(&cos_gen(th, 3), &w).unwrap();
        assert!(matches!(decompose(&u3, &grading(&w), 1.0), Err(Error::NotFibreDiagonal(_))));
        let d = build_dirac(&w);
        assert!(decompose(&d, &grading(&w), 0.0).is_err());
        assert!(matches!(fibre_block(&u3, 0), Err(Error::NotFibreDiagonal(_))));
    }

    #[test]
    fn base_triple_relations() {
        let w = TruncatedWindow::new(2, SpinStructure::new(true, true), Theta::default()).unwrap();
        let dec = decompose(&build_dirac(&w), &grading(&w), 1.0).unwrap();
        let t0 = base_triple(&dec, 0).unwrap();
        assert!(t0.grading_residual() < 1e-15);
        assert!(t0.reality_residual().unwrap() < 1e-14);
        assert!(t0.j_grading_residual().unwrap() < 1e-14);
        assert!(t0.j_square_residual().unwrap() < 1e-14);
        let t1 = base_triple(&dec, 1).unwrap();
        assert!(t1.j0_unitary.is_none());
        let g = fibre_block(&grading(&w), -2).unwrap();
        assert!(max_abs(&(g.clone() * g - CMatrix::identity(w.fibre_dim(), w.fibre_dim()))) == 0.0);
    }
}
