use std::fmt;

use num_complex::Complex64;

use crate::algebra::{Pair, Theta, TorusElement};
use crate::dirac::FluctuationA;
use crate::repr::{pauli_operator, represent, represent_right, MatrixOperator, TruncatedWindow};
use crate::{Error, Result};

/// The first-order calculus generated by a (possibly fluctuated) Dirac
/// operator.
///
/// For `D_A = D + Σ σʲ(π(Aⱼ) − R(Aⱼ))` one has
/// `[D_A, π(q)] = Σ σʲ π(∂ⱼ q)` with `∂ⱼ q = δⱼ q + [Aⱼ, q]`, so every
/// one-form `Σ pᵢ [D_A, qᵢ]` is determined by three algebra coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracCalculus {
    theta: Theta,
    a: [TorusElement; 3],
}

impl DiracCalculus {
    /// The calculus of the unfluctuated `D`.
    pub fn free(theta: Theta) -> Self {
        let z = TorusElement::zero(theta);
        DiracCalculus {
            theta,
            a: [z.clone(), z.clone(), z],
        }
    }

    pub fn fluctuated(a: &FluctuationA) -> Self {
        DiracCalculus {
            theta: a.theta(),
            a: a.components().clone(),
        }
    }

    pub fn theta(&self) -> Theta {
        self.theta
    }

    pub fn is_free(&self) -> bool {
        self.a.iter().all(TorusElement::is_empty)
    }

    /// `∂ⱼ q = δⱼ q + [Aⱼ, q]`.
    pub fn partial(&self, j: usize, q: &TorusElement) -> Result<TorusElement> {
        let d = q.derive(j)?;
        let a = &self.a[j - 1];
        if a.is_empty() {
            return Ok(d);
        }
        d.checked_add(&a.commutator(q)?)
    }
}

/// A one-form `σ¹π(c₁) + σ²π(c₂) + σ³π(c₃)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    c: [TorusElement; 3],
}

impl OneForm {
    pub fn new(c1: TorusElement, c2: TorusElement, c3: TorusElement) -> Result<Self> {
        for c in [&c2, &c3] {
            if c.theta() != c1.theta() {
                return Err(Error::ThetaMismatch(c1.theta(), c.theta()));
            }
        }
        Ok(OneForm { c: [c1, c2, c3] })
    }

    pub fn zero(theta: Theta) -> Self {
        let z = TorusElement::zero(theta);
        OneForm {
            c: [z.clone(), z.clone(), z],
        }
    }

    pub fn theta(&self) -> Theta {
        self.c[0].theta()
    }

    /// `cⱼ` for `j ∈ {1, 2, 3}`.
    pub fn coefficient(&self, j: usize) -> &TorusElement {
        &self.c[j - 1]
    }

    pub fn coefficients(&self) -> &[TorusElement; 3] {
        &self.c
    }

    pub fn margin(&self) -> u32 {
        self.c.iter().map(TorusElement::margin).max().unwrap_or(0)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.c.iter().all(|c| c.is_zero(tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(TorusElement::max_abs).fold(0.0, f64::max)
    }

    /// The σʲ are selfadjoint constants, so `ω* = Σ σʲ π(cⱼ*)`.
    pub fn star(&self) -> OneForm {
        OneForm {
            c: self.c.clone().map(|c| c.star()),
        }
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.c.iter().all(|c| c.is_selfadjoint(tol))
    }

    pub fn is_invariant(&self) -> bool {
        self.c.iter().all(TorusElement::in_base)
    }

    pub fn checked_add(&self, other: &OneForm) -> Result<OneForm> {
        Ok(OneForm {
            c: [
                self.c[0].checked_add(&other.c[0])?,
                self.c[1].checked_add(&other.c[1])?,
                self.c[2].checked_add(&other.c[2])?,
            ],
        })
    }

    pub fn checked_sub(&self, other: &OneForm) -> Result<OneForm> {
        self.checked_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: Complex64) -> OneForm {
        OneForm {
            c: self.c.clone().map(|c| c.scale(z)),
        }
    }

    /// `ω · a`.
    pub fn right_mul(&self, a: &TorusElement) -> Result<OneForm> {
        Ok(OneForm {
            c: [
                self.c[0].multiply(a)?,
                self.c[1].multiply(a)?,
                self.c[2].multiply(a)?,
            ],
        })
    }

    /// `b · ω`.
    pub fn left_mul(&self, b: &TorusElement) -> Result<OneForm> {
        Ok(OneForm {
            c: [
                b.multiply(&self.c[0])?,
                b.multiply(&self.c[1])?,
                b.multiply(&self.c[2])?,
            ],
        })
    }

    /// `Σ σʲ π(cⱼ)` on the window.
    pub fn represent(&self, w: &TruncatedWindow) -> Result<MatrixOperator> {
        spinor_sum(w, |j| represent(&self.c[j - 1], w))
    }

    /// `Σ σʲ R(cⱼ)`, the action `h ↦ h·ω` of the one-form from the right.
    pub fn represent_right(&self, w: &TruncatedWindow) -> Result<MatrixOperator> {
        spinor_sum(w, |j| represent_right(&self.c[j - 1], w))
    }

    /// `J ω* J⁻¹ = −Σ σʲ R(cⱼ)`.
    pub fn j_star_conjugate(&self, w: &TruncatedWindow) -> Result<MatrixOperator> {
        Ok(self.represent_right(w)?.scale(Complex64::new(-1.0, 0.0)))
    }
}

/// `Σ σʲ f(j)` over the nonempty directions.
pub(crate) fn spinor_sum<F>(w: &TruncatedWindow, f: F) -> Result<MatrixOperator>
where
    F: Fn(usize) -> Result<MatrixOperator>,
{
    let mut acc = MatrixOperator::zeros(*w);
    for j in 1..=3 {
        let op = f(j)?;
        if op.nnz() > 0 {
            acc = acc.add(&pauli_operator(j, w)?.mul(&op)?)?;
        }
    }
    Ok(acc)
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["s1", "s2", "s3"];
        let mut first = true;
        for (c, n) in self.c.iter().zip(names) {
            if c.is_empty() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{n}*({c})")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Canonical coefficients `cⱼ = Σᵢ pᵢ ∂ⱼ qᵢ` of `Σᵢ pᵢ [D, qᵢ]`.
pub fn canonicalize(calc: &DiracCalculus, pairs: &[Pair]) -> Result<OneForm> {
    let theta = calc.theta();
    let mut c = [
        TorusElement::zero(theta),
        TorusElement::zero(theta),
        TorusElement::zero(theta),
    ];
    for (p, q) in pairs {
        for j in 1..=3 {
            let term = p.multiply(&calc.partial(j, q)?)?;
            c[j - 1] = c[j - 1].checked_add(&term)?;
        }
    }
    Ok(OneForm { c })
}

/// `Σᵢ pᵢ δ₃(qᵢ)`, the U(1) part of a presentation.
pub fn vertical_part(pairs: &[Pair], theta: Theta) -> Result<TorusElement> {
    let mut acc = TorusElement::zero(theta);
    for (p, q) in pairs {
        acc = acc.checked_add(&p.multiply(&q.derive(3)?)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::build_fluctuated;
    use crate::repr::SpinStructure;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn gen(th: Theta, j: usize, p: i32) -> TorusElement {
        TorusElement::generator_power(th, j, p).unwrap()
    }

    #[test]
    fn canonical_forms() {
        let th = Theta::default();
        let calc = DiracCalculus::free(th);
        let w = canonicalize(&calc, &[(gen(th, 3, -1), gen(th, 3, 1))]).unwrap();
        assert!(w.coefficient(1).is_empty() && w.coefficient(2).is_empty());
        assert!(w.coefficient(3).approx_eq(&TorusElement::one(th), 1e-15));
        let w = canonicalize(&calc, &[(TorusElement::one(th), TorusElement::one(th))]).unwrap();
        assert!(w.is_zero(0.0));
        let w = canonicalize(
            &calc,
            &[(gen(th, 1, -1), gen(th, 1, 1)), (gen(th, 2, -1), gen(th, 2, 1))],
        )
        .unwrap();
        assert!(w.coefficient(1).approx_eq(&TorusElement::one(th), 1e-15));
        assert!(w.coefficient(2).approx_eq(&TorusElement::one(th), 1e-15));
        assert!(w.coefficient(3).is_empty());
        assert_eq!(canonicalize(&calc, &[]).unwrap(), OneForm::zero(th));
    }

    #[test]
    fn canonicalization_matches_operators() {
        let th = Theta::default();
        let w = TruncatedWindow::new(5, SpinStructure::new(false, true), th).unwrap();
        let zero = TorusElement::zero(th);
        let a = FluctuationA::new(TorusElement::cosine(th, [0, 1, 0], 0.7), zero.clone(), zero).unwrap();
        let calc = DiracCalculus::fluctuated(&a);
        let d = build_fluctuated(&a, &w).unwrap();
        let p = TorusElement::from_terms(th, [([1, 0, -1], one()), ([0, 0, 0], Complex64::new(0.0, 2.0))]);
        let q = TorusElement::from_terms(th, [([0, 1, 1], one()), ([1, 0, 0], Complex64::new(-0.5, 0.0))]);
        let form = canonicalize(&calc, &[(p.clone(), q.clone())]).unwrap();
        let direct = represent(&p, &w)
            .unwrap()
            .mul(&d.commutator(&represent(&q, &w).unwrap()).unwrap())
            .unwrap();
        let via = form.represent(&w).unwrap();
        let margin = p.margin() + q.margin() + d.margin();
        assert!(direct.interior_residual(&via, margin).unwrap() < 1e-12);
    }

    #[test]
    fn right_action_is_minus_j_conjugate() {
        let th = Theta::default();
        let w = TruncatedWindow::new(3, SpinStructure::INTEGRAL, th).unwrap();
        let form = OneForm::new(gen(th, 1, 1), TorusElement::cosine(th, [0, 1, 0], 1.0), TorusElement::one(th)).unwrap();
        let via_j = crate::repr::conjugate_by_j(&form.star().represent(&w).unwrap()).unwrap();
        let direct = form.j_star_conjugate(&w).unwrap();
        assert!(via_j.sub(&direct).unwrap().max_abs() < 1e-13);
        assert_eq!(form.to_string().matches("s").count() >= 3, true);
    }

    #[test]
    fn partial_is_a_derivation() {
        let th = Theta::default();
        let zero = TorusElement::zero(th);
        let a = FluctuationA::new(zero.clone(), TorusElement::cosine(th, [1, 0, 0], 1.0), zero).unwrap();
        let calc = DiracCalculus::fluctuated(&a);
        let x = TorusElement::from_terms(th, [([1, 1, 0], one()), ([0, -1, 2], Complex64::new(0.3, 0.1))]);
        let y = TorusElement::from_terms(th, [([0, 1, -1], one()), ([2, 0, 0], Complex64::new(-1.0, 0.4))]);
        let lhs = calc.partial(2, &x.multiply(&y).unwrap()).unwrap();
        let rhs = calc
            .partial(2, &x)
            .unwrap()
            .multiply(&y)
            .unwrap()
            .checked_add(&x.multiply(&calc.partial(2, &y).unwrap()).unwrap())
            .unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-13));
    }
}
