//! The U(1) grading of `T³_θ` and the canonical map of the Hopf-Galois
//! extension `T²_θ ⊂ T³_θ`.
//!
//! The U(1) action rotates `U₃` only, so the degree of a monomial is its
//! `m` exponent and `T²_θ` is the degree-zero part. The canonical map
//! `χ(a' ⊗ a) = a' a₍₀₎ ⊗ a₍₁₎` becomes `Σₙ a'·aₙ ⊗ zⁿ`, which is returned as a
//! map from degree `n` to the coefficient `a'·aₙ`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{monomials_up_to, Exponent, Theta, TorusElement};
use crate::connections::{canonicalize, DiracCalculus};
use crate::linalg::{nullspace, rank, CMatrix};
use crate::{Error, Result};

/// A presentation term `p ⊗ q`, read as `p [D, q]` or `p δ(q)` as needed.
pub type Pair = (TorusElement, TorusElement);

#[derive(Clone, Debug, PartialEq)]
pub struct GradedComponent {
    pub degree: i32,
    pub element: TorusElement,
}

/// Splits `a` into its homogeneous components, ascending in degree. The
/// components sum to `a` and each one is a `δ₃` eigenvector with eigenvalue
/// its degree.
pub fn grade_decompose(a: &TorusElement) -> Vec<GradedComponent> {
    a.degrees()
        .into_iter()
        .map(|degree| GradedComponent {
            degree,
            element: a.component(degree),
        })
        .collect()
}

/// `χ(a' ⊗ a)` as the map `n ↦ a'·aₙ`, with zero components omitted.
pub fn canonical_map(
    a_prime: &TorusElement,
    a: &TorusElement,
) -> Result<BTreeMap<i32, TorusElement>> {
    if a_prime.theta() != a.theta() {
        return Err(Error::ThetaMismatch(a_prime.theta(), a.theta()));
    }
    let mut out = BTreeMap::new();
    for comp in grade_decompose(a) {
        let v = a_prime.multiply(&comp.element)?;
        if !v.is_empty() {
            out.insert(comp.degree, v);
        }
    }
    Ok(out)
}

/// The surjectivity witness `(U₃⁻ⁿ, U₃ⁿ)`, whose image under `χ` is `1 ⊗ zⁿ`.
///
/// The image is recomputed and an error returned if it is anything else.
pub fn hopf_galois_witness(theta: Theta, n: i32) -> Result<Pair> {
    let a_prime = TorusElement::generator_power(theta, 3, -n)?;
    let a = TorusElement::generator_power(theta, 3, n)?;
    let image = canonical_map(&a_prime, &a)?;
    let ok = image.len() == 1
        && image
            .get(&n)
            .is_some_and(|x| x.approx_eq(&TorusElement::one(theta), 1e-14));
    if !ok {
        return Err(Error::Invalid(format!(
            "canonical map of witness {n} is not 1 ⊗ z^{n}"
        )));
    }
    Ok((a_prime, a))
}

#[derive(Clone, Debug, Serialize)]
pub struct InjectivityReport {
    pub degree_bound: i32,
    pub columns: usize,
    pub rank: usize,
    pub injective: bool,
}

/// Rank test for `χ` on `A ⊗_B A` restricted to `{U^s ⊗ U₃ᵐ : |s|₁ ≤ d, |m| ≤ d}`.
///
/// Every `a' ⊗_B U^t` reduces to `a'·U₁^{t₁}U₂^{t₂} ⊗ U₃^{t₃}`, so these
/// elements span the truncated balanced tensor product.
pub fn canonical_map_injectivity(theta: Theta, degree_bound: i32) -> InjectivityReport {
    let lefts = monomials_up_to(degree_bound);
    let mut columns: Vec<(Exponent, i32)> = Vec::new();
    for s in &lefts {
        for m in -degree_bound..=degree_bound {
            columns.push((*s, m));
        }
    }
    // χ(U^s ⊗ U₃ᵐ) = U^s U₃ᵐ ⊗ zᵐ; rows are indexed by (monomial, z-degree).
    let mut rows: BTreeMap<(Exponent, i32), usize> = BTreeMap::new();
    let mut entries = Vec::new();
    for (col, &(s, m)) in columns.iter().enumerate() {
        let image = canonical_map(
            &TorusElement::monomial(theta, s, Complex64::new(1.0, 0.0)),
            &TorusElement::monomial(theta, [0, 0, m], Complex64::new(1.0, 0.0)),
        )
        .expect("same theta");
        for (deg, coeff) in image {
            for (e, c) in coeff.terms() {
                let next = rows.len();
                let row = *rows.entry((e, deg)).or_insert(next);
                entries.push((row, col, c));
            }
        }
    }
    let mut mat = CMatrix::zeros(rows.len(), columns.len());
    for (r, c, v) in entries {
        mat[(r, c)] += v;
    }
    let r = rank(&mat, 1e-10);
    InjectivityReport {
        degree_bound,
        columns: columns.len(),
        rank: r,
        injective: r == columns.len(),
    }
}

fn sum_of_products(pairs: &[Pair], theta: Theta) -> Result<TorusElement> {
    let mut acc = TorusElement::zero(theta);
    for (p, q) in pairs {
        acc = acc.checked_add(&p.multiply(q)?)?;
    }
    Ok(acc)
}

/// Checks that `χ(Σ pᵢ ⊗ qᵢ)` lies in `A ⊗ (ker ε)²` for an element of the
/// kernel `𝒩` of `Σ pᵢ ⊗ qᵢ ↦ Σ pᵢ[D, qᵢ]` (intersected with `ker m`).
///
/// Writing `Xₙ = Σᵢ pᵢ qᵢ⁽ⁿ⁾`, the z-polynomial `Σ Xₙ zⁿ` is divisible by
/// `(z − 1)²` exactly when `Σ Xₙ = 0` and `Σ n Xₙ = 0`.
pub fn kernel_image_check(pairs: &[Pair]) -> Result<bool> {
    let Some((p0, _)) = pairs.first() else {
        return Ok(true);
    };
    let theta = p0.theta();
    let scale = pairs
        .iter()
        .map(|(p, q)| p.max_abs() * q.max_abs().max(1.0) * (1 + q.margin()) as f64)
        .fold(0.0, f64::max)
        .max(1.0);
    let tol = 1e-10 * scale;

    let form = canonicalize(&DiracCalculus::free(theta), pairs)?;
    if !form.is_zero(tol) {
        return Err(Error::NotInKernel(form.to_string()));
    }
    let product = sum_of_products(pairs, theta)?;
    if !product.is_zero(tol) {
        return Err(Error::NotInMultiplicationKernel(product.to_string()));
    }

    let mut by_degree: BTreeMap<i32, TorusElement> = BTreeMap::new();
    for (p, q) in pairs {
        for (n, x) in canonical_map(p, q)? {
            let entry = by_degree.entry(n).or_insert_with(|| TorusElement::zero(theta));
            *entry = entry.checked_add(&x)?;
        }
    }
    let mut value = TorusElement::zero(theta);
    let mut slope = TorusElement::zero(theta);
    for (n, x) in &by_degree {
        value = value.checked_add(x)?;
        slope = slope.checked_add(&x.scale(Complex64::new(*n as f64, 0.0)))?;
    }
    Ok(value.is_zero(tol) && slope.is_zero(tol))
}

/// Random elements of `𝒩 ∩ ker m` built from monomials with `|·|₁ ≤ degree`.
///
/// Both maps send `U^s ⊗ U^t` to multiples of `U^{s+t}`, so the linear system
/// splits into independent blocks indexed by the total exponent `u = s + t`.
/// Each block has four equations (three derivations, one product) and its
/// kernel is sampled with seeded Gaussian coefficients.
pub fn sample_kernel_elements(
    theta: Theta,
    degree: i32,
    count: usize,
    seed: u64,
) -> Vec<Vec<Pair>> {
    let monos = monomials_up_to(degree);
    let mut blocks: BTreeMap<Exponent, Vec<(Exponent, Exponent)>> = BTreeMap::new();
    for s in &monos {
        for t in &monos {
            let u = [s[0] + t[0], s[1] + t[1], s[2] + t[2]];
            blocks.entry(u).or_default().push((*s, *t));
        }
    }
    let mut kernels: Vec<(Vec<(Exponent, Exponent)>, CMatrix)> = Vec::new();
    for (_, cols) in blocks {
        let mut m = CMatrix::zeros(4, cols.len());
        for (c, (s, t)) in cols.iter().enumerate() {
            let ph = theta.phase_int(*s, *t);
            for j in 0..3 {
                m[(j, c)] = ph * t[j] as f64;
            }
            m[(3, c)] = ph;
        }
        let ns = nullspace(&m, 1e-10);
        if ns.ncols() > 0 {
            kernels.push((cols, ns));
        }
    }
    if kernels.is_empty() {
        return Vec::new();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut pairs = Vec::new();
        // A few blocks per element so that samples mix total exponents.
        for _ in 0..3 {
            let (cols, ns) = &kernels[rng.random_range(0..kernels.len())];
            let weights: Vec<Complex64> = (0..ns.ncols()).map(|_| complex_gaussian(&mut rng)).collect();
            for (c, (s, t)) in cols.iter().enumerate() {
                let x: Complex64 = (0..ns.ncols()).map(|k| ns[(c, k)] * weights[k]).sum();
                if x.norm() > 1e-14 {
                    pairs.push((
                        TorusElement::monomial(theta, *s, x),
                        TorusElement::monomial(theta, *t, Complex64::new(1.0, 0.0)),
                    ));
                }
            }
        }
        out.push(pairs);
    }
    out
}

pub(crate) fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    let r = (-u1.ln()).sqrt();
    Complex64::from_polar(r, 2.0 * std::f64::consts::PI * u2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta() -> Theta {
        Theta::new(0.1234, 0.3711, -0.2718)
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn grading_examples() {
        let t = theta();
        let a = &TorusElement::generator(t, 1).unwrap() + &TorusElement::generator(t, 3).unwrap();
        let comps = grade_decompose(&a);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].degree, 0);
        assert_eq!(comps[0].element, TorusElement::generator(t, 1).unwrap());
        assert_eq!(comps[1].degree, 1);

        let b = TorusElement::from_terms(t, [([1, 0, -1], one()), ([0, 0, 2], one())]);
        let degs: Vec<i32> = grade_decompose(&b).iter().map(|c| c.degree).collect();
        assert_eq!(degs, vec![-1, 2]);
        for c in grade_decompose(&b) {
            let d3 = c.element.derive(3).unwrap();
            assert!(d3.approx_eq(&c.element.scale(Complex64::new(c.degree as f64, 0.0)), 1e-15));
        }
    }

    #[test]
    fn canonical_map_examples() {
        let t = theta();
        let (ap, a) = (
            TorusElement::generator_power(t, 3, -1).unwrap(),
            TorusElement::generator(t, 3).unwrap(),
        );
        let img = canonical_map(&ap, &a).unwrap();
        assert_eq!(img.len(), 1);
        assert!(img[&1].approx_eq(&TorusElement::one(t), 1e-15));

        let img = canonical_map(&TorusElement::one(t), &TorusElement::one(t)).unwrap();
        assert_eq!(img.keys().copied().collect::<Vec<_>>(), vec![0]);

        let u1 = TorusElement::generator(t, 1).unwrap();
        let x = TorusElement::monomial(t, [0, 1, 2], one());
        let img = canonical_map(&u1, &x).unwrap();
        assert_eq!(img.keys().copied().collect::<Vec<_>>(), vec![2]);
        assert!(img[&2].approx_eq(&(&u1 * &x), 0.0));
    }

    #[test]
    fn witnesses() {
        for n in -5..=5 {
            let (ap, a) = hopf_galois_witness(theta(), n).unwrap();
            assert_eq!(ap.coefficient([0, 0, -n]), one());
            assert_eq!(a.coefficient([0, 0, n]), one());
        }
    }

    #[test]
    fn injectivity_small() {
        let rep = canonical_map_injectivity(theta(), 2);
        assert!(rep.injective);
        assert_eq!(rep.rank, rep.columns);
    }

    #[test]
    fn kernel_image_on_trivial_and_sampled() {
        let t = theta();
        let u3i = TorusElement::generator_power(t, 3, -1).unwrap();
        let u3 = TorusElement::generator(t, 3).unwrap();
        let zero_rel = vec![(u3i.clone(), u3.clone()), (-&u3i, u3.clone())];
        assert_eq!(kernel_image_check(&zero_rel), Ok(true));

        for el in sample_kernel_elements(t, 2, 6, 11) {
            assert!(!el.is_empty());
            assert_eq!(kernel_image_check(&el), Ok(true));
        }
    }

    #[test]
    fn kernel_image_precondition() {
        let t = theta();
        let u3i = TorusElement::generator_power(t, 3, -1).unwrap();
        let u3 = TorusElement::generator(t, 3).unwrap();
        assert!(matches!(
            kernel_image_check(&[(u3i, u3)]),
            Err(Error::NotInKernel(_))
        ));
        let p = TorusElement::generator(t, 1).unwrap();
        assert!(matches!(
            kernel_image_check(&[(p, TorusElement::one(t))]),
            Err(Error::NotInMultiplicationKernel(_))
        ));
    }
}
