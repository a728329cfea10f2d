//! Finitely supported elements of the noncommutative 3-torus `T³_θ`.
//!
//! Elements are stored in the normal-ordered monomial basis
//! `U₁ᵏ U₂ˡ U₃ᵐ`, keyed by the exponent triple `[k, l, m]`. Every product
//! phase is derived from the single relation `U_j U_k = e^{2πiθ_{jk}} U_k U_j`
//! through the bilinear cocycle [`Theta::cocycle`].
//!
//! θ is not required to be irrational. A finite computation cannot tell the
//! difference, but rational entries give the algebra a large centre, and some
//! uniqueness statements (for example the compatible connection being unique)
//! then fail for genuine reasons.

mod element;
pub mod hopf;

pub use element::{Exponent, Theta, TorusElement};
pub use hopf::{
    canonical_map, canonical_map_injectivity, grade_decompose, hopf_galois_witness,
    kernel_image_check, sample_kernel_elements, GradedComponent, InjectivityReport, Pair,
};

/// All exponent triples with `|k| + |l| + |m| ≤ degree`, in lexicographic order.
pub fn monomials_up_to(degree: i32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for k in -degree..=degree {
        for l in -degree..=degree {
            for m in -degree..=degree {
                if k.abs() + l.abs() + m.abs() <= degree {
                    out.push([k, l, m]);
                }
            }
        }
    }
    out
}

/// Exponents of `T²_θ` monomials (`m = 0`) with `|k| + |l| ≤ degree`.
pub fn base_monomials_up_to(degree: i32) -> Vec<Exponent> {
    monomials_up_to(degree)
        .into_iter()
        .filter(|e| e[2] == 0)
        .collect()
}

/// A random element with `terms` monomials of degree at most `degree`
/// (ℓ¹ norm) and complex Gaussian coefficients.
pub fn random_element(
    theta: Theta,
    degree: i32,
    terms: usize,
    base_only: bool,
    rng: &mut impl rand::Rng,
) -> TorusElement {
    let pool = if base_only {
        base_monomials_up_to(degree)
    } else {
        monomials_up_to(degree)
    };
    TorusElement::from_terms(
        theta,
        (0..terms).map(|_| (pool[rng.random_range(0..pool.len())], hopf::complex_gaussian(rng))),
    )
}

/// `(x + x*)/2` for a [`random_element`] `x`.
pub fn random_selfadjoint(
    theta: Theta,
    degree: i32,
    terms: usize,
    base_only: bool,
    rng: &mut impl rand::Rng,
) -> TorusElement {
    let x = random_element(theta, degree, terms, base_only, rng);
    x.checked_add(&x.star())
        .expect("same theta")
        .scale(num_complex::Complex64::new(0.5, 0.0))
}

/// The standard sample set for identity checks: every monomial of degree at
/// most 2 followed by `random` seeded elements of degree at most 3. With
/// `base_only`, monomials and random terms are restricted to `m = 0`.
pub fn sample_elements(theta: Theta, base_only: bool, random: usize, seed: u64) -> Vec<TorusElement> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let monos = if base_only {
        base_monomials_up_to(2)
    } else {
        monomials_up_to(2)
    };
    let mut out: Vec<TorusElement> = monos
        .into_iter()
        .map(|e| TorusElement::monomial(theta, e, num_complex::Complex64::new(1.0, 0.0)))
        .collect();
    out.extend((0..random).map(|_| random_element(theta, 3, 4, base_only, &mut rng)));
    out
}
