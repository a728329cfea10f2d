use std::collections::BTreeMap;

use num_complex::Complex64;

use super::calculus::{canonicalize, vertical_part, DiracCalculus};
use crate::algebra::{monomials_up_to, Exponent, Pair, TorusElement};
use crate::linalg::{nullspace, CMatrix};
use crate::Result;

fn scale_of(pairs: &[Pair]) -> f64 {
    pairs
        .iter()
        .map(|(p, q)| p.max_abs() * q.max_abs() * (1 + q.margin()) as f64)
        .fold(1.0, f64::max)
}

/// The implication `Σ pᵢ[D, qᵢ] = 0 ⇒ Σ pᵢ δ(qᵢ) = 0` evaluated on one
/// presentation. A presentation outside the kernel satisfies it vacuously.
pub fn calculus_compatibility_check(calc: &DiracCalculus, pairs: &[Pair]) -> Result<bool> {
    let tol = 1e-9 * scale_of(pairs);
    let form = canonicalize(calc, pairs)?;
    if !form.is_zero(tol) {
        return Ok(true);
    }
    Ok(vertical_part(pairs, calc.theta())?.is_zero(tol))
}

/// A presentation in the kernel of `Σ pᵢ ⊗ qᵢ ↦ Σ pᵢ[D, qᵢ]` whose
/// vertical part does not vanish.
#[derive(Clone, Debug)]
pub struct CompatibilityCounterexample {
    pub pairs: Vec<Pair>,
    pub one_form_residual: f64,
    pub vertical: TorusElement,
}

/// Searches `span{U^s ⊗ U^t : |s|₁, |t|₁ ≤ degree}` for a violation of the
/// compatibility implication.
///
/// The one-form map and the vertical map are assembled as matrices over the
/// monomial pairs; a violation exists iff the vertical map does not vanish on
/// the kernel of the one-form map. The returned presentation is the kernel
/// vector on which it is largest.
pub fn find_compatibility_counterexample(
    calc: &DiracCalculus,
    degree: i32,
) -> Result<Option<CompatibilityCounterexample>> {
    let theta = calc.theta();
    let monos = monomials_up_to(degree);
    let cols: Vec<(Exponent, Exponent)> = monos
        .iter()
        .flat_map(|s| monos.iter().map(move |t| (*s, *t)))
        .collect();
    let one = Complex64::new(1.0, 0.0);

    let mut form_rows: BTreeMap<(usize, Exponent), usize> = BTreeMap::new();
    let mut vert_rows: BTreeMap<Exponent, usize> = BTreeMap::new();
    let mut form_entries = Vec::new();
    let mut vert_entries = Vec::new();
    for (c, (s, t)) in cols.iter().enumerate() {
        let pair = [(
            TorusElement::monomial(theta, *s, one),
            TorusElement::monomial(theta, *t, one),
        )];
        let form = canonicalize(calc, &pair)?;
        for j in 1..=3 {
            for (e, z) in form.coefficient(j).terms() {
                let n = form_rows.len();
                let r = *form_rows.entry((j, e)).or_insert(n);
                form_entries.push((r, c, z));
            }
        }
        for (e, z) in vertical_part(&pair, theta)?.terms() {
            let n = vert_rows.len();
            let r = *vert_rows.entry(e).or_insert(n);
            vert_entries.push((r, c, z));
        }
    }
    let mut phi = CMatrix::zeros(form_rows.len().max(1), cols.len());
    for (r, c, z) in form_entries {
        phi[(r, c)] += z;
    }
    let mut psi = CMatrix::zeros(vert_rows.len().max(1), cols.len());
    for (r, c, z) in vert_entries {
        psi[(r, c)] += z;
    }

    let kernel = nullspace(&phi, 1e-10);
    if kernel.ncols() == 0 {
        return Ok(None);
    }
    let image = &psi * &kernel;
    let (best, norm) = (0..image.ncols())
        .map(|k| (k, image.column(k).norm()))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if norm < 1e-8 {
        return Ok(None);
    }
    let x = kernel.column(best);
    let pairs: Vec<Pair> = cols
        .iter()
        .enumerate()
        .filter(|(c, _)| x[*c].norm() > 1e-13)
        .map(|(c, (s, t))| {
            (
                TorusElement::monomial(theta, *s, x[c]),
                TorusElement::monomial(theta, *t, one),
            )
        })
        .collect();
    let one_form_residual = canonicalize(calc, &pairs)?.max_abs();
    let vertical = vertical_part(&pairs, theta)?;
    Ok(Some(CompatibilityCounterexample {
        pairs,
        one_form_residual,
        vertical,
    }))
}
