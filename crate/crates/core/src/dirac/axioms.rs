use super::{build_fluctuated, decompose, grading, interior, DiracBundleDecomposition, FluctuationA};
use crate::algebra::{sample_elements, TorusElement};
use crate::report::AxiomReport;
use crate::repr::{
    conjugate_by_j, delta_operator, j_unitary, represent, represent_right, MatrixOperator,
    TruncatedWindow,
};
use crate::{Result, IDENTITY_TOL};

/// Sample-set parameters for the residual suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxiomConfig {
    pub seed: u64,
    pub random_samples: usize,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        AxiomConfig {
            seed: 7,
            random_samples: 20,
        }
    }
}

fn max_opt(acc: Option<f64>, x: Option<f64>) -> Option<f64> {
    match (acc, x) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Largest interior residual of `f(x)` over the samples; `f` returns the
/// operator and the margin at which it is exact.
fn over<T, F>(items: &[T], f: F) -> Result<Option<f64>>
where
    F: Fn(&T) -> Result<(MatrixOperator, u32)>,
{
    let mut acc = None;
    for x in items {
        let (op, m) = f(x)?;
        acc = max_opt(acc, interior(&op, m));
    }
    Ok(acc)
}

/// The residual suite for `D_A` on `w`: reality signs, grading, order one,
/// equivariance, representation property and projectability.
pub fn axiom_suite(
    a: &FluctuationA,
    w: &TruncatedWindow,
    ell: f64,
    cfg: AxiomConfig,
) -> Result<AxiomReport> {
    let tol = IDENTITY_TOL;
    let theta = w.theta();
    let mut rep = AxiomReport::new();
    let d = build_fluctuated(a, w)?;
    let gamma = grading(w);
    let delta = delta_operator(3, w)?;
    let id = MatrixOperator::identity(*w);

    let m = j_unitary(w)?;
    rep.push("J^2 = -1", "J^2 = -1", m.mul(&m.conj())?.add(&id)?.max_abs(), tol);
    rep.push("DJ = JD", "DJ = JD", conjugate_by_j(&d)?.sub(&d)?.max_abs(), tol);
    rep.push(
        "Gamma J = -J Gamma",
        "Gamma J = -J Gamma",
        conjugate_by_j(&gamma)?.add(&gamma)?.max_abs(),
        tol,
    );
    rep.push(
        "J delta = -delta J",
        "J delta = -delta J",
        conjugate_by_j(&delta)?.add(&delta)?.max_abs(),
        tol,
    );
    rep.push("Gamma^2 = 1", "Gamma^2 = id", gamma.mul(&gamma)?.sub(&id)?.max_abs(), tol);
    rep.push("Gamma* = Gamma", "Gamma* = Gamma", gamma.hermitian_residual(), tol);
    rep.push("[Gamma, delta] = 0", "[Gamma, delta] = 0", gamma.commutator(&delta)?.max_abs(), tol);
    rep.push("D hermitian", "D* = D", d.hermitian_residual(), tol);
    rep.push("[D, delta] = 0", "[D, delta] = 0", d.commutator(&delta)?.max_abs(), tol);

    let samples = sample_elements(theta, false, cfg.random_samples, cfg.seed);
    let base = sample_elements(theta, true, cfg.random_samples, cfg.seed.wrapping_add(1));
    let lefts: Vec<MatrixOperator> = samples.iter().map(|x| represent(x, w)).collect::<Result<_>>()?;
    let rights: Vec<MatrixOperator> = samples
        .iter()
        .map(|x| represent_right(x, w))
        .collect::<Result<_>>()?;
    let idx: Vec<usize> = (0..samples.len()).collect();

    let r = over(&idx, |&i| Ok((gamma.commutator(&lefts[i])?, lefts[i].margin())))?;
    rep.push_opt("[Gamma, a] = 0", "[Gamma, a] = 0", r, tol);

    let r = over(&idx, |&i| {
        let lhs = delta.commutator(&lefts[i])?;
        Ok((lhs.sub(&represent(&samples[i].derive(3)?, w)?)?, lefts[i].margin()))
    })?;
    rep.push_opt("equivariance", "[delta, pi(a)] = pi(delta(a))", r, tol);

    let r = over(&idx, |&i| {
        let adj = lefts[i].adjoint();
        Ok((adj.sub(&represent(&samples[i].star(), w)?)?, lefts[i].margin()))
    })?;
    rep.push_opt("pi(a)* = pi(a*)", "pi(a)* = pi(a*)", r, tol);

    // Pairs: every monomial against every monomial, and each random element
    // against its neighbour.
    let n_mono = samples.len() - cfg.random_samples;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n_mono {
        for j in 0..n_mono {
            pairs.push((i, j));
        }
    }
    for i in n_mono..samples.len() {
        let j = if i + 1 < samples.len() { i + 1 } else { n_mono };
        pairs.push((i, j));
        pairs.push((i, i % n_mono.max(1)));
    }

    let r = over(&pairs, |&(i, j)| {
        let prod = represent(&samples[i].multiply(&samples[j])?, w)?;
        Ok((prod.sub(&lefts[i].mul(&lefts[j])?)?, lefts[i].margin() + lefts[j].margin()))
    })?;
    rep.push_opt("representation", "pi(ab) = pi(a) pi(b)", r, tol);

    let r = over(&pairs, |&(i, j)| {
        Ok((lefts[i].commutator(&rights[j])?, lefts[i].margin() + rights[j].margin()))
    })?;
    rep.push_opt("commutant", "[a, J b* J^-1] = 0", r, tol);

    let da: Vec<MatrixOperator> = lefts.iter().map(|l| d.commutator(l)).collect::<Result<_>>()?;
    let r = over(&pairs, |&(i, j)| {
        Ok((
            da[i].commutator(&rights[j])?,
            d.margin() + lefts[i].margin() + rights[j].margin(),
        ))
    })?;
    rep.push_opt("order one", "[[D, a], J b* J^-1] = 0", r, tol);

    let dec = decompose(&d, &gamma, ell)?;
    rep.push("reassembly", "D = D_h + D_v + Z", dec.reassembly_residual()?, tol);
    rep.extend(projectability_report(&dec, &base, &samples)?);
    Ok(rep)
}

/// Residuals of `[D_h, b] = [D, b]` for `b ∈ ℬ`, `[Z, J a* J⁻¹] = 0` for
/// `a ∈ 𝒜`, and `[Z, Γ] = 0`, plus the Γ-parities of the parts.
pub fn projectability_report(
    dec: &DiracBundleDecomposition,
    base_samples: &[TorusElement],
    samples: &[TorusElement],
) -> Result<AxiomReport> {
    let tol = IDENTITY_TOL;
    let w = dec.d_full.window();
    let mut rep = AxiomReport::new();
    let gamma = &dec.gamma;
    let g_dh = gamma.mul(&dec.d_h)?.mul(gamma)?;
    rep.push("Gamma D_h Gamma = -D_h", "Gamma D_h Gamma = -D_h", g_dh.add(&dec.d_h)?.max_abs(), tol);
    let g_dv = gamma.mul(&dec.d_v)?.mul(gamma)?;
    rep.push("Gamma D_v Gamma = D_v", "Gamma D_v Gamma = D_v", g_dv.sub(&dec.d_v)?.max_abs(), tol);
    rep.push("[Z, Gamma] = 0", "[Z, Gamma] = 0", dec.z.commutator(gamma)?.max_abs(), tol);

    let r = over(base_samples, |b| {
        let pb = represent(b, w)?;
        let diff = dec.d_h.commutator(&pb)?.sub(&dec.d_full.commutator(&pb)?)?;
        Ok((diff, dec.d_full.margin() + pb.margin()))
    })?;
    rep.push_opt("projectability", "[D_h, b] = [D, b]", r, tol);

    let r = over(samples, |a| {
        let ra = represent_right(a, w)?;
        Ok((dec.z.commutator(&ra)?, dec.z.margin() + ra.margin()))
    })?;
    rep.push_opt("Z commutant", "[Z, J a* J^-1] = 0", r, tol);
    Ok(rep)
}

/// The sample `b` with the largest interior `‖[Z, π(b)]‖`, if nonzero.
pub fn z_commutator_witness(
    dec: &DiracBundleDecomposition,
    samples: &[TorusElement],
) -> Result<Option<(TorusElement, f64)>> {
    let w = dec.d_full.window();
    let mut best: Option<(TorusElement, f64)> = None;
    for b in samples {
        let pb = represent(b, w)?;
        let c = dec.z.commutator(&pb)?;
        if let Some(r) = interior(&c, dec.z.margin() + pb.margin()) {
            if r > IDENTITY_TOL && best.as_ref().is_none_or(|x| r > x.1) {
                best = Some((b.clone(), r));
            }
        }
    }
    Ok(best)
}
