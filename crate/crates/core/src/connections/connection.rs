use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::calculus::{spinor_sum, DiracCalculus, OneForm};
use crate::algebra::{base_monomials_up_to, monomials_up_to, random_selfadjoint, Exponent, Theta, TorusElement};
use crate::linalg::{projection_residual, CMatrix};
use crate::repr::{represent_right, MatrixOperator};
use crate::{Error, Result, IDENTITY_TOL};

/// A U(1)-invariant connection `ω = σ³ + σ¹ω₁ + σ²ω₂` with `ωᵢ ∈ T²_θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub omega1: TorusElement,
    pub omega2: TorusElement,
}

impl Connection {
    pub fn new(omega1: TorusElement, omega2: TorusElement) -> Result<Self> {
        if omega1.theta() != omega2.theta() {
            return Err(Error::ThetaMismatch(omega1.theta(), omega2.theta()));
        }
        for (i, w) in [&omega1, &omega2].into_iter().enumerate() {
            if !w.in_base() {
                return Err(Error::NotInvariant(i + 1));
            }
        }
        Ok(Connection { omega1, omega2 })
    }

    /// `ω = σ³`.
    pub fn trivial(theta: Theta) -> Self {
        Connection {
            omega1: TorusElement::zero(theta),
            omega2: TorusElement::zero(theta),
        }
    }

    /// Accepts a one-form with `c₃ = 1` and invariant coefficients.
    pub fn from_one_form(form: &OneForm) -> Result<Self> {
        let theta = form.theta();
        if !form.coefficient(3).approx_eq(&TorusElement::one(theta), IDENTITY_TOL) {
            return Err(Error::Invalid(format!(
                "vertical coefficient must be 1, got {}",
                form.coefficient(3)
            )));
        }
        Self::new(form.coefficient(1).clone(), form.coefficient(2).clone())
    }

    pub fn theta(&self) -> Theta {
        self.omega1.theta()
    }

    pub fn one_form(&self) -> OneForm {
        OneForm::new(
            self.omega1.clone(),
            self.omega2.clone(),
            TorusElement::one(self.theta()),
        )
        .expect("coefficients share theta")
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.omega1.is_selfadjoint(tol) && self.omega2.is_selfadjoint(tol)
    }

    /// `ωⱼ` for `j ∈ {1, 2}`; `ω₃ = 1`.
    pub fn horizontal(&self, j: usize) -> &TorusElement {
        if j == 1 {
            &self.omega1
        } else {
            &self.omega2
        }
    }
}

/// `count` seeded connections with selfadjoint coefficients of degree at
/// most 2 in `U₁, U₂`.
pub fn sample_connections(theta: Theta, count: usize, seed: u64) -> Vec<Connection> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let w1 = random_selfadjoint(theta, 2, 3, true, &mut rng);
            let w2 = random_selfadjoint(theta, 2, 3, true, &mut rng);
            Connection::new(w1, w2).expect("base elements")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongnessReport {
    pub invariant: bool,
    pub vertical_field: bool,
    pub strong: bool,
    /// Largest least-squares distance of a residual one-form from the span.
    pub max_residual: f64,
    pub degree: i32,
}

impl StrongnessReport {
    pub fn is_strong_connection(&self) -> bool {
        self.invariant && self.vertical_field && self.strong
    }
}

/// Membership tolerance for the strongness least-squares test.
const STRONG_TOL: f64 = 1e-9;

/// Checks invariance, the vertical field condition `c₃ = 1`, and
/// strongness `[D, a] − δ(a)ω ∈ Ω¹_D(ℬ)𝒜` for every monomial `a` of
/// degree at most `degree`.
pub fn is_strong_connection(form: &OneForm, degree: i32) -> Result<StrongnessReport> {
    is_strong_connection_for(&DiracCalculus::free(form.theta()), form, degree)
}

pub fn is_strong_connection_for(
    calc: &DiracCalculus,
    form: &OneForm,
    degree: i32,
) -> Result<StrongnessReport> {
    let theta = form.theta();
    let invariant = form.is_invariant();
    let vertical_field = form
        .coefficient(3)
        .approx_eq(&TorusElement::one(theta), IDENTITY_TOL);
    let mut max_residual: f64 = 0.0;
    for e in monomials_up_to(degree) {
        let a = TorusElement::monomial(theta, e, Complex64::new(1.0, 0.0));
        let da = a.derive(3)?;
        let residual: Vec<TorusElement> = (1..=3)
            .map(|j| calc.partial(j, &a)?.checked_sub(&da.multiply(form.coefficient(j))?))
            .collect::<Result<_>>()?;
        max_residual = max_residual.max(base_span_distance(calc, &residual)?);
    }
    Ok(StrongnessReport {
        invariant,
        vertical_field,
        strong: max_residual < STRONG_TOL,
        max_residual,
        degree,
    })
}

/// Least-squares distance of the coefficient triple `r` from the span of
/// `b ∂(b') a''` with `b, b'` base monomials of degree at most 1 and `a''`
/// chosen so that every product lands on the support of `r`.
fn base_span_distance(calc: &DiracCalculus, r: &[TorusElement]) -> Result<f64> {
    let theta = calc.theta();
    let one = Complex64::new(1.0, 0.0);
    let mut targets: Vec<Exponent> = r.iter().flat_map(|c| c.support()).collect();
    targets.sort_unstable();
    targets.dedup();
    if targets.is_empty() {
        return Ok(0.0);
    }
    let base = base_monomials_up_to(1);
    let mut columns: Vec<[TorusElement; 3]> = Vec::new();
    for t in &targets {
        for b in &base {
            for bp in &base {
                if *bp == [0, 0, 0] {
                    continue;
                }
                let a2 = [t[0] - b[0] - bp[0], t[1] - b[1] - bp[1], t[2]];
                let bm = TorusElement::monomial(theta, *b, one);
                let bpm = TorusElement::monomial(theta, *bp, one);
                let am = TorusElement::monomial(theta, a2, one);
                let col = [
                    bm.multiply(&calc.partial(1, &bpm)?)?.multiply(&am)?,
                    bm.multiply(&calc.partial(2, &bpm)?)?.multiply(&am)?,
                    bm.multiply(&calc.partial(3, &bpm)?)?.multiply(&am)?,
                ];
                columns.push(col);
            }
        }
    }
    let mut rows: std::collections::BTreeMap<(usize, Exponent), usize> = Default::default();
    let mut index = |j: usize, e: Exponent| {
        let n = rows.len();
        *rows.entry((j, e)).or_insert(n)
    };
    let mut entries = Vec::new();
    for (c, col) in columns.iter().enumerate() {
        for (j, x) in col.iter().enumerate() {
            for (e, z) in x.terms() {
                entries.push((index(j, e), c, z));
            }
        }
    }
    let mut rhs_entries = Vec::new();
    for (j, x) in r.iter().enumerate() {
        for (e, z) in x.terms() {
            rhs_entries.push((index(j, e), z));
        }
    }
    let n = rows.len();
    let mut m = CMatrix::zeros(n, columns.len());
    for (i, c, z) in entries {
        m[(i, c)] += z;
    }
    let mut v = nalgebra::DVector::zeros(n);
    for (i, z) in rhs_entries {
        v[i] += z;
    }
    Ok(projection_residual(&m, &v, 1e-10))
}

/// `∇_ω(a) = [D, a] − k a ω` for homogeneous `a` of degree `k`; the
/// vertical coefficient vanishes identically.
pub fn nabla(calc: &DiracCalculus, a: &TorusElement, conn: &Connection) -> Result<OneForm> {
    let degrees = a.degrees();
    if degrees.len() > 1 {
        return Err(Error::NotHomogeneous(degrees));
    }
    let k = degrees.first().copied().unwrap_or(0) as f64;
    let ka = a.scale(Complex64::new(k, 0.0));
    let form = conn.one_form();
    let c: Vec<TorusElement> = (1..=3)
        .map(|j| calc.partial(j, a)?.checked_sub(&ka.multiply(form.coefficient(j))?))
        .collect::<Result<_>>()?;
    let [c1, c2, c3]: [TorusElement; 3] = c.try_into().expect("three coefficients");
    OneForm::new(c1, c2, c3)
}

/// `‖∇(ba) − b∇(a) − [D₀, b]a‖` for `b ∈ ℬ`.
pub fn leibniz_residual(
    calc: &DiracCalculus,
    b: &TorusElement,
    a: &TorusElement,
    conn: &Connection,
) -> Result<f64> {
    if !b.in_base() {
        return Err(Error::NotInvariant(0));
    }
    let lhs = nabla(calc, &b.multiply(a)?, conn)?;
    let rhs = nabla(calc, a, conn)?.left_mul(b)?;
    let theta = b.theta();
    let db = OneForm::new(
        calc.partial(1, b)?.multiply(a)?,
        calc.partial(2, b)?.multiply(a)?,
        TorusElement::zero(theta),
    )?;
    Ok(lhs.checked_sub(&rhs)?.checked_sub(&db)?.max_abs())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HermitianReport {
    pub k: i32,
    pub selfadjoint: bool,
    /// Largest entry of the defect operator on interior vectors of `ℋ₀`.
    pub max_residual: f64,
    /// Largest entrywise difference between the defect and
    /// `Σ σʲ R(k a₂(ωⱼ* − ωⱼ)a₁*)`.
    pub closed_form_mismatch: f64,
    /// Whether every `m₁†m₂` lies in `JℬJ⁻¹`.
    pub commutant_ok: bool,
    pub samples: usize,
}

impl HermitianReport {
    pub fn hermitian(&self) -> bool {
        self.max_residual < IDENTITY_TOL && self.commutant_ok
    }
}

/// Evaluates the hermiticity defect
/// `h∇(m₂)m₁† − hm₂∇(m₁)† − h[D, m₂m₁†]` for `m₁, m₂` running over the
/// degree-`k` monomials with `|k|+|l| ≤ 1`, as operators on `ℋ₀`.
///
/// Module elements act from the right (`h·m = R(m)h`), one-forms through
/// `h·ω = −Jω*J⁻¹h`, and `h[D, b] = D(hb) − (Dh)b`.
pub fn hermitian_check(
    calc: &DiracCalculus,
    conn: &Connection,
    d: &MatrixOperator,
    k: i32,
) -> Result<HermitianReport> {
    let w = d.window();
    let theta = conn.theta();
    let one = Complex64::new(1.0, 0.0);
    let samples: Vec<TorusElement> = base_monomials_up_to(1)
        .into_iter()
        .map(|e| TorusElement::monomial(theta, [e[0], e[1], k], one))
        .collect();
    let fibre0 = w.fibre_range(0)?;
    let form = conn.one_form();
    let defect_form: Vec<TorusElement> = (1..=3)
        .map(|j| {
            let c = form.coefficient(j);
            c.star().checked_sub(c).map(|x| x.scale(Complex64::new(k as f64, 0.0)))
        })
        .collect::<Result<_>>()?;

    let right_form = |x: &OneForm| x.represent_right(w);
    let mut max_residual: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    let mut commutant_ok = true;
    for a1 in &samples {
        let x1 = nabla(calc, a1, conn)?;
        let r_a1s = represent_right(&a1.star(), w)?;
        for a2 in &samples {
            let b = a2.multiply(&a1.star())?;
            commutant_ok &= b.in_base();
            let x2 = nabla(calc, a2, conn)?;
            let r_a2 = represent_right(a2, w)?;
            let r_b = represent_right(&b, w)?;
            let term1 = r_a1s.mul(&right_form(&x2)?)?;
            let term2 = right_form(&x1.star())?.mul(&r_a2)?;
            let rhs = d.commutator(&r_b)?;
            let defect = term1.sub(&term2)?.sub(&rhs)?;
            let closed = spinor_sum(w, |j| {
                represent_right(&a2.multiply(&defect_form[j - 1])?.multiply(&a1.star())?, w)
            })?;
            let margin = term1.margin().max(term2.margin()).max(rhs.margin());
            let cols: Vec<usize> = fibre0
                .clone()
                .filter(|&i| w.is_interior(w.coords(i).0, margin))
                .collect();
            max_residual = max_residual.max(defect.max_abs_on(cols.iter().copied()));
            mismatch = mismatch.max(defect.sub(&closed)?.max_abs_on(cols.iter().copied()));
        }
    }
    Ok(HermitianReport {
        k,
        selfadjoint: conn.is_selfadjoint(IDENTITY_TOL),
        max_residual,
        closed_form_mismatch: mismatch,
        commutant_ok,
        samples: samples.len() * samples.len(),
    })
}
