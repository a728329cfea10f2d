use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exponent triple `[k, l, m]` of the monomial `U₁ᵏ U₂ˡ U₃ᵐ`.
pub type Exponent = [i32; 3];

/// The antisymmetric twist matrix, stored through its three lower entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub t21: f64,
    pub t31: f64,
    pub t32: f64,
}

fn frac_product(x: f64, theta: f64) -> f64 {
    (x * theta.rem_euclid(1.0)).rem_euclid(1.0)
}

impl Theta {
    pub fn new(t21: f64, t31: f64, t32: f64) -> Self {
        Theta { t21, t31, t32 }
    }

    pub fn zero() -> Self {
        Theta::new(0.0, 0.0, 0.0)
    }

    /// θ_{jk} for 1-based indices; antisymmetric by construction.
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        match (j, k) {
            (2, 1) => self.t21,
            (3, 1) => self.t31,
            (3, 2) => self.t32,
            (1, 2) => -self.t21,
            (1, 3) => -self.t31,
            (2, 3) => -self.t32,
            _ => 0.0,
        }
    }

    /// Phase exponent (mod 1) of `U^s U^n = e^{2πi c(s,n)} U^{s+n}`.
    ///
    /// `c(s, n) = s₃n₁θ₃₁ + s₂n₁θ₂₁ + s₃n₂θ₃₂` is bilinear, which is what makes
    /// the normal-ordered product associative. The arguments are real so that
    /// the same cocycle serves half-integer spinor lattices.
    pub fn cocycle(&self, s: [f64; 3], n: [f64; 3]) -> f64 {
        (frac_product(s[2] * n[0], self.t31)
            + frac_product(s[1] * n[0], self.t21)
            + frac_product(s[2] * n[1], self.t32))
            .rem_euclid(1.0)
    }

    pub fn cocycle_int(&self, s: Exponent, n: Exponent) -> f64 {
        self.cocycle(to_f64(s), to_f64(n))
    }

    pub fn phase(&self, s: [f64; 3], n: [f64; 3]) -> Complex64 {
        unit_phase(self.cocycle(s, n))
    }

    pub fn phase_int(&self, s: Exponent, n: Exponent) -> Complex64 {
        unit_phase(self.cocycle_int(s, n))
    }

    /// True if some entry is (numerically) rational with a small denominator.
    pub fn has_small_rational_entry(&self, max_denominator: u32) -> bool {
        [self.t21, self.t31, self.t32].iter().any(|&t| {
            (1..=max_denominator).any(|q| {
                let x = t * q as f64;
                (x - x.round()).abs() < 1e-12
            })
        })
    }
}

impl Default for Theta {
    fn default() -> Self {
        // Generic irrational-looking defaults.
        Theta::new(0.5_f64.sqrt() - 0.5, (5.0_f64.sqrt() - 1.0) / 2.0, PI.recip())
    }
}

pub(crate) fn to_f64(e: Exponent) -> [f64; 3] {
    [e[0] as f64, e[1] as f64, e[2] as f64]
}

/// `e^{2πi x}`, exact at `x = 0`.
pub(crate) fn unit_phase(x: f64) -> Complex64 {
    if x == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, 2.0 * PI * x)
    }
}

fn add_exp(a: Exponent, b: Exponent) -> Exponent {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// A finitely supported element `Σ α_{klm} U₁ᵏU₂ˡU₃ᵐ` of `T³_θ`.
///
/// Exact zeros are never stored. Values are immutable once built; all
/// arithmetic returns new elements.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusElement {
    theta: Theta,
    coeffs: BTreeMap<Exponent, Complex64>,
}

impl TorusElement {
    pub fn zero(theta: Theta) -> Self {
        TorusElement {
            theta,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(theta: Theta) -> Self {
        Self::scalar(theta, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(theta: Theta, c: Complex64) -> Self {
        Self::monomial(theta, [0, 0, 0], c)
    }

    pub fn monomial(theta: Theta, exponent: Exponent, c: Complex64) -> Self {
        Self::from_terms(theta, [(exponent, c)])
    }

    /// `U_j^power` for `j ∈ {1, 2, 3}`.
    pub fn generator_power(theta: Theta, j: usize, power: i32) -> Result<Self> {
        if !(1..=3).contains(&j) {
            return Err(Error::InvalidAxis(j));
        }
        let mut e = [0; 3];
        e[j - 1] = power;
        Ok(Self::monomial(theta, e, Complex64::new(1.0, 0.0)))
    }

    /// `U_j`.
    pub fn generator(theta: Theta, j: usize) -> Result<Self> {
        Self::generator_power(theta, j, 1)
    }

    /// Sums repeated exponents and drops exact zeros.
    pub fn from_terms(theta: Theta, terms: impl IntoIterator<Item = (Exponent, Complex64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (e, c) in terms {
            *coeffs.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        TorusElement { theta, coeffs }
    }

    /// `(U_j^{±1} + U_j^{∓1}) / 2`-style cosine element `c·(U^e + U^{-e})/2`,
    /// selfadjoint for real `c` when `e` lies in a single axis.
    pub fn cosine(theta: Theta, e: Exponent, c: f64) -> Self {
        let half = Complex64::new(c / 2.0, 0.0);
        Self::from_terms(theta, [(e, half), ([-e[0], -e[1], -e[2]], half)])
    }

    pub fn theta(&self) -> Theta {
        self.theta
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponent, Complex64)> + '_ {
        self.coeffs.iter().map(|(e, c)| (*e, *c))
    }

    pub fn coefficient(&self, e: Exponent) -> Complex64 {
        self.coeffs.get(&e).copied().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = Exponent> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `max(|k|,|l|,|m|)` over the support: the index shift of `π(a)`.
    pub fn margin(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|e| e.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Largest `|m|` in the support.
    pub fn vertical_margin(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|e| e[2].unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Membership in `T²_θ`: every supported triple has `m = 0`.
    pub fn in_base(&self) -> bool {
        self.coeffs.keys().all(|e| e[2] == 0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    fn check_theta(&self, other: &Self) -> Result<()> {
        if self.theta == other.theta {
            Ok(())
        } else {
            Err(Error::ThetaMismatch(self.theta, other.theta))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_theta(other)?;
        Ok(Self::from_terms(
            self.theta,
            self.terms().chain(other.terms()),
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.theta, self.terms().map(|(e, x)| (e, x * c)))
    }

    /// Normal-ordered product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_theta(other)?;
        let theta = self.theta;
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for (s, a) in self.terms() {
            for (n, b) in other.terms() {
                terms.push((add_exp(s, n), a * b * theta.phase_int(s, n)));
            }
        }
        Ok(Self::from_terms(theta, terms))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.checked_sub(&other.multiply(self)?)
    }

    /// The involution with `U_j* = U_j⁻¹`: `(U^n)* = e^{2πi c(n,n)} U^{-n}`.
    pub fn star(&self) -> Self {
        let theta = self.theta;
        Self::from_terms(
            theta,
            self.terms().map(|(n, c)| {
                (
                    [-n[0], -n[1], -n[2]],
                    c.conj() * theta.phase_int(n, n),
                )
            }),
        )
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.checked_sub(&self.star())
            .map(|d| d.is_zero(tol))
            .unwrap_or(false)
    }

    /// The trace `τ(a) = α₀₀₀`.
    pub fn trace(&self) -> Complex64 {
        self.coefficient([0, 0, 0])
    }

    /// `δ_j`: multiplies the coefficient of `U^{(k,l,m)}` by the `j`-th index.
    pub fn derive(&self, j: usize) -> Result<Self> {
        if !(1..=3).contains(&j) {
            return Err(Error::InvalidAxis(j));
        }
        Ok(Self::from_terms(
            self.theta,
            self.terms().map(|(e, c)| (e, c * e[j - 1] as f64)),
        ))
    }

    /// Degree-`n` graded component (all terms with `m = n`).
    pub fn component(&self, degree: i32) -> Self {
        Self::from_terms(self.theta, self.terms().filter(|(e, _)| e[2] == degree))
    }

    /// The distinct U(1) degrees present, ascending.
    pub fn degrees(&self) -> Vec<i32> {
        let mut d: Vec<i32> = self.coeffs.keys().map(|e| e[2]).collect();
        d.dedup();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Max coefficient difference; `None` on theta mismatch.
    pub fn distance(&self, other: &Self) -> Option<f64> {
        self.checked_sub(other).ok().map(|d| d.max_abs())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other).is_some_and(|d| d <= tol)
    }
}

impl fmt::Display for TorusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)·U^{:?}", c.re, c.im, e)?;
        }
        Ok(())
    }
}

// Operator sugar. These panic on a theta mismatch; library code uses the
// checked forms.
impl Add for &TorusElement {
    type Output = TorusElement;
    fn add(self, rhs: Self) -> TorusElement {
        self.checked_add(rhs).expect("theta mismatch in add")
    }
}

impl Sub for &TorusElement {
    type Output = TorusElement;
    fn sub(self, rhs: Self) -> TorusElement {
        self.checked_sub(rhs).expect("theta mismatch in sub")
    }
}

impl Mul for &TorusElement {
    type Output = TorusElement;
    fn mul(self, rhs: Self) -> TorusElement {
        self.multiply(rhs).expect("theta mismatch in multiply")
    }
}

impl Neg for &TorusElement {
    type Output = TorusElement;
    fn neg(self) -> TorusElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

#[derive(Serialize, Deserialize)]
struct ThetaJson {
    t21: f64,
    t31: f64,
    t32: f64,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    k: i32,
    l: i32,
    m: i32,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    theta: ThetaJson,
    coeffs: Vec<TermJson>,
}

impl Serialize for TorusElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementJson {
            theta: ThetaJson {
                t21: self.theta.t21,
                t31: self.theta.t31,
                t32: self.theta.t32,
            },
            // BTreeMap iteration is already lexicographic in (k, l, m).
            coeffs: self
                .terms()
                .map(|(e, c)| TermJson {
                    k: e[0],
                    l: e[1],
                    m: e[2],
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ElementJson::deserialize(d)?;
        for t in &raw.coeffs {
            if !(t.re.is_finite() && t.im.is_finite()) {
                return Err(serde::de::Error::custom(format!(
                    "non-finite coefficient at (k={}, l={}, m={})",
                    t.k, t.l, t.m
                )));
            }
        }
        let theta = Theta::new(raw.theta.t21, raw.theta.t31, raw.theta.t32);
        Ok(TorusElement::from_terms(
            theta,
            raw.coeffs
                .into_iter()
                .map(|t| ([t.k, t.l, t.m], Complex64::new(t.re, t.im))),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Word in the generators: (axis 1..=3, ±1).
    type Word = Vec<(usize, i32)>;

    /// Brings a generator word into normal order by adjacent transpositions,
    /// using only `U_j U_k = e^{2πiθ_{jk}} U_k U_j` (and its inverse forms).
    fn normal_order(theta: &Theta, mut word: Word) -> (Complex64, Exponent) {
        let mut phase = 0.0_f64;
        loop {
            let mut swapped = false;
            for i in 0..word.len().saturating_sub(1) {
                let (j, a) = word[i];
                let (k, b) = word[i + 1];
                if j > k {
                    // U_j^a U_k^b = e^{2πi a b θ_{jk}} U_k^b U_j^a
                    phase += (a * b) as f64 * theta.entry(j, k);
                    word.swap(i, i + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        let mut e = [0; 3];
        for (j, a) in word {
            e[j - 1] += a;
        }
        (unit_phase(phase.rem_euclid(1.0)), e)
    }

    fn monomial_word(e: Exponent) -> Word {
        let mut w = Vec::new();
        for (axis, &p) in e.iter().enumerate() {
            for _ in 0..p.abs() {
                w.push((axis + 1, p.signum()));
            }
        }
        w
    }

    fn theta() -> Theta {
        Theta::new(0.1234, 0.3711, -0.2718)
    }

    #[test]
    fn swap_relation_u2_u1() {
        let t = theta();
        let u1 = TorusElement::generator(t, 1).unwrap();
        let u2 = TorusElement::generator(t, 2).unwrap();
        let prod = &u2 * &u1;
        let expected = TorusElement::monomial(t, [1, 1, 0], unit_phase(t.t21.rem_euclid(1.0)));
        assert!(prod.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn product_matches_rewriting_oracle() {
        let t = theta();
        let pairs = [
            ([1, 0, 1], [0, 1, -1]),
            ([2, -1, 3], [-1, 2, 1]),
            ([0, 0, 2], [3, 0, 0]),
            ([-2, 3, -1], [1, -2, 2]),
        ];
        for (s, n) in pairs {
            let a = TorusElement::monomial(t, s, c(1.0));
            let b = TorusElement::monomial(t, n, c(1.0));
            let mut word = monomial_word(s);
            word.extend(monomial_word(n));
            let (phase, e) = normal_order(&t, word);
            let expected = TorusElement::monomial(t, e, phase);
            assert!((&a * &b).approx_eq(&expected, 1e-13), "{s:?}·{n:?}");
        }
    }

    #[test]
    fn star_matches_rewriting_oracle() {
        let t = theta();
        for n in [[1, 1, 0], [2, -1, 1], [1, 2, 3], [-1, 0, 2]] {
            let a = TorusElement::monomial(t, n, c(1.0));
            // (U₁ᵏU₂ˡU₃ᵐ)* = U₃⁻ᵐ U₂⁻ˡ U₁⁻ᵏ as a word, then normal-ordered.
            let word: Word = monomial_word(n)
                .into_iter()
                .rev()
                .map(|(j, s)| (j, -s))
                .collect();
            let (phase, e) = normal_order(&t, word);
            assert!(a.star().approx_eq(&TorusElement::monomial(t, e, phase), 1e-13));
        }
    }

    #[test]
    fn unit_star_and_trace() {
        let t = theta();
        let u1 = TorusElement::generator(t, 1).unwrap();
        assert_eq!(u1.star(), TorusElement::generator_power(t, 1, -1).unwrap());
        assert_eq!(TorusElement::one(t).trace(), c(1.0));
        assert_eq!(u1.trace(), c(0.0));
        let a = TorusElement::monomial(t, [1, 1, 0], c(1.0));
        let b = TorusElement::monomial(t, [-1, -1, 0], c(1.0));
        // U₁U₂ · U₂⁻¹U₁⁻¹ = 1 and the trace is symmetric.
        let u12 = &TorusElement::generator(t, 1).unwrap() * &TorusElement::generator(t, 2).unwrap();
        let inv = &TorusElement::generator_power(t, 2, -1).unwrap()
            * &TorusElement::generator_power(t, 1, -1).unwrap();
        assert!(((&u12 * &inv).trace() - c(1.0)).norm() < 1e-15);
        assert!(((&u12 * &inv).trace() - (&inv * &u12).trace()).norm() < 1e-15);
        assert!(((&a * &b).trace() - (&b * &a).trace()).norm() < 1e-15);
    }

    #[test]
    fn derivations() {
        let t = theta();
        let u3 = TorusElement::generator(t, 3).unwrap();
        assert_eq!(u3.derive(3).unwrap(), u3);
        assert!(TorusElement::one(t).derive(1).unwrap().is_empty());
        let a = TorusElement::monomial(t, [2, 1, 0], c(1.0));
        assert_eq!(a.derive(1).unwrap(), a.scale(c(2.0)));
        assert_eq!(a.derive(4), Err(Error::InvalidAxis(4)));
    }

    #[test]
    fn theta_mismatch_is_an_error() {
        let a = TorusElement::one(Theta::zero());
        let b = TorusElement::one(theta());
        assert!(matches!(a.multiply(&b), Err(Error::ThetaMismatch(..))));
    }

    #[test]
    fn json_layout() {
        let t = Theta::new(0.5, 0.25, 0.125);
        let a = TorusElement::from_terms(t, [([0, 1, 0], c(2.0)), ([-1, 0, 3], Complex64::new(0.0, 1.0))]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(
            s,
            r#"{"theta":{"t21":0.5,"t31":0.25,"t32":0.125},"coeffs":[{"k":-1,"l":0,"m":3,"re":0.0,"im":1.0},{"k":0,"l":1,"m":0,"re":2.0,"im":0.0}]}"#
        );
        let back: TorusElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }
}
