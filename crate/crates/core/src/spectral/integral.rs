use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{fibre_eigensystem, FibreEigensystem};
use super::epstein::spinor_residue;
use crate::algebra::TorusElement;
use crate::connections::OneForm;
use crate::dirac::{build_fluctuated, grading, FluctuationA};
use crate::repr::{pauli_operator, represent, MatrixOperator, TruncatedWindow};
use crate::{Error, Result, EIGEN_TOL};

pub const INTEGRAL_SCHEMA: &str = "torus-bundle/integral-estimate/v1";
pub const FIBRE_LENGTH_SCHEMA: &str = "torus-bundle/fibre-length/v1";
pub const ORTHOGONALITY_SCHEMA: &str = "torus-bundle/orthogonality/v1";

/// Which operator the zeta function is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IntegralOperator {
    /// `D_A` on every fibre of the window.
    Total,
    /// `(D_A)₀`, the block on fibre `0`.
    Base,
}

impl IntegralOperator {
    pub fn expected_power(self) -> u32 {
        match self {
            IntegralOperator::Total => 3,
            IntegralOperator::Base => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IntegralOperator::Total => "D_A",
            IntegralOperator::Base => "(D_A)_0",
        }
    }

    fn fibres(self, w: &TruncatedWindow) -> Vec<i32> {
        match self {
            IntegralOperator::Total => w.fibres().collect(),
            IntegralOperator::Base => vec![0],
        }
    }
}

/// Cutoff radii for the partial sums and the exponent offsets `σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralConfig {
    pub cutoffs: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl Default for IntegralConfig {
    /// Radii `3, 3⅛, …, 10` and `σ ∈ {½, ¼, ⅛}`, sized for `N = 12`.
    fn default() -> Self {
        Self::for_window(12)
    }
}

impl IntegralConfig {
    /// Radii from `3` to `5N/6` in steps of `⅛`. Eigenvalues near the
    /// window boundary are distorted by truncation, hence the margin.
    pub fn for_window(n: u32) -> Self {
        let top = (n as f64 * 5.0 / 6.0 * 8.0).floor() as i64;
        IntegralConfig {
            cutoffs: (24..=top).map(|i| i as f64 / 8.0).collect(),
            sigmas: vec![0.5, 0.25, 0.125],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoffs.len() < 4 || self.cutoffs.windows(2).any(|p| p[1] <= p[0]) || self.cutoffs[0] <= 1.0 {
            return Err(Error::Invalid("need at least 4 increasing cutoffs above 1".into()));
        }
        if self.sigmas.len() < 2 || self.sigmas.iter().any(|&s| s <= 0.0) {
            return Err(Error::Invalid("need at least 2 positive sigmas".into()));
        }
        Ok(())
    }
}

/// Polynomial extrapolation of `y(x)` to `x = 0` through all points.
///
/// Returns the last entry of each Neville column; the final element is the
/// full-order extrapolant.
pub(crate) fn neville_to_zero(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut col = ys.to_vec();
    let mut iterates = vec![*col.last().expect("nonempty")];
    for j in 1..xs.len() {
        col = (0..xs.len() - j)
            .map(|i| (xs[i + j] * col[i] - xs[i] * col[i + 1]) / (xs[i + j] - xs[i]))
            .collect();
        iterates.push(*col.last().expect("nonempty"));
    }
    iterates
}

/// Least-squares `(slope, intercept)` of `y ≈ slope·x + intercept`.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `S(Λ) = Σ_{|λ| ≤ Λ} w|λ|^{-s}` for sorted `(|λ|, w)`.
///
/// The comparison is relative to `EIGEN_TOL` so that `±λ` pairs split by
/// rounding stay on the same side of a cutoff.
fn partial_sums(spec: &[(f64, f64)], s: f64, cutoffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut acc = 0.0;
    let mut i = 0;
    for &cut in cutoffs {
        while i < spec.len() && spec[i].0 <= cut * (1.0 + EIGEN_TOL) {
            acc += spec[i].1 * spec[i].0.powf(-s);
            i += 1;
        }
        out.push(acc);
    }
    out
}

struct Estimates {
    sums: Vec<f64>,
    sigma_residues: Vec<f64>,
    richardson: Vec<f64>,
    log_fit: f64,
}

impl Estimates {
    fn value(&self) -> f64 {
        *self.richardson.last().expect("nonempty")
    }

    fn spread(&self) -> f64 {
        let n = self.richardson.len();
        (self.richardson[n - 1] - self.richardson[n - 2]).abs()
    }
}

fn estimate(spec: &[(f64, f64)], p: f64, cfg: &IntegralConfig) -> Estimates {
    let sums = partial_sums(spec, p, &cfg.cutoffs);
    let logs: Vec<f64> = cfg.cutoffs.iter().map(|c| c.ln()).collect();
    let log_fit = line_fit(&logs, &sums).0;
    // Z(p + σ) ≈ A − BΛ^{-σ} on the cutoffs; σA → residue as σ → 0.
    let sigma_residues: Vec<f64> = cfg
        .sigmas
        .iter()
        .map(|&sigma| {
            let s = partial_sums(spec, p + sigma, &cfg.cutoffs);
            let x: Vec<f64> = cfg.cutoffs.iter().map(|c| c.powf(-sigma)).collect();
            sigma * line_fit(&x, &s).1
        })
        .collect();
    let richardson = neville_to_zero(&cfg.sigmas, &sigma_residues);
    Estimates {
        sums,
        sigma_residues,
        richardson,
        log_fit,
    }
}

/// A residue estimate for `Res Tr(π(b)|D|⁻ˢ)` at `s = p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub schema: &'static str,
    pub integrand: String,
    pub operator: String,
    pub power: u32,
    pub cutoffs: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub sigma_residues: Vec<f64>,
    pub richardson: Vec<f64>,
    /// Real part of the σ-extrapolated residue.
    pub value: f64,
    pub imag: f64,
    /// Slope of `S(Λ)` against `log Λ`.
    pub log_fit: f64,
    /// Larger of the last Richardson step and the disagreement with
    /// `log_fit`, over real and imaginary parts.
    pub uncertainty: f64,
    /// `τ(b)` times the lattice-zeta residue.
    pub oracle: f64,
}

impl IntegralEstimate {
    /// Columns `cutoff, partial_sum, extrapolant, uncertainty`, where the
    /// extrapolant is the log-slope fitted on the cutoffs up to that row.
    pub fn to_csv(&self) -> String {
        let logs: Vec<f64> = self.cutoffs.iter().map(|c| c.ln()).collect();
        let mut s = String::from("cutoff,partial_sum,extrapolant,uncertainty\n");
        for (i, (c, v)) in self.cutoffs.iter().zip(&self.partial_sums).enumerate() {
            let ext = if i >= 1 {
                format!("{:.12e}", line_fit(&logs[..=i], &self.partial_sums[..=i]).0)
            } else {
                String::new()
            };
            s.push_str(&format!("{c},{v:.12e},{ext},{:.6e}\n", self.uncertainty));
        }
        s
    }

    /// `|value − other| ≤ combined uncertainty`.
    pub fn agrees_with(&self, other: &IntegralEstimate) -> bool {
        (self.value - other.value).abs() <= self.uncertainty + other.uncertainty
    }
}

/// Eigensystems of `D_A` (or its fibre-`0` block), reused across integrands.
#[derive(Clone, Debug)]
pub struct SpectralSample {
    operator: IntegralOperator,
    window: TruncatedWindow,
    systems: Vec<FibreEigensystem>,
}

impl SpectralSample {
    pub fn new(a: &FluctuationA, w: &TruncatedWindow, operator: IntegralOperator) -> Result<Self> {
        let d = build_fluctuated(a, w)?;
        let systems = operator
            .fibres(w)
            .into_iter()
            .map(|k| fibre_eigensystem(&d, k))
            .collect::<Result<_>>()?;
        Ok(SpectralSample {
            operator,
            window: *w,
            systems,
        })
    }

    pub fn operator(&self) -> IntegralOperator {
        self.operator
    }

    pub fn window(&self) -> &TruncatedWindow {
        &self.window
    }

    /// `(|λ|, ⟨ψ|t|ψ⟩)` over nonzero eigenvalues, sorted by `|λ|`.
    pub fn weighted(&self, t: &MatrixOperator) -> Vec<(f64, Complex64)> {
        let mut out: Vec<(f64, Complex64)> = self
            .systems
            .iter()
            .flat_map(|s| s.components.iter())
            .flat_map(|c| {
                let e = c.expectations(t);
                c.values.iter().map(|v| v.abs()).zip(e).collect::<Vec<_>>()
            })
            .filter(|(l, _)| *l > EIGEN_TOL)
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Partial traces `Tr(t P_Λ |D|⁻ᵖ)` at each cutoff.
    pub fn partial_traces(&self, t: &MatrixOperator, p: f64, cutoffs: &[f64]) -> Vec<Complex64> {
        let spec = self.weighted(t);
        let re: Vec<(f64, f64)> = spec.iter().map(|(l, z)| (*l, z.re)).collect();
        let im: Vec<(f64, f64)> = spec.iter().map(|(l, z)| (*l, z.im)).collect();
        partial_sums(&re, p, cutoffs)
            .into_iter()
            .zip(partial_sums(&im, p, cutoffs))
            .map(|(a, b)| Complex64::new(a, b))
            .collect()
    }

    /// Residue estimate of `Tr(π(b)|D|⁻ˢ)` at `s = p`.
    pub fn integral(&self, b: &TorusElement, p: u32, cfg: &IntegralConfig) -> Result<IntegralEstimate> {
        let expected = self.operator.expected_power();
        if p != expected {
            return Err(Error::PowerMismatch { power: p, expected });
        }
        cfg.validate()?;
        let spec = self.weighted(&represent(b, &self.window)?);
        let re: Vec<(f64, f64)> = spec.iter().map(|(l, z)| (*l, z.re)).collect();
        let im: Vec<(f64, f64)> = spec.iter().map(|(l, z)| (*l, z.im)).collect();
        let er = estimate(&re, p as f64, cfg);
        let ei = estimate(&im, p as f64, cfg);
        let uncertainty = [
            er.spread(),
            (er.log_fit - er.value()).abs(),
            ei.spread(),
            (ei.log_fit - ei.value()).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let spin = self.window.spin();
        let oracle = b.trace().re
            * match self.operator {
                IntegralOperator::Total => spinor_residue(3, &[spin.eps1(), spin.eps2(), 0.0]),
                IntegralOperator::Base => spinor_residue(2, &[spin.eps1(), spin.eps2()]),
            };
        Ok(IntegralEstimate {
            schema: INTEGRAL_SCHEMA,
            integrand: b.to_string(),
            operator: self.operator.label().to_string(),
            power: p,
            cutoffs: cfg.cutoffs.clone(),
            value: er.value(),
            imag: ei.value(),
            partial_sums: er.sums,
            sigmas: cfg.sigmas.clone(),
            sigma_residues: er.sigma_residues,
            richardson: er.richardson,
            log_fit: er.log_fit,
            uncertainty,
            oracle,
        })
    }
}

/// Residue of `Tr(π(b)|D_A|⁻ˢ)` at the operator's dimension.
pub fn nc_integral(
    b: &TorusElement,
    a: &FluctuationA,
    w: &TruncatedWindow,
    operator: IntegralOperator,
    p: u32,
    cfg: &IntegralConfig,
) -> Result<IntegralEstimate> {
    if p != operator.expected_power() {
        return Err(Error::PowerMismatch {
            power: p,
            expected: operator.expected_power(),
        });
    }
    SpectralSample::new(a, w, operator)?.integral(b, p, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FibreLengthRow {
    pub integrand: String,
    pub left: IntegralEstimate,
    pub right: IntegralEstimate,
    /// The left integral for `A = 0`.
    pub left_free: IntegralEstimate,
    pub ratio: Option<f64>,
    pub a_independent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FibreLengthReport {
    pub schema: &'static str,
    pub rows: Vec<FibreLengthRow>,
    pub oracle_ratio: f64,
    pub ratio_matches_oracle: bool,
}

/// `∮ b|D_A|⁻³` against `∮ b|(D_A)₀|⁻²` for `b ∈ {1, (U₁+U₁⁻¹)/2, (U₂+U₂⁻¹)/2}`.
pub fn fibre_length_check(a: &FluctuationA, w: &TruncatedWindow, cfg: &IntegralConfig) -> Result<FibreLengthReport> {
    if a.has_vertical_part() {
        return Err(Error::NonzeroA3);
    }
    let theta = w.theta();
    let total = SpectralSample::new(a, w, IntegralOperator::Total)?;
    let base = SpectralSample::new(a, w, IntegralOperator::Base)?;
    let free = SpectralSample::new(&FluctuationA::zero(theta), w, IntegralOperator::Total)?;
    let integrands = [
        TorusElement::one(theta),
        TorusElement::cosine(theta, [1, 0, 0], 1.0),
        TorusElement::cosine(theta, [0, 1, 0], 1.0),
    ];
    let spin = w.spin();
    let oracle_ratio = spinor_residue(3, &[spin.eps1(), spin.eps2(), 0.0]) / spinor_residue(2, &[spin.eps1(), spin.eps2()]);
    let mut rows = Vec::new();
    let mut ratio_matches_oracle = true;
    for b in &integrands {
        let left = total.integral(b, 3, cfg)?;
        let right = base.integral(b, 2, cfg)?;
        let left_free = free.integral(b, 3, cfg)?;
        let ratio = (right.value.abs() > (10.0 * right.uncertainty).max(1e-9)).then(|| left.value / right.value);
        if let Some(r) = ratio {
            let rel = left.uncertainty / left.value.abs() + right.uncertainty / right.value.abs();
            ratio_matches_oracle &= (r - oracle_ratio).abs() <= rel.max(0.05) * oracle_ratio;
        }
        rows.push(FibreLengthRow {
            integrand: b.to_string(),
            a_independent: left.agrees_with(&left_free),
            left,
            right,
            left_free,
            ratio,
        });
    }
    Ok(FibreLengthReport {
        schema: FIBRE_LENGTH_SCHEMA,
        rows,
        oracle_ratio,
        ratio_matches_oracle,
    })
}

/// The chirality inserted in front of the one-form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Chirality {
    Gamma,
    /// `σ¹` in place of `Γ`, as a control.
    Sigma1,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    pub schema: &'static str,
    pub chirality: Chirality,
    pub form: String,
    pub cutoffs: Vec<f64>,
    /// `|Tr(G ρ P_Λ |D_A|⁻³)|` per cutoff.
    pub traces: Vec<f64>,
    pub max: f64,
}

/// Window traces of `Gρ|D_A|⁻³` for a base one-form `ρ`.
pub fn orthogonality_check(
    a: &FluctuationA,
    rho: &OneForm,
    w: &TruncatedWindow,
    chirality: Chirality,
    cutoffs: &[f64],
) -> Result<OrthogonalityReport> {
    if a.has_vertical_part() {
        return Err(Error::NonzeroA3);
    }
    if !rho.coefficient(3).is_zero(0.0) {
        return Err(Error::Invalid("orthogonality needs a base one-form (c3 = 0)".into()));
    }
    for j in 1..=2 {
        if !rho.coefficient(j).in_base() {
            return Err(Error::NotInvariant(j));
        }
    }
    let g = match chirality {
        Chirality::Gamma => grading(w),
        Chirality::Sigma1 => pauli_operator(1, w)?,
    };
    let m = g.mul(&rho.represent(w)?)?;
    let sample = SpectralSample::new(a, w, IntegralOperator::Total)?;
    let traces: Vec<f64> = sample
        .partial_traces(&m, 3.0, cutoffs)
        .into_iter()
        .map(|z| z.norm())
        .collect();
    let max = traces.iter().copied().fold(0.0, f64::max);
    Ok(OrthogonalityReport {
        schema: ORTHOGONALITY_SCHEMA,
        chirality,
        form: rho.to_string(),
        cutoffs: cutoffs.to_vec(),
        traces,
        max,
    })
}
