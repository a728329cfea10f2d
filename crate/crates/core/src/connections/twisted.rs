use num_complex::Complex64;
use serde::Serialize;

use super::calculus::{spinor_sum, DiracCalculus};
use super::connection::{nabla, Connection};
use crate::algebra::{Theta, TorusElement};
use crate::dirac::{decompose, fibre_block, grading, DiracBundleDecomposition};
use crate::linalg::CMatrix;
use crate::repr::{delta_operator, represent_right, MatrixOperator};
use crate::{Error, Result, IDENTITY_TOL};

fn horizontal_right_part(conn: &Connection, dec: &DiracBundleDecomposition) -> Result<MatrixOperator> {
    let w = dec.d_full.window();
    let zero = TorusElement::zero(conn.theta());
    let r = spinor_sum(w, |j| match j {
        1 | 2 => represent_right(conn.horizontal(j), w),
        _ => represent_right(&zero, w),
    })?;
    r.mul(&delta_operator(3, w)?)
}

/// `D_ω = D + Jω*J⁻¹δ − Z`.
///
/// With `Jω*J⁻¹ = −σ³ − σ¹R(ω₁) − σ²R(ω₂)` this is
/// `D_h + (ℓ⁻¹ − 1)Γδ − (σ¹R(ω₁) + σ²R(ω₂))δ`. The hermitian flag is set only
/// for selfadjoint `ω`.
pub fn twisted_dirac(conn: &Connection, dec: &DiracBundleDecomposition) -> Result<MatrixOperator> {
    let w = dec.d_full.window();
    let jws = conn.one_form().j_star_conjugate(w)?;
    let op = dec
        .d_full
        .add(&jws.mul(&delta_operator(3, w)?)?)?
        .sub(&dec.z)?;
    if conn.is_selfadjoint(IDENTITY_TOL) {
        op.mark_hermitian(IDENTITY_TOL)
    } else {
        Ok(op)
    }
}

/// `𝒟_ω = Γδ + D_ω`.
pub fn lifted_dirac(conn: &Connection, dec: &DiracBundleDecomposition) -> Result<MatrixOperator> {
    let w = dec.d_full.window();
    let gd = dec.gamma.mul(&delta_operator(3, w)?)?;
    let op = gd.add(&twisted_dirac(conn, dec)?)?;
    if conn.is_selfadjoint(IDENTITY_TOL) {
        op.mark_hermitian(IDENTITY_TOL)
    } else {
        Ok(op)
    }
}

/// `D_(ω) = D − (σ²Jω₂J⁻¹ + σ¹Jω₁J⁻¹)δ`, where for selfadjoint `ωⱼ` the
/// conjugate `Jπ(ωⱼ)J⁻¹` is `R(ωⱼ)`.
pub fn compatible_dirac(conn: &Connection, dec: &DiracBundleDecomposition) -> Result<MatrixOperator> {
    if !conn.is_selfadjoint(IDENTITY_TOL) {
        return Err(Error::Invalid("compatible Dirac operator needs a selfadjoint connection".into()));
    }
    dec.d_full
        .sub(&horizontal_right_part(conn, dec)?)?
        .mark_hermitian(IDENTITY_TOL)
}

/// `½Γ[Γ, T] = ½(T − ΓTΓ)`.
pub fn horizontal_part(t: &MatrixOperator, gamma: &MatrixOperator) -> Result<MatrixOperator> {
    Ok(t.sub(&gamma.mul(t)?.mul(gamma)?)?.scale(Complex64::new(0.5, 0.0)))
}

/// The fibre-`k` twisted operator built fibre by fibre.
///
/// `V_k = R(U₃ᵏ)` identifies `ℋ₀` with `ℋ_k` position by position, and
/// `D^{(k)}(V_k h) = V_k D₀ h + h·∇_ω(U₃ᵏ)`, where the one-form acts from the
/// right as `Σ σʲ R(xⱼ)`. In fibre-local coordinates this is
/// `D₀ + [Σ σʲ R(xⱼ)]_{k←0}`.
pub fn per_fibre_twisted(
    calc: &DiracCalculus,
    conn: &Connection,
    dec: &DiracBundleDecomposition,
    k: i32,
) -> Result<CMatrix> {
    let w = dec.d_full.window();
    let theta = conn.theta();
    let d0 = fibre_block(&dec.d_h, 0)?;
    let uk = TorusElement::generator_power(theta, 3, k)?;
    let x = nabla(calc, &uk, conn)?;
    let rx = x.represent_right(w)?;
    let rows = w.fibre_range(k)?;
    let cols = w.fibre_range(0)?;
    let n = cols.len();
    let mut block = d0;
    for (c, j) in cols.enumerate() {
        for &(r, z) in rx.column(j) {
            let r = r as usize;
            if rows.contains(&r) {
                block[(r - rows.start, c)] += z;
            }
        }
    }
    debug_assert_eq!(block.ncols(), n);
    Ok(block)
}

/// Largest entrywise difference between the per-fibre and global twisted
/// operators on fibre `k`, over interior columns.
pub fn two_path_residual(
    calc: &DiracCalculus,
    conn: &Connection,
    dec: &DiracBundleDecomposition,
    k: i32,
) -> Result<f64> {
    let global = twisted_dirac(conn, dec)?;
    let g = fibre_block(&global, k)?;
    let p = per_fibre_twisted(calc, conn, dec, k)?;
    let w = dec.d_full.window();
    let margin = global.margin();
    let range = w.fibre_range(k)?;
    let mut worst: f64 = 0.0;
    for (c, j) in range.enumerate() {
        let (site, _) = w.coords(j);
        // Both operators preserve fibres, so only the base directions can
        // lose entries to truncation.
        let interior = (0..2).all(|i| {
            let a = w.axis(i);
            a.value(site[i]).abs() + margin as f64 <= a.vmax()
        });
        if !interior {
            continue;
        }
        for r in 0..g.nrows() {
            worst = worst.max((g[(r, c)] - p[(r, c)]).norm());
        }
    }
    Ok(worst)
}

/// `‖𝒟_ω² − (D_ω² + δ²)‖` over interior columns.
pub fn squared_lift_residual(conn: &Connection, dec: &DiracBundleDecomposition) -> Result<f64> {
    let w = dec.d_full.window();
    let lift = lifted_dirac(conn, dec)?;
    let dw = twisted_dirac(conn, dec)?;
    let delta = delta_operator(3, w)?;
    let lhs = lift.mul(&lift)?;
    let rhs = dw.mul(&dw)?.add(&delta.mul(&delta)?)?;
    let margin = lhs.margin();
    let mut cols = w.interior_indices(margin).peekable();
    if cols.peek().is_none() {
        return Err(Error::Invalid("window too small for the squared-lift check".into()));
    }
    Ok(lhs.sub(&rhs)?.max_abs_on(cols))
}

/// `‖D_(ω)J − JD_(ω)‖`, entrywise.
pub fn reality_defect(t: &MatrixOperator) -> Result<f64> {
    Ok(crate::repr::conjugate_by_j(t)?.sub(t)?.max_abs())
}

/// One grid point of [`compatibility_scan`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub generator: usize,
    pub alpha: f64,
    pub beta: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub zero_count: usize,
    pub minimizer: ScanRow,
    pub unique_zero_at_origin: bool,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("generator,alpha,beta,residual\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{:e}\n", r.generator, r.alpha, r.beta, r.residual));
        }
        s
    }
}

/// The default coefficient grid `{0, ±½, ±1}`.
pub const SCAN_COEFFICIENTS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// For each `ω₁ = αg`, `ω₂ = βg` with `g = (U_i + U_i⁻¹)/2`, `i ∈ {1, 2}`,
/// the largest interior column norm of `D_ω − D_h` for the equivariant `D`.
pub fn compatibility_scan(dec: &DiracBundleDecomposition, coefficients: &[f64]) -> Result<ScanReport> {
    let theta: Theta = dec.d_full.window().theta();
    let mut rows = Vec::new();
    for generator in 1..=2 {
        let mut e = [0, 0, 0];
        e[generator - 1] = 1;
        let g = TorusElement::cosine(theta, e, 1.0);
        for &alpha in coefficients {
            for &beta in coefficients {
                let conn = Connection::new(g.scale(alpha.into()), g.scale(beta.into()))?;
                let diff = twisted_dirac(&conn, dec)?.sub(&dec.d_h)?;
                let margin = diff.margin();
                rows.push(ScanRow {
                    generator,
                    alpha,
                    beta,
                    residual: diff.max_column_norm(margin),
                });
            }
        }
    }
    let zeros: Vec<&ScanRow> = rows.iter().filter(|r| r.residual < IDENTITY_TOL).collect();
    let zero_count = zeros.len();
    let unique_zero_at_origin = zeros.iter().all(|r| r.alpha == 0.0 && r.beta == 0.0) && zero_count > 0;
    let minimizer = rows
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .cloned()
        .ok_or_else(|| Error::Invalid("empty scan grid".into()))?;
    Ok(ScanReport {
        rows,
        zero_count,
        minimizer,
        unique_zero_at_origin,
    })
}

/// Decomposition of the equivariant `D` with `ℓ = 1`.
pub fn equivariant_decomposition(w: &crate::repr::TruncatedWindow) -> Result<DiracBundleDecomposition> {
    decompose(&crate::dirac::build_dirac(w), &grading(w), 1.0)
}
