//! Browser bindings. Every function returns a JSON document with a `schema`
//! field, or throws a string on invalid input.

use serde_json::json;
use torus_bundle::algebra::{Theta, TorusElement};
use torus_bundle::connections::{compatibility_scan, equivariant_decomposition, twisted_dirac, Connection, SCAN_COEFFICIENTS};
use torus_bundle::dirac::FluctuationA;
use torus_bundle::repr::{SpinStructure, TruncatedWindow};
use torus_bundle::spectral::{fibre_spectrum, IntegralConfig, IntegralOperator, SpectralSample};
use wasm_bindgen::prelude::*;

type JsResult = Result<String, JsValue>;

fn fail(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn window(n: u32, theta: Theta) -> Result<TruncatedWindow, JsValue> {
    if !(1..=16).contains(&n) {
        return Err(fail(format!("window {n} outside 1..=16")));
    }
    TruncatedWindow::new(n, SpinStructure::INTEGRAL, theta).map_err(fail)
}

/// Eigenvalues of the twisted operator `D_ω` on fibre `k` for
/// `ω₁ = α cos U₁`, `ω₂ = β cos U₂`.
#[wasm_bindgen]
pub fn twisted_fibre_spectrum(n: u32, k: i32, alpha: f64, beta: f64, theta21: f64) -> JsResult {
    let th = Theta::new(theta21, 0.0, 0.0);
    let w = window(n, th)?;
    let dec = equivariant_decomposition(&w).map_err(fail)?;
    let conn = Connection::new(
        TorusElement::cosine(th, [1, 0, 0], alpha),
        TorusElement::cosine(th, [0, 1, 0], beta),
    )
    .map_err(fail)?;
    let d = twisted_dirac(&conn, &dec).map_err(fail)?;
    let spec = fibre_spectrum(&d, k).map_err(fail)?;
    Ok(json!({
        "schema": "torus-bundle/web-twisted-spectrum/v1",
        "window": n,
        "k": k,
        "alpha": alpha,
        "beta": beta,
        "eigenvalues": spec,
    })
    .to_string())
}

/// The `D_ω − D_h` residual grid over `{0, ±½, ±1}²` for both generators.
#[wasm_bindgen]
pub fn connection_scan(n: u32) -> JsResult {
    let w = window(n, Theta::default())?;
    let dec = equivariant_decomposition(&w).map_err(fail)?;
    let scan = compatibility_scan(&dec, &SCAN_COEFFICIENTS).map_err(fail)?;
    Ok(json!({"schema": "torus-bundle/web-connection-scan/v1", "window": n, "scan": scan}).to_string())
}

/// Partial traces of `π(1)|D_A|^{-p}` against the cutoff, with the residue
/// estimate, for `A₁ = a cos U₂`.
#[wasm_bindgen]
pub fn partial_sums(n: u32, base: bool, a: f64) -> JsResult {
    let th = Theta::default();
    let w = window(n, th)?;
    let zero = TorusElement::zero(th);
    let fl = FluctuationA::new(TorusElement::cosine(th, [0, 1, 0], a), zero.clone(), zero).map_err(fail)?;
    let op = if base { IntegralOperator::Base } else { IntegralOperator::Total };
    let cfg = IntegralConfig::for_window(n);
    cfg.validate().map_err(fail)?;
    let est = SpectralSample::new(&fl, &w, op)
        .and_then(|s| s.integral(&TorusElement::one(th), op.expected_power(), &cfg))
        .map_err(fail)?;
    Ok(json!({"schema": "torus-bundle/web-partial-sums/v1", "window": n, "estimate": est}).to_string())
}
