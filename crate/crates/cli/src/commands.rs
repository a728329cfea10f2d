use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};
use torus_bundle::algebra::{
    canonical_map, canonical_map_injectivity, hopf_galois_witness, kernel_image_check, sample_elements,
    sample_kernel_elements, TorusElement,
};
use torus_bundle::connections::{
    compatibility_scan, compatible_dirac, find_compatibility_counterexample, hermitian_check,
    horizontal_part, is_strong_connection_for, squared_lift_residual, twisted_dirac, two_path_residual,
    DiracCalculus, OneForm, ScanReport, SCAN_COEFFICIENTS,
};
use torus_bundle::dirac::{
    axiom_suite, base_triple, build_dirac, build_fluctuated, decompose, grading, projectability_report,
    z_commutator_witness, AxiomConfig,
};
use torus_bundle::report::AxiomReport;
use torus_bundle::spectral::{
    fibre_length_check, lifted_relation_check, orthogonality_check, spectral_report, spectrum_relation_check,
    Chirality, IntegralConfig, IntegralEstimate, IntegralOperator, SpectralSample, WindowMeta,
};
use torus_bundle::{EIGEN_TOL, IDENTITY_TOL};

use crate::config::{ExperimentConfig, Format};

/// A rendered report and whether every check in it passed.
pub struct Outcome {
    pub body: String,
    pub pass: bool,
    pub failures: Vec<String>,
}

impl Outcome {
    fn json(mut v: Value, failures: Vec<String>) -> anyhow::Result<Self> {
        let pass = failures.is_empty();
        v["pass"] = json!(pass);
        let mut body = serde_json::to_string_pretty(&v)?;
        body.push('\n');
        Ok(Outcome { body, pass, failures })
    }
}

fn failing_anchors(rep: &AxiomReport) -> Vec<String> {
    rep.failures().map(|r| format!("{} [{}]", r.check, r.anchor)).collect()
}

fn axiom_cfg(c: &ExperimentConfig) -> AxiomConfig {
    AxiomConfig {
        seed: c.seed,
        random_samples: c.random_samples,
    }
}

fn calculus(c: &ExperimentConfig) -> anyhow::Result<DiracCalculus> {
    let a = c.fluctuation()?;
    Ok(if a.is_zero() {
        DiracCalculus::free(c.theta)
    } else {
        DiracCalculus::fluctuated(&a)
    })
}

pub fn verify_axioms(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let w = c.window()?;
    let a = c.fluctuation()?;
    let mut rep = axiom_suite(&a, &w, c.ell, axiom_cfg(c))?;
    let calc = calculus(c)?;
    let cx = find_compatibility_counterexample(&calc, 2.min(c.degree))?;
    let vertical = cx.as_ref().map_or(0.0, |x| x.vertical.max_abs());
    rep.push(
        "calculus compatibility",
        "sum p[D, q] = 0 => sum p delta(q) = 0",
        vertical,
        1e-9,
    );
    let mut v = rep.to_json();
    v["window"] = serde_json::to_value(WindowMeta::of(&w))?;
    v["ell"] = json!(c.ell);
    v["seed"] = json!(c.seed);
    v["compatibility_counterexample"] = match cx {
        Some(x) => json!({
            "pairs": x.pairs.iter().map(|(p, q)| json!([p.to_string(), q.to_string()])).collect::<Vec<_>>(),
            "one_form_residual": x.one_form_residual,
            "vertical": x.vertical.to_string(),
        }),
        None => Value::Null,
    };
    Outcome::json(v, failing_anchors(&rep))
}

pub fn decompose_cmd(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let w = c.window()?;
    let a = c.fluctuation()?;
    let gamma = grading(&w);
    let dec = decompose(&build_fluctuated(&a, &w)?, &gamma, c.ell)?;
    let mut rep = AxiomReport::new();
    rep.push("reassembly", "D = D_h + D_v + Z", dec.reassembly_residual()?, IDENTITY_TOL);
    let samples = sample_elements(c.theta, false, c.random_samples, c.seed);
    let base = sample_elements(c.theta, true, c.random_samples, c.seed.wrapping_add(1));
    rep.extend(projectability_report(&dec, &base, &samples)?);
    let bt = base_triple(&dec, 0)?;
    rep.push("base grading", "gamma_0 D_0 = -D_0 gamma_0", bt.grading_residual(), IDENTITY_TOL);
    rep.push_opt("base reality", "j_0 D_0 = D_0 j_0", bt.reality_residual(), IDENTITY_TOL);
    rep.push_opt("base j grading", "j_0 gamma_0 = -gamma_0 j_0", bt.j_grading_residual(), IDENTITY_TOL);
    rep.push_opt("base j square", "j_0^2 = -1", bt.j_square_residual(), IDENTITY_TOL);
    let witness = z_commutator_witness(&dec, &samples)?;
    let v = json!({
        "schema": "torus-bundle/decomposition/v1",
        "window": WindowMeta::of(&w),
        "ell": c.ell,
        "seed": c.seed,
        "norms": {
            "d_h": dec.d_h.max_abs(),
            "d_v": dec.d_v.max_abs(),
            "z": dec.z.max_abs(),
        },
        "z_witness": witness.map(|(b, r)| json!({"element": b.to_string(), "residual": r})),
        "rows": rep.rows,
    });
    Outcome::json(v, failing_anchors(&rep))
}

#[derive(Serialize)]
struct RelationRow {
    k: i32,
    mismatch: f64,
}

pub fn spectrum(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let w = c.window()?;
    let a = c.fluctuation()?;
    let conn = c.connection()?;
    let d = build_fluctuated(&a, &w)?;
    let fibres = c.fibres();
    let rep = spectral_report("D_A", &d, &fibres)?;
    let dec = decompose(&d, &grading(&w), c.ell)?;
    let mut failures = Vec::new();
    if rep.residual_bound > 1e-10 {
        failures.push(format!("eigensolver backward error {:e}", rep.residual_bound));
    }
    let mut relation = Vec::new();
    for &k in &fibres {
        let m = spectrum_relation_check(&dec, k)?;
        if m >= EIGEN_TOL {
            failures.push(format!("fibre relation at k={k} [|spec(D_h + D_v)| = sqrt(k^2/ell^2 + lambda^2)]"));
        }
        relation.push(RelationRow { k, mismatch: m });
    }
    // The lift needs the equivariant operator with unit fibre length.
    let twisted = !(conn.horizontal(1).is_empty() && conn.horizontal(2).is_empty());
    let lifted = if twisted && a.is_zero() && c.ell == 1.0 {
        let mut rows = Vec::new();
        for &k in &fibres {
            let m = lifted_relation_check(&conn, &dec, k)?;
            if m >= EIGEN_TOL {
                failures.push(format!("lifted relation at k={k} [|spec(lifted)| = sqrt(k^2 + mu^2)]"));
            }
            rows.push(RelationRow { k, mismatch: m });
        }
        Some(rows)
    } else {
        None
    };
    let v = json!({
        "schema": "torus-bundle/spectrum/v1",
        "spectrum": rep,
        "ell": c.ell,
        "relation": relation,
        "lifted_relation": lifted,
    });
    Outcome::json(v, failures)
}

pub fn connection_scan(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let w = c.window()?;
    let dec = decompose(&build_dirac(&w), &grading(&w), c.ell)?;
    let scan = compatibility_scan(&dec, &SCAN_COEFFICIENTS)?;
    let mut failures = Vec::new();
    // With no interior columns every residual is an empty maximum.
    let degenerate = scan.rows.iter().all(|r| r.residual == 0.0);
    if degenerate {
        eprintln!("skipped: window {} has no interior columns for the scan", c.window);
    } else if !scan.unique_zero_at_origin {
        failures.push(format!(
            "scan zero set [D_omega = D_h iff omega = sigma3]: {} zeros",
            scan.zero_count
        ));
    }
    if c.format == Format::Csv {
        return Ok(Outcome {
            body: scan_csv(&scan)?,
            pass: failures.is_empty(),
            failures,
        });
    }
    let conn = c.connection()?;
    let calc = DiracCalculus::free(c.theta);
    let strong = is_strong_connection_for(&calc, &conn.one_form(), 2)?;
    if !strong.is_strong_connection() {
        failures.push("strong connection [vertical field, invariance, strongness]".into());
    }
    let mut checks = AxiomReport::new();
    if conn.is_selfadjoint(IDENTITY_TOL) {
        let mut two_path: f64 = 0.0;
        for k in [-2, -1, 1, 2] {
            if w.fibre_range(k).is_ok() {
                two_path = two_path.max(two_path_residual(&calc, &conn, &dec, k)?);
            }
        }
        checks.push("two-path", "per-fibre D^(k) = D + J w* J^-1 delta - Z", two_path, IDENTITY_TOL);
        match squared_lift_residual(&conn, &dec) {
            Ok(r) => checks.push("squared lift", "lifted^2 = D_w^2 + delta^2", r, 1e-10),
            Err(_) => checks.skip("squared lift", "lifted^2 = D_w^2 + delta^2", 1e-10),
        }
        let nd = compatible_dirac(&conn, &dec)?;
        let hp = horizontal_part(&nd, &dec.gamma)?;
        let dw = twisted_dirac(&conn, &dec)?;
        let r = hp.interior_residual(&dw, nd.margin().max(dw.margin()))?;
        checks.push("compatible horizontal part", "(D_(w))_h = D_w", r, IDENTITY_TOL);
    }
    let herm = hermitian_check(&calc, &conn, &build_dirac(&w), 1)?;
    if conn.is_selfadjoint(IDENTITY_TOL) {
        checks.push("hermitian", "h(nabla m2, m1) - h(m2, nabla m1) = h[D, m2 m1*]", herm.max_residual, IDENTITY_TOL);
    }
    checks.push(
        "hermitian closed form",
        "defect = sum s_j R(k a2 (w_j* - w_j) a1*)",
        herm.closed_form_mismatch,
        IDENTITY_TOL,
    );
    failures.extend(failing_anchors(&checks));
    let v = json!({
        "schema": "torus-bundle/connection-scan/v1",
        "window": WindowMeta::of(&w),
        "ell": c.ell,
        "scan": scan,
        "scan_skipped": degenerate,
        "connection": {
            "omega1": conn.horizontal(1).to_string(),
            "omega2": conn.horizontal(2).to_string(),
            "strongness": strong,
            "hermitian": herm,
            "rows": checks.rows,
        },
    });
    Outcome::json(v, failures)
}

fn scan_csv(scan: &ScanReport) -> anyhow::Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["schema", "generator", "alpha", "beta", "residual"])?;
    for r in &scan.rows {
        wtr.write_record([
            "torus-bundle/connection-scan-csv/v1".to_string(),
            r.generator.to_string(),
            r.alpha.to_string(),
            r.beta.to_string(),
            format!("{:e}", r.residual),
        ])?;
    }
    Ok(String::from_utf8(wtr.into_inner()?)?)
}

fn integral_csv(est: &IntegralEstimate) -> anyhow::Result<String> {
    let text = est.to_csv();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["schema", "cutoff", "partial_sum", "extrapolant", "uncertainty"])?;
    for rec in rdr.records() {
        let rec = rec?;
        let mut row = vec!["torus-bundle/integral-csv/v1".to_string()];
        row.extend(rec.iter().map(str::to_string));
        wtr.write_record(row)?;
    }
    Ok(String::from_utf8(wtr.into_inner()?)?)
}

pub fn nc_integral(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let w = c.window()?;
    let a = c.fluctuation()?;
    let b = c.integrand()?;
    let op: IntegralOperator = c.operator.into();
    let cfg = IntegralConfig::for_window(c.window);
    cfg.validate().context("window too small for residue extrapolation")?;
    let est = SpectralSample::new(&a, &w, op)?.integral(&b, op.expected_power(), &cfg)?;
    let mut failures = Vec::new();
    if b.trace().norm() > 0.0 {
        if (est.value - est.oracle).abs() > 0.05 * est.oracle.abs() {
            failures.push(format!("residue {} vs oracle {} [zeta residue]", est.value, est.oracle));
        }
    } else if est.value.abs().max(est.imag.abs()) > est.uncertainty.max(IDENTITY_TOL) {
        failures.push("trace-zero integrand [tau(b) = 0 => integral 0]".into());
    }
    if c.format == Format::Csv {
        return Ok(Outcome {
            body: integral_csv(&est)?,
            pass: failures.is_empty(),
            failures,
        });
    }
    let (fibre_length, orthogonality) = if a.has_vertical_part() {
        (Value::Null, Value::Null)
    } else {
        let fl = fibre_length_check(&a, &w, &cfg)?;
        if !fl.ratio_matches_oracle {
            failures.push("fibre length ratio [left/right vs zeta residue ratio]".into());
        }
        if !fl.rows[0].a_independent {
            failures.push("A-independence of the left integral".into());
        }
        let zero = TorusElement::zero(c.theta);
        let forms = [
            OneForm::new(TorusElement::one(c.theta), zero.clone(), zero.clone())?,
            OneForm::new(zero.clone(), TorusElement::cosine(c.theta, [0, 1, 0], 1.0), zero)?,
        ];
        let cutoffs: Vec<f64> = (2..=(c.window as i32 * 5 / 6).max(2)).map(f64::from).collect();
        let mut reports = Vec::new();
        for rho in &forms {
            let r = orthogonality_check(&a, rho, &w, Chirality::Gamma, &cutoffs)?;
            if r.max >= IDENTITY_TOL {
                failures.push(format!("orthogonality for {rho} [Tr(Gamma rho |D_A|^-3) = 0]"));
            }
            reports.push(r);
        }
        reports.push(orthogonality_check(&a, &forms[0], &w, Chirality::Sigma1, &cutoffs)?);
        (serde_json::to_value(fl)?, serde_json::to_value(reports)?)
    };
    let v = json!({
        "schema": "torus-bundle/nc-integral/v1",
        "window": WindowMeta::of(&w),
        "estimate": est,
        "fibre_length": fibre_length,
        "orthogonality": orthogonality,
    });
    Outcome::json(v, failures)
}

pub fn hopf_galois(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let one = TorusElement::one(c.theta);
    let mut failures = Vec::new();
    let mut witnesses = Vec::new();
    for n in -5..=5 {
        let ok = match hopf_galois_witness(c.theta, n) {
            Ok((ap, a)) => {
                let img = canonical_map(&ap, &a)?;
                img.len() == 1 && img.get(&n).is_some_and(|x| x.approx_eq(&one, 1e-14))
            }
            Err(_) => false,
        };
        if !ok {
            failures.push(format!("witness n={n} [chi(U3^-n (x) U3^n) = 1 (x) z^n]"));
        }
        witnesses.push(json!({"n": n, "ok": ok}));
    }
    let inj = canonical_map_injectivity(c.theta, c.degree);
    if !inj.injective {
        failures.push("injectivity [chi full rank on truncation]".into());
    }
    let samples = sample_kernel_elements(c.theta, 2.min(c.degree), 6, c.seed);
    let mut kernel_ok = true;
    for pairs in &samples {
        kernel_ok &= kernel_image_check(pairs)?;
    }
    if !kernel_ok {
        failures.push("kernel image [ker m maps to ker of the vertical part]".into());
    }
    let v = json!({
        "schema": "torus-bundle/hopf-galois/v1",
        "theta": c.theta,
        "seed": c.seed,
        "witnesses": witnesses,
        "injectivity": inj,
        "kernel_image": {"samples": samples.len(), "ok": kernel_ok},
    });
    Outcome::json(v, failures)
}
