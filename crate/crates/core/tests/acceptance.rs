//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use torus_bundle::algebra::{
    canonical_map, canonical_map_injectivity, hopf_galois_witness, sample_elements, Theta, TorusElement,
};
use torus_bundle::connections::*;
use torus_bundle::dirac::{axiom_suite, build_fluctuated, decompose, grading, z_commutator_witness, AxiomConfig, FluctuationA};
use torus_bundle::repr::{SpinStructure, TruncatedWindow};
use torus_bundle::spectral::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const IDENT_N: u32 = 8;
const SPEC_N: u32 = 12;

fn theta() -> Theta {
    Theta::default()
}

fn window(n: u32) -> TruncatedWindow {
    TruncatedWindow::new(n, SpinStructure::INTEGRAL, theta()).unwrap()
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn horizontal(axis: usize, c: f64) -> FluctuationA {
    let t = theta();
    let zero = TorusElement::zero(t);
    let mut e = [0, 0, 0];
    e[axis] = 1;
    let x = TorusElement::cosine(t, e, c);
    if axis == 0 {
        FluctuationA::new(x, zero.clone(), zero).unwrap()
    } else {
        FluctuationA::new(zero.clone(), x, zero).unwrap()
    }
}

fn vertical(c: f64) -> FluctuationA {
    let t = theta();
    let zero = TorusElement::zero(t);
    FluctuationA::new(zero.clone(), zero, TorusElement::cosine(t, [1, 0, 0], c)).unwrap()
}

fn axiom_residuals() -> Outcome {
    let w = window(IDENT_N);
    let start = Instant::now();
    let rep = axiom_suite(&FluctuationA::zero(theta()), &w, 1.0, AxiomConfig::default()).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    let wanted = [
        "J^2 = -1",
        "DJ = JD",
        "Gamma J = -J Gamma",
        "Gamma^2 = 1",
        "[Gamma, a] = 0",
        "order one",
        "equivariance",
        "projectability",
    ];
    let mut worst: f64 = 0.0;
    for name in wanted {
        let row = rep.row(name).ok_or(format!("missing row {name}"))?;
        ensure!(!row.skipped, "{name} skipped");
        ensure!(row.pass, "{name}: residual {:e}", row.residual);
        worst = worst.max(row.residual);
    }
    ensure!(rep.all_pass(), "failing rows: {:?}", rep.failures().map(|r| &r.check).collect::<Vec<_>>());
    let rep_a = axiom_suite(&horizontal(0, 0.5), &w, 1.0, AxiomConfig::default()).map_err(err)?;
    ensure!(rep_a.all_pass(), "horizontal A: {:?}", rep_a.failures().map(|r| &r.check).collect::<Vec<_>>());
    ensure!(secs < 60.0, "suite took {secs:.1}s");
    Ok(format!("max residual {worst:.1e}, {secs:.1}s at N={IDENT_N}"))
}

fn decomposition() -> Outcome {
    let w = window(IDENT_N);
    let gamma = grading(&w);
    let mut worst: f64 = 0.0;
    for a in [FluctuationA::zero(theta()), horizontal(1, 0.7)] {
        let dec = decompose(&build_fluctuated(&a, &w).map_err(err)?, &gamma, 1.0).map_err(err)?;
        let r = dec.reassembly_residual().map_err(err)?;
        ensure!(r < 1e-12, "reassembly {r:e}");
        ensure!(dec.z.max_abs() < 1e-12, "Z = {:e} for A3 = 0", dec.z.max_abs());
        worst = worst.max(r);
    }
    let dec = decompose(&build_fluctuated(&vertical(1.0), &w).map_err(err)?, &gamma, 1.0).map_err(err)?;
    ensure!(dec.reassembly_residual().map_err(err)? < 1e-12, "reassembly with A3");
    ensure!(dec.z.max_abs() > 0.1, "Z vanishes for A3 != 0");
    let samples = sample_elements(theta(), false, 4, 7);
    let (_, r) = z_commutator_witness(&dec, &samples)
        .map_err(err)?
        .ok_or("no [Z, pi(a)] witness")?;
    Ok(format!("reassembly {worst:.1e}; A3 != 0 gives |[Z, pi(a)]| = {r:.3}"))
}

fn fibre_relation() -> Outcome {
    let w = window(SPEC_N);
    let mut worst: f64 = 0.0;
    for a in [FluctuationA::zero(theta()), horizontal(0, 0.6)] {
        let d = build_fluctuated(&a, &w).map_err(err)?;
        for ell in [1.0, 2.0] {
            let dec = decompose(&d, &grading(&w), ell).map_err(err)?;
            for k in 0..=5 {
                let r = spectrum_relation_check(&dec, k).map_err(err)?;
                ensure!(r < 1e-9, "k={k} ell={ell}: {r:e}");
                worst = worst.max(r);
            }
        }
    }
    Ok(format!("max mismatch {worst:.1e} over k=0..5, ell in {{1,2}}, N={SPEC_N}"))
}

fn connection_classification() -> Outcome {
    let t = theta();
    let conns = sample_connections(t, 10, 41);
    for c in &conns {
        let rep = is_strong_connection(&c.one_form(), 2).map_err(err)?;
        ensure!(rep.is_strong_connection(), "{rep:?}");
    }
    let zero = TorusElement::zero(t);
    let one = TorusElement::one(t);
    let u1 = TorusElement::generator(t, 1).unwrap();
    let u3 = TorusElement::generator(t, 3).unwrap();
    let controls = [
        OneForm::new(zero.clone(), zero.clone(), one.scale(2.0.into())).unwrap(),
        OneForm::new(u3.clone(), zero.clone(), one.clone()).unwrap(),
        OneForm::new(zero.clone(), zero.clone(), u1).unwrap(),
        OneForm::new(zero.clone(), zero.clone(), zero.clone()).unwrap(),
        OneForm::new(zero.clone(), zero, u3).unwrap(),
    ];
    let mut failed = 0;
    for f in &controls {
        let rep = is_strong_connection(f, 2).map_err(err)?;
        if !rep.invariant || !rep.vertical_field {
            failed += 1;
        }
    }
    ensure!(failed >= 3, "only {failed} controls rejected");
    Ok(format!("{} sampled connections strong; {failed}/{} controls rejected", conns.len(), controls.len()))
}

fn two_path() -> Outcome {
    let w = window(IDENT_N);
    let t = theta();
    let dec = equivariant_decomposition(&w).map_err(err)?;
    let calc = DiracCalculus::free(t);
    let mut worst: f64 = 0.0;
    for conn in sample_connections(t, 5, 43) {
        for k in [-3, -1, 2, 4] {
            let r = two_path_residual(&calc, &conn, &dec, k).map_err(err)?;
            ensure!(r < 1e-12, "k={k}: {r:e}");
            worst = worst.max(r);
        }
    }
    Ok(format!("max entrywise difference {worst:.1e} over 5 connections"))
}

fn compatibility_corollary() -> Outcome {
    let w = window(IDENT_N);
    let dec = equivariant_decomposition(&w).map_err(err)?;
    let scan = compatibility_scan(&dec, &SCAN_COEFFICIENTS).map_err(err)?;
    ensure!(scan.rows.len() == 50, "grid has {} points", scan.rows.len());
    ensure!(scan.unique_zero_at_origin, "zeros: {}", scan.zero_count);
    let second = scan
        .rows
        .iter()
        .filter(|r| r.alpha != 0.0 || r.beta != 0.0)
        .map(|r| r.residual)
        .fold(f64::INFINITY, f64::min);
    let mut worst: f64 = 0.0;
    for conn in sample_connections(w.theta(), 3, 47) {
        let nd = compatible_dirac(&conn, &dec).map_err(err)?;
        let hp = horizontal_part(&nd, &dec.gamma).map_err(err)?;
        let dw = twisted_dirac(&conn, &dec).map_err(err)?;
        let r = hp.interior_residual(&dw, nd.margin().max(dw.margin())).map_err(err)?;
        ensure!(r < 1e-12, "horizontal part differs by {r:e}");
        worst = worst.max(r);
    }
    Ok(format!("unique zero at origin (next smallest {second:.3}); horizontal part residual {worst:.1e}"))
}

fn squared_lift() -> Outcome {
    let w = window(IDENT_N);
    let dec = equivariant_decomposition(&w).map_err(err)?;
    let mut worst: f64 = 0.0;
    for conn in sample_connections(w.theta(), 5, 53) {
        let r = squared_lift_residual(&conn, &dec).map_err(err)?;
        ensure!(r < 1e-10, "{r:e}");
        worst = worst.max(r);
    }
    Ok(format!("max residual {worst:.1e}"))
}

fn integrals() -> Outcome {
    let t = theta();
    let w = window(SPEC_N);
    let cfg = IntegralConfig::default();
    let zero = TorusElement::zero(t);
    let fluct = [FluctuationA::zero(t), horizontal(0, 0.5), horizontal(1, 0.8)];

    // (a) orthogonality
    let cutoffs: Vec<f64> = (2..=10).map(f64::from).collect();
    let forms = [
        OneForm::new(TorusElement::one(t), zero.clone(), zero.clone()).unwrap(),
        OneForm::new(zero.clone(), TorusElement::cosine(t, [0, 1, 0], 1.0), zero.clone()).unwrap(),
    ];
    let mut ortho: f64 = 0.0;
    for a in &fluct {
        for rho in &forms {
            let rep = orthogonality_check(a, rho, &w, Chirality::Gamma, &cutoffs).map_err(err)?;
            ensure!(rep.max < 1e-12, "(a) {rho}: {:e}", rep.max);
            ortho = ortho.max(rep.max);
        }
    }
    let control = orthogonality_check(&fluct[0], &forms[0], &w, Chirality::Sigma1, &cutoffs).map_err(err)?;
    ensure!(control.traces.iter().all(|&x| x > 1e-3), "(a) sigma1 control vanished");

    // (b) oracles
    let one = TorusElement::one(t);
    let total = SpectralSample::new(&fluct[0], &w, IntegralOperator::Total).map_err(err)?;
    let base = SpectralSample::new(&fluct[0], &w, IntegralOperator::Base).map_err(err)?;
    let left = total.integral(&one, 3, &cfg).map_err(err)?;
    let right = base.integral(&one, 2, &cfg).map_err(err)?;
    for est in [&left, &right] {
        let rel = (est.value - est.oracle).abs() / est.oracle;
        ensure!(rel < 0.05, "(b) {}: {} vs oracle {}", est.operator, est.value, est.oracle);
    }

    // (c) A-independence
    for a in &fluct[1..] {
        let rep = fibre_length_check(a, &w, &cfg).map_err(err)?;
        let row = &rep.rows[0];
        ensure!(row.a_independent, "(c) {} +- {} vs {} +- {}", row.left.value, row.left.uncertainty, row.left_free.value, row.left_free.uncertainty);
    }

    // (d) trace-zero integrands
    let mut tz: f64 = 0.0;
    let integrands = [
        TorusElement::monomial(t, [1, 0, 0], Complex64::new(1.0, 0.0)),
        TorusElement::cosine(t, [1, 0, 0], 1.0),
        TorusElement::cosine(t, [0, 1, 0], 1.0),
    ];
    for a in &fluct {
        for op in [IntegralOperator::Total, IntegralOperator::Base] {
            let sample = SpectralSample::new(a, &w, op).map_err(err)?;
            for b in &integrands {
                let est = sample.integral(b, op.expected_power(), &cfg).map_err(err)?;
                let m = est.partial_sums.iter().fold(est.value.abs().max(est.imag.abs()), |m, s| m.max(s.abs()));
                ensure!(m < 1e-12, "(d) {b} on {}: {m:e}", est.operator);
                tz = tz.max(m);
            }
        }
    }
    Ok(format!(
        "(a) {ortho:.1e} (b) {:.3}/{:.3} and {:.3}/{:.3} (c) ok (d) {tz:.1e}; reported ratio {:.3}",
        left.value,
        left.oracle,
        right.value,
        right.oracle,
        left.value / right.value
    ))
}

fn hopf_galois() -> Outcome {
    let t = theta();
    for n in -5..=5 {
        let (ap, a) = hopf_galois_witness(t, n).map_err(err)?;
        let img = canonical_map(&ap, &a).map_err(err)?;
        ensure!(img.len() == 1 && img.get(&n).is_some_and(|x| x.approx_eq(&TorusElement::one(t), 1e-14)), "witness {n}");
    }
    let rep = canonical_map_injectivity(t, 3);
    ensure!(rep.injective, "rank {} of {}", rep.rank, rep.columns);
    Ok(format!("witnesses |n| <= 5; rank {} = {} columns", rep.rank, rep.columns))
}

fn hermitian_lemma() -> Outcome {
    let t = theta();
    let w = window(IDENT_N);
    let calc = DiracCalculus::free(t);
    let d = torus_bundle::dirac::build_dirac(&w);
    let mut worst: f64 = 0.0;
    for conn in sample_connections(t, 3, 59) {
        for k in [1, 2] {
            let rep = hermitian_check(&calc, &conn, &d, k).map_err(err)?;
            ensure!(rep.hermitian(), "selfadjoint connection: {:e}", rep.max_residual);
            worst = worst.max(rep.max_residual);
        }
    }
    let x = TorusElement::monomial(t, [0, 1, 0], Complex64::new(0.3, 0.8));
    let nsa = Connection::new(x, TorusElement::cosine(t, [1, 0, 0], 1.0)).map_err(err)?;
    let rep = hermitian_check(&calc, &nsa, &d, 2).map_err(err)?;
    ensure!(rep.max_residual > 1e-3, "control defect vanished");
    ensure!(rep.closed_form_mismatch < 1e-12, "closed form mismatch {:e}", rep.closed_form_mismatch);
    Ok(format!(
        "selfadjoint residual {worst:.1e}; control defect {:.3} matches closed form to {:.1e}",
        rep.max_residual, rep.closed_form_mismatch
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("axiom suite", axiom_residuals),
        ("decomposition", decomposition),
        ("fibre spectrum relation", fibre_relation),
        ("connection classification", connection_classification),
        ("two-path twisted Dirac", two_path),
        ("compatibility corollary", compatibility_corollary),
        ("squared lift", squared_lift),
        ("noncommutative integrals", integrals),
        ("Hopf-Galois", hopf_galois),
        ("hermitian connection lemma", hermitian_lemma),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let start = Instant::now();
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} {name}: PASS ({msg}) [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({msg}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {failed} failed, {:.1}s total", start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
