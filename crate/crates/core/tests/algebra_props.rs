use num_complex::Complex64;
use proptest::prelude::*;
use torus_bundle::algebra::{canonical_map, hopf_galois_witness, Exponent, Theta, TorusElement};
use torus_bundle::dirac::{build_dirac, FluctuationA};
use torus_bundle::repr::{represent, SpinStructure, TruncatedWindow};

fn theta() -> impl Strategy<Value = Theta> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b, c)| Theta::new(a, b, c))
}

fn exponent(r: i32) -> impl Strategy<Value = Exponent> {
    [-r..=r, -r..=r, -r..=r]
}

fn coeff() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn element(th: Theta) -> impl Strategy<Value = TorusElement> {
    prop::collection::vec((exponent(2), coeff()), 0..5).prop_map(move |t| TorusElement::from_terms(th, t))
}

fn triple() -> impl Strategy<Value = (TorusElement, TorusElement, TorusElement)> {
    theta().prop_flat_map(|th| (element(th), element(th), element(th)))
}

fn scale(x: &TorusElement) -> f64 {
    1.0 + x.max_abs() * x.len() as f64
}

proptest! {
    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        let l = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let r = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert!(l.distance(&r).unwrap() < 1e-12 * scale(&a) * scale(&b) * scale(&c));
    }

    #[test]
    fn star_is_an_antimultiplicative_involution((a, b, _c) in triple()) {
        prop_assert!(a.star().star().distance(&a).unwrap() < 1e-13 * scale(&a));
        let l = a.multiply(&b).unwrap().star();
        let r = b.star().multiply(&a.star()).unwrap();
        prop_assert!(l.distance(&r).unwrap() < 1e-12 * scale(&a) * scale(&b));
    }

    #[test]
    fn trace_is_tracial_and_positive((a, b, _c) in triple()) {
        let ab = a.multiply(&b).unwrap().trace();
        let ba = b.multiply(&a).unwrap().trace();
        prop_assert!((ab - ba).norm() < 1e-12 * scale(&a) * scale(&b));
        let n = a.star().multiply(&a).unwrap().trace();
        prop_assert!(n.re >= -1e-14 && n.im.abs() < 1e-12 * scale(&a) * scale(&a));
    }

    #[test]
    fn derivations_satisfy_leibniz((a, b, _c) in triple(), j in 1usize..=3) {
        let l = a.multiply(&b).unwrap().derive(j).unwrap();
        let r = a.derive(j).unwrap().multiply(&b).unwrap()
            .checked_add(&a.multiply(&b.derive(j).unwrap()).unwrap()).unwrap();
        prop_assert!(l.distance(&r).unwrap() < 1e-12 * scale(&a) * scale(&b) * 4.0);
    }

    #[test]
    fn star_commutes_with_derivations((a, _b, _c) in triple(), j in 1usize..=3) {
        let l = a.derive(j).unwrap().star();
        let r = a.star().derive(j).unwrap().scale(Complex64::new(-1.0, 0.0));
        // δⱼ(U^n) = nⱼ U^n, so δⱼ(a*) = −δⱼ(a)*.
        prop_assert!(l.distance(&r).unwrap() < 1e-12 * scale(&a) * 4.0);
    }

    #[test]
    fn representation_is_multiplicative_on_interior((a, b, _c) in triple()) {
        let w = TruncatedWindow::new(5, SpinStructure::INTEGRAL, a.theta()).unwrap();
        let pa = represent(&a, &w).unwrap();
        let pb = represent(&b, &w).unwrap();
        let pab = represent(&a.multiply(&b).unwrap(), &w).unwrap();
        let r = pab.interior_residual(&pa.mul(&pb).unwrap(), pa.margin() + pb.margin()).unwrap();
        prop_assert!(r < 1e-12 * scale(&a) * scale(&b));
    }

    #[test]
    fn witness_maps_to_group_element(n in -5i32..=5, th in theta()) {
        let (ap, a) = hopf_galois_witness(th, n).unwrap();
        let img = canonical_map(&ap, &a).unwrap();
        prop_assert_eq!(img.len(), 1);
        prop_assert!(img[&n].approx_eq(&TorusElement::one(th), 1e-12));
    }
}

#[test]
fn free_dirac_has_no_fluctuation() {
    let th = Theta::default();
    let w = TruncatedWindow::new(2, SpinStructure::INTEGRAL, th).unwrap();
    let d = build_dirac(&w);
    let da = torus_bundle::dirac::build_fluctuated(&FluctuationA::zero(th), &w).unwrap();
    assert!(d.sub(&da).unwrap().max_abs() == 0.0);
}
