//! Shifted lattice zeta functions `Z(s) = Σ' |n + ε|⁻ˢ` over `ℤᵈ`.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, gamma_ur};

/// `Γ(a, x)`, upper incomplete.
fn upper_gamma(a: f64, x: f64) -> f64 {
    gamma_ur(a, x) * gamma(a)
}

fn lattice(d: usize, radius: i32) -> Vec<Vec<i32>> {
    let mut pts = vec![Vec::new()];
    for _ in 0..d {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (-radius..=radius).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    pts
}

const THETA_RADIUS: i32 = 6;

/// `Z(s)` for `0 < s < d`, `s ≠ d`, by splitting the theta integral at `t = 1`.
///
/// `π^{-s/2}Γ(s/2)Z(s)` is the sum of the incomplete-gamma tails over the
/// direct lattice and over the dual lattice (with phases `e^{2πi m·ε}`), plus
/// `2/(s−d)` and, when `ε ∈ ℤᵈ`, `−2/s`.
pub fn epstein_zeta(d: usize, eps: &[f64], s: f64) -> f64 {
    assert_eq!(eps.len(), d, "shift dimension");
    let pts = lattice(d, THETA_RADIUS);
    let mut total = 0.0;
    let mut integral_shift = true;
    for e in eps {
        if (e - e.round()).abs() > 1e-14 {
            integral_shift = false;
        }
    }
    for n in &pts {
        let r2: f64 = n.iter().zip(eps).map(|(&x, e)| (x as f64 + e).powi(2)).sum();
        if r2 > 1e-24 {
            let x = PI * r2;
            total += upper_gamma(s / 2.0, x) * x.powf(-s / 2.0);
        }
        let m2: f64 = n.iter().map(|&x| (x as f64).powi(2)).sum();
        if m2 > 0.0 {
            let x = PI * m2;
            let phase: f64 = n.iter().zip(eps).map(|(&m, e)| m as f64 * e).sum();
            let a = (d as f64 - s) / 2.0;
            total += (2.0 * PI * phase).cos() * upper_gamma(a, x) * x.powf(-a);
        }
    }
    total += 2.0 / (s - d as f64);
    if integral_shift {
        total -= 2.0 / s;
    }
    total * PI.powf(s / 2.0) / gamma(s / 2.0)
}

/// `Res_{s=d} Z(s)`, from `(s − d)Z(s)` at `s = d − h` extrapolated to
/// `h = 0`.
pub fn epstein_residue(d: usize, eps: &[f64]) -> f64 {
    let hs = [0.1, 0.05, 0.025, 0.0125, 0.00625];
    let ys: Vec<f64> = hs
        .iter()
        .map(|&h| -h * epstein_zeta(d, eps, d as f64 - h))
        .collect();
    *super::integral::neville_to_zero(&hs, &ys).last().expect("nonempty")
}

/// Residue of `Σ' 2|n + ε|⁻ˢ`: both spinor components contribute.
pub fn spinor_residue(d: usize, eps: &[f64]) -> f64 {
    2.0 * epstein_residue(d, eps)
}
