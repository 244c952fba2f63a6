//! Böttcher coordinates `φ^±` on `V_R^±`.
//!
//! Forward, with `y_{n+1} = c_H y_n^d (1 + ε_n)`, the telescoping product
//! `c_H^{-1/(d-1)} y Π_n (y_{n+1}^{1/d^{n+1}} / y_n^{1/d^n})` collapses to
//! `y · exp(Σ_n d^{-(n+1)} Log(1 + ε_n))` once the principal roots of `c_H`
//! are summed against the prefactor. Every `ε_n` is checked against the
//! branch condition `|ε_n| < 1` before its principal logarithm is taken.

use num_complex::Complex64;

use crate::dynamics::{in_region, lead, EscapeClass, GreenValue};
use crate::error::{Error, Result};
use crate::henon::{Direction, HenonMap, Point2};

const MAX_STEPS: u32 = 10_000;

/// A Böttcher evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BottcherValue {
    pub value: Complex64,
    /// Bound on `|φ_true / value - 1|`.
    pub error_bound: f64,
    pub iterations: u32,
    /// `Σ d^{-(n+1)} Log(1 + ε_n)`, so that `value = lead · exp(log_correction)`.
    pub log_correction: Complex64,
}

/// `φ^+` (forward) or `φ^-` (backward) at `z ∈ V_R^±`, relative error at most `tol`.
pub fn bottcher(map: &HenonMap, z: Point2, dir: Direction, tol: f64) -> Result<BottcherValue> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("bottcher needs tol > 0".into()));
    }
    if !in_region(z, map.radius(), dir) {
        return Err(Error::NotInFiltration);
    }
    let d = map.degree() as f64;
    let c = map.lead_coeff(dir).norm();
    let one = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::default();
    let mut w = z;
    let mut n: u32 = 0;
    loop {
        let eps = map.eps(dir, w);
        if !(eps.norm() < 1.0) {
            return Err(Error::BranchDomainViolation {
                step: n,
                modulus: eps.norm(),
            });
        }
        sum += (one + eps).ln() * d.powi(-(n as i32 + 1));
        n += 1;
        let value = lead(z, dir) * sum.exp();

        let next = map.step(w, dir);
        let bound = match &next {
            Ok(next) => {
                // tail Σ_{j>=n} d^{-(j+1)} |Log(1+ε_j)| <= 4 d^{-(n+1)} B(|lead_n|)
                let u = lead(*next, dir).norm();
                let b = map.eps_bound(dir, u);
                if b <= 0.5 && c * u.powi(map.degree() as i32 - 1) >= 2.0 {
                    (4.0 * b * d.powi(-(n as i32 + 1))).exp_m1()
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        };
        if bound <= tol {
            return Ok(BottcherValue {
                value,
                error_bound: bound,
                iterations: n,
                log_correction: sum,
            });
        }
        match next {
            Ok(next) if n < MAX_STEPS => w = next,
            _ => {
                return Err(Error::ToleranceUnreachable {
                    value: value.norm(),
                    error_bound: bound,
                    tol,
                })
            }
        }
    }
}

/// `log|φ^±| + log|c|/(d-1)`, with `c = c_H` forward and `c'_H` backward.
pub fn green_via_bottcher(
    map: &HenonMap,
    z: Point2,
    dir: Direction,
    tol: f64,
) -> Result<GreenValue> {
    let phi = bottcher(map, z, dir, tol)?;
    let d = map.degree() as f64;
    let offset = map.lead_coeff(dir).norm().ln() / (d - 1.0);
    Ok(GreenValue {
        value: (phi.value.norm().ln() + offset).max(0.0),
        error_bound: phi.error_bound.ln_1p(),
        iterations: phi.iterations,
        class: EscapeClass::Escaping(0),
    })
}
