//! One-variable polynomial dynamics: escape classification, Green's
//! functions and the relation `P∘Q = σ∘Q∘P` with `σ(z) = az + b`, `|a| = 1`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::dynamics::{EscapeClass, GreenValue, MODULUS_GUARD};
use crate::error::{Error, Result};
use crate::poly::{format_complex, UniPoly, SYMBOLIC_TOL};

const CERTIFY_SAMPLES: usize = 256;
const RADIUS_DOUBLINGS: u32 = 40;

/// Iteration budget used by [`green_1d`].
pub const DEFAULT_MAX_ITER_1D: u32 = 1000;

/// A polynomial of degree at least 2 with a certified escape radius.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap1D {
    p: UniPoly,
    escape_radius: f64,
}

impl PolyMap1D {
    /// Escape radius `max(2, (2 + Σ|lower|)/|lead|)`, doubled until `|p(z)| >= 2|z|`
    /// holds on sampled points of the circle.
    pub fn new(p: UniPoly) -> Result<Self> {
        let lead = match (p.degree(), p.leading()) {
            (Some(d), Some(c)) if d >= 2 => c,
            _ => {
                return Err(Error::Precondition(format!(
                    "one-variable map needs degree >= 2, got {:?}",
                    p.degree()
                )))
            }
        };
        let mut r = f64::max(2.0, (2.0 + p.lower_coeff_sum()) / lead.norm());
        for _ in 0..RADIUS_DOUBLINGS {
            if certify(&p, r) {
                return Ok(PolyMap1D { p, escape_radius: r });
            }
            r *= 2.0;
        }
        Err(Error::RadiusSearchFailed { cap: r })
    }

    pub fn p(&self) -> &UniPoly {
        &self.p
    }

    pub fn escape_radius(&self) -> f64 {
        self.escape_radius
    }

    pub fn degree(&self) -> u32 {
        self.p.degree().unwrap_or(0) as u32
    }

    /// `Σ_{k<d} |a_k| u^{k-d} / |a_d|`, the bound on `|P(z)/(a_d z^d) - 1|` for `|z| = u`.
    fn eps_bound(&self, u: f64) -> f64 {
        let c = self.p.coeffs();
        let d = c.len() - 1;
        let lead = c[d].norm();
        c[..d]
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm() * u.powi(k as i32 - d as i32))
            .sum::<f64>()
            / lead
    }
}

fn certify(p: &UniPoly, r: f64) -> bool {
    (0..CERTIFY_SAMPLES).all(|k| {
        let z = Complex64::from_polar(r, TAU * k as f64 / CERTIFY_SAMPLES as f64);
        p.eval(z).norm() >= 2.0 * r * (1.0 - 1e-12)
    })
}

/// Escaping once an iterate reaches the escape radius.
pub fn classify_1d(map: &PolyMap1D, z: Complex64, max_iter: u32) -> Result<EscapeClass> {
    if max_iter < 1 {
        return Err(Error::Precondition("classify_1d needs N >= 1".into()));
    }
    let mut w = z;
    for n in 0..=max_iter {
        if !(w.norm() < map.escape_radius) {
            return Ok(EscapeClass::Escaping(n));
        }
        if n < max_iter {
            w = map.p.eval(w);
        }
    }
    Ok(EscapeClass::BoundedSoFar(max_iter))
}

/// Green's function of the basin of infinity with [`DEFAULT_MAX_ITER_1D`].
pub fn green_1d(map: &PolyMap1D, z: Complex64, tol: f64) -> Result<GreenValue> {
    green_1d_with(map, z, tol, DEFAULT_MAX_ITER_1D)
}

/// `g(z) = lim d^{-n} log|P^n(z)|`. Past the escape radius the value is taken
/// as `d^{-k}(log|z_k| + log|a|/(d-1))` with tail at most `4 B(|z_k|) d^{-(k+1)}`.
pub fn green_1d_with(map: &PolyMap1D, z: Complex64, tol: f64, max_iter: u32) -> Result<GreenValue> {
    if !(tol >= 1e-12) {
        return Err(Error::Precondition("green_1d needs tol >= 1e-12".into()));
    }
    let class = classify_1d(map, z, max_iter)?;
    let d = map.degree() as f64;
    let kappa = map.p.leading().unwrap_or_default().norm().ln() / (d - 1.0);
    let n0 = match class {
        EscapeClass::BoundedSoFar(n) => {
            // g <= sup over |w| = R of g on the disk, pulled back n steps
            let r = map.escape_radius;
            let sup = r.ln() + kappa.abs() + 4.0 * map.eps_bound(r) / d;
            return Ok(GreenValue {
                value: 0.0,
                error_bound: sup * d.powi(-(n as i32)),
                iterations: n,
                class,
            });
        }
        EscapeClass::Escaping(n) => n,
    };
    let mut w = z;
    for _ in 0..n0 {
        w = map.p.eval(w);
    }
    let mut k = n0;
    loop {
        let u = w.norm();
        let b = map.eps_bound(u);
        let bound = if b <= 0.5 {
            4.0 * b * d.powi(-(k as i32 + 1))
        } else {
            f64::INFINITY
        };
        let value = (d.powi(-(k as i32)) * (u.ln() + kappa)).max(0.0);
        if bound <= tol {
            return Ok(GreenValue {
                value,
                error_bound: bound,
                iterations: k,
                class,
            });
        }
        let next = map.p.eval(w);
        if !(u <= MODULUS_GUARD) || !next.norm().is_finite() {
            return Err(Error::ToleranceUnreachable {
                value,
                error_bound: bound,
                tol,
            });
        }
        w = next;
        k += 1;
    }
}

/// `σ(z) = a z + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine1D {
    pub a: Complex64,
    pub b: Complex64,
}

impl Affine1D {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b
    }

    pub fn as_poly(&self) -> UniPoly {
        UniPoly::new(vec![self.b, self.a])
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        (self.a - Complex64::new(1.0, 0.0)).norm() <= tol && self.b.norm() <= tol
    }
}

impl fmt::Display for Affine1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z -> {}*z + {}", format_complex(self.a), format_complex(self.b))
    }
}

/// Largest coefficient mismatch of `lhs - σ∘rhs`.
pub fn sigma_residual(lhs: &UniPoly, rhs: &UniPoly, sigma: &Affine1D) -> f64 {
    let composed = sigma.as_poly().compose(rhs);
    let n = lhs.coeffs().len().max(composed.coeffs().len());
    let zero = Complex64::default();
    (0..n)
        .map(|k| {
            let a = lhs.coeffs().get(k).copied().unwrap_or(zero);
            let b = composed.coeffs().get(k).copied().unwrap_or(zero);
            (a - b).norm()
        })
        .fold(0.0, f64::max)
}

/// `σ` with `P∘Q = σ∘Q∘P` and `|a| = 1`, if the identity holds coefficient-wise.
pub fn beardon_sigma(p: &PolyMap1D, q: &PolyMap1D) -> Option<Affine1D> {
    let pq = p.p.compose(&q.p);
    let qp = q.p.compose(&p.p);
    let a = pq.leading()? / qp.leading()?;
    let b = pq.coeffs()[0] - a * qp.coeffs()[0];
    let sigma = Affine1D { a, b };
    let scale = pq
        .coeffs()
        .iter()
        .chain(qp.coeffs())
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let ok = sigma_residual(&pq, &qp, &sigma) <= SYMBOLIC_TOL * (1.0 + scale)
        && (a.norm() - 1.0).abs() <= SYMBOLIC_TOL;
    ok.then_some(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial_in;

    fn poly(s: &str) -> PolyMap1D {
        PolyMap1D::new(parse_polynomial_in(s, 'z').unwrap()).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn classify_examples() {
        let sq = poly("z^2");
        assert_eq!(sq.escape_radius(), 2.0);
        assert_eq!(classify_1d(&sq, c(0.5), 50).unwrap(), EscapeClass::BoundedSoFar(50));
        assert_eq!(classify_1d(&sq, c(2.0), 50).unwrap(), EscapeClass::Escaping(0));
        assert_eq!(
            classify_1d(&poly("z^2 - 1"), c(0.0), 500).unwrap(),
            EscapeClass::BoundedSoFar(500)
        );
        assert!(classify_1d(&sq, c(0.5), 0).is_err());
    }

    #[test]
    fn rejects_low_degree() {
        assert!(PolyMap1D::new(parse_polynomial_in("3*z + 1", 'z').unwrap()).is_err());
    }

    #[test]
    fn green_examples() {
        let sq = poly("z^2");
        let g = green_1d(&sq, c(3.0), 1e-9).unwrap();
        assert!((g.value - 3f64.ln()).abs() < 1e-7);
        assert_eq!(green_1d(&sq, c(0.5), 1e-9).unwrap().value, 0.0);

        let p = poly("z^2 - 1");
        let v = green_1d(&p, c(3.0), 1e-10).unwrap();
        let w = green_1d(&p, c(8.0), 1e-10).unwrap();
        assert!((w.value - 2.0 * v.value).abs() <= 1e-7);
        // mpmath oracle at 60 digits
        assert!((v.value - 1.035_752_179_581_087_1).abs() <= v.error_bound + 1e-15);
        assert!((w.value - 2.071_504_359_162_174_2).abs() <= w.error_bound + 1e-15);
        assert!(green_1d(&p, c(3.0), 1e-13).is_err());
    }

    #[test]
    fn monomial_green_is_log() {
        let cube = poly("z^3");
        for &r in &[1.5, 2.0, 7.0, 1e5] {
            let z = Complex64::from_polar(r, 0.3);
            assert!((green_1d(&cube, z, 1e-12).unwrap().value - r.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn beardon_examples() {
        assert!(beardon_sigma(&poly("z^2"), &poly("z^3")).unwrap().is_identity(1e-12));
        assert!(beardon_sigma(&poly("z^2 - 2"), &poly("z^3 - 3*z")).unwrap().is_identity(1e-12));
        assert_eq!(beardon_sigma(&poly("z^2"), &poly("z^2 + 1")), None);
    }

    #[test]
    fn beardon_rotation() {
        // P = z^2 and Q = -z^2 commute up to z -> -z
        let s = beardon_sigma(&poly("z^2"), &poly("-1*z^2")).unwrap();
        assert!((s.a - c(-1.0)).norm() < 1e-12 && s.b.norm() < 1e-12);
    }
}
