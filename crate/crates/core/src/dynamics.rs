//! Escape classification through the filtration and the Green's functions `G^±`.
//!
//! An orbit that enters `V_R^+` (forward) or `V_R^-` (backward) escapes, so
//! escape is certified; orbits that never do within the budget are reported
//! as [`EscapeClass::BoundedSoFar`]. Green's function values are the partial
//! limits `d^{-n} (log|y_n| + log|c_H|/(d-1))` with an explicit tail bound.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::henon::{in_v_minus, in_v_plus, Direction, HenonMap, Point2};

/// Iterates stop refining once the leading coordinate passes this modulus.
pub const MODULUS_GUARD: f64 = 1e100;

const MAX_REFINE_STEPS: u32 = 100_000;

/// Result of escape classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EscapeClass {
    /// The `n`-th iterate is the first one in `V_R^±`.
    Escaping(u32),
    /// No iterate up to `N` entered `V_R^±`; undecided at this budget.
    BoundedSoFar(u32),
}

impl EscapeClass {
    pub fn is_escaping(&self) -> bool {
        matches!(self, EscapeClass::Escaping(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            EscapeClass::Escaping(_) => "escaping",
            EscapeClass::BoundedSoFar(_) => "bounded",
        }
    }
}

/// A Green's function evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenValue {
    pub value: f64,
    pub error_bound: f64,
    pub iterations: u32,
    pub class: EscapeClass,
}

pub(crate) fn lead(z: Point2, dir: Direction) -> Complex64 {
    match dir {
        Direction::Forward => z.y,
        Direction::Backward => z.x,
    }
}

pub(crate) fn in_region(z: Point2, radius: f64, dir: Direction) -> bool {
    match dir {
        Direction::Forward => in_v_plus(z, radius),
        Direction::Backward => in_v_minus(z, radius),
    }
}

/// Iterates until the orbit enters `V_R^±`; returns the class and, when it
/// escaped without overflowing, the first iterate inside the region.
fn escape_orbit(
    map: &HenonMap,
    z: Point2,
    dir: Direction,
    max_iter: u32,
) -> (EscapeClass, Option<Point2>) {
    let radius = map.radius();
    let mut w = z;
    for n in 0..=max_iter {
        if in_region(w, radius, dir) {
            return (EscapeClass::Escaping(n), Some(w));
        }
        if n == max_iter {
            break;
        }
        match map.step(w, dir) {
            Ok(next) => w = next,
            Err(_) => return (EscapeClass::Escaping(n + 1), None),
        }
    }
    (EscapeClass::BoundedSoFar(max_iter), None)
}

/// Escape classification with an iteration budget of `max_iter`.
pub fn classify(map: &HenonMap, z: Point2, dir: Direction, max_iter: u32) -> Result<EscapeClass> {
    if max_iter < 1 {
        return Err(Error::Precondition("classify needs N >= 1".into()));
    }
    Ok(escape_orbit(map, z, dir, max_iter).0)
}

/// Bound on `|d^{-k}(log|w_k| + κ) - G(z)|` once `w_k ∈ V_R^±` with `|w_k| = u`.
///
/// Uses `4 d^{-(k+1)} B(u)` where `B(u)` bounds `|q/(c w^d)|`, valid when
/// `B(u) <= 1/2` and `|c| u^{d-1} >= 2`; otherwise the growth-constant bound
/// `2 (C + |κ|) d^{-k}`.
pub(crate) fn tail_bound(map: &HenonMap, dir: Direction, u: f64, k: u32) -> f64 {
    let d = map.degree() as f64;
    let c = map.lead_coeff(dir).norm();
    let kappa = c.ln() / (d - 1.0);
    let scale = d.powi(-(k as i32));
    let fallback = 2.0 * (map.growth_c() + kappa.abs()) * scale;
    let b = map.eps_bound(dir, u);
    if b <= 0.5 && c * u.powi(map.degree() as i32 - 1) >= 2.0 {
        fallback.min(4.0 * b * scale / d)
    } else {
        fallback
    }
}

/// Refines from an iterate already inside `V_R^±`. The boolean reports whether
/// the bound reached `tol` before the guard fired.
fn refine(
    map: &HenonMap,
    start: Point2,
    first: u32,
    dir: Direction,
    tol: f64,
    class: EscapeClass,
) -> (GreenValue, bool) {
    let d = map.degree() as f64;
    let kappa = map.lead_coeff(dir).norm().ln() / (d - 1.0);
    let mut w = start;
    let mut k = first;
    loop {
        let u = lead(w, dir).norm();
        let value = (d.powi(-(k as i32)) * (u.ln() + kappa)).max(0.0);
        let error_bound = tail_bound(map, dir, u, k);
        let gv = GreenValue {
            value,
            error_bound,
            iterations: k,
            class,
        };
        if error_bound <= tol {
            return (gv, true);
        }
        if u > MODULUS_GUARD || k - first >= MAX_REFINE_STEPS {
            return (gv, false);
        }
        match map.step(w, dir) {
            Ok(next) => w = next,
            Err(_) => return (gv, false),
        }
        k += 1;
    }
}

/// Green's function evaluation that reports an unreachable tolerance in-band.
///
/// Returns `Err(Overflow)` only when the orbit overflowed before entering the
/// filtration region.
pub fn green_lenient(
    map: &HenonMap,
    z: Point2,
    dir: Direction,
    tol: f64,
    max_iter: u32,
) -> Result<(GreenValue, bool)> {
    let (class, entry) = escape_orbit(map, z, dir, max_iter.max(1));
    match (class, entry) {
        (EscapeClass::BoundedSoFar(n), _) => Ok((
            GreenValue {
                value: 0.0,
                error_bound: map.growth_c() * (map.degree() as f64).powi(-(n as i32)),
                iterations: n,
                class,
            },
            true,
        )),
        (EscapeClass::Escaping(n), Some(w)) => Ok(refine(map, w, n, dir, tol, class)),
        (EscapeClass::Escaping(_), None) => Err(Error::Overflow),
    }
}

/// `G^+` (forward) or `G^-` (backward) at `z` with error bound at most `tol`.
pub fn green(
    map: &HenonMap,
    z: Point2,
    dir: Direction,
    tol: f64,
    max_iter: u32,
) -> Result<GreenValue> {
    if !(tol >= 1e-12) {
        return Err(Error::Precondition("green needs tol >= 1e-12".into()));
    }
    if max_iter < 1 {
        return Err(Error::Precondition("green needs maxIter >= 1".into()));
    }
    let (gv, reached) = green_lenient(map, z, dir, tol, max_iter)?;
    if reached {
        Ok(gv)
    } else {
        Err(Error::ToleranceUnreachable {
            value: gv.value,
            error_bound: gv.error_bound,
            tol,
        })
    }
}

/// Escape rate of a point already in `V_R^±`, iterated to the modulus guard.
fn escape_rate(map: &HenonMap, z: Point2, dir: Direction) -> f64 {
    let d = map.degree() as f64;
    let kappa = map.lead_coeff(dir).norm().ln() / (d - 1.0);
    let mut w = z;
    let mut k = 0;
    loop {
        let u = lead(w, dir).norm();
        if u > MODULUS_GUARD || k >= 10_000 {
            return d.powi(-k) * (u.ln() + kappa);
        }
        match map.step(w, dir) {
            Ok(next) => w = next,
            Err(_) => return d.powi(-k) * (u.ln() + kappa),
        }
        k += 1;
    }
}

/// Random point with `|lead| = s`, `|other| < s`.
fn shell_point(rng: &mut ChaCha8Rng, s: f64, dir: Direction) -> Point2 {
    let t: f64 = rng.gen_range(0.0..1.0);
    let lead = Complex64::from_polar(s, rng.gen_range(0.0..std::f64::consts::TAU));
    let other = Complex64::from_polar(t * s, rng.gen_range(0.0..std::f64::consts::TAU));
    match dir {
        Direction::Forward => Point2::new(other, lead),
        Direction::Backward => Point2::new(lead, other),
    }
}

/// Sampled `max |G^± - log|lead||` over `V_R^±` with `R < |lead| <= 4R`.
pub fn growth_constant(map: &HenonMap, dir: Direction, samples: usize, seed: u64) -> Result<f64> {
    if samples < 100 {
        return Err(Error::Precondition("growth_constant needs samples >= 100".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = map.radius();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let s = radius * 4f64.powf(1.0 - rng.gen_range(0.0..1.0));
        let z = shell_point(&mut rng, s, dir);
        worst = worst.max((escape_rate(map, z, dir) - s.ln()).abs());
    }
    Ok(worst)
}

/// Sampled `max |G^± - log|lead||` on the single shell `|lead| = shell`.
pub fn shell_growth_max(
    map: &HenonMap,
    dir: Direction,
    shell: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples < 1 || !(shell > map.radius()) {
        return Err(Error::Precondition(
            "shell_growth_max needs samples >= 1 and a shell outside R".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..samples)
        .map(|_| {
            let z = shell_point(&mut rng, shell, dir);
            (escape_rate(map, z, dir) - shell.ln()).abs()
        })
        .fold(0.0, f64::max))
}
