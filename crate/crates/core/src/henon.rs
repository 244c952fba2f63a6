//! Hénon maps `H = H_m∘⋯∘H_1` with factors `H_j(x, y) = (b_j y, p_j(y) - δ_j x)`.
//!
//! Construction cross-checks the closed-form leading coefficients against a
//! symbolic expansion, then picks a filtration radius `R` and certifies it by
//! sampling the shells of `V_R^±`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::dynamics;
use crate::error::{Error, Result};
use crate::poly::{
    coeffs_close, compose_maps, format_complex, BiPoly, BiPolyPair, UniPoly, OVERFLOW_LIMIT,
};

/// Upper limit of the doubling radius search.
pub const RADIUS_CAP: f64 = 1_048_576.0;

/// Sample density used when certifying the constructed radius.
pub const RADIUS_DENSITY: usize = 32;

/// Samples per direction used to estimate the growth constant.
pub const GROWTH_SAMPLES: usize = 10_000;

const GROWTH_SEED: u64 = 0x6865_6e6f_6e00;

/// A point of C².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: Complex64,
    pub y: Complex64,
}

impl Point2 {
    pub fn new(x: Complex64, y: Complex64) -> Self {
        Point2 { x, y }
    }

    pub fn real(x: f64, y: f64) -> Self {
        Point2::new(Complex64::new(x, 0.0), Complex64::new(y, 0.0))
    }

    /// Euclidean norm in C².
    pub fn norm(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr()).sqrt()
    }

    pub fn swapped(&self) -> Point2 {
        Point2::new(self.y, self.x)
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        Point2::new(self.x - other.x, self.y - other.y).norm()
    }

    fn checked(self) -> Result<Point2> {
        let ok = |c: Complex64| c.norm().is_finite() && c.norm() <= OVERFLOW_LIMIT;
        if ok(self.x) && ok(self.y) {
            Ok(self)
        } else {
            Err(Error::Overflow)
        }
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_complex(self.x), format_complex(self.y))
    }
}

/// Forward (`H`) or backward (`H^{-1}`) dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

/// Anything that maps C² to itself pointwise.
pub trait PlaneMap {
    fn map_point(&self, z: Point2) -> Result<Point2>;
}

/// One factor `(x, y) -> (b y, p(y) - δ x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HenonFactor {
    b: Complex64,
    delta: Complex64,
    p: UniPoly,
}

impl HenonFactor {
    pub fn new(b: Complex64, delta: Complex64, p: UniPoly) -> Result<Self> {
        let factor = HenonFactor { b, delta, p };
        factor.validate(0)?;
        Ok(factor)
    }

    fn validate(&self, index: usize) -> Result<()> {
        match self.p.degree() {
            Some(d) if d >= 2 => {}
            _ => {
                return Err(Error::InvalidFactor {
                    index,
                    reason: format!("deg p = {:?} < 2", self.p.degree()),
                })
            }
        }
        if (self.b * self.delta).norm() == 0.0 || !(self.b * self.delta).norm().is_finite() {
            return Err(Error::InvalidFactor {
                index,
                reason: "b * delta must be a nonzero finite number".into(),
            });
        }
        Ok(())
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn delta(&self) -> Complex64 {
        self.delta
    }

    pub fn p(&self) -> &UniPoly {
        &self.p
    }

    pub fn degree(&self) -> u32 {
        self.p.degree().unwrap_or(0) as u32
    }

    /// Leading coefficient `c_j` of `p_j`.
    pub fn leading(&self) -> Complex64 {
        self.p.leading().unwrap_or_default()
    }

    pub fn apply(&self, z: Point2) -> Result<Point2> {
        Point2::new(self.b * z.y, self.p.eval(z.y) - self.delta * z.x).checked()
    }

    /// `(u, v) -> ((p(u/b) - v)/δ, u/b)`.
    pub fn apply_inverse(&self, z: Point2) -> Result<Point2> {
        let y = z.x / self.b;
        Point2::new((self.p.eval(y) - z.y) / self.delta, y).checked()
    }

    pub fn components(&self) -> BiPolyPair {
        BiPolyPair::new(
            BiPoly::y().scale(self.b),
            BiPoly::from_uni_in_y(&self.p).sub(&BiPoly::x().scale(self.delta)),
        )
    }

    pub fn inverse_components(&self) -> BiPolyPair {
        let scaled = BiPoly::from_uni_in_x(&self.p.compose(&UniPoly::new(vec![
            Complex64::default(),
            self.b.inv(),
        ])));
        BiPolyPair::new(
            scaled.sub(&BiPoly::y()).scale(self.delta.inv()),
            BiPoly::x().scale(self.b.inv()),
        )
    }
}

/// Membership in `V_R^+ = {|x| < |y|, |y| > R}`.
pub fn in_v_plus(z: Point2, radius: f64) -> bool {
    z.x.norm() < z.y.norm() && z.y.norm() > radius
}

/// Membership in `V_R^- = {|y| < |x|, |x| > R}`.
pub fn in_v_minus(z: Point2, radius: f64) -> bool {
    z.y.norm() < z.x.norm() && z.x.norm() > radius
}

/// Membership in the closed bidisk `V_R`.
pub fn in_bidisk(z: Point2, radius: f64) -> bool {
    z.x.norm() <= radius && z.y.norm() <= radius
}

/// Which filtration inclusion a sample violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inclusion {
    /// `H(V_R^+) ⊂ V_R^+`
    ForwardPlus,
    /// `H(V_R^+ ∪ V_R) ⊂ V_R^+ ∪ V_R`
    ForwardPlusOrBidisk,
    /// `H^{-1}(V_R^-) ⊂ V_R^-`
    BackwardMinus,
    /// `H^{-1}(V_R^- ∪ V_R) ⊂ V_R^- ∪ V_R`
    BackwardMinusOrBidisk,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadiusCounterexample {
    pub point: Point2,
    pub image: Point2,
    pub inclusion: Inclusion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadiusReport {
    pub radius: f64,
    pub passed: bool,
    /// Inclusion checks performed.
    pub checks: usize,
    /// Samples whose image overflowed and could not be checked.
    pub skipped: usize,
    pub counterexample: Option<RadiusCounterexample>,
}

/// A Hénon map with its derived data.
#[derive(Clone, Debug)]
pub struct HenonMap {
    factors: Vec<HenonFactor>,
    degree: u32,
    c_h: Complex64,
    c_h_prime: Complex64,
    radius: f64,
    growth_c: f64,
    components: BiPolyPair,
    inverse_components: BiPolyPair,
    // H_2 - c_H y^d and H'_1 - c'_H x^d
    q_plus: BiPoly,
    q_minus: BiPoly,
}

/// Builds a Hénon map from factors, `factors[0]` applied first.
pub fn make_henon(factors: Vec<HenonFactor>) -> Result<HenonMap> {
    HenonMap::new(factors)
}

impl HenonMap {
    pub fn new(factors: Vec<HenonFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidFactor {
                index: 0,
                reason: "a Hénon map needs at least one factor".into(),
            });
        }
        for (k, f) in factors.iter().enumerate() {
            f.validate(k)?;
        }
        let degree = factors
            .iter()
            .try_fold(1u32, |acc, f| acc.checked_mul(f.degree()))
            .ok_or_else(|| Error::Precondition("degree exceeds u32".into()))?;

        let c_h = closed_form_c_h(&factors);
        let c_h_prime = closed_form_c_h_prime(&factors);

        let mut components = BiPolyPair::identity();
        for f in &factors {
            components = compose_maps(&f.components(), &components)?;
        }
        let mut inverse_components = BiPolyPair::identity();
        for f in factors.iter().rev() {
            inverse_components = compose_maps(&f.inverse_components(), &inverse_components)?;
        }

        let sym_c = components.second.coeff(0, degree);
        let sym_cp = inverse_components.first.coeff(degree, 0);
        check_leading("c_H", c_h, sym_c, components.second.degree(), degree)?;
        check_leading(
            "c'_H",
            c_h_prime,
            sym_cp,
            inverse_components.first.degree(),
            degree,
        )?;
        let q_plus = components.second.without_term(0, degree);
        let q_minus = inverse_components.first.without_term(degree, 0);
        if q_plus.degree().is_some_and(|k| k >= degree)
            || q_minus.degree().is_some_and(|k| k >= degree)
        {
            return Err(Error::CoefficientMismatch {
                which: "remainder degree",
                formula: format!("< {degree}"),
                symbolic: format!("{:?} / {:?}", q_plus.degree(), q_minus.degree()),
            });
        }

        let mut map = HenonMap {
            factors,
            degree,
            c_h,
            c_h_prime,
            radius: 0.0,
            growth_c: 0.0,
            components,
            inverse_components,
            q_plus,
            q_minus,
        };

        let mut radius = map.initial_radius();
        loop {
            if radius > RADIUS_CAP || !radius.is_finite() {
                return Err(Error::RadiusSearchFailed { cap: RADIUS_CAP });
            }
            if map.branch_condition_holds(radius)
                && validate_radius(&map, radius, RADIUS_DENSITY)?.passed
            {
                break;
            }
            radius *= 2.0;
        }
        map.radius = radius;
        map.growth_c = map.estimate_growth()?;
        Ok(map)
    }

    /// Same map with a caller-chosen radius, which must pass [`validate_radius`].
    pub fn with_radius(&self, radius: f64) -> Result<HenonMap> {
        if !(radius > 0.0) {
            return Err(Error::Precondition("radius must be positive".into()));
        }
        let report = validate_radius(self, radius, RADIUS_DENSITY)?;
        if !report.passed {
            return Err(Error::Precondition(format!(
                "radius {radius} fails filtration validation: {:?}",
                report.counterexample
            )));
        }
        let mut map = self.clone();
        map.radius = radius;
        map.growth_c = map.estimate_growth()?;
        Ok(map)
    }

    #[cfg(test)]
    pub(crate) fn with_radius_unchecked(&self, radius: f64) -> HenonMap {
        HenonMap {
            radius,
            ..self.clone()
        }
    }

    fn estimate_growth(&self) -> Result<f64> {
        let fwd = dynamics::growth_constant(self, Direction::Forward, GROWTH_SAMPLES, GROWTH_SEED)?;
        let bwd =
            dynamics::growth_constant(self, Direction::Backward, GROWTH_SAMPLES, GROWTH_SEED + 1)?;
        Ok(2.0 * fwd.max(bwd))
    }

    /// `max_j (2 (1 + |δ_j| + |b_j| + Σ|p_j|) / |c_j|)^{1/(d_j - 1)} + 1`.
    fn initial_radius(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let coeff_sum: f64 = f.p.coeffs().iter().map(|c| c.norm()).sum();
                let base = 2.0 * (1.0 + f.delta.norm() + f.b.norm() + coeff_sum)
                    / f.leading().norm();
                base.powf(1.0 / (f.degree() as f64 - 1.0))
            })
            .fold(0.0, f64::max)
            + 1.0
    }

    /// `|q/(c z^d)| < 1` on all of `V_R^±` (the Böttcher branch condition).
    fn branch_condition_holds(&self, radius: f64) -> bool {
        self.eps_bound(Direction::Forward, radius) < 1.0
            && self.eps_bound(Direction::Backward, radius) < 1.0
    }

    /// Upper bound for `|q(x,y)/(c_H y^d)|` over `|x| <= |y| = u` (forward), or the
    /// mirrored quantity backward. Non-increasing in `u` for `u >= 1`.
    pub fn eps_bound(&self, dir: Direction, u: f64) -> f64 {
        let (q, c) = match dir {
            Direction::Forward => (&self.q_plus, self.c_h),
            Direction::Backward => (&self.q_minus, self.c_h_prime),
        };
        let d = self.degree as i32;
        q.terms()
            .iter()
            .map(|t| t.c.norm() * u.powi(t.i as i32 + t.j as i32 - d))
            .sum::<f64>()
            / c.norm()
    }

    /// `q(z) / (c z_lead^d)` evaluated without forming the power.
    pub fn eps(&self, dir: Direction, z: Point2) -> Complex64 {
        match dir {
            Direction::Forward => self.q_plus.eval_over_y_power(z.x, z.y, self.degree) / self.c_h,
            Direction::Backward => {
                self.q_minus.eval_over_x_power(z.x, z.y, self.degree) / self.c_h_prime
            }
        }
    }

    pub fn factors(&self) -> &[HenonFactor] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `c_H`, leading pure-`y` coefficient of the second component.
    pub fn c_h(&self) -> Complex64 {
        self.c_h
    }

    /// `c'_H`, leading pure-`x` coefficient of the first component of `H^{-1}`.
    pub fn c_h_prime(&self) -> Complex64 {
        self.c_h_prime
    }

    /// `c_H` forward, `c'_H` backward.
    pub fn lead_coeff(&self, dir: Direction) -> Complex64 {
        match dir {
            Direction::Forward => self.c_h,
            Direction::Backward => self.c_h_prime,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Sampled constant of the logarithmic growth bounds, already doubled.
    pub fn growth_c(&self) -> f64 {
        self.growth_c
    }

    pub fn symbolic_components(&self) -> &BiPolyPair {
        &self.components
    }

    pub fn symbolic_inverse_components(&self) -> &BiPolyPair {
        &self.inverse_components
    }

    pub fn apply(&self, z: Point2) -> Result<Point2> {
        self.factors.iter().try_fold(z, |w, f| f.apply(w))
    }

    pub fn apply_inverse(&self, z: Point2) -> Result<Point2> {
        self.factors.iter().rev().try_fold(z, |w, f| f.apply_inverse(w))
    }

    pub fn step(&self, z: Point2, dir: Direction) -> Result<Point2> {
        match dir {
            Direction::Forward => self.apply(z),
            Direction::Backward => self.apply_inverse(z),
        }
    }

    /// `τ∘H^{-1}∘τ` with `τ(x, y) = (y, x)`, itself a Hénon map with factors
    /// `(y/b, p(y/b)/δ - x/δ)` in reverse order. Its forward dynamics are the
    /// backward dynamics of `self` in swapped coordinates.
    pub fn swapped_inverse(&self) -> Result<HenonMap> {
        let factors = self
            .factors
            .iter()
            .rev()
            .map(|f| {
                let p = f
                    .p
                    .compose(&UniPoly::new(vec![Complex64::default(), f.b.inv()]))
                    .scale(f.delta.inv());
                HenonFactor::new(f.b.inv(), f.delta.inv(), p)
            })
            .collect::<Result<Vec<_>>>()?;
        HenonMap::new(factors)
    }
}

impl PlaneMap for HenonMap {
    fn map_point(&self, z: Point2) -> Result<Point2> {
        self.apply(z)
    }
}

fn check_leading(
    which: &'static str,
    formula: Complex64,
    symbolic: Complex64,
    symbolic_degree: Option<u32>,
    degree: u32,
) -> Result<()> {
    if symbolic_degree != Some(degree) || !coeffs_close(formula, symbolic) {
        return Err(Error::CoefficientMismatch {
            which,
            formula: formula.to_string(),
            symbolic: format!("{symbolic} (degree {symbolic_degree:?}, expected {degree})"),
        });
    }
    Ok(())
}

/// `c_H = Π_j c_j^{d_{j+1}⋯d_m}`.
pub fn closed_form_c_h(factors: &[HenonFactor]) -> Complex64 {
    factors
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let exp: u32 = factors[j + 1..].iter().map(|g| g.degree()).product();
            f.leading().powu(exp)
        })
        .product()
}

/// `c'_H = Π_j (c_j δ_j^{-1})^{d_{j-1}⋯d_1} b_j^{-d_j d_{j-1}⋯d_1}`.
pub fn closed_form_c_h_prime(factors: &[HenonFactor]) -> Complex64 {
    factors
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let below: u32 = factors[..j].iter().map(|g| g.degree()).product();
            (f.leading() / f.delta).powu(below) * f.b.inv().powu(f.degree() * below)
        })
        .product()
}

/// Samples the shells `|y| ∈ {R, 2R, 4R}, |x| <= |y|` and their mirrors and
/// checks the four filtration inclusions on every sample.
pub fn validate_radius(map: &HenonMap, radius: f64, density: usize) -> Result<RadiusReport> {
    if density < 8 {
        return Err(Error::Precondition("validate_radius needs density >= 8".into()));
    }
    let mut report = RadiusReport {
        radius,
        passed: true,
        checks: 0,
        skipped: 0,
        counterexample: None,
    };
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    for shell in [radius, 2.0 * radius, 4.0 * radius] {
        for k in 0..density {
            for l in 0..density {
                let arg_lead = TAU * k as f64 / density as f64;
                let arg_other = TAU * ((l as f64 * golden + k as f64 * 0.5f64.sqrt()).fract());
                let t = l as f64 / (density - 1) as f64;
                let lead = Complex64::from_polar(shell, arg_lead);
                let other = Complex64::from_polar(t * shell, arg_other);
                for z in [Point2::new(other, lead), Point2::new(lead, other)] {
                    if let Some(cex) = check_inclusions(map, z, radius, &mut report) {
                        report.passed = false;
                        report.counterexample = Some(cex);
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}

fn check_inclusions(
    map: &HenonMap,
    z: Point2,
    radius: f64,
    report: &mut RadiusReport,
) -> Option<RadiusCounterexample> {
    let plus = in_v_plus(z, radius);
    let minus = in_v_minus(z, radius);
    let bidisk = in_bidisk(z, radius);
    if plus || bidisk {
        match map.apply(z) {
            Ok(w) => {
                report.checks += 1;
                if plus && !in_v_plus(w, radius) {
                    return Some(RadiusCounterexample {
                        point: z,
                        image: w,
                        inclusion: Inclusion::ForwardPlus,
                    });
                }
                if !(in_v_plus(w, radius) || in_bidisk(w, radius)) {
                    return Some(RadiusCounterexample {
                        point: z,
                        image: w,
                        inclusion: Inclusion::ForwardPlusOrBidisk,
                    });
                }
            }
            Err(_) => report.skipped += 1,
        }
    }
    if minus || bidisk {
        match map.apply_inverse(z) {
            Ok(w) => {
                report.checks += 1;
                if minus && !in_v_minus(w, radius) {
                    return Some(RadiusCounterexample {
                        point: z,
                        image: w,
                        inclusion: Inclusion::BackwardMinus,
                    });
                }
                if !(in_v_minus(w, radius) || in_bidisk(w, radius)) {
                    return Some(RadiusCounterexample {
                        point: z,
                        image: w,
                        inclusion: Inclusion::BackwardMinusOrBidisk,
                    });
                }
            }
            Err(_) => report.skipped += 1,
        }
    }
    None
}

/// Affine automorphism `z -> L z + t` of C².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: [[Complex64; 2]; 2],
    pub translation: [Complex64; 2],
}

impl AffineMap {
    pub fn new(linear: [[Complex64; 2]; 2], translation: [Complex64; 2]) -> Result<Self> {
        let det = linear[0][0] * linear[1][1] - linear[0][1] * linear[1][0];
        if !(det.norm() > 0.0) {
            return Err(Error::Precondition("affine map is not invertible".into()));
        }
        Ok(AffineMap {
            linear,
            translation,
        })
    }

    pub fn identity() -> Self {
        let (o, l) = (Complex64::default(), Complex64::new(1.0, 0.0));
        AffineMap {
            linear: [[l, o], [o, l]],
            translation: [o, o],
        }
    }

    pub fn translation(dx: Complex64, dy: Complex64) -> Self {
        AffineMap {
            translation: [dx, dy],
            ..Self::identity()
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.linear[0][0] * self.linear[1][1] - self.linear[0][1] * self.linear[1][0]
    }

    pub fn apply(&self, z: Point2) -> Point2 {
        let l = &self.linear;
        Point2::new(
            l[0][0] * z.x + l[0][1] * z.y + self.translation[0],
            l[1][0] * z.x + l[1][1] * z.y + self.translation[1],
        )
    }

    pub fn to_pair(&self) -> BiPolyPair {
        let row = |r: usize| {
            BiPoly::from_terms([
                (1, 0, self.linear[r][0]),
                (0, 1, self.linear[r][1]),
                (0, 0, self.translation[r]),
            ])
        };
        BiPolyPair::new(row(0), row(1))
    }

    /// Entry-wise comparison under [`coeffs_close`].
    pub fn approx_eq(&self, other: &AffineMap) -> bool {
        self.to_pair().approx_eq(&other.to_pair())
    }
}

impl PlaneMap for AffineMap {
    fn map_point(&self, z: Point2) -> Result<Point2> {
        self.apply(z).checked()
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = &self.linear;
        let t = &self.translation;
        write!(
            f,
            "(x, y) -> ({}*x + {}*y + {}, {}*x + {}*y + {})",
            format_complex(l[0][0]),
            format_complex(l[0][1]),
            format_complex(t[0]),
            format_complex(l[1][0]),
            format_complex(l[1][1]),
            format_complex(t[1])
        )
    }
}

/// `C(x, y) = (δ₋ x, δ₊ y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalMap {
    pub delta_minus: Complex64,
    pub delta_plus: Complex64,
}

impl DiagonalMap {
    pub fn new(delta_minus: Complex64, delta_plus: Complex64) -> Self {
        DiagonalMap {
            delta_minus,
            delta_plus,
        }
    }

    pub fn apply(&self, z: Point2) -> Point2 {
        Point2::new(self.delta_minus * z.x, self.delta_plus * z.y)
    }

    pub fn to_pair(&self) -> BiPolyPair {
        BiPolyPair::new(
            BiPoly::x().scale(self.delta_minus),
            BiPoly::y().scale(self.delta_plus),
        )
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        (self.delta_minus.norm() - 1.0).abs() <= tol && (self.delta_plus.norm() - 1.0).abs() <= tol
    }
}

impl PlaneMap for DiagonalMap {
    fn map_point(&self, z: Point2) -> Result<Point2> {
        self.apply(z).checked()
    }
}

impl PlaneMap for BiPolyPair {
    fn map_point(&self, z: Point2) -> Result<Point2> {
        let (x, y) = self.eval(z.x, z.y)?;
        Ok(Point2::new(x, y))
    }
}
