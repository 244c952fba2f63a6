#![allow(dead_code)]

use std::f64::consts::TAU;

use henon::henon::{make_henon, HenonFactor, HenonMap, Point2};
use henon::poly::{parse_polynomial, UniPoly};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn factor(b: f64, delta: f64, p: &str) -> HenonFactor {
    HenonFactor::new(c(b), c(delta), parse_polynomial(p).unwrap()).unwrap()
}

/// `(y, y^2 - x)`.
pub fn basic() -> HenonMap {
    make_henon(vec![factor(1.0, 1.0, "y^2")]).unwrap()
}

pub fn basic_power(k: usize) -> HenonMap {
    make_henon((0..k).map(|_| factor(1.0, 1.0, "y^2")).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Modulus log-uniform in `[1/4, 4]`, uniform phase.
pub fn coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = 4f64.powf(rng.gen_range(-1.0..1.0));
    Complex64::from_polar(r, rng.gen_range(0.0..TAU))
}

pub fn random_factors(rng: &mut ChaCha8Rng, max_m: usize, max_d: usize) -> Vec<HenonFactor> {
    let m = rng.gen_range(1..=max_m);
    (0..m)
        .map(|_| {
            let d = rng.gen_range(2..=max_d);
            let coeffs = (0..=d).map(|_| coeff(rng)).collect();
            HenonFactor::new(coeff(rng), coeff(rng), UniPoly::new(coeffs)).unwrap()
        })
        .collect()
}

pub fn random_map(rng: &mut ChaCha8Rng, max_m: usize, max_d: usize) -> HenonMap {
    make_henon(random_factors(rng, max_m, max_d)).unwrap()
}

/// Uniform in the ball of radius `r` in C² = R⁴.
pub fn ball_point(rng: &mut ChaCha8Rng, r: f64) -> Point2 {
    loop {
        let v: [f64; 4] = [0; 4].map(|_| rng.gen_range(-r..r));
        if v.iter().map(|t| t * t).sum::<f64>() <= r * r {
            return Point2::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]));
        }
    }
}

/// Point of `V_R^+` with `|y|` uniform in `[lo, hi]`.
pub fn plus_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Point2 {
    let s = rng.gen_range(lo..hi);
    let y = Complex64::from_polar(s, rng.gen_range(0.0..TAU));
    let x = Complex64::from_polar(s * rng.gen_range(0.0..0.999), rng.gen_range(0.0..TAU));
    Point2::new(x, y)
}

pub fn minus_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Point2 {
    plus_point(rng, lo, hi).swapped()
}
