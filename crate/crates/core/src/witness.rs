//! Search for points showing that `K^+` is not invariant under the torus
//! action `(x, y) -> (e^{iθ}x, y)`: a bounded point whose rotation escapes.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{classify, EscapeClass};
use crate::error::{Error, Result};
use crate::henon::{Direction, HenonMap, Point2};

pub const DEFAULT_WITNESS_SEED: u64 = 7;

/// Half-width of the sampling box.
const SAMPLE_BOX: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReinhardtWitness {
    pub point: Point2,
    pub theta: f64,
    pub rotated: Point2,
    /// Step at which the rotated orbit entered `V_R^+`.
    pub escape_step: u32,
    /// Samples drawn before the witness was found.
    pub samples_used: usize,
}

/// Even draws lie in the real plane, odd draws in the complex box; bounded
/// points are tried against `θ = 2πk/thetaCount` for `k = 1..thetaCount`.
pub fn reinhardt_witness(
    map: &HenonMap,
    samples: usize,
    theta_count: usize,
    max_iter: u32,
    seed: u64,
) -> Result<Option<ReinhardtWitness>> {
    if samples < 100 || theta_count < 4 {
        return Err(Error::Precondition("witness search needs samples >= 100 and thetaCount >= 4".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coord = |rng: &mut ChaCha8Rng| rng.gen_range(-SAMPLE_BOX..SAMPLE_BOX);
    for s in 0..samples {
        let z = if s % 2 == 0 {
            Point2::real(coord(&mut rng), coord(&mut rng))
        } else {
            Point2::new(
                Complex64::new(coord(&mut rng), coord(&mut rng)),
                Complex64::new(coord(&mut rng), coord(&mut rng)),
            )
        };
        if z.x.norm() == 0.0 || classify(map, z, Direction::Forward, max_iter)?.is_escaping() {
            continue;
        }
        for k in 1..theta_count {
            let theta = TAU * k as f64 / theta_count as f64;
            let rotated = Point2::new(z.x * Complex64::from_polar(1.0, theta), z.y);
            if let EscapeClass::Escaping(n) = classify(map, rotated, Direction::Forward, max_iter)? {
                return Ok(Some(ReinhardtWitness {
                    point: z,
                    theta,
                    rotated,
                    escape_step: n,
                    samples_used: s + 1,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::henon::{make_henon, HenonFactor};
    use crate::poly::parse_polynomial;

    fn basic() -> HenonMap {
        let one = Complex64::new(1.0, 0.0);
        make_henon(vec![HenonFactor::new(one, one, parse_polynomial("y^2").unwrap()).unwrap()]).unwrap()
    }

    #[test]
    fn finds_witness_for_basic_map() {
        let h = basic();
        let w = reinhardt_witness(&h, 10_000, 16, 200, DEFAULT_WITNESS_SEED).unwrap().unwrap();
        assert!(w.point.x.norm() > 0.0);
        assert!(!classify(&h, w.point, Direction::Forward, 200).unwrap().is_escaping());
        assert!(classify(&h, w.rotated, Direction::Forward, 200).unwrap().is_escaping());
        assert!((w.rotated.x.norm() - w.point.x.norm()).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let h = basic();
        assert!(reinhardt_witness(&h, 1000, 0, 200, 1).is_err());
        assert!(reinhardt_witness(&h, 10, 16, 200, 1).is_err());
    }
}
