mod common;

use std::f64::consts::TAU;

use common::*;
use henon::bottcher::bottcher;
use henon::dynamics::{classify, green, EscapeClass};
use henon::grid::{GridSpec, Slice, Window};
use henon::henon::{make_henon, validate_radius, DiagonalMap, Direction, Point2, RADIUS_DENSITY};
use henon::onedim::{beardon_sigma, green_1d, sigma_residual, PolyMap1D};
use henon::poly::{
    compose_maps, compose_poly, parse_polynomial, BiPoly, BiPolyPair, UniPoly, DEFAULT_TERM_CAP,
};
use henon::rigidity::{commutator_diagonal, shared_set_report};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn bipoly(max_deg: u32) -> impl Strategy<Value = BiPoly> {
    prop::collection::vec((0..=max_deg, 0..=max_deg, complex()), 0..6).prop_map(BiPoly::from_terms)
}

fn pair(max_deg: u32) -> impl Strategy<Value = BiPolyPair> {
    (bipoly(max_deg), bipoly(max_deg)).prop_map(|(a, b)| BiPolyPair::new(a, b))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm() + b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_agrees_with_evaluation(p in bipoly(3), inner in pair(2), x in complex(), y in complex()) {
        let (x, y) = (x / 3.0, y / 3.0);
        let composed = compose_poly(&p, &inner, DEFAULT_TERM_CAP).unwrap();
        let (u, v) = inner.eval(x, y).unwrap();
        let direct = p.eval(u, v).unwrap();
        // rounding is relative to the size of the summands, not of the sum
        let scale: f64 = composed.terms().iter().map(|t| t.c.norm()).sum::<f64>()
            + p.terms().iter().map(|t| t.c.norm()).sum::<f64>() * (1.0 + u.norm() + v.norm()).powi(6);
        prop_assert!((composed.eval(x, y).unwrap() - direct).norm() <= 1e-10 * (1.0 + scale));
    }

    #[test]
    fn composition_is_associative(a in pair(2), b in pair(2), c in pair(1)) {
        let left = compose_maps(&compose_maps(&a, &b).unwrap(), &c).unwrap();
        let right = compose_maps(&a, &compose_maps(&b, &c).unwrap()).unwrap();
        let scale = left.max_coeff_modulus().max(right.max_coeff_modulus());
        prop_assert!(left.residual(&right) <= 1e-9 * (1.0 + scale));
    }

    #[test]
    fn printing_round_trips(coeffs in prop::collection::vec(complex(), 1..7)) {
        let p = UniPoly::new(coeffs);
        let back = parse_polynomial(&p.to_string()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn product_commutes(a in bipoly(3), b in bipoly(3)) {
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        prop_assert!(ab.residual(&ba) <= 1e-12 * (1.0 + ab.max_coeff_modulus()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn degree_is_multiplicative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_map(&mut r, 2, 3);
        let h = random_map(&mut r, 2, 3);
        let fh = compose_maps(f.symbolic_components(), h.symbolic_components()).unwrap();
        let d = f.degree() * h.degree();
        prop_assert_eq!(fh.degree(), Some(d));
        let lead = fh.second.coeff(0, d);
        let expected = h.c_h().powu(f.degree()) * f.c_h();
        prop_assert!((lead - expected).norm() <= 1e-9 * expected.norm());
    }

    #[test]
    fn construction_matches_symbolic_leads(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_map(&mut r, 3, 4);
        let d = h.degree();
        let sym = h.symbolic_components().second.coeff(0, d);
        let sym_inv = h.symbolic_inverse_components().first.coeff(d, 0);
        prop_assert!((h.c_h() - sym).norm() <= 1e-12 * sym.norm());
        prop_assert!((h.c_h_prime() - sym_inv).norm() <= 1e-12 * sym_inv.norm());
        prop_assert!(validate_radius(&h, h.radius(), RADIUS_DENSITY).unwrap().passed);
    }

    #[test]
    fn inverse_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let factors: Vec<_> = random_factors(&mut r, 2, 2);
        let h = make_henon(factors).unwrap();
        for _ in 0..200 {
            let z = ball_point(&mut r, 10.0);
            let back = h.apply_inverse(h.apply(z).unwrap()).unwrap();
            prop_assert!(back.dist(&z) <= 1e-9 * (1.0 + z.norm()));
        }
    }

    #[test]
    fn symbolic_components_evaluate_like_factors(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_map(&mut r, 3, 3);
        for _ in 0..20 {
            let z = ball_point(&mut r, 1.0);
            let a = h.apply(z).unwrap();
            let (x, y) = h.symbolic_components().eval(z.x, z.y).unwrap();
            prop_assert!(close(a.x, x, 1e-9) && close(a.y, y, 1e-9));
        }
    }

    #[test]
    fn bottcher_functional_equation_both_ways(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_map(&mut r, 2, 3);
        let tol = 1e-10;
        let d = h.degree();
        for (dir, lead) in [(Direction::Forward, h.c_h()), (Direction::Backward, h.c_h_prime())] {
            for _ in 0..10 {
                let s = h.radius();
                let z = match dir {
                    Direction::Forward => plus_point(&mut r, 2.0 * s, 4.0 * s),
                    Direction::Backward => minus_point(&mut r, 2.0 * s, 4.0 * s),
                };
                let phi = bottcher(&h, z, dir, tol).unwrap().value;
                prop_assert!(phi.norm() > 0.0);
                let next = bottcher(&h, h.step(z, dir).unwrap(), dir, tol).unwrap().value;
                let target = lead * phi.powu(d);
                prop_assert!((next - target).norm() <= 10.0 * tol * lead.norm() * phi.norm().powi(d as i32));
            }
        }
    }

    #[test]
    fn backward_green_is_forward_green_of_swapped_inverse(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_map(&mut r, 2, 2);
        let s = h.swapped_inverse().unwrap();
        let tol = 1e-8;
        for _ in 0..20 {
            let z = ball_point(&mut r, 3.0 * h.radius().max(s.radius()));
            let a = green(&h, z, Direction::Backward, tol, 200);
            let b = green(&s, z.swapped(), Direction::Forward, tol, 200);
            if let (Ok(a), Ok(b)) = (a, b) {
                if a.class.is_escaping() && b.class.is_escaping() {
                    prop_assert!((a.value - b.value).abs() <= a.error_bound + b.error_bound + 1e-12);
                }
            }
        }
    }

    #[test]
    fn one_dimensional_functional_equation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(2..=5);
        let p = PolyMap1D::new(UniPoly::new((0..=d).map(|_| coeff(&mut r)).collect())).unwrap();
        let tol = 1e-10;
        for _ in 0..20 {
            let z = Complex64::from_polar(r.gen_range(0.0..2.0 * p.escape_radius()), r.gen_range(0.0..TAU));
            let g = green_1d(&p, z, tol).unwrap();
            if !g.class.is_escaping() {
                prop_assert_eq!(g.value, 0.0);
                continue;
            }
            let gp = green_1d(&p, p.p().eval(z), tol).unwrap();
            prop_assert!((gp.value - d as f64 * g.value).abs() <= gp.error_bound + d as f64 * g.error_bound + 1e-12);
        }
    }

    #[test]
    fn polynomial_commutes_with_its_iterate(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(2..=3);
        let p = UniPoly::new((0..=d).map(|_| coeff(&mut r)).collect());
        let pp = p.compose(&p);
        let (pm, qm) = (PolyMap1D::new(p.clone()).unwrap(), PolyMap1D::new(pp.clone()).unwrap());
        let s = beardon_sigma(&pm, &qm).unwrap();
        prop_assert!(s.is_identity(1e-9));
        let lhs = p.compose(&pp);
        let scale = lhs.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        prop_assert!(sigma_residual(&lhs, &pp.compose(&p), &s) <= 1e-9 * (1.0 + scale));
    }
}

#[test]
fn green_zero_set_and_nonnegativity() {
    let h = basic();
    let mut r = rng(21);
    for _ in 0..300 {
        let z = ball_point(&mut r, 3.0);
        for dir in [Direction::Forward, Direction::Backward] {
            let g = green(&h, z, dir, 1e-8, 100).unwrap();
            assert!(g.value >= 0.0);
            if matches!(g.class, EscapeClass::BoundedSoFar(_)) {
                assert_eq!(g.value, 0.0);
            }
        }
    }
}

#[test]
fn refinement_is_monotone_and_bounds_are_consistent() {
    let h = basic();
    let mut r = rng(22);
    for _ in 0..200 {
        let z = ball_point(&mut r, 2.5);
        let mut escaped = false;
        for n in [5, 20, 80, 200] {
            let e = classify(&h, z, Direction::Forward, n).unwrap().is_escaping();
            assert!(!escaped || e);
            escaped = e;
        }
        if escaped {
            let a = green(&h, z, Direction::Forward, 1e-6, 200).unwrap();
            let b = green(&h, z, Direction::Forward, 1e-10, 200).unwrap();
            assert!((a.value - b.value).abs() <= 1.1e-6);
        }
    }
}

#[test]
fn bottcher_normalisation_improves_with_modulus() {
    let h = basic();
    let mut r = rng(23);
    let mut last = f64::INFINITY;
    for k in 2..=6 {
        let s = 10f64.powi(k);
        let mut sup = 0.0f64;
        for _ in 0..50 {
            let y = Complex64::from_polar(s, r.gen_range(0.0..TAU));
            let x = Complex64::from_polar(s * r.gen_range(0.0..0.999), r.gen_range(0.0..TAU));
            let phi = bottcher(&h, Point2::new(x, y), Direction::Forward, 1e-14).unwrap().value;
            sup = sup.max((phi / y - 1.0).norm());
        }
        assert!(sup <= last, "k = {k}: {sup} > {last}");
        last = sup;
    }
}

#[test]
fn powers_of_a_volume_preserving_map_commute_exactly() {
    let h = basic();
    for k in 1..=3 {
        let f = basic_power(k);
        let w = commutator_diagonal(&f, &h).unwrap().witness.unwrap();
        assert_eq!(w, DiagonalMap::new(c(1.0), c(1.0)));
    }
}

#[test]
fn scaling_relation_for_powers() {
    let h = basic();
    let mut r = rng(24);
    let tol = 1e-9;
    for k in 1..=3u32 {
        let f = basic_power(k as usize);
        let mut checked = 0;
        while checked < 30 {
            let z = ball_point(&mut r, 3.0);
            if !classify(&h, z, Direction::Forward, 200).unwrap().is_escaping() {
                continue;
            }
            let g = green(&h, z, Direction::Forward, tol, 200).unwrap();
            let gf = green(&h, f.apply(z).unwrap(), Direction::Forward, tol, 200).unwrap();
            let m = 2f64.powi(k as i32);
            assert!((gf.value - m * g.value).abs() <= gf.error_bound + m * g.error_bound + 1e-9);
            checked += 1;
        }
    }
}

#[test]
fn converse_on_a_test_grid() {
    let h = basic();
    let grid = GridSpec::new(Slice::FixX(c(0.5)), Window::square(2.0).unwrap(), 24).unwrap();
    for f in [basic_power(2), make_henon(vec![factor(1.0, -1.0, "-1*y^2")]).unwrap()] {
        let report = commutator_diagonal(&f, &h).unwrap();
        let Some(w) = report.witness else { panic!("expected a witness") };
        let with_c = shared_set_report(&w, &h, &grid, 50).unwrap();
        if with_c.forward.decided_fraction() == 1.0 && with_c.backward.decided_fraction() == 1.0 {
            let with_f = shared_set_report(&f, &h, &grid, 50).unwrap();
            assert_eq!(with_f.forward.decided_fraction(), 1.0);
            assert_eq!(with_f.backward.decided_fraction(), 1.0);
        }
    }
}

#[test]
fn witnesses_are_sound() {
    let h = basic();
    let f = make_henon(vec![factor(1.0, -1.0, "-1*y^2")]).unwrap();
    let w = commutator_diagonal(&f, &h).unwrap().witness.unwrap();
    let lhs = compose_maps(f.symbolic_components(), h.symbolic_components()).unwrap();
    let rhs = compose_maps(
        &w.to_pair(),
        &compose_maps(h.symbolic_components(), f.symbolic_components()).unwrap(),
    )
    .unwrap();
    assert!(lhs.residual(&rhs) <= 1e-9 * (1.0 + lhs.max_coeff_modulus()));
}
