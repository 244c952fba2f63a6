//! Symbolic and sampled checks of when two Hénon maps share their
//! non-escaping sets: commutation up to a diagonal unimodular map, iterate
//! matching up to an affine map, and grid agreement of escape classes.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::{classify, EscapeClass};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::henon::{AffineMap, DiagonalMap, Direction, HenonMap, PlaneMap, Point2};
use crate::poly::{compose_maps, format_complex, BiPoly, BiPolyPair, DEFAULT_TERM_CAP, SYMBOLIC_TOL};

/// How a commutation report reached its verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommutationMethod {
    /// Both sides have the same monomial support; `δ±` solved from matched coefficients.
    CoefficientSolve,
    /// Supports differ, so no diagonal can match; every coefficient compared under the best fit.
    ExhaustiveCompare,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutationReport {
    pub witness: Option<DiagonalMap>,
    /// Best-fitting diagonal, reported even when it is not a witness.
    pub best: DiagonalMap,
    pub max_residual: f64,
    pub method: CommutationMethod,
}

impl fmt::Display for CommutationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            Some(w) => writeln!(
                f,
                "witness: delta_minus = {}, delta_plus = {}",
                format_complex(w.delta_minus),
                format_complex(w.delta_plus)
            )?,
            None => writeln!(
                f,
                "no witness (best fit delta_minus = {}, delta_plus = {})",
                format_complex(self.best.delta_minus),
                format_complex(self.best.delta_plus)
            )?,
        }
        writeln!(f, "max residual: {:e}", self.max_residual)?;
        write!(f, "method: {:?}", self.method)
    }
}

fn same_support(a: &BiPoly, b: &BiPoly) -> bool {
    a.len() == b.len() && a.terms().iter().zip(b.terms()).all(|(s, t)| (s.i, s.j) == (t.i, t.j))
}

/// Best `δ` with `target ≈ δ·base`: the ratio at the dominant coefficient of
/// `base` or the least-squares fit, whichever leaves the smaller residual.
fn fit_scalar(target: &BiPoly, base: &BiPoly) -> (Complex64, f64) {
    let mut candidates = Vec::with_capacity(2);
    if let Some(t) = base
        .terms()
        .iter()
        .max_by(|s, t| s.c.norm().total_cmp(&t.c.norm()))
    {
        let ratio = target.coeff(t.i, t.j) / t.c;
        if ratio.norm() > 0.0 {
            candidates.push(ratio);
        }
    }
    let norm = base.terms().iter().map(|t| t.c.norm_sqr()).sum::<f64>();
    if norm > 0.0 {
        let dot = base
            .terms()
            .iter()
            .map(|t| t.c.conj() * target.coeff(t.i, t.j))
            .sum::<Complex64>();
        candidates.push(dot / norm);
    }
    candidates
        .into_iter()
        .map(|d| (d, target.residual(&base.scale(d))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((Complex64::new(1.0, 0.0), target.residual(base)))
}

/// Decides `F∘H = C∘H∘F` for a diagonal `C = (δ₋x, δ₊y)` with `|δ±| = 1`.
pub fn commutator_diagonal(f: &HenonMap, h: &HenonMap) -> Result<CommutationReport> {
    let fh = compose_maps(f.symbolic_components(), h.symbolic_components())?;
    let hf = compose_maps(h.symbolic_components(), f.symbolic_components())?;
    let method = if same_support(&fh.first, &hf.first) && same_support(&fh.second, &hf.second) {
        CommutationMethod::CoefficientSolve
    } else {
        CommutationMethod::ExhaustiveCompare
    };
    let (dm, r1) = fit_scalar(&fh.first, &hf.first);
    let (dp, r2) = fit_scalar(&fh.second, &hf.second);
    let best = DiagonalMap::new(dm, dp);
    let max_residual = r1.max(r2);
    let scale = fh.max_coeff_modulus().max(hf.max_coeff_modulus());
    let ok = method == CommutationMethod::CoefficientSolve
        && max_residual <= SYMBOLIC_TOL * (1.0 + scale)
        && best.is_unimodular(SYMBOLIC_TOL);
    Ok(CommutationReport {
        witness: ok.then_some(best),
        best,
        max_residual,
        method,
    })
}

/// `δ₊ = c_H^{d_F} c_F / (c_F^{d_H} c_H)`.
pub fn delta_plus_from_coeffs(f: &HenonMap, h: &HenonMap) -> Complex64 {
    h.c_h().powu(f.degree()) * f.c_h() / (f.c_h().powu(h.degree()) * h.c_h())
}

/// `δ₋^{d_H d_F} = (c'_F)^{d_H} c'_H / ((c'_H)^{d_F} c'_F)`; the root is left to the caller.
pub fn delta_minus_power(f: &HenonMap, h: &HenonMap) -> Complex64 {
    f.c_h_prime().powu(h.degree()) * h.c_h_prime() / (h.c_h_prime().powu(f.degree()) * f.c_h_prime())
}

/// `F^{m0} = σ∘H^{n0}` with `σ` affine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterateMatch {
    pub m0: u32,
    pub n0: u32,
    pub sigma: AffineMap,
    pub residual: f64,
}

/// Affine `σ` minimising the coefficient mismatch of `target - σ∘base`,
/// returned only when the identity holds within tolerance.
pub fn solve_affine(target: &BiPolyPair, base: &BiPolyPair) -> Option<(AffineMap, f64)> {
    let mut rows: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    rows.insert((0, 0), 0);
    for p in [&base.first, &base.second, &target.first, &target.second] {
        for t in p.terms() {
            let next = rows.len();
            rows.entry((t.i, t.j)).or_insert(next);
        }
    }
    let zero = Complex64::default();
    let one = Complex64::new(1.0, 0.0);
    let column = |p: &BiPoly| {
        let mut v = vec![zero; rows.len()];
        for t in p.terms() {
            v[rows[&(t.i, t.j)]] = t.c;
        }
        v
    };
    let mut cols = [column(&base.first), column(&base.second), vec![zero; rows.len()]];
    cols[2][0] = one;
    let scales: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    if scales.contains(&0.0) {
        return None;
    }
    let a = DMatrix::from_fn(rows.len(), 3, |r, k| cols[k][r] / scales[k]);
    let rhs = DMatrix::from_fn(rows.len(), 2, |r, k| {
        [column(&target.first), column(&target.second)][k][r]
    });
    let sol = a.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let coef = |r: usize, k: usize| sol[(r, k)] / scales[r];
    let sigma = AffineMap::new(
        [[coef(0, 0), coef(1, 0)], [coef(0, 1), coef(1, 1)]],
        [coef(2, 0), coef(2, 1)],
    )
    .ok()?;
    let composed = compose_maps(&sigma.to_pair(), base).ok()?;
    let residual = target.residual(&composed);
    let scale = target.max_coeff_modulus().max(composed.max_coeff_modulus());
    (residual <= SYMBOLIC_TOL * (1.0 + scale)).then_some((sigma, residual))
}

fn capped_iterate(map: &HenonMap, k: u32, m: u32, n: u32, cap: usize) -> Result<BiPolyPair> {
    map.symbolic_components()
        .iterate(k, cap)
        .map_err(|e| match e {
            Error::TermExplosion { terms, cap } => Error::IterateCap { m, n, terms, cap },
            other => other,
        })
}

/// Pairs `(m, n)` in range with `a^m = b^n`, smallest common degree first.
pub fn degree_matches(a: u32, b: u32, max_m: u32, max_n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for m in 1..=max_m {
        let Some(lhs) = (a as u128).checked_pow(m) else { break };
        for n in 1..=max_n {
            match (b as u128).checked_pow(n) {
                Some(rhs) if rhs == lhs => out.push((lhs, m, n)),
                Some(rhs) if rhs > lhs => break,
                None => break,
                _ => {}
            }
        }
    }
    out.sort();
    out.into_iter().map(|(_, m, n)| (m, n)).collect()
}

/// First `(m, n)` with `d_F^m = d_H^n` for which `F^m` and `H^n` differ by an affine map.
pub fn iterate_match(f: &HenonMap, h: &HenonMap, max_m: u32, max_n: u32) -> Result<Option<IterateMatch>> {
    iterate_match_capped(f, h, max_m, max_n, DEFAULT_TERM_CAP)
}

/// [`iterate_match`] with an explicit term cap on the symbolic iterates.
pub fn iterate_match_capped(
    f: &HenonMap,
    h: &HenonMap,
    max_m: u32,
    max_n: u32,
    cap: usize,
) -> Result<Option<IterateMatch>> {
    if max_m < 1 || max_n < 1 {
        return Err(Error::Precondition("iterate_match needs maxM, maxN >= 1".into()));
    }
    for (m, n) in degree_matches(f.degree(), h.degree(), max_m, max_n) {
        let fm = capped_iterate(f, m, m, n, cap)?;
        let hn = capped_iterate(h, n, m, n, cap)?;
        if let Some((sigma, residual)) = solve_affine(&fm, &hn) {
            return Ok(Some(IterateMatch { m0: m, n0: n, sigma, residual }));
        }
    }
    Ok(None)
}

/// `F = σ_F∘R^r` with `d_F = d_R^r`, `r <= maxR`.
pub fn generator_decompose(f: &HenonMap, r: &HenonMap, max_r: u32) -> Result<Option<(AffineMap, u32)>> {
    if r.degree() < 2 {
        return Err(Error::Precondition("generator needs degree >= 2".into()));
    }
    for (one, k) in degree_matches(f.degree(), r.degree(), 1, max_r) {
        debug_assert_eq!(one, 1);
        let rk = capped_iterate(r, k, 1, k, DEFAULT_TERM_CAP)?;
        if let Some((sigma, _)) = solve_affine(f.symbolic_components(), &rk) {
            return Ok(Some((sigma, k)));
        }
    }
    Ok(None)
}

/// Escape classes of a grid point and of its image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassPair {
    pub i: usize,
    pub j: usize,
    pub point: Point2,
    pub point_class: EscapeClass,
    pub image_class: EscapeClass,
}

impl ClassPair {
    pub fn agrees(&self) -> bool {
        self.point_class.is_escaping() == self.image_class.is_escaping()
    }
}

/// Agreement statistics for one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct Agreement {
    pub total: usize,
    pub agreeing: usize,
    /// Pairs in which the point or its image is `BoundedSoFar`.
    pub undecided: usize,
    /// Pairs in which both classes are certified escapes.
    pub decided: usize,
    /// Agreeing pairs among the decided ones.
    pub decided_agreeing: usize,
    /// All pairs with differing classes; each is a resolution candidate, not a refutation.
    pub disagreements: Vec<ClassPair>,
}

impl Agreement {
    fn from_pairs(pairs: Vec<ClassPair>) -> Self {
        let total = pairs.len();
        let agreeing = pairs.iter().filter(|p| p.agrees()).count();
        let is_decided = |p: &ClassPair| p.point_class.is_escaping() && p.image_class.is_escaping();
        let decided = pairs.iter().filter(|p| is_decided(p)).count();
        let decided_agreeing = pairs.iter().filter(|p| is_decided(p) && p.agrees()).count();
        let disagreements = pairs.into_iter().filter(|p| !p.agrees()).collect();
        Agreement {
            total,
            agreeing,
            undecided: total - decided,
            decided,
            decided_agreeing,
            disagreements,
        }
    }

    /// Fraction of grid points with `class(F(z)) = class(z)`.
    pub fn fraction(&self) -> f64 {
        self.agreeing as f64 / self.total as f64
    }

    /// The same fraction over decided pairs (1 when there are none).
    pub fn decided_fraction(&self) -> f64 {
        if self.decided == 0 {
            1.0
        } else {
            self.decided_agreeing as f64 / self.decided as f64
        }
    }

    pub fn undecided_fraction(&self) -> f64 {
        self.undecided as f64 / self.total as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SharedSetReport {
    pub forward: Agreement,
    pub backward: Agreement,
}

impl SharedSetReport {
    pub fn get(&self, dir: Direction) -> &Agreement {
        match dir {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        }
    }
}

/// Compares `H`-escape classes of each grid point and its image under `F`.
pub fn shared_set_report<M: PlaneMap + Sync>(
    f: &M,
    h: &HenonMap,
    grid: &GridSpec,
    max_iter: u32,
) -> Result<SharedSetReport> {
    if grid.res < 16 {
        return Err(Error::Precondition("shared_set_report needs res >= 16".into()));
    }
    if max_iter < 1 {
        return Err(Error::Precondition("shared_set_report needs N >= 1".into()));
    }
    let run = |dir: Direction| -> Result<Agreement> {
        let pairs = grid
            .map_nodes(|i, j, z| {
                let point_class = classify(h, z, dir, max_iter)?;
                let image_class = match f.map_point(z) {
                    Ok(w) => classify(h, w, dir, max_iter)?,
                    Err(_) => EscapeClass::Escaping(0),
                };
                Ok(ClassPair {
                    i,
                    j,
                    point: z,
                    point_class,
                    image_class,
                })
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(Agreement::from_pairs(pairs))
    };
    Ok(SharedSetReport {
        forward: run(Direction::Forward)?,
        backward: run(Direction::Backward)?,
    })
}
