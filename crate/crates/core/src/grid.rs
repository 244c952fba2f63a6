//! Rectangular sample grids in a complex line or the real plane of C²,
//! evaluated row-parallel and assembled by index.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{green_lenient, EscapeClass};
use crate::error::{Error, Result};
use crate::henon::{Direction, HenonMap, Point2};
use crate::poly::{format_f64, parse_complex};

/// The plane a grid lives in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slice {
    /// `x` fixed, axes are `(Re y, Im y)`.
    FixX(Complex64),
    /// `y` fixed, axes are `(Re x, Im x)`.
    FixY(Complex64),
    /// Axes are `(Re x, Re y)` with zero imaginary parts.
    RealPlane,
}

impl Slice {
    pub fn point(&self, u: f64, v: f64) -> Point2 {
        let w = Complex64::new(u, v);
        match *self {
            Slice::FixX(c) => Point2::new(c, w),
            Slice::FixY(c) => Point2::new(w, c),
            Slice::RealPlane => Point2::real(u, v),
        }
    }
}

impl FromStr for Slice {
    type Err = Error;

    /// `x=<complex>`, `y=<complex>` or `real`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "real" {
            return Ok(Slice::RealPlane);
        }
        match s.split_once('=') {
            Some((var, value)) if var.trim() == "x" => Ok(Slice::FixX(parse_complex(value)?)),
            Some((var, value)) if var.trim() == "y" => Ok(Slice::FixY(parse_complex(value)?)),
            _ => Err(Error::Precondition(format!(
                "slice must be `x=<c>`, `y=<c>` or `real`, got `{s}`"
            ))),
        }
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slice::FixX(c) => write!(f, "x={c}"),
            Slice::FixY(c) => write!(f, "y={c}"),
            Slice::RealPlane => write!(f, "real"),
        }
    }
}

/// `[min1, max1] × [min2, max2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub min1: f64,
    pub max1: f64,
    pub min2: f64,
    pub max2: f64,
}

impl Window {
    pub fn new(min1: f64, max1: f64, min2: f64, max2: f64) -> Result<Self> {
        let ok = [min1, max1, min2, max2].iter().all(|v| v.is_finite()) && min1 < max1 && min2 < max2;
        if !ok {
            return Err(Error::Precondition(format!(
                "degenerate window [{min1}, {max1}] x [{min2}, {max2}]"
            )));
        }
        Ok(Window { min1, max1, min2, max2 })
    }

    pub fn square(half: f64) -> Result<Self> {
        Window::new(-half, half, -half, half)
    }
}

impl FromStr for Window {
    type Err = Error;

    /// `min1,max1,min2,max2`.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Precondition(format!("window `{s}`: {e}")))?;
        match parts[..] {
            [a, b, c, d] => Window::new(a, b, c, d),
            _ => Err(Error::Precondition(format!(
                "window needs four numbers min1,max1,min2,max2, got `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub slice: Slice,
    pub window: Window,
    pub res: usize,
}

impl GridSpec {
    pub fn new(slice: Slice, window: Window, res: usize) -> Result<Self> {
        if res < 2 {
            return Err(Error::Precondition("grid needs res >= 2".into()));
        }
        Ok(GridSpec { slice, window, res })
    }

    /// Axis coordinates of node `(i, j)`; both endpoints are nodes.
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        let t = |k: usize, lo: f64, hi: f64| lo + (hi - lo) * k as f64 / (self.res - 1) as f64;
        (
            t(i, self.window.min1, self.window.max1),
            t(j, self.window.min2, self.window.max2),
        )
    }

    pub fn point(&self, i: usize, j: usize) -> Point2 {
        let (u, v) = self.coords(i, j);
        self.slice.point(u, v)
    }

    pub fn len(&self) -> usize {
        self.res * self.res
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Evaluates `f` on every node, row `j` at a time in parallel. The result
    /// is ordered with `j` outer and `i` inner regardless of scheduling.
    pub fn map_nodes<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, usize, Point2) -> T + Sync,
    {
        (0..self.res)
            .into_par_iter()
            .map(|j| {
                (0..self.res)
                    .map(|i| f(i, j, self.point(i, j)))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }
}

/// One evaluated grid node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSample {
    pub i: usize,
    pub j: usize,
    pub point: Point2,
    pub value: f64,
    pub error: f64,
    pub class: EscapeClass,
}

/// Green's function on every node. Nodes whose tolerance is unreachable keep
/// their best value and honest error bound.
pub fn evaluate_green(
    map: &HenonMap,
    spec: &GridSpec,
    dir: Direction,
    tol: f64,
    max_iter: u32,
) -> Result<Vec<GridSample>> {
    if !(tol >= 1e-12) || max_iter < 1 {
        return Err(Error::Precondition("grid evaluation needs tol >= 1e-12 and maxIter >= 1".into()));
    }
    spec.map_nodes(|i, j, z| {
        let (g, _) = green_lenient(map, z, dir, tol, max_iter)?;
        Ok(GridSample {
            i,
            j,
            point: z,
            value: g.value,
            error: g.error_bound,
            class: g.class,
        })
    })
    .into_iter()
    .collect()
}

pub const CSV_HEADER: &str = "i,j,c1_re,c1_im,c2_re,c2_im,value,error,class";

pub fn write_csv<W: Write>(out: &mut W, samples: &[GridSample]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.i,
            s.j,
            format_f64(s.point.x.re),
            format_f64(s.point.x.im),
            format_f64(s.point.y.re),
            format_f64(s.point.y.im),
            format_f64(s.value),
            format_f64(s.error),
            s.class.label()
        )?;
    }
    Ok(())
}

/// Binary PGM, top row at the largest second-axis value.
pub fn pgm_bytes<F: Fn(&GridSample) -> u8>(samples: &[GridSample], res: usize, pixel: F) -> Vec<u8> {
    let mut out = format!("P5\n{res} {res}\n255\n").into_bytes();
    let header = out.len();
    out.resize(header + res * res, 0);
    for s in samples {
        out[header + (res - 1 - s.j) * res + s.i] = pixel(s);
    }
    out
}

/// Grey levels `round(255 min(1, value/gmax))`, `gmax` defaulting to the observed max.
pub fn green_pgm(samples: &[GridSample], res: usize, gmax: Option<f64>) -> Vec<u8> {
    let gmax = gmax.unwrap_or_else(|| samples.iter().map(|s| s.value).fold(0.0, f64::max));
    pgm_bytes(samples, res, |s| {
        if gmax > 0.0 {
            (255.0 * (s.value / gmax).min(1.0)).round() as u8
        } else {
            0
        }
    })
}

/// White (255) exactly on nodes with value below `c`.
pub fn mask_pgm(samples: &[GridSample], res: usize, c: f64) -> Vec<u8> {
    pgm_bytes(samples, res, |s| if s.value < c { 255 } else { 0 })
}
