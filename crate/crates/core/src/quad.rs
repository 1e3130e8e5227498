//! Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error drops below `max(rel_tol * |estimate|, abs_floor)`. Integrands with
//! a sharp boundary layer at one end can start from a geometrically graded
//! partition, otherwise no node may ever land inside the layer.

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Which endpoint carries a boundary layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_intervals: usize,
    /// Start from `[x_{j+1}, x_j]` pieces with `|x_j - end| = width * 2^-j`, `j < levels`.
    pub graded: Option<(Endpoint, u32)>,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_floor: 1e-300,
            max_intervals: 4000,
            graded: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Piece {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Piece {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let mut breaks = vec![lo, hi];
    if let Some((end, levels)) = opts.graded {
        let width = hi - lo;
        let inner = (1..levels).map(|j| width * 0.5f64.powi(j as i32));
        breaks = match end {
            Endpoint::Lower => std::iter::once(lo)
                .chain(inner.rev().map(|d| lo + d))
                .chain(std::iter::once(hi))
                .collect(),
            Endpoint::Upper => std::iter::once(lo)
                .chain(inner.map(|d| hi - d))
                .chain(std::iter::once(hi))
                .collect(),
        };
        breaks.dedup();
    }
    let mut pieces: Vec<Piece> = breaks.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();

    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                achieved: error,
                requested: opts.rel_tol,
            });
        }
        let target = (opts.rel_tol * value.abs()).max(opts.abs_floor);
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                intervals: pieces.len(),
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("at least one piece");
        let p = pieces[worst];
        let mid = 0.5 * (p.lo + p.hi);
        if pieces.len() >= opts.max_intervals || mid <= p.lo || mid >= p.hi {
            return Err(Error::Quadrature {
                estimate: value,
                achieved: error / value.abs().max(opts.abs_floor),
                requested: opts.rel_tol,
            });
        }
        pieces[worst] = gk15(&f, p.lo, mid);
        pieces.push(gk15(&f, mid, p.hi));
    }
}
