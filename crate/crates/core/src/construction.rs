//! Geometry of the two Cantor constructions.
//!
//! Both sets start from the same 8 x 8 grid of cells of side 1/8; every
//! later level splits each construction interval into two halves and keeps
//! a middle sub-interval of each half. A cell is named symbolically by a
//! [`CellAddress`]; its square and frame are computed on demand.

use serde::Serialize;

use crate::{Error, Result};

/// First level of the construction. All level-indexed functions reject smaller levels.
pub const MIN_LEVEL: u32 = 3;

/// Largest symbolic depth; the refinement path of one axis must fit in a `u64`.
pub const MAX_DEPTH: u32 = 60;

/// Default cap on the number of cells a single enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

/// Absolute tolerance for the geometric invariants checked by [`validate_geometry`].
pub const GEOMETRY_TOL: f64 = 1e-12;

/// Which set of image-frame radii to use.
///
/// `Corrected` uses `r'_k = l_k / 2` and `R'_k = l_{k-1} / 4`, which put the
/// inner boundary of every image frame on its square and its outer boundary
/// on the parent quadrant. `Literal` uses `r'_k = 2^{-k+1} log^{-beta/2} k`
/// and `R'_k = 2^{-k+1} log^{-beta/2} (k-1)`; it does not produce a
/// homeomorphism and exists only as a regression guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiiConvention {
    #[default]
    Corrected,
    Literal,
}

/// The pair `(sigma, beta)` together with the truncation depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstructionParams {
    sigma: f64,
    beta: f64,
    depth_max: u32,
    radii: RadiiConvention,
}

impl ConstructionParams {
    pub fn new(sigma: f64, beta: f64, depth_max: u32) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 0.5) {
            return Err(Error::InvalidParams(format!(
                "sigma must lie in (0, 1/2), got {sigma}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if !(MIN_LEVEL..=MAX_DEPTH).contains(&depth_max) {
            return Err(Error::InvalidParams(format!(
                "depth must lie in [{MIN_LEVEL}, {MAX_DEPTH}], got {depth_max}"
            )));
        }
        Ok(Self {
            sigma,
            beta,
            depth_max,
            radii: RadiiConvention::Corrected,
        })
    }

    pub fn with_radii(mut self, radii: RadiiConvention) -> Self {
        self.radii = radii;
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn depth_max(&self) -> u32 {
        self.depth_max
    }

    pub fn radii_convention(&self) -> RadiiConvention {
        self.radii
    }

    /// `(1 - 2 sigma) / (2 sigma)`, the constant in front of the distortion bound.
    pub fn alpha(&self) -> f64 {
        (1.0 - 2.0 * self.sigma) / (2.0 * self.sigma)
    }

    /// Side length `sigma^k` of a level-`k` pre-image square.
    pub fn pre_side(&self, k: u32) -> f64 {
        self.sigma.powi(k as i32)
    }

    /// Side length `l_k = 2^-k (log k)^(-beta/2)` of a level-`k` image square.
    pub fn image_side(&self, k: u32) -> f64 {
        0.5f64.powi(k as i32) * (k as f64).ln().powf(-0.5 * self.beta)
    }

    pub fn side(&self, side: Side, k: u32) -> f64 {
        match side {
            Side::Pre => self.pre_side(k),
            Side::Image => self.image_side(k),
        }
    }

    /// `ln sigma^k`, usable far beyond the range of `f64`.
    pub fn ln_pre_side(&self, k: u64) -> f64 {
        k as f64 * self.sigma.ln()
    }

    /// `ln l_k`, usable far beyond the range of `f64`.
    pub fn ln_image_side(&self, k: u64) -> f64 {
        let kf = k as f64;
        -kf * std::f64::consts::LN_2 - 0.5 * self.beta * kf.ln().ln()
    }

    /// `(log(k-1) / log k)^(beta/2)`, the image side ratio `2 l_k / l_{k-1}`.
    pub fn shrink(&self, k: u64) -> f64 {
        (0.5 * self.beta * ln_log_ratio(k)).exp()
    }

    /// `1 - shrink(k)` without cancellation.
    pub fn one_minus_shrink(&self, k: u64) -> f64 {
        -(0.5 * self.beta * ln_log_ratio(k)).exp_m1()
    }

    /// `T_k = (log k / log(k-1))^(beta/2) - 1` without cancellation.
    pub fn t_k(&self, k: u64) -> f64 {
        (-0.5 * self.beta * ln_log_ratio(k)).exp_m1()
    }
}

/// `ln(log(k-1) / log k)` for `k >= 3`, accurate for very large `k`.
pub fn ln_log_ratio(k: u64) -> f64 {
    let kf = k as f64;
    ((-1.0 / kf).ln_1p() / kf.ln()).ln_1p()
}

pub(crate) fn check_level(k: u64) -> Result<()> {
    if k < MIN_LEVEL as u64 {
        Err(Error::Level { level: k })
    } else {
        Ok(())
    }
}

/// Which of the two constructions a geometric object belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Pre,
    Image,
}

/// Frame radii and the image side length of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Radii {
    /// `r_k`
    pub inner: f64,
    /// `R_k`
    pub outer: f64,
    /// `r'_k`
    pub inner_image: f64,
    /// `R'_k`
    pub outer_image: f64,
    /// `l_k`
    pub image_side: f64,
}

impl Radii {
    pub fn on(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Pre => (self.inner, self.outer),
            Side::Image => (self.inner_image, self.outer_image),
        }
    }
}

/// Closed-form radii of level `k`.
pub fn radii(k: u32, params: &ConstructionParams) -> Result<Radii> {
    check_level(k as u64)?;
    let inner = params.pre_side(k) / 2.0;
    let l_k = params.image_side(k);
    let outer = if k == MIN_LEVEL {
        1.0 / 16.0
    } else {
        params.pre_side(k - 1) / 4.0
    };
    let (inner_image, outer_image) = match params.radii {
        RadiiConvention::Corrected => {
            let outer_image = if k == MIN_LEVEL {
                1.0 / 16.0
            } else {
                params.image_side(k - 1) / 4.0
            };
            (l_k / 2.0, outer_image)
        }
        RadiiConvention::Literal => {
            let scale = 0.5f64.powi(k as i32 - 1);
            let outer_image = if k == MIN_LEVEL {
                1.0 / 16.0
            } else {
                scale * ((k - 1) as f64).ln().powf(-0.5 * params.beta)
            };
            (scale * (k as f64).ln().powf(-0.5 * params.beta), outer_image)
        }
    };
    Ok(Radii {
        inner,
        outer,
        inner_image,
        outer_image,
        image_side: l_k,
    })
}

/// Radii of level `k` expressed against per-side length scales.
///
/// Pre-image lengths are `exp(ln_pre_scale) * value`, image lengths
/// `exp(ln_image_scale) * value`. For `k >= 4` the scales are `sigma^(k-1)`
/// and `l_{k-1}`; level 3 uses unit scales. This keeps every level
/// representable, including `k` in the billions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledRadii {
    pub level: u64,
    pub ln_pre_scale: f64,
    pub ln_image_scale: f64,
    pub inner: f64,
    pub outer: f64,
    pub inner_image: f64,
    pub outer_image: f64,
    /// `outer_image - inner_image`, computed without cancellation.
    pub image_gap: f64,
}

impl ScaledRadii {
    pub fn new(k: u64, params: &ConstructionParams) -> Result<Self> {
        check_level(k)?;
        if k == MIN_LEVEL as u64 {
            let r = radii(MIN_LEVEL, params)?;
            return Ok(Self {
                level: k,
                ln_pre_scale: 0.0,
                ln_image_scale: 0.0,
                inner: r.inner,
                outer: r.outer,
                inner_image: r.inner_image,
                outer_image: r.outer_image,
                image_gap: r.outer_image - r.inner_image,
            });
        }
        let shrink = params.shrink(k);
        let gap = params.one_minus_shrink(k);
        let (inner_image, outer_image, image_gap) = match params.radii {
            RadiiConvention::Corrected => (shrink / 4.0, 0.25, gap / 4.0),
            RadiiConvention::Literal => (shrink, 1.0, gap),
        };
        Ok(Self {
            level: k,
            ln_pre_scale: params.ln_pre_side(k - 1),
            ln_image_scale: params.ln_image_side(k - 1),
            inner: params.sigma / 2.0,
            outer: 0.25,
            inner_image,
            outer_image,
            image_gap,
        })
    }

    /// Scale-free frame map coefficients `(a_hat, b_hat)`.
    ///
    /// The true coefficients are `a = a_hat * image_scale / pre_scale` and
    /// `b = b_hat * image_scale`; the distortion `1 + b / (a rho)` equals
    /// `1 + b_hat / (a_hat rho_hat)` with `rho = pre_scale * rho_hat`.
    pub fn coefficients(&self) -> (f64, f64) {
        let width = self.outer - self.inner;
        let a = self.image_gap / width;
        let b = (self.outer * self.inner_image - self.outer_image * self.inner) / width;
        (a, b)
    }
}

/// One of the two halves of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Half {
    Low,
    High,
}

impl Half {
    fn sign(self) -> f64 {
        match self {
            Half::Low => -1.0,
            Half::High => 1.0,
        }
    }
}

/// Symbolic address of a level-`k` construction square.
///
/// Per axis: an octant index in `0..8` chosen at level 3, then `k - 3`
/// binary refinements stored most-significant-first in `path`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellAddress {
    level: u32,
    octant: [u8; 2],
    path: [u64; 2],
}

impl CellAddress {
    pub fn root(octant: [u8; 2]) -> Result<Self> {
        Self::new(MIN_LEVEL, octant, [0, 0])
    }

    pub fn new(level: u32, octant: [u8; 2], path: [u64; 2]) -> Result<Self> {
        if !(MIN_LEVEL..=MAX_DEPTH).contains(&level) {
            return Err(Error::Address(format!(
                "level {level} outside [{MIN_LEVEL}, {MAX_DEPTH}]"
            )));
        }
        if octant.iter().any(|&o| o > 7) {
            return Err(Error::Address(format!("octant {octant:?} outside 0..8")));
        }
        let bits = level - MIN_LEVEL;
        if path.iter().any(|&p| bits < 64 && p >> bits != 0) {
            return Err(Error::Address(format!(
                "refinement path {path:?} longer than {bits} steps"
            )));
        }
        Ok(Self {
            level,
            octant,
            path,
        })
    }

    /// Address number `index` in the deterministic level-`level` order:
    /// octant pair major (axis 0 first), then refinement paths lexicographically.
    pub fn from_level_index(level: u32, index: u128) -> Result<Self> {
        let bits = level.checked_sub(MIN_LEVEL).ok_or(Error::Level {
            level: level as u64,
        })?;
        let per_axis = 1u128 << bits;
        let block = per_axis * per_axis;
        let octant = index / block;
        if octant >= 64 {
            return Err(Error::Address(format!(
                "index {index} out of range at level {level}"
            )));
        }
        let rem = index % block;
        Self::new(
            level,
            [(octant / 8) as u8, (octant % 8) as u8],
            [(rem / per_axis) as u64, (rem % per_axis) as u64],
        )
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn octant(&self) -> [u8; 2] {
        self.octant
    }

    pub fn path(&self) -> [u64; 2] {
        self.path
    }

    /// Position of the interval in `0..2^level` along `axis`.
    pub fn axis_index(&self, axis: usize) -> u64 {
        ((self.octant[axis] as u64) << (self.level - MIN_LEVEL)) | self.path[axis]
    }

    /// Refinement chosen when passing from level `3 + step` to `4 + step`.
    pub fn choice(&self, axis: usize, step: u32) -> Half {
        let shift = self.level - MIN_LEVEL - 1 - step;
        if (self.path[axis] >> shift) & 1 == 1 {
            Half::High
        } else {
            Half::Low
        }
    }

    pub fn child(&self, choice: [Half; 2]) -> Result<Self> {
        if self.level >= MAX_DEPTH {
            return Err(Error::Address(format!(
                "cannot refine past level {MAX_DEPTH}"
            )));
        }
        let bit = |h: Half| (h == Half::High) as u64;
        Ok(Self {
            level: self.level + 1,
            octant: self.octant,
            path: [
                (self.path[0] << 1) | bit(choice[0]),
                (self.path[1] << 1) | bit(choice[1]),
            ],
        })
    }

    /// The four children in `(low, low), (low, high), (high, low), (high, high)` order.
    pub fn children(&self) -> Result<[Self; 4]> {
        use Half::*;
        Ok([
            self.child([Low, Low])?,
            self.child([Low, High])?,
            self.child([High, Low])?,
            self.child([High, High])?,
        ])
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > MIN_LEVEL).then(|| Self {
            level: self.level - 1,
            octant: self.octant,
            path: [self.path[0] >> 1, self.path[1] >> 1],
        })
    }

    pub fn is_child_of(&self, other: &Self) -> bool {
        self.parent().as_ref() == Some(other)
    }

    /// Textual path of one axis, e.g. `5:011` (octant, then refinement bits).
    pub fn path_string(&self, axis: usize) -> String {
        let mut s = format!("{}:", self.octant[axis]);
        for step in 0..(self.level - MIN_LEVEL) {
            s.push(match self.choice(axis, step) {
                Half::Low => '0',
                Half::High => '1',
            });
        }
        s
    }

    /// Inverse of [`CellAddress::path_string`] for both axes.
    pub fn parse(ax0: &str, ax1: &str) -> Result<Self> {
        fn axis(s: &str) -> Result<(u8, u64, u32)> {
            let (oct, bits) = s
                .split_once(':')
                .ok_or_else(|| Error::Address(format!("missing ':' in {s:?}")))?;
            let oct: u8 = oct
                .parse()
                .map_err(|_| Error::Address(format!("bad octant in {s:?}")))?;
            let mut path = 0u64;
            for c in bits.chars() {
                path = (path << 1)
                    | match c {
                        '0' => 0,
                        '1' => 1,
                        _ => return Err(Error::Address(format!("bad refinement in {s:?}"))),
                    };
            }
            Ok((oct, path, bits.len() as u32))
        }
        let (o0, p0, n0) = axis(ax0)?;
        let (o1, p1, n1) = axis(ax1)?;
        if n0 != n1 || n0 > MAX_DEPTH - MIN_LEVEL {
            return Err(Error::Address(format!(
                "axis paths {ax0:?} and {ax1:?} have different or excessive lengths"
            )));
        }
        Self::new(MIN_LEVEL + n0, [o0, o1], [p0, p1])
    }

    fn axis_center(&self, axis: usize, side: impl Fn(u32) -> f64) -> f64 {
        let mut c = (self.octant[axis] as f64 + 0.5) / 8.0;
        for step in 0..(self.level - MIN_LEVEL) {
            c += self.choice(axis, step).sign() * side(MIN_LEVEL + step) / 4.0;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub center: f64,
    pub half_length: f64,
}

/// Axis-aligned square given by its center and side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Square {
    pub center: [f64; 2],
    pub side: f64,
}

impl Square {
    pub fn half(&self) -> f64 {
        self.side / 2.0
    }

    pub fn interval(&self, axis: usize) -> Interval {
        Interval {
            center: self.center[axis],
            half_length: self.half(),
        }
    }

    /// Whether `other` lies in the open interior of `self`.
    pub fn strictly_contains(&self, other: &Square) -> bool {
        (0..2).all(|i| (other.center[i] - self.center[i]).abs() + other.half() < self.half())
    }

    pub fn contains_point(&self, x: [f64; 2]) -> bool {
        sup_dist(x, self.center) <= self.half()
    }
}

/// The sup-norm annulus `{ inner < |x - center|_inf < outer }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frame {
    pub center: [f64; 2],
    pub inner: f64,
    pub outer: f64,
}

impl Frame {
    pub fn outer_square(&self) -> Square {
        Square {
            center: self.center,
            side: 2.0 * self.outer,
        }
    }

    pub fn area(&self) -> f64 {
        4.0 * (self.outer * self.outer - self.inner * self.inner)
    }
}

pub fn sup_dist(x: [f64; 2], y: [f64; 2]) -> f64 {
    (x[0] - y[0]).abs().max((x[1] - y[1]).abs())
}

fn check_depth(addr: &CellAddress, params: &ConstructionParams) -> Result<()> {
    if addr.level > params.depth_max {
        return Err(Error::TooDeep {
            level: addr.level as u64,
            depth_max: params.depth_max,
        });
    }
    Ok(())
}

pub fn preimage_square(addr: &CellAddress, params: &ConstructionParams) -> Result<Square> {
    square(addr, params, Side::Pre)
}

pub fn image_square(addr: &CellAddress, params: &ConstructionParams) -> Result<Square> {
    square(addr, params, Side::Image)
}

pub fn square(addr: &CellAddress, params: &ConstructionParams, side: Side) -> Result<Square> {
    check_depth(addr, params)?;
    let len = |k| params.side(side, k);
    Ok(Square {
        center: [addr.axis_center(0, len), addr.axis_center(1, len)],
        side: len(addr.level),
    })
}

pub fn frame(addr: &CellAddress, params: &ConstructionParams, side: Side) -> Result<Frame> {
    let sq = square(addr, params, side)?;
    let (inner, outer) = radii(addr.level, params)?.on(side);
    Ok(Frame {
        center: sq.center,
        inner,
        outer,
    })
}

/// All level-`k` addresses in deterministic order.
pub fn enumerate_cells(
    k: u32,
    params: &ConstructionParams,
    cap: u64,
) -> Result<impl Iterator<Item = CellAddress>> {
    check_level(k as u64)?;
    if k > params.depth_max {
        return Err(Error::TooDeep {
            level: k as u64,
            depth_max: params.depth_max,
        });
    }
    let count = 1u128 << (2 * k);
    if count > cap as u128 {
        return Err(Error::EnumerationTooLarge { level: k, cap });
    }
    Ok((0..count).map(move |i| CellAddress::from_level_index(k, i).expect("index in range")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    RadiiOrder,
    InsideUnitSquare,
    Nesting,
    InnerBoundary,
    TilesCell,
    SiblingDisjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub level: u32,
    pub side: Side,
    pub address: String,
    pub invariant: Invariant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub k_max: u32,
    pub cells_checked: u64,
    pub violation_count: u64,
    /// The first violations found (at most [`ValidationReport::KEPT`]).
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub const KEPT: usize = 64;

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    fn record(&mut self, addr: &CellAddress, side: Side, invariant: Invariant) {
        self.violation_count += 1;
        if self.violations.len() < Self::KEPT {
            self.violations.push(Violation {
                level: addr.level,
                side,
                address: format!("{}|{}", addr.path_string(0), addr.path_string(1)),
                invariant,
            });
        }
    }
}

/// Checks the nesting, frame and tiling invariants on both sides for all
/// levels `3..=k_max`.
///
/// Every cell is checked against the region it must tile: the level-3 grid
/// cell, or the parent quadrant for deeper levels. Sibling frames are
/// checked pairwise for disjoint interiors.
pub fn validate_geometry(k_max: u32, params: &ConstructionParams) -> Result<ValidationReport> {
    check_level(k_max as u64)?;
    if k_max > params.depth_max {
        return Err(Error::TooDeep {
            level: k_max as u64,
            depth_max: params.depth_max,
        });
    }
    let mut report = ValidationReport {
        k_max,
        cells_checked: 0,
        violation_count: 0,
        violations: Vec::new(),
    };
    let unit = Square {
        center: [0.5, 0.5],
        side: 1.0,
    };
    for side in [Side::Pre, Side::Image] {
        let mut roots = Vec::with_capacity(64);
        for addr in enumerate_cells(MIN_LEVEL, params, u64::MAX)? {
            let cell = Square {
                center: [
                    (addr.octant[0] as f64 + 0.5) / 8.0,
                    (addr.octant[1] as f64 + 0.5) / 8.0,
                ],
                side: 1.0 / 8.0,
            };
            let fr = check_cell(&addr, &cell, &unit, side, params, &mut report)?;
            roots.push((addr, fr));
        }
        check_siblings(&roots, side, &mut report);

        for k in (MIN_LEVEL + 1)..=k_max {
            for parent in enumerate_cells(k - 1, params, u64::MAX)? {
                let psq = square(&parent, params, side)?;
                let q = psq.side / 4.0;
                let mut siblings = Vec::with_capacity(4);
                for child in parent.children()? {
                    let last = k - MIN_LEVEL - 1;
                    let quadrant = Square {
                        center: [
                            psq.center[0] + child.choice(0, last).sign() * q,
                            psq.center[1] + child.choice(1, last).sign() * q,
                        ],
                        side: psq.side / 2.0,
                    };
                    let fr = check_cell(&child, &quadrant, &unit, side, params, &mut report)?;
                    siblings.push((child, fr));
                }
                check_siblings(&siblings, side, &mut report);
            }
        }
    }
    Ok(report)
}

fn check_cell(
    addr: &CellAddress,
    cell: &Square,
    unit: &Square,
    side: Side,
    params: &ConstructionParams,
    report: &mut ValidationReport,
) -> Result<Frame> {
    report.cells_checked += 1;
    let sq = square(addr, params, side)?;
    let fr = frame(addr, params, side)?;
    if !(0.0 < fr.inner && fr.inner < fr.outer) {
        report.record(addr, side, Invariant::RadiiOrder);
    }
    if !unit.strictly_contains(&sq) {
        report.record(addr, side, Invariant::InsideUnitSquare);
    }
    if !cell.strictly_contains(&sq) {
        report.record(addr, side, Invariant::Nesting);
    }
    if (fr.inner - sq.half()).abs() > GEOMETRY_TOL {
        report.record(addr, side, Invariant::InnerBoundary);
    }
    if sup_dist(fr.center, cell.center) > GEOMETRY_TOL || (fr.outer - cell.half()).abs() > GEOMETRY_TOL
    {
        report.record(addr, side, Invariant::TilesCell);
    }
    Ok(fr)
}

fn check_siblings(frames: &[(CellAddress, Frame)], side: Side, report: &mut ValidationReport) {
    for (i, (addr, a)) in frames.iter().enumerate() {
        for (_, b) in &frames[i + 1..] {
            if sup_dist(a.center, b.center) < a.outer + b.outer - GEOMETRY_TOL {
                report.record(addr, side, Invariant::SiblingDisjoint);
            }
        }
    }
}
