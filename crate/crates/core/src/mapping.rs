//! The piecewise homeomorphism carrying the pre-image Cantor set onto the image set.
//!
//! On a level-`k` frame the map is a sup-norm radial stretch
//! `x -> (a_k |x - q|_inf + b_k) (x - q) / |x - q|_inf + q'`; on a truncation
//! square it is the similarity `x -> (r'_k / r_k)(x - q) + q'`. Deeper levels
//! only refine the inside of the squares, so the truncation at depth `D`
//! is obtained by descending from the level-3 grid cell of a point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::construction::{
    self, check_level, radii, sup_dist, CellAddress, ConstructionParams, Half, ScaledRadii, Side,
    MIN_LEVEL,
};
use crate::{Error, Result};

/// Affine radial profile `rho -> a rho + b` of the level-`k` frame map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameMapCoeffs {
    pub a: f64,
    pub b: f64,
    pub level: u32,
}

pub fn coeffs(k: u32, params: &ConstructionParams) -> Result<FrameMapCoeffs> {
    let scaled = ScaledRadii::new(k as u64, params)?;
    let (a_hat, b_hat) = scaled.coefficients();
    Ok(FrameMapCoeffs {
        a: a_hat * (scaled.ln_image_scale - scaled.ln_pre_scale).exp(),
        b: b_hat * scaled.ln_image_scale.exp(),
        level: k,
    })
}

/// `r'_k / r_k`, the scale of the similarity on a level-`k` truncation square.
pub fn similarity_scale(k: u32, params: &ConstructionParams) -> Result<f64> {
    let r = radii(k, params)?;
    Ok(r.inner_image / r.inner)
}

/// Radial stretch of the frame centered at `q` onto the frame centered at `q_image`.
pub fn frame_map(
    x: [f64; 2],
    q: [f64; 2],
    q_image: [f64; 2],
    c: &FrameMapCoeffs,
) -> Result<[f64; 2]> {
    let rho = sup_dist(x, q);
    if rho == 0.0 {
        return Err(Error::Singular);
    }
    let s = (c.a * rho + c.b) / rho;
    Ok([
        q_image[0] + s * (x[0] - q[0]),
        q_image[1] + s * (x[1] - q[1]),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// Closed frame of `address`.
    Frame,
    /// Open square of `address` at the truncation depth.
    Square,
}

/// Where a point sits in the truncated construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub region: Region,
    pub address: CellAddress,
    pub center: [f64; 2],
    pub image_center: [f64; 2],
    /// `|x - center|_inf`
    pub radius: f64,
}

impl Location {
    /// Whether the point lies on a frame boundary, where the fields are not defined.
    pub fn on_skeleton(&self, params: &ConstructionParams) -> Result<bool> {
        let r = radii(self.address.level(), params)?;
        Ok(self.region == Region::Frame && (self.radius == r.inner || self.radius == r.outer))
    }
}

fn check_point(x: [f64; 2]) -> Result<()> {
    if (0..2).all(|i| (0.0..=1.0).contains(&x[i])) {
        Ok(())
    } else {
        Err(Error::OutsideUnitSquare { x: x[0], y: x[1] })
    }
}

fn check_depth(depth: u32, params: &ConstructionParams) -> Result<()> {
    check_level(depth as u64)?;
    if depth > params.depth_max() {
        return Err(Error::TooDeep {
            level: depth as u64,
            depth_max: params.depth_max(),
        });
    }
    Ok(())
}

/// Finds the frame or truncation square containing `x`. Frames are closed,
/// so boundary points resolve to the frame.
pub fn locate(x: [f64; 2], depth: u32, params: &ConstructionParams) -> Result<Location> {
    check_point(x)?;
    check_depth(depth, params)?;
    let octant = [0, 1].map(|i| ((x[i] * 8.0).floor() as u8).min(7));
    let mut address = CellAddress::root(octant)?;
    let mut center = octant.map(|o| (o as f64 + 0.5) / 8.0);
    let mut image_center = center;
    loop {
        let level = address.level();
        let radius = sup_dist(x, center);
        let inner = params.pre_side(level) / 2.0;
        let region = if radius >= inner {
            Some(Region::Frame)
        } else if level == depth {
            Some(Region::Square)
        } else {
            None
        };
        if let Some(region) = region {
            return Ok(Location {
                region,
                address,
                center,
                image_center,
                radius,
            });
        }
        let choice = [0, 1].map(|i| if x[i] >= center[i] { Half::High } else { Half::Low });
        let pre_off = params.pre_side(level) / 4.0;
        let image_off = params.image_side(level) / 4.0;
        for i in 0..2 {
            let sign = if choice[i] == Half::High { 1.0 } else { -1.0 };
            center[i] += sign * pre_off;
            image_center[i] += sign * image_off;
        }
        address = address.child(choice)?;
    }
}

/// The truncated map `f_depth`.
pub fn evaluate(x: [f64; 2], depth: u32, params: &ConstructionParams) -> Result<[f64; 2]> {
    let loc = locate(x, depth, params)?;
    apply(x, &loc, params)
}

fn apply(x: [f64; 2], loc: &Location, params: &ConstructionParams) -> Result<[f64; 2]> {
    let k = loc.address.level();
    match loc.region {
        Region::Frame => frame_map(x, loc.center, loc.image_center, &coeffs(k, params)?),
        Region::Square => {
            let s = similarity_scale(k, params)?;
            Ok([0, 1].map(|i| loc.image_center[i] + s * (x[i] - loc.center[i])))
        }
    }
}

/// Pointwise derivative norm, Jacobian and distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub point: [f64; 2],
    pub image: [f64; 2],
    pub derivative_norm: f64,
    pub jacobian: f64,
    pub distortion: f64,
}

/// `(|Df|, J_f, K_f)` of a frame map at sup-norm radius `rho`.
///
/// With `t = a + b / rho` these are `max(a, t)`, `a t` and `max(t/a, a/t)`;
/// for `b > 0` the distortion is `1 + b / (a rho)`.
pub fn frame_fields(rho: f64, c: &FrameMapCoeffs) -> (f64, f64, f64) {
    let t = c.a + c.b / rho;
    (c.a.max(t), c.a * t, (t / c.a).max(c.a / t))
}

pub fn fields(x: [f64; 2], depth: u32, params: &ConstructionParams) -> Result<FieldSample> {
    let loc = locate(x, depth, params)?;
    fields_at(x, &loc, params)
}

pub fn fields_at(x: [f64; 2], loc: &Location, params: &ConstructionParams) -> Result<FieldSample> {
    let k = loc.address.level();
    let image = apply(x, loc, params)?;
    let (derivative_norm, jacobian, distortion) = match loc.region {
        Region::Frame => {
            if loc.radius == 0.0 {
                return Err(Error::Singular);
            }
            frame_fields(loc.radius, &coeffs(k, params)?)
        }
        Region::Square => {
            let s = similarity_scale(k, params)?;
            (s, s * s, 1.0)
        }
    };
    Ok(FieldSample {
        point: x,
        image,
        derivative_norm,
        jacobian,
        distortion,
    })
}

/// A point of the image Cantor set given by a nested address path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CantorPoint {
    pub point: [f64; 2],
    pub level: u32,
    /// Per-axis distance bound to the limit point, `l_level / 2`.
    pub error_bound: f64,
}

/// Image of the pre-image Cantor point with the given address path.
///
/// The path starts at level 3 and each entry must refine the previous one.
/// Consumption stops at the end of the path or at the depth limit.
pub fn cantor_image<I>(path: I, params: &ConstructionParams) -> Result<CantorPoint>
where
    I: IntoIterator<Item = CellAddress>,
{
    let mut last: Option<CellAddress> = None;
    for addr in path {
        match &last {
            None if addr.level() != MIN_LEVEL => {
                return Err(Error::Address(format!(
                    "path starts at level {}, expected {MIN_LEVEL}",
                    addr.level()
                )))
            }
            Some(prev) if !addr.is_child_of(prev) => {
                return Err(Error::Address(format!(
                    "{}|{} does not refine {}|{}",
                    addr.path_string(0),
                    addr.path_string(1),
                    prev.path_string(0),
                    prev.path_string(1)
                )))
            }
            _ => {}
        }
        last = Some(addr);
        if addr.level() >= params.depth_max() {
            break;
        }
    }
    let addr = last.ok_or_else(|| Error::Address("empty path".into()))?;
    let sq = construction::image_square(&addr, params)?;
    Ok(CantorPoint {
        point: sq.center,
        level: addr.level(),
        error_bound: sq.side / 2.0,
    })
}

/// Exact frame supremum of the distortion next to its asymptotic bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupDistortion {
    pub level: u64,
    pub exact: f64,
    /// `(1 - 2 sigma)/(2 sigma) / T_k`
    pub asymptotic_bound: f64,
    pub ratio: f64,
    /// `b_k <= 0`: the one-sided formula does not apply yet and `exact` is
    /// the two-sided maximum over the frame.
    pub pre_asymptotic: bool,
}

pub fn sup_distortion(k: u64, params: &ConstructionParams) -> Result<SupDistortion> {
    if k < 4 {
        return Err(Error::Level { level: k });
    }
    let s = ScaledRadii::new(k, params)?;
    let (a, b) = s.coefficients();
    let pre_asymptotic = b <= 0.0;
    let exact = if pre_asymptotic {
        [s.inner, s.outer]
            .map(|rho| {
                let t = a + b / rho;
                (t / a).max(a / t)
            })
            .into_iter()
            .fold(1.0, f64::max)
    } else {
        1.0 + b / (a * s.inner)
    };
    let asymptotic_bound = params.alpha() / params.t_k(k);
    Ok(SupDistortion {
        level: k,
        exact,
        asymptotic_bound,
        ratio: exact / asymptotic_bound,
        pre_asymptotic,
    })
}

/// Same as [`sup_distortion`]; the pair `(exact, asymptotic_bound)` and their ratio.
pub fn compare_kk(k: u64, params: &ConstructionParams) -> Result<SupDistortion> {
    sup_distortion(k, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub level: u32,
    pub samples: usize,
    /// Largest `|frame_map(x) - parent_similarity(x)|_inf` in unit-square coordinates.
    pub max_abs: f64,
    /// `max_abs` relative to the outer image radius `R'_k`.
    pub max_rel: f64,
}

/// Compares the level-`k` frame map with the level-`(k-1)` similarity on
/// random points of outer frame boundaries, where the two must agree.
pub fn consistency_check(
    k: u32,
    n_samples: usize,
    params: &ConstructionParams,
    seed: u64,
) -> Result<ConsistencyReport> {
    if k < 4 {
        return Err(Error::Level { level: k as u64 });
    }
    check_depth(k, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((k as u64) << 32));
    let c = coeffs(k, params)?;
    let r = radii(k, params)?;
    let parent_scale = similarity_scale(k - 1, params)?;
    let bits = k - MIN_LEVEL;
    let mut max_abs = 0.0f64;
    for _ in 0..n_samples {
        let octant = [rng.gen_range(0..8u8), rng.gen_range(0..8u8)];
        let path = [0, 1].map(|_| rng.gen::<u64>() >> (64 - bits));
        let addr = CellAddress::new(k, octant, path)?;
        let parent = addr.parent().expect("k >= 4");
        let q = construction::square(&addr, params, Side::Pre)?.center;
        let q_img = construction::square(&addr, params, Side::Image)?.center;
        let pq = construction::square(&parent, params, Side::Pre)?.center;
        let pq_img = construction::square(&parent, params, Side::Image)?.center;

        let u = rng.gen_range(-1.0..=1.0) * r.outer;
        let offset = match rng.gen_range(0..4) {
            0 => [r.outer, u],
            1 => [-r.outer, u],
            2 => [u, r.outer],
            _ => [u, -r.outer],
        };
        let x = [q[0] + offset[0], q[1] + offset[1]];
        let stretched = frame_map(x, q, q_img, &c)?;
        let similar = [0, 1].map(|i| pq_img[i] + parent_scale * (x[i] - pq[i]));
        max_abs = max_abs.max(sup_dist(stretched, similar));
    }
    Ok(ConsistencyReport {
        level: k,
        samples: n_samples,
        max_abs,
        max_rel: max_abs / r.outer_image,
    })
}
