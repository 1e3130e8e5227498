//! Integrals over frames, the two integrability series and their ratio limits.
//!
//! Every integrand on a frame depends on `x` only through `rho = |x - q|_inf`,
//! and the sup-norm circle of radius `rho` has length `8 rho`, so frame
//! integrals reduce to `int_r^R g(rho) 8 rho d rho`. Series terms for large
//! `k` are tracked as natural logarithms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::construction::{check_level, radii, CellAddress, ConstructionParams, ScaledRadii, Side};
use crate::mapping::{self, coeffs, similarity_scale, FieldSample, Region};
use crate::quad::{self, Endpoint, QuadOptions};
use crate::{Error, Result};

/// The Orlicz-type functional `A(t) = p t / (1 + log t) - p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubexpFunctional {
    p: f64,
}

impl SubexpFunctional {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParams(format!("p must be positive, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn a(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(Error::InvalidParams(format!("A(t) needs t >= 1, got {t}")));
        }
        Ok(self.exponent(t) - self.p)
    }

    /// `p K / (1 + log K)`, the log of the integrand `exp(p K / (1 + log K))`.
    pub fn exponent(&self, distortion: f64) -> f64 {
        self.p * distortion / (1.0 + distortion.ln())
    }
}

pub fn subexp_a(t: f64, p: f64) -> Result<f64> {
    SubexpFunctional::new(p)?.a(t)
}

/// Image frame area `4 (R'^2 - r'^2)`.
pub fn image_frame_area(k: u32, params: &ConstructionParams) -> Result<f64> {
    let r = radii(k, params)?;
    Ok(4.0 * (r.outer_image.powi(2) - r.inner_image.powi(2)))
}

/// Closed form `8 [a^2 rho^2 / 2 + a b rho]` between the frame radii.
pub fn frame_jacobian_integral(k: u32, params: &ConstructionParams) -> Result<f64> {
    let c = coeffs(k, params)?;
    let r = radii(k, params)?;
    Ok(4.0 * c.a * c.a * (r.outer.powi(2) - r.inner.powi(2)) + 8.0 * c.a * c.b * (r.outer - r.inner))
}

/// `int |Df|` over one level-`k` frame, with `|Df| = max(a, a + b / rho)`.
pub fn frame_tv_integral(k: u32, params: &ConstructionParams) -> Result<f64> {
    let c = coeffs(k, params)?;
    let r = radii(k, params)?;
    let base = 4.0 * c.a * (r.outer.powi(2) - r.inner.powi(2));
    Ok(if c.b > 0.0 {
        base + 8.0 * c.b * (r.outer - r.inner)
    } else {
        base
    })
}

/// `int |Df|` over one level-`k` truncation square, where `f` is a similarity.
pub fn truncation_square_tv(k: u32, params: &ConstructionParams) -> Result<f64> {
    Ok(similarity_scale(k, params)? * params.pre_side(k).powi(2))
}

pub fn truncation_square_jacobian(k: u32, params: &ConstructionParams) -> Result<f64> {
    Ok(similarity_scale(k, params)?.powi(2) * params.pre_side(k).powi(2))
}

/// `int exp(p K / (1 + log K))` over a truncation square, where `K = 1`.
pub fn truncation_square_subexp(k: u32, p: f64, params: &ConstructionParams) -> Result<f64> {
    check_level(k as u64)?;
    Ok(SubexpFunctional::new(p)?.p().exp() * params.pre_side(k).powi(2))
}

/// `int J_f` over every frame of levels `3..=depth` plus the depth-`depth`
/// truncation squares. The map is onto the unit square, so this is 1.
pub fn total_jacobian_integral(depth: u32, params: &ConstructionParams) -> Result<f64> {
    check_level(depth as u64)?;
    let mut total = 0.0;
    for k in 3..=depth {
        total += 4f64.powi(k as i32) * frame_jacobian_integral(k, params)?;
    }
    Ok(total + 4f64.powi(depth as i32) * truncation_square_jacobian(depth, params)?)
}

/// `ln int |Df|` over one level-`k` frame; valid for any `k >= 3`.
pub fn ln_frame_tv_integral(k: u64, params: &ConstructionParams) -> Result<f64> {
    let s = ScaledRadii::new(k, params)?;
    let (a, b) = s.coefficients();
    let scaled = 4.0 * a * (s.outer.powi(2) - s.inner.powi(2)) + 8.0 * b.max(0.0) * (s.outer - s.inner);
    Ok(s.ln_image_scale + s.ln_pre_scale + scaled.ln())
}

/// `ln int exp(p K / (1 + log K))` over one level-`k` frame, by adaptive quadrature.
///
/// The integrand is handled as `exp(phi(rho) - phi_max)` so that levels
/// where the integral itself overflows are still resolved. `K` is the
/// two-sided distortion `max(t/a, a/t)`.
pub fn ln_frame_subexp_integral(
    k: u64,
    p: f64,
    params: &ConstructionParams,
    opts: &QuadOptions,
) -> Result<f64> {
    let functional = SubexpFunctional::new(p)?;
    let s = ScaledRadii::new(k, params)?;
    let (a, b) = s.coefficients();
    let phi = |rho: f64| {
        let t = a + b / rho;
        functional.exponent((t / a).max(a / t))
    };
    let (at_inner, at_outer) = (phi(s.inner), phi(s.outer));
    let peak = at_inner.max(at_outer);
    let end = if at_inner >= at_outer {
        Endpoint::Lower
    } else {
        Endpoint::Upper
    };
    let opts = QuadOptions {
        graded: Some((end, 64)),
        ..*opts
    };
    let r = quad::integrate(
        |rho| (phi(rho) - peak).exp() * 8.0 * rho,
        s.inner,
        s.outer,
        &opts,
    )?;
    Ok(2.0 * s.ln_pre_scale + peak + r.value.ln())
}

pub fn frame_subexp_integral(k: u32, p: f64, params: &ConstructionParams) -> Result<f64> {
    Ok(ln_frame_subexp_integral(k as u64, p, params, &QuadOptions::default())?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte-Carlo estimate of `int g(fields(x))` over the pre-image frame of `addr`.
///
/// The frame's outer square is cut into an `m x m` grid with
/// `m = floor(sqrt(samples))` and one uniform point is drawn per grid cell
/// (jittered sampling). Points are evaluated through [`mapping::locate`] at
/// depth `addr.level()`, so the estimate runs on the two-dimensional
/// geometry rather than the radial reduction. `std_error` is the plain
/// Monte-Carlo error, an upper estimate for the jittered one.
pub fn monte_carlo_frame_integral(
    addr: &CellAddress,
    params: &ConstructionParams,
    samples: usize,
    seed: u64,
    integrand: impl Fn(&FieldSample) -> f64,
) -> Result<McEstimate> {
    let fr = crate::construction::frame(addr, params, Side::Pre)?;
    let m = (samples as f64).sqrt().floor() as usize;
    if m == 0 {
        return Err(Error::InvalidParams("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = 2.0 * fr.outer;
    let cell = width / m as f64;
    let origin = [fr.center[0] - fr.outer, fr.center[1] - fr.outer];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for j in 0..m {
        for i in 0..m {
            let x = [
                origin[0] + cell * (i as f64 + rng.gen::<f64>()),
                origin[1] + cell * (j as f64 + rng.gen::<f64>()),
            ];
            let loc = mapping::locate(x, addr.level(), params)?;
            let v = if loc.region == Region::Frame && loc.address == *addr {
                integrand(&mapping::fields_at(x, &loc, params)?)
            } else {
                0.0
            };
            sum += v;
            sum_sq += v * v;
        }
    }
    let n = (m * m) as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let area = width * width;
    Ok(McEstimate {
        value: area * mean,
        std_error: area * (var / n).sqrt(),
        samples: m * m,
    })
}

/// Which integrability series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    /// `int |Df|`
    Tv,
    /// `int exp(p K / (1 + log K))`
    Subexp,
}

/// One series term `2^(2(k-1)) * (per-frame integral)`, in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub k: u64,
    pub ln_count: f64,
    pub ln_per_frame: f64,
    pub ln_term: f64,
}

pub fn series_term(
    kind: SeriesKind,
    k: u64,
    p: f64,
    params: &ConstructionParams,
    opts: &QuadOptions,
) -> Result<SeriesTerm> {
    check_level(k)?;
    let ln_per_frame = match kind {
        SeriesKind::Tv => ln_frame_tv_integral(k, params)?,
        SeriesKind::Subexp => ln_frame_subexp_integral(k, p, params, opts)?,
    };
    let ln_count = 2.0 * (k - 1) as f64 * std::f64::consts::LN_2;
    Ok(SeriesTerm {
        k,
        ln_count,
        ln_per_frame,
        ln_term: ln_count + ln_per_frame,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

impl Verdict {
    pub fn from_ratio(ratio: f64, margin: f64) -> Self {
        if ratio < 1.0 - margin {
            Verdict::Convergent
        } else if ratio > 1.0 + margin {
            Verdict::Divergent
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Convergent => "convergent",
            Verdict::Divergent => "divergent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub term: SeriesTerm,
    /// `term(k + 1) / term(k)`
    pub ratio: f64,
    /// What a ratio test stopped at this `k` would conclude.
    pub local: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub kind: SeriesKind,
    pub p: f64,
    pub margin: f64,
    pub rows: Vec<SeriesRow>,
    pub limit_ratio: f64,
    /// Ratio-test verdict from `limit_ratio`.
    pub verdict: Verdict,
    /// Whether the sampled ratios move monotonically toward `limit_ratio`.
    pub tail_consistent: bool,
}

/// Limit of `term(k + 1) / term(k)`: `2 sigma` for the total variation,
/// `(2 sigma)^2 exp(p alpha 2 / beta)` for the sub-exponential series.
pub fn limit_ratio(kind: SeriesKind, p: f64, params: &ConstructionParams) -> f64 {
    let two_sigma = 2.0 * params.sigma();
    match kind {
        SeriesKind::Tv => two_sigma,
        SeriesKind::Subexp => two_sigma * two_sigma * growth_limit(p, params),
    }
}

/// Terms and ratios at the sampled levels `ks`, with the ratio-test verdict.
pub fn series_terms(
    kind: SeriesKind,
    ks: &[u64],
    p: f64,
    params: &ConstructionParams,
    margin: f64,
    opts: &QuadOptions,
) -> Result<SeriesReport> {
    if kind == SeriesKind::Subexp {
        SubexpFunctional::new(p)?;
    }
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let term = series_term(kind, k, p, params, opts)?;
        let next = series_term(kind, k + 1, p, params, opts)?;
        let ratio = (next.ln_term - term.ln_term).exp();
        rows.push(SeriesRow {
            term,
            ratio,
            local: Verdict::from_ratio(ratio, margin),
        });
    }
    let limit = limit_ratio(kind, p, params);
    let tail_consistent = rows
        .windows(2)
        .all(|w| (w[1].ratio - limit).abs() <= (w[0].ratio - limit).abs());
    Ok(SeriesReport {
        kind,
        p,
        margin,
        rows,
        limit_ratio: limit,
        verdict: Verdict::from_ratio(limit, margin),
        tail_consistent,
    })
}

/// `K_k = alpha / T_k`.
pub fn distortion_bound(k: u64, params: &ConstructionParams) -> Result<f64> {
    if k < 4 {
        return Err(Error::Level { level: k });
    }
    Ok(params.alpha() / params.t_k(k))
}

/// `exp(p K_{k+1} / (1 + log K_{k+1})) / exp(p K_k / (1 + log K_k))`.
pub fn growth_ratio(k: u64, p: f64, params: &ConstructionParams) -> Result<f64> {
    let f = SubexpFunctional::new(p)?;
    let now = f.exponent(distortion_bound(k, params)?);
    let next = f.exponent(distortion_bound(k + 1, params)?);
    Ok((next - now).exp())
}

/// `exp(p alpha 2 / beta)`.
pub fn growth_limit(p: f64, params: &ConstructionParams) -> f64 {
    (p * params.alpha() * 2.0 / params.beta()).exp()
}

/// `p0 = beta (2 sigma / (1 - 2 sigma)) log(1 / (2 sigma))`; the sub-exponential
/// series converges for `p < p0`.
pub fn p_threshold(params: &ConstructionParams) -> f64 {
    let two_sigma = 2.0 * params.sigma();
    params.beta() * two_sigma / (1.0 - two_sigma) * -two_sigma.ln()
}
