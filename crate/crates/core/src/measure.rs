//! Dimension gauges and the covering-sum estimates built on them.
//!
//! Quantities such as `2^(2k) h(l_k)` are products of numbers far outside
//! the range of `f64` for the levels of interest, so they are carried as
//! natural logarithms ([`LogQuantity`]).

use std::ops::Mul;

use serde::Serialize;

use crate::construction::{check_level, image_square, CellAddress, ConstructionParams, Side};
use crate::{Error, Result};

/// A positive real stored as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LogQuantity(f64);

impl LogQuantity {
    pub const ZERO: LogQuantity = LogQuantity(f64::NEG_INFINITY);
    pub const ONE: LogQuantity = LogQuantity(0.0);

    pub fn from_ln(ln: f64) -> Self {
        Self(ln)
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v > 0.0 {
            Ok(Self(v.ln()))
        } else if v == 0.0 {
            Ok(Self::ZERO)
        } else {
            Err(Error::InvalidParams(format!("log of negative value {v}")))
        }
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// The plain value; overflows to infinity or underflows to zero out of range.
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn powf(self, e: f64) -> Self {
        Self(self.0 * e)
    }

    /// Sum by log-sum-exp.
    pub fn sum<I: IntoIterator<Item = LogQuantity>>(items: I) -> Self {
        let items: Vec<f64> = items.into_iter().map(|q| q.0).collect();
        let peak = items.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self(peak + items.iter().map(|x| (x - peak).exp()).sum::<f64>().ln())
    }
}

impl Mul for LogQuantity {
    type Output = LogQuantity;

    fn mul(self, rhs: LogQuantity) -> LogQuantity {
        LogQuantity(self.0 + rhs.0)
    }
}

/// A dimension gauge: `t^alpha`, or `h_{n,beta}(t) = t^n (log log(1/t))^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Gauge {
    Power { alpha: f64 },
    LogLog { n: u32, beta: f64 },
}

impl Gauge {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParams(format!("exponent must be >= 0, got {alpha}")));
        }
        Ok(Gauge::Power { alpha })
    }

    pub fn loglog(n: u32, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("gauge dimension must be >= 2, got {n}")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParams(format!("gauge beta must be >= 0, got {beta}")));
        }
        Ok(Gauge::LogLog { n, beta })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match *self {
            Gauge::Power { alpha } => {
                if !(t > 0.0) {
                    return Err(Error::GaugeDomain(format!("t = {t} is not positive")));
                }
                Ok(t.powf(alpha))
            }
            Gauge::LogLog { n, beta } => {
                if !(t > 0.0 && t < (-1f64).exp()) {
                    return Err(Error::GaugeDomain(format!(
                        "t = {t} outside (0, 1/e): negative log-log"
                    )));
                }
                Ok(t.powi(n as i32) * (-t.ln()).ln().powf(beta))
            }
        }
    }

    /// Evaluates the gauge at `t = exp(ln_t)`, for `t` far below `f64` range.
    pub fn log_eval(&self, ln_t: f64) -> Result<LogQuantity> {
        match *self {
            Gauge::Power { alpha } => {
                if !ln_t.is_finite() {
                    return Err(Error::GaugeDomain(format!("log t = {ln_t} is not finite")));
                }
                Ok(LogQuantity(alpha * ln_t))
            }
            Gauge::LogLog { n, beta } => {
                if !(ln_t < -1.0) {
                    return Err(Error::GaugeDomain(format!(
                        "log t = {ln_t} is not below -1: negative log-log"
                    )));
                }
                Ok(LogQuantity(n as f64 * ln_t + beta * (-ln_t).ln().ln()))
            }
        }
    }

    /// Largest `t*` such that the gauge is non-decreasing on `(0, t*]`.
    ///
    /// For `h_{n,beta}` this solves `n log(1/t) log log(1/t) = beta` by
    /// bisection; power gauges are monotone everywhere (`None`).
    pub fn monotone_threshold(&self) -> Option<f64> {
        match *self {
            Gauge::Power { .. } => None,
            Gauge::LogLog { beta, .. } if beta == 0.0 => Some((-1f64).exp()),
            Gauge::LogLog { n, beta } => {
                let g = |u: f64| n as f64 * u * u.ln() - beta;
                let (mut lo, mut hi) = (1.0f64, 2.0f64);
                while g(hi) < 0.0 {
                    lo = hi;
                    hi *= 2.0;
                }
                while hi - lo > 1e-15 * hi {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some((-0.5 * (lo + hi)).exp())
            }
        }
    }
}

/// How a covering square of side `s` is measured: by `s` or by its diameter `sqrt(2) s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiameterConvention {
    #[default]
    Side,
    Diagonal,
}

impl DiameterConvention {
    fn ln_factor(self) -> f64 {
        match self {
            DiameterConvention::Side => 0.0,
            DiameterConvention::Diagonal => 0.5 * std::f64::consts::LN_2,
        }
    }
}

/// `log [2^(2k) gauge(c s_k)]` for the level-`k` covering by construction
/// squares; `s_k = sigma^k` on the pre-image side and `l_k` on the image side.
pub fn natural_cover_sum(
    side: Side,
    gauge: &Gauge,
    k: u64,
    params: &ConstructionParams,
    conv: DiameterConvention,
) -> Result<LogQuantity> {
    check_level(k)?;
    let ln_side = match side {
        Side::Pre => params.ln_pre_side(k),
        Side::Image => params.ln_image_side(k),
    };
    let h = gauge.log_eval(ln_side + conv.ln_factor()).map_err(|e| match e {
        Error::GaugeDomain(msg) => {
            Error::GaugeDomain(format!("{msg} at level {k}; use a larger level"))
        }
        other => other,
    })?;
    Ok(LogQuantity(2.0 * k as f64 * std::f64::consts::LN_2) * h)
}

/// `log2 / log(1/sigma)`, the dimension of one factor of the pre-image set.
pub fn critical_exponent(params: &ConstructionParams) -> f64 {
    std::f64::consts::LN_2 / -params.sigma().ln()
}

/// `2^k sigma^(alpha k)`: the level-`k` covering sum of one factor `C1`.
pub fn axis_cover_sum(alpha: f64, k: u64, params: &ConstructionParams) -> Result<LogQuantity> {
    check_level(k)?;
    let kf = k as f64;
    Ok(LogQuantity(kf * std::f64::consts::LN_2 + alpha * kf * params.sigma().ln()))
}

/// Box-counting dimension of the pre-image set from `N(sigma^k) = 2^(2k)`.
pub fn box_dimension_pre(k: u64, params: &ConstructionParams) -> Result<f64> {
    check_level(k)?;
    let kf = k as f64;
    Ok(2.0 * kf * std::f64::consts::LN_2 / (kf * -params.sigma().ln()))
}

/// Long-run behavior of a covering-sum sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Decreasing,
    Bounded,
    Growing,
    Mixed,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::Decreasing => "decreasing",
            Trend::Bounded => "bounded",
            Trend::Growing => "growing",
            Trend::Mixed => "mixed",
        }
    }
}

/// Default dead band on the log-log slope used by [`threshold_scan`].
pub const TREND_BAND: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub beta_prime: f64,
    pub k: u64,
    pub log_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanVerdict {
    pub beta_prime: f64,
    pub trend: Trend,
    /// Local exponents `d log S / d log log k` between consecutive sampled levels.
    pub min_slope: f64,
    pub max_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub verdicts: Vec<ScanVerdict>,
}

/// Image covering sums `2^(2k) h_{2,beta'}(l_k)` for every `beta'` and `k`.
///
/// These behave like `(log k)^(beta' - beta)`, so the trend is read from the
/// slope of `log S` against `log log k` between consecutive sampled levels:
/// every slope below `-band` is decreasing, every slope above `band` growing,
/// every slope inside the band bounded.
pub fn threshold_scan(
    beta_primes: &[f64],
    ks: &[u64],
    params: &ConstructionParams,
    conv: DiameterConvention,
    band: f64,
) -> Result<ScanReport> {
    let mut rows = Vec::with_capacity(beta_primes.len() * ks.len());
    let mut verdicts = Vec::with_capacity(beta_primes.len());
    for &bp in beta_primes {
        let gauge = Gauge::loglog(2, bp)?;
        let start = rows.len();
        for &k in ks {
            let s = natural_cover_sum(Side::Image, &gauge, k, params, conv)?;
            rows.push(ScanRow {
                beta_prime: bp,
                k,
                log_sum: s.ln(),
            });
        }
        let slopes: Vec<f64> = rows[start..]
            .windows(2)
            .map(|w| {
                let dx = (w[1].k as f64).ln().ln() - (w[0].k as f64).ln().ln();
                (w[1].log_sum - w[0].log_sum) / dx
            })
            .collect();
        let min_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let max_slope = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let trend = if slopes.is_empty() {
            Trend::Mixed
        } else if max_slope < -band {
            Trend::Decreasing
        } else if min_slope > band {
            Trend::Growing
        } else if min_slope >= -band && max_slope <= band {
            Trend::Bounded
        } else {
            Trend::Mixed
        };
        verdicts.push(ScanVerdict {
            beta_prime: bp,
            trend,
            min_slope,
            max_slope,
        });
    }
    Ok(ScanReport { rows, verdicts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassReport {
    /// `min_k 2^(2k) h_{2,beta}(l_k)` over the admissible levels up to `k_max`.
    pub m: f64,
    pub at_k: u64,
    /// `m / 4`, the lower bound on every covering sum of the image set.
    pub lower_bound: f64,
    pub first_admissible_k: u64,
    pub k_max: u64,
    /// Analytic limit of the terms as `k -> infinity`.
    pub tail_limit: f64,
}

/// Mass-distribution lower bound for the image set under its own gauge `h_{2,beta}`.
pub fn mass_distribution_bound(
    k_max: u64,
    params: &ConstructionParams,
    conv: DiameterConvention,
) -> Result<MassReport> {
    check_level(k_max)?;
    let gauge = Gauge::loglog(2, params.beta())?;
    let mut first = None;
    let mut best = (f64::INFINITY, 0u64);
    for k in 3..=k_max {
        let Ok(term) = natural_cover_sum(Side::Image, &gauge, k, params, conv) else {
            continue;
        };
        first.get_or_insert(k);
        if term.ln() < best.0 {
            best = (term.ln(), k);
        }
    }
    let first_admissible_k = first.ok_or_else(|| {
        Error::GaugeDomain(format!("no admissible level up to {k_max}"))
    })?;
    let m = best.0.exp();
    Ok(MassReport {
        m,
        at_k: best.1,
        lower_bound: m / 4.0,
        first_admissible_k,
        k_max,
        tail_limit: match conv {
            DiameterConvention::Side => 1.0,
            DiameterConvention::Diagonal => 2.0,
        },
    })
}

/// `(mu(U), 4 h(l_{k+1}) / m)` for `U` a level-`(k+1)` image square, where
/// `mu` is the uniform probability measure on the image set.
pub fn mass_spot_check(k: u64, report: &MassReport, params: &ConstructionParams) -> Result<(f64, f64)> {
    check_level(k)?;
    let gauge = Gauge::loglog(2, params.beta())?;
    let h = gauge.log_eval(params.ln_image_side(k + 1))?;
    let mu = (-2.0 * (k + 1) as f64 * std::f64::consts::LN_2).exp();
    Ok((mu, 4.0 * h.value() / report.m))
}

/// `sum gauge(diam)` over the image squares of `cells`, all of one level.
pub fn covering_sum_of_image(
    cells: &[CellAddress],
    gauge: &Gauge,
    params: &ConstructionParams,
    conv: DiameterConvention,
) -> Result<LogQuantity> {
    if let Some(first) = cells.first() {
        if let Some(other) = cells.iter().find(|c| c.level() != first.level()) {
            return Err(Error::MixedLevels(first.level(), other.level()));
        }
    }
    let terms = cells
        .iter()
        .map(|c| {
            let side = image_square(c, params)?.side;
            gauge.log_eval(side.ln() + conv.ln_factor())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LogQuantity::sum(terms))
}
