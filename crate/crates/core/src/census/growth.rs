//! Growth-rate estimation and the normalized-ratio tables for `N(R)` and `P(t)`.

use serde::{Deserialize, Serialize};

use super::counting::{
    benoist_gap, class_multiplicity, count_orbit, count_primitive_classes, limit_cone, BenoistGap, DirectionalCounter,
    FlagBall, LimitCone,
};
use super::CensusTable;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 24;
pub const RATIO_POINTS: usize = 32;
/// Ratio tables start at this fraction of the horizon.
pub const RATIO_WINDOW_START: f64 = 0.4;
pub const DEFAULT_CONE_MIN_LEN: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub residuals: Vec<f64>,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = points.iter().map(|p| p.1 - (slope * p.0 + intercept)).collect();
    let slope_stderr = if points.len() > 2 {
        (residuals.iter().map(|r| r * r).sum::<f64>() / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr,
        residuals,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta_hat: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub grid: Vec<f64>,
    pub counts: Vec<u64>,
    pub residuals: Vec<f64>,
}

fn grid(window: (f64, f64), points: usize) -> Vec<f64> {
    let (a, b) = window;
    (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Least-squares slope of `log N` against `R` on cumulative counts.
pub fn fit_exponential_rate(grid: &[f64], counts: &[u64]) -> Result<DeltaEstimate> {
    if grid.len() != counts.len() || grid.len() < 5 {
        return Err(Error::DegenerateWindow("need at least 5 grid points".into()));
    }
    if counts.contains(&0) {
        return Err(Error::DegenerateWindow("empty count inside the window".into()));
    }
    let rising = 1 + counts.windows(2).filter(|w| w[1] > w[0]).count();
    if rising < 5 {
        return Err(Error::DegenerateWindow(format!(
            "only {rising} grid points with nonzero increments"
        )));
    }
    let points: Vec<(f64, f64)> = grid.iter().zip(counts).map(|(&r, &c)| (r, (c as f64).ln())).collect();
    let fit = least_squares(&points).ok_or_else(|| Error::DegenerateWindow("zero-width window".into()))?;
    Ok(DeltaEstimate {
        delta_hat: fit.slope,
        stderr: fit.slope_stderr,
        window: (grid[0], grid[grid.len() - 1]),
        grid: grid.to_vec(),
        counts: counts.to_vec(),
        residuals: fit.residuals,
    })
}

/// `[R_H / 2, R_H]` with `R_H` the orbit horizon.
pub fn default_delta_window(table: &CensusTable) -> (f64, f64) {
    (0.5 * table.horizon_r(), table.horizon_r())
}

/// Critical-exponent estimate from the orbit counting function on `window`.
pub fn estimate_delta(table: &CensusTable, window: (f64, f64), bins: usize) -> Result<DeltaEstimate> {
    let (r1, r2) = window;
    if r2 > table.horizon_r() {
        return Err(Error::WindowBeyondHorizon {
            upper: r2,
            horizon: table.horizon_r(),
        });
    }
    if !(r1 < r2) || r1 < 0.0 || bins < 5 {
        return Err(Error::DegenerateWindow(format!("window ({r1}, {r2}) with {bins} bins")));
    }
    let g = grid(window, bins);
    let counts: Vec<u64> = g.iter().map(|&r| count_orbit(table, r).value).collect();
    fit_exponential_rate(&g, &counts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub x: f64,
    pub count: u64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub rank: usize,
    pub delta_hat: f64,
    pub r_window: (f64, f64),
    pub t_window: (f64, f64),
    /// `N(R) e^(-δR)` in both ratio columns.
    pub orbit_rows: Vec<RatioRow>,
    /// Lower: `P(t) t^r e^(-δt)`; upper: `P(t) t e^(-δt)`.
    pub class_rows: Vec<RatioRow>,
    pub orbit_ratio_range: (f64, f64),
    pub lower_ratio_range: (f64, f64),
    pub upper_ratio_range: (f64, f64),
    /// Regression slope of `log P(t)` against `t` over the t window.
    pub primitive_slope: f64,
    pub primitive_slope_stderr: f64,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Ratio tables on `[0.4 H, H]` for both horizons.
pub fn theorem_report(table: &CensusTable, delta_hat: f64) -> Result<TheoremReport> {
    let r_window = (RATIO_WINDOW_START * table.horizon_r(), table.horizon_r());
    let t_window = (RATIO_WINDOW_START * table.horizon_t(), table.horizon_t());
    theorem_report_with(table, delta_hat, r_window, t_window, RATIO_POINTS)
}

pub fn theorem_report_with(
    table: &CensusTable,
    delta_hat: f64,
    r_window: (f64, f64),
    t_window: (f64, f64),
    points: usize,
) -> Result<TheoremReport> {
    if r_window.1 > table.horizon_r() {
        return Err(Error::WindowBeyondHorizon {
            upper: r_window.1,
            horizon: table.horizon_r(),
        });
    }
    if t_window.1 > table.horizon_t() {
        return Err(Error::WindowBeyondHorizon {
            upper: t_window.1,
            horizon: table.horizon_t(),
        });
    }
    if points < 2 || !(r_window.0 < r_window.1) || !(t_window.0 < t_window.1) {
        return Err(Error::DegenerateWindow("ratio grid".into()));
    }
    let rank = table.rank();
    let orbit_rows: Vec<RatioRow> = grid(r_window, points)
        .into_iter()
        .map(|r| {
            let n = count_orbit(table, r).value;
            let ratio = n as f64 * (-delta_hat * r).exp();
            RatioRow {
                x: r,
                count: n,
                ratio_lower: ratio,
                ratio_upper: ratio,
            }
        })
        .collect();
    let class_rows: Vec<RatioRow> = grid(t_window, points)
        .into_iter()
        .map(|t| {
            let p = count_primitive_classes(table, t).value as f64;
            let decay = (-delta_hat * t).exp();
            RatioRow {
                x: t,
                count: p as u64,
                ratio_lower: p * t.powi(rank as i32) * decay,
                ratio_upper: p * t * decay,
            }
        })
        .collect();
    let slope_points: Vec<(f64, f64)> = class_rows
        .iter()
        .filter(|row| row.count > 0)
        .map(|row| (row.x, (row.count as f64).ln()))
        .collect();
    let fit = least_squares(&slope_points)
        .ok_or_else(|| Error::DegenerateWindow("fewer than two positive P(t) values".into()))?;
    let positive = |rows: &[RatioRow]| rows.iter().filter(|r| r.count > 0).cloned().collect::<Vec<_>>();
    let orbit_pos = positive(&orbit_rows);
    let class_pos = positive(&class_rows);
    Ok(TheoremReport {
        rank,
        delta_hat,
        r_window,
        t_window,
        orbit_ratio_range: range(orbit_pos.iter().map(|r| r.ratio_lower)),
        lower_ratio_range: range(class_pos.iter().map(|r| r.ratio_lower)),
        upper_ratio_range: range(class_pos.iter().map(|r| r.ratio_upper)),
        orbit_rows,
        class_rows,
        primitive_slope: fit.slope,
        primitive_slope_stderr: fit.slope_stderr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalRow {
    pub r: f64,
    pub count: u64,
    pub orbit_count: u64,
    pub fraction: f64,
    pub undefined: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicitySummary {
    pub t: f64,
    pub classes: usize,
    pub max_count: u64,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub records: usize,
    pub max_word_length: usize,
    pub horizon_r: f64,
    pub horizon_t: f64,
    pub delta: DeltaEstimate,
    pub theorem: TheoremReport,
    pub benoist: BenoistGap,
    pub benoist_m_hat: f64,
    pub cone: Option<LimitCone>,
    pub alpha_hat: Option<f64>,
    pub min_wall_gap: Option<f64>,
    pub directional: Option<Vec<DirectionalRow>>,
    pub multiplicity: MultiplicitySummary,
}

#[derive(Clone, Debug, Default)]
pub struct ReportOptions {
    pub window: Option<(f64, f64)>,
    pub bins: Option<usize>,
    pub balls: Option<(FlagBall, FlagBall)>,
    pub cone_min_len: Option<usize>,
}

/// Every estimator over one table.
pub fn growth_report(table: &CensusTable, options: &ReportOptions) -> Result<GrowthReport> {
    let window = options.window.unwrap_or_else(|| default_delta_window(table));
    let delta = estimate_delta(table, window, options.bins.unwrap_or(DEFAULT_BINS))?;
    let theorem = theorem_report(table, delta.delta_hat)?;
    let benoist = benoist_gap(table);
    let cone = if table.dim() > 2 {
        let min_len = options
            .cone_min_len
            .unwrap_or(DEFAULT_CONE_MIN_LEN)
            .min(table.max_word_length());
        Some(limit_cone(table, min_len)?)
    } else {
        None
    };
    let directional = options.balls.as_ref().map(|(a, b)| {
        let counter = DirectionalCounter::new(table, a, b);
        theorem
            .orbit_rows
            .iter()
            .map(|row| {
                let c = counter.count(row.x);
                DirectionalRow {
                    r: row.x,
                    count: c.count,
                    orbit_count: row.count,
                    fraction: c.count as f64 / row.count.max(1) as f64,
                    undefined: c.undefined,
                }
            })
            .collect()
    });
    let mult = class_multiplicity(table, table.horizon_t());
    Ok(GrowthReport {
        records: table.len(),
        max_word_length: table.max_word_length(),
        horizon_r: table.horizon_r(),
        horizon_t: table.horizon_t(),
        benoist_m_hat: benoist.m_hat,
        alpha_hat: cone.as_ref().map(|c| c.alpha_hat),
        min_wall_gap: cone.as_ref().map(|c| c.min_wall_gap),
        multiplicity: MultiplicitySummary {
            t: mult.t,
            classes: mult.counts.len(),
            max_count: mult.max_count,
            slope: mult.slope,
        },
        delta,
        theorem,
        benoist,
        cone,
        directional,
    })
}
