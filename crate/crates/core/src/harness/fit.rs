//! Least-squares convergence slopes on log-log data.

/// A fitted line `ln(error) = slope * ln(dt) + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
    pub points: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

/// Which points of an error curve enter the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
    /// Drop the largest requested step size (pre-asymptotic regime).
    pub drop_largest: bool,
    /// Also drop the largest surviving point when a larger step failed,
    /// provided at least [`MIN_FIT_POINTS`] points remain.
    pub drop_stability_edge: bool,
    /// Points whose error is below `floor_factor * floor` are dropped.
    pub floor_factor: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            dt_min: None,
            dt_max: None,
            drop_largest: true,
            drop_stability_edge: true,
            floor_factor: 10.0,
        }
    }
}

pub const MIN_FIT_POINTS: usize = 3;

fn usable(e: f64) -> bool {
    e > 0.0 && e.is_finite()
}

impl FitWindow {
    /// Selects `(dt, error)` pairs, sorted by increasing `dt`. Failed runs
    /// are passed with a NaN error: they count as requested steps but never
    /// enter the fit.
    pub fn select(&self, points: &[(f64, f64)], floor: Option<f64>) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(dt, _)| dt > 0.0).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let largest_failure = pts
            .iter()
            .filter(|p| p.1.is_nan() || p.1.is_infinite())
            .map(|p| p.0)
            .fold(None, |m: Option<f64>, dt| Some(m.map_or(dt, |m| m.max(dt))));
        if self.drop_largest {
            pts.pop();
        }
        pts.retain(|&(dt, e)| {
            usable(e)
                && self.dt_min.is_none_or(|m| dt >= m)
                && self.dt_max.is_none_or(|m| dt <= m)
                && floor.is_none_or(|f| e >= self.floor_factor * f)
        });
        if self.drop_stability_edge && pts.len() > MIN_FIT_POINTS {
            if let (Some(fail), Some(last)) = (largest_failure, pts.last()) {
                if fail > last.0 {
                    pts.pop();
                }
            }
        }
        pts
    }
}

/// Ordinary least squares on `(ln dt, ln error)`; `None` below
/// [`MIN_FIT_POINTS`] points.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<SlopeFit> {
    if points.len() < MIN_FIT_POINTS {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Some(SlopeFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: points.len(),
        dt_min: points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        dt_max: points.iter().map(|p| p.0).fold(0.0, f64::max),
    })
}
