//! Least-squares line fits, log-log exponent fits, and a seeded residual
//! bootstrap for slope confidence intervals.

use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An affine fit `y ~ slope * x + intercept` with its RMS residual.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    /// Fitted slope.
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Root-mean-square of `y - (slope x + intercept)` over the fit points.
    pub residual: f64,
    /// Number of points used.
    pub n: usize,
}

impl LineFit {
    /// The fitted value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Ordinary least squares over `(x, y)` pairs; needs two distinct abscissae.
pub fn least_squares(pts: &[(f64, f64)]) -> Result<LineFit> {
    let n = pts.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("line fit needs >= 2 points, got {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx < 1e-300 {
        return Err(Error::InvalidInput("line fit needs two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Ok(LineFit { slope, intercept, residual: (ss / nf).sqrt(), n })
}

/// Least squares on `(ln x, ln y)`.  Pairs with a nonpositive coordinate
/// carry no logarithm and are dropped; at least two must survive.
pub fn log_log_fit(pts: &[(f64, f64)]) -> Result<LineFit> {
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    least_squares(&logs)
}

/// Residual bootstrap for the slope of [`least_squares`]: refit on
/// `y_hat + resampled residuals`, `resamples` times, and return the
/// `(5%, 95%)` percentiles of the slope distribution.  Deterministic in
/// `seed`.
pub fn bootstrap_slope(pts: &[(f64, f64)], resamples: usize, seed: u64) -> Result<(f64, f64)> {
    let fit = least_squares(pts)?;
    let res: Vec<f64> = pts.iter().map(|p| p.1 - fit.eval(p.0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(resamples);
    let mut synth = pts.to_vec();
    for _ in 0..resamples {
        for (i, p) in synth.iter_mut().enumerate() {
            p.1 = fit.eval(pts[i].0) + res[rng.gen_range(0..res.len())];
        }
        slopes.push(least_squares(&synth)?.slope);
    }
    slopes.sort_by(f64::total_cmp);
    Ok((percentile(&slopes, 0.05), percentile(&slopes, 0.95)))
}

/// Linear-interpolated percentile of a sorted slice; `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let t = q * (sorted.len() - 1) as f64;
    let (i, frac) = (t.floor() as usize, t.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..7).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        let f = least_squares(&pts).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn log_log_recovers_power_law() {
        let pts: Vec<(f64, f64)> = (1..9).map(|i| {
            let x = 0.01 * (i as f64);
            (x, 2.5 * x.powf(1.7))
        }).collect();
        let f = log_log_fit(&pts).unwrap();
        assert!((f.slope - 1.7).abs() < 1e-9, "slope {}", f.slope);
        assert!((f.intercept - 2.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn log_log_drops_nonpositive_points() {
        let pts = [(0.1, 1.0), (0.2, 2.0), (0.0, 5.0), (0.4, -1.0), (0.8, 8.0)];
        let f = log_log_fit(&pts).unwrap();
        assert_eq!(f.n, 3);
        assert!((f.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bootstrap_brackets_true_slope_and_is_deterministic() {
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let x = i as f64 / 4.0;
                // Deterministic "noise" with zero-ish mean.
                (x, 2.0 * x + 1.0 + 0.05 * (7.0 * x).sin())
            })
            .collect();
        let (lo, hi) = bootstrap_slope(&pts, 200, 9).unwrap();
        assert!(lo <= 2.0 + 0.05 && hi >= 2.0 - 0.05, "({lo}, {hi})");
        assert!(lo < hi);
        assert_eq!(bootstrap_slope(&pts, 200, 9).unwrap(), (lo, hi));
    }

    #[test]
    fn degenerate_inputs_are_errors() {
        assert!(least_squares(&[(1.0, 2.0)]).is_err());
        assert!(least_squares(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(log_log_fit(&[(0.0, 1.0), (-1.0, 2.0), (2.0, 1.0)]).is_err());
    }
}
