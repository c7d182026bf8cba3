use serde::{Deserialize, Serialize};

use super::SweepRecord;
use crate::error::{Error, Result};

/// Least-squares line through `(ln T, ln |value|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub quantity: String,
    /// `(ln T, ln |value|)` pairs that entered the fit.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Rows skipped for failure, non-finite values or the noise floor.
    pub rows_excluded: usize,
}

/// Fits `ln |value|` against `ln T` on the samples above `noise_floor`.
pub fn fit_values(quantity: &str, samples: &[(f64, f64)], noise_floor: f64) -> Result<SlopeFit> {
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(t, v)| t.is_finite() && *t > 0.0 && v.is_finite() && v.abs() > noise_floor)
        .map(|(t, v)| (t.ln(), v.abs().ln()))
        .collect();
    let rows_excluded = samples.len() - points.len();
    if points.len() < 3 {
        return Err(Error::InsufficientPoints {
            quantity: quantity.to_string(),
            usable: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(SlopeFit {
        quantity: quantity.to_string(),
        points,
        slope,
        intercept,
        r_squared,
        rows_excluded,
    })
}

/// Slope of a sweep column against `T`, using successful rows only.
pub fn fit_slope(records: &[SweepRecord], quantity: &str, noise_floor: f64) -> Result<SlopeFit> {
    let samples: Vec<(f64, f64)> = records
        .iter()
        .map(|r| {
            let v = if r.is_ok() {
                r.quantity(quantity).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            (r.tunneling, v)
        })
        .collect();
    if records.first().and_then(|r| r.quantity(quantity)).is_none() && !records.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "unknown sweep column `{quantity}`"
        )));
    }
    fit_values(quantity, &samples, noise_floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let samples: Vec<(f64, f64)> = [1e-2, 3e-3, 1e-4, 2e-5]
            .iter()
            .map(|&t| (t, 4.2 * t))
            .collect();
        let f = fit_values("q", &samples, 1e-12).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-10);
        assert!((f.intercept - 4.2f64.ln()).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_floor_is_enforced() {
        let samples = [(1e-2, 1e-9), (1e-3, 1e-10), (1e-4, 1e-11)];
        assert!(matches!(
            fit_values("q", &samples, 1e-8),
            Err(Error::InsufficientPoints { usable: 0, .. })
        ));
        let mixed = [(1e-2, 1e-3), (1e-3, 1e-4), (1e-4, 1e-5), (1e-5, 1e-9)];
        let f = fit_values("q", &mixed, 1e-8).unwrap();
        assert_eq!(f.rows_excluded, 1);
        assert_eq!(f.points.len(), 3);
    }
}
