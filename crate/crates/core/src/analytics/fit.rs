use super::{invalid, AnalyticsError};

/// Fitted `V = c * rank^-b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub c: f64,
    pub b: f64,
    /// Sum of squared residuals in log space.
    pub residual: f64,
}

/// Least-squares fit of `ln V = ln c - b ln rank`.
pub fn power_law_fit(points: &[(u32, f64)]) -> Result<PowerLawFit, AnalyticsError> {
    if points.len() < 3 {
        return Err(invalid("points", format!("need at least 3, got {}", points.len())));
    }
    if let Some((rank, v)) = points.iter().find(|(r, v)| *r == 0 || !(*v > 0.0)) {
        return Err(invalid("points", format!("rank {rank} with volume {v} cannot be log-transformed")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(r, _)| (*r as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("points", "all points share one rank"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerLawFit { c: intercept.exp(), b: -slope, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::email::builtin_domain_table;

    #[test]
    fn recovers_noiseless_parameters() {
        let pts: Vec<(u32, f64)> = (1..=100).map(|k| (k, 7378.0 * (k as f64).powf(-1.6))).collect();
        let fit = power_law_fit(&pts).unwrap();
        assert!(((fit.c - 7378.0) / 7378.0).abs() < 1e-6);
        assert!(((fit.b - 1.6) / 1.6).abs() < 1e-6);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn observed_table() {
        let pts: Vec<(u32, f64)> =
            builtin_domain_table().iter().filter(|d| d.rank >= 2).map(|d| (d.rank, d.daily_emails)).collect();
        let fit = power_law_fit(&pts).unwrap();
        // the top 50 alone fall off more slowly than the full-traffic fit
        assert!(fit.b > 0.5 && fit.b < 2.0, "{fit:?}");
    }

    #[test]
    fn degenerate_inputs() {
        assert!(power_law_fit(&[(1, 5.0)]).is_err());
        assert!(power_law_fit(&[(1, 5.0), (2, 0.0), (3, 1.0)]).is_err());
        assert!(power_law_fit(&[(2, 5.0), (2, 4.0), (2, 1.0)]).is_err());
    }
}
