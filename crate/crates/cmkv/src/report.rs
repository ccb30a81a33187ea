//! Convergence summaries of sweep results.

use std::collections::BTreeMap;

use cmkv_core::schedule::rate_exponent;

use crate::error::{CliError, Result};
use crate::output::ResultRow;

pub const TV_METRIC: &str = "histogram_tv";
/// Fewest seeds per `n` that a summary accepts.
pub const MIN_SEEDS: usize = 5;

/// Mean and standard error over seeds at one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NPoint {
    pub n: usize,
    pub seeds: usize,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSummary {
    pub metric: String,
    pub points: Vec<NPoint>,
    /// Every increase between consecutive `n` is within one standard error
    /// of the difference.
    pub nonincreasing: bool,
    /// `(mean(n_min) - mean(n_max)) / se` of that difference.
    pub drop_in_se: f64,
    /// `r / (d r + 4)`.
    pub rate_exponent: f64,
    /// Least-squares `c` in `mean ≈ c (ln n)^{-a}`.
    pub fit_coefficient: f64,
    /// Slope of `ln mean` against `ln ln n`; `None` if a mean is not positive.
    pub fitted_slope: Option<f64>,
}

impl ConvergenceSummary {
    /// The smallest and largest `n` differ by more than two standard errors.
    pub fn significant_drop(&self) -> bool {
        self.drop_in_se > 2.0
    }

    pub fn decreasing(&self) -> bool {
        self.nonincreasing && self.significant_drop()
    }

    pub fn verdict(&self) -> &'static str {
        if self.decreasing() {
            "decreasing"
        } else {
            "not decreasing"
        }
    }

    pub fn fitted(&self, n: usize) -> f64 {
        self.fit_coefficient * (n as f64).ln().powf(-self.rate_exponent)
    }
}

/// Groups the `metric` rows with status `ok` by `n`.
pub fn report_convergence(rows: &[ResultRow], metric: &str, r: f64, d: usize) -> Result<ConvergenceSummary> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for row in rows.iter().filter(|row| row.metric_name == metric && row.status == "ok") {
        groups.entry(row.n).or_default().push(row.metric_value);
    }
    if groups.len() < 2 {
        return Err(CliError::Report(format!("`{metric}` needs at least two values of n, found {}", groups.len())));
    }
    if let Some((n, values)) = groups.iter().find(|(_, v)| v.len() < MIN_SEEDS) {
        return Err(CliError::Report(format!(
            "insufficient seeds: n = {n} has {} successful runs, need {MIN_SEEDS}",
            values.len()
        )));
    }
    let points: Vec<NPoint> = groups
        .iter()
        .map(|(&n, v)| {
            let k = v.len() as f64;
            let mean = v.iter().sum::<f64>() / k;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
            NPoint { n, seeds: v.len(), mean, std_error: (var / k).sqrt() }
        })
        .collect();
    let combined = |a: &NPoint, b: &NPoint| (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    let nonincreasing = points.windows(2).all(|w| w[1].mean - w[0].mean <= combined(&w[0], &w[1]));
    let (first, last) = (&points[0], &points[points.len() - 1]);
    let gap = first.mean - last.mean;
    let se = combined(first, last);
    let drop_in_se = if se > 0.0 {
        gap / se
    } else if gap > 0.0 {
        f64::INFINITY
    } else if gap < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    };

    let a = rate_exponent(d, r);
    let x: Vec<f64> = points.iter().map(|p| (p.n as f64).ln().powf(-a)).collect();
    let fit_coefficient = points.iter().zip(&x).map(|(p, x)| p.mean * x).sum::<f64>() / x.iter().map(|x| x * x).sum::<f64>();
    let fitted_slope = if points.iter().all(|p| p.mean > 0.0) && points.iter().all(|p| p.n > 2) {
        let u: Vec<f64> = points.iter().map(|p| (p.n as f64).ln().ln()).collect();
        let v: Vec<f64> = points.iter().map(|p| p.mean.ln()).collect();
        let k = u.len() as f64;
        let (mu, mv) = (u.iter().sum::<f64>() / k, v.iter().sum::<f64>() / k);
        let sxx: f64 = u.iter().map(|x| (x - mu).powi(2)).sum();
        let sxy: f64 = u.iter().zip(&v).map(|(x, y)| (x - mu) * (y - mv)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };
    Ok(ConvergenceSummary {
        metric: metric.to_string(),
        points,
        nonincreasing,
        drop_in_se,
        rate_exponent: a,
        fit_coefficient,
        fitted_slope,
    })
}

/// One row per `n`; the verdict and fit are repeated on every row.
pub fn summary_csv(s: &ConvergenceSummary, c: f64) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "metric", "n", "seeds", "mean", "std_error", "fitted", "rate_exponent", "fit_coefficient", "fitted_slope",
        "nonincreasing", "drop_in_se", "verdict", "C",
    ])?;
    for p in &s.points {
        w.write_record([
            s.metric.clone(),
            p.n.to_string(),
            p.seeds.to_string(),
            p.mean.to_string(),
            p.std_error.to_string(),
            s.fitted(p.n).to_string(),
            s.rate_exponent.to_string(),
            s.fit_coefficient.to_string(),
            s.fitted_slope.map_or(String::new(), |v| v.to_string()),
            s.nonincreasing.to_string(),
            s.drop_in_se.to_string(),
            s.verdict().to_string(),
            c.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Failed(e.to_string()))
}
