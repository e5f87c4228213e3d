use crate::error::{Result, WcsError};
use crate::types::PartialPermutation;

/// Fraction of the ground-truth pairs recovered by `predicted`.
pub fn accuracy(predicted: &PartialPermutation, gt: &PartialPermutation) -> Result<f64> {
    if predicted.rows() != gt.rows() || predicted.cols() != gt.cols() {
        return Err(WcsError::Dimension(format!(
            "predicted is {}x{}, ground truth is {}x{}",
            predicted.rows(),
            predicted.cols(),
            gt.rows(),
            gt.cols()
        )));
    }
    if predicted.size() != gt.size() {
        return Err(WcsError::InvalidAssignment(format!(
            "predicted has L={}, ground truth has L={}",
            predicted.size(),
            gt.size()
        )));
    }
    if gt.size() == 0 {
        return Ok(1.0);
    }
    let hits = gt
        .pairs()
        .filter(|&(i, j)| predicted.contains(i, j))
        .count();
    Ok(hits as f64 / gt.size() as f64)
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(WcsError::InvalidInstance(
            "need at least two (x, y) points".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 1e-12 * (1.0 + mx * mx)) {
        return Err(WcsError::InvalidInstance("degenerate x range".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of `log(time)` against `log(size)`, using the mean time at each size.
pub fn fit_time_slope(samples: &[(f64, f64)]) -> Result<f64> {
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for &(size, time) in samples {
        if !(size > 0.0 && time > 0.0 && size.is_finite() && time.is_finite()) {
            return Err(WcsError::InvalidInstance(format!(
                "sizes and times must be positive (got size {size}, time {time})"
            )));
        }
        match groups.iter_mut().find(|g| g.0 == size) {
            Some(g) => {
                g.1 += time;
                g.2 += 1;
            }
            None => groups.push((size, time, 1)),
        }
    }
    if groups.len() < 4 {
        return Err(WcsError::InvalidInstance(format!(
            "need at least 4 distinct sizes, got {}",
            groups.len()
        )));
    }
    let x: Vec<f64> = groups.iter().map(|g| g.0.ln()).collect();
    let y: Vec<f64> = groups.iter().map(|g| (g.1 / g.2 as f64).ln()).collect();
    least_squares_slope(&x, &y)
}
