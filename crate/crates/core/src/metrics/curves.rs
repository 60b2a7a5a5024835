use crate::error::{Error, Result};

/// Upper end of the normalized center-distance threshold range.
pub const NPS_MAX_DISTANCE: f64 = 0.5;
/// Upper end of the failure-threshold range for GSR.
pub const GSR_MAX_THRESHOLD: f64 = 0.5;

/// Area under the success curve, which for continuous thresholds is the
/// mean overlap, scaled to `[0, 100]`.
pub fn auc(overlaps: &[f64]) -> Result<f64> {
    if overlaps.is_empty() {
        return Err(Error::Empty("overlap series"));
    }
    Ok(100.0 * overlaps.iter().sum::<f64>() / overlaps.len() as f64)
}

/// `n` evenly spaced thresholds covering `[0, 1]`.
pub fn uniform_thresholds(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Fraction of frames whose overlap is strictly above each threshold.
pub fn success_curve(overlaps: &[f64], thresholds: &[f64]) -> Result<Vec<f64>> {
    if overlaps.is_empty() {
        return Err(Error::Empty("overlap series"));
    }
    let mut sorted = overlaps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&tau| {
            let at_or_below = sorted.partition_point(|&o| o <= tau);
            (sorted.len() - at_or_below) as f64 / n
        })
        .collect())
}

/// Integral over `[0, limit]` of `count(values > tau) / n`, where the
/// values are sorted ascending. The integrand steps down by `1/n` at
/// each value.
fn integrate_above(sorted: &[f64], limit: f64) -> f64 {
    let n = sorted.len() as f64;
    let mut area = 0.0;
    let mut prev = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        let edge = v.clamp(0.0, limit);
        area += (edge - prev) * (sorted.len() - j) as f64 / n;
        prev = edge;
    }
    area
}

/// Normalized precision score from per-frame normalized center distances.
///
/// `P(tau)` is the fraction of distances `<= tau`; the score is the mean of
/// `P` over `[0, 0.5]`, scaled to `[0, 100]`. Missing predictions should be
/// passed as `f64::INFINITY`.
pub fn nps(distances: &[f64]) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::Empty("center-distance series"));
    }
    let mut sorted: Vec<f64> = distances
        .iter()
        .map(|d| if d.is_nan() { f64::INFINITY } else { *d })
        .collect();
    sorted.sort_by(f64::total_cmp);
    // count(d <= tau) / n == 1 - count(d > tau) / n
    let above = integrate_above(&sorted, NPS_MAX_DISTANCE);
    let area = NPS_MAX_DISTANCE - above;
    Ok((100.0 * area / NPS_MAX_DISTANCE).clamp(0.0, 100.0))
}

/// Generalized success robustness.
///
/// For a failure threshold `tau`, the tracker succeeds on the leading
/// frames while `overlap > tau`; `r(tau)` is that prefix length over the
/// series length. The score is the mean of `r` over `[0, 0.5]`.
pub fn gsr(overlaps: &[f64]) -> Result<f64> {
    if overlaps.is_empty() {
        return Err(Error::Empty("overlap series"));
    }
    // the prefix up to frame k survives tau iff its running minimum exceeds tau
    let mut minima: Vec<f64> = overlaps
        .iter()
        .scan(f64::INFINITY, |m, &o| {
            *m = m.min(o);
            Some(*m)
        })
        .collect();
    minima.sort_by(f64::total_cmp);
    let area = integrate_above(&minima, GSR_MAX_THRESHOLD);
    Ok((100.0 * area / GSR_MAX_THRESHOLD).clamp(0.0, 100.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&[1.0, 1.0, 1.0]).unwrap(), 100.0);
        assert_eq!(auc(&[1.0, 0.5, 0.0]).unwrap(), 50.0);
        assert!((auc(&[0.2; 7]).unwrap() - 20.0).abs() < 1e-12);
        assert!(auc(&[]).is_err());
    }

    #[test]
    fn success_curve_cases() {
        let th = uniform_thresholds(51);
        assert_eq!(th.len(), 51);
        let s = success_curve(&[1.0, 1.0], &th).unwrap();
        assert!(s[..50].iter().all(|&v| v == 1.0));
        assert_eq!(s[50], 0.0);
        let s = success_curve(&[0.5, 0.5], &[0.4, 0.6]).unwrap();
        assert_eq!(s, vec![1.0, 0.0]);
        assert!(success_curve(&[], &th).is_err());
    }

    #[test]
    fn success_curve_matches_counting() {
        let o = [0.05, 0.9, 0.33, 0.5, 0.5, 0.0, 1.0, 0.71];
        let th = uniform_thresholds(51);
        let s = success_curve(&o, &th).unwrap();
        for (tau, got) in th.iter().zip(&s) {
            let count = o.iter().filter(|&&v| v > *tau).count() as f64 / o.len() as f64;
            assert_eq!(*got, count);
        }
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn nps_cases() {
        assert_eq!(nps(&[0.0, 0.0]).unwrap(), 100.0);
        assert_eq!(nps(&[f64::INFINITY; 3]).unwrap(), 0.0);
        assert!((nps(&[0.25]).unwrap() - 50.0).abs() < 1e-12);
        assert!(nps(&[]).is_err());
    }

    #[test]
    fn gsr_cases() {
        assert_eq!(gsr(&[1.0; 4]).unwrap(), 100.0);
        assert_eq!(gsr(&[0.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!((gsr(&[0.8, 0.6, 0.2, 0.7]).unwrap() - 70.0).abs() < 1e-12);
        assert!(gsr(&[]).is_err());
    }

    #[test]
    fn gsr_single_decrease_never_raises_score() {
        let base = [0.9, 0.45, 0.3, 0.8, 0.1];
        let g0 = gsr(&base).unwrap();
        for i in 0..base.len() {
            let mut lowered = base;
            lowered[i] *= 0.5;
            assert!(gsr(&lowered).unwrap() <= g0 + 1e-12);
        }
    }
}
