use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Result of a paired two-tailed Student's t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
    pub mean_diff: f64,
    pub n: usize,
}

/// Paired t-test on `dᵢ = aᵢ − bᵢ` with `n − 1` degrees of freedom.
///
/// Zero-variance differences give `p = 1` when their mean is zero and an
/// error otherwise.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("paired t-test needs n >= 2, got {n}")));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let df = nf - 1.0;
    if var == 0.0 {
        if mean == 0.0 {
            return Ok(TTest {
                t: 0.0,
                p: 1.0,
                df,
                mean_diff: 0.0,
                n,
            });
        }
        return Err(Error::InvalidArgument(
            "differences have zero variance and non-zero mean".into(),
        ));
    }
    let t = mean / (var / nf).sqrt();
    let p = beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0);
    Ok(TTest {
        t,
        p,
        df,
        mean_diff: mean,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_example() {
        let r = paired_t_test(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4]).unwrap();
        assert!((r.t - 3.873).abs() < 1e-3, "t = {}", r.t);
        assert!((r.p - 0.0305).abs() < 5e-4, "p = {}", r.p);
        assert_eq!(r.df, 3.0);
    }

    #[test]
    fn identical_samples() {
        let a = [3.0, 1.0, 4.0];
        let r = paired_t_test(&a, &a).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
    }

    #[test]
    fn swapping_negates_t() {
        let a = [50.1, 42.0, 61.3, 38.8, 47.0];
        let b = [55.0, 44.2, 60.0, 45.1, 52.3];
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.p, ba.p);
    }

    #[test]
    fn error_cases() {
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[2.0]).is_err());
        assert!(paired_t_test(&[2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn matches_student_t_survival() {
        // large-sample sanity check against the normal approximation
        let a: Vec<f64> = (0..400).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
        let b: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, x)| x - 0.2 + ((i * 13) % 7) as f64 / 10.0 - 0.3)
            .collect();
        let r = paired_t_test(&a, &b).unwrap();
        use statrs::distribution::{ContinuousCDF, Normal};
        let z = 2.0 * Normal::new(0.0, 1.0).unwrap().sf(r.t.abs());
        assert!((r.p - z).abs() < 0.01);
    }
}
