use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{auc, gsr, jf, nps, FrameScore, OverlapSeries};
use crate::error::{Error, Result};
use crate::model::View;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Auc,
    Nps,
    Gsr,
    J,
    F,
    Jf,
}

impl Metric {
    pub const ALL: [Metric; 6] = [Metric::Auc, Metric::Nps, Metric::Gsr, Metric::J, Metric::F, Metric::Jf];
    /// The three headline tracking metrics.
    pub const TRACKING: [Metric; 3] = [Metric::Auc, Metric::Nps, Metric::Gsr];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Auc => "auc",
            Metric::Nps => "nps",
            Metric::Gsr => "gsr",
            Metric::J => "j",
            Metric::F => "f",
            Metric::Jf => "jf",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Auc => "AUC",
            Metric::Nps => "NPS",
            Metric::Gsr => "GSR",
            Metric::J => "J",
            Metric::F => "F",
            Metric::Jf => "J&F",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s) || m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

/// Scores of one view of one pair, each in `[0, 100]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceScore {
    pub pair_id: String,
    pub view: View,
    pub auc: f64,
    pub nps: f64,
    pub gsr: f64,
    pub j: f64,
    pub f: f64,
    pub jf: f64,
    /// Number of scored annotations.
    pub weight: usize,
}

impl SequenceScore {
    pub fn from_series(pair_id: &str, view: View, series: &OverlapSeries) -> Result<Self> {
        Self::from_frames(pair_id, view, &series.frames)
    }

    pub fn from_frames(pair_id: &str, view: View, frames: &[FrameScore]) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Empty("no scored frames"));
        }
        let overlaps: Vec<f64> = frames.iter().map(|f| f.overlap).collect();
        let distances: Vec<f64> = frames.iter().filter_map(|f| f.center_error).collect();
        let n = frames.len() as f64;
        let j = 100.0 * frames.iter().map(|f| f.region).sum::<f64>() / n;
        let f = 100.0 * frames.iter().map(|f| f.boundary).sum::<f64>() / n;
        Ok(Self {
            pair_id: pair_id.to_string(),
            view,
            auc: auc(&overlaps)?,
            nps: nps(&distances)?,
            gsr: gsr(&overlaps)?,
            j,
            f,
            jf: jf(j, f),
            weight: frames.len(),
        })
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Auc => self.auc,
            Metric::Nps => self.nps,
            Metric::Gsr => self.gsr,
            Metric::J => self.j,
            Metric::F => self.f,
            Metric::Jf => self.jf,
        }
    }
}

/// `Σ vᵢωᵢ / Σ ωᵢ` over `(value, weight)` pairs.
pub fn weighted_mean(scores: &[(f64, f64)]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Empty("weighted mean of nothing"));
    }
    let total: f64 = scores.iter().map(|(_, w)| w).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidArgument(format!("total weight {total} is not positive")));
    }
    Ok(scores.iter().map(|(v, w)| v * w).sum::<f64>() / total)
}

/// Weighted FPV and TPV means and their signed difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaValues {
    pub delta: f64,
    pub fpv_mean: f64,
    pub tpv_mean: f64,
}

/// Mean weighted signed difference over `(fpv, tpv, weight)` triples.
///
/// `Σ (fᵢ − tᵢ)ωᵢ / Σ ωᵢ` is evaluated as the difference of the two weighted
/// means, so `delta == fpv_mean − tpv_mean` holds bit for bit.
pub fn delta_sigma(per_pair: &[(f64, f64, f64)]) -> Result<DeltaValues> {
    let fpv: Vec<(f64, f64)> = per_pair.iter().map(|&(f, _, w)| (f, w)).collect();
    let tpv: Vec<(f64, f64)> = per_pair.iter().map(|&(_, t, w)| (t, w)).collect();
    let fpv_mean = weighted_mean(&fpv)?;
    let tpv_mean = weighted_mean(&tpv)?;
    Ok(DeltaValues {
        delta: fpv_mean - tpv_mean,
        fpv_mean,
        tpv_mean,
    })
}

/// A metric's viewpoint bias over a set of pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaScore {
    pub metric: Metric,
    pub delta: f64,
    pub fpv_mean: f64,
    pub tpv_mean: f64,
    pub pairs: usize,
}

impl DeltaScore {
    pub fn new(metric: Metric, values: DeltaValues, pairs: usize) -> Self {
        Self {
            metric,
            delta: values.delta,
            fpv_mean: values.fpv_mean,
            tpv_mean: values.tpv_mean,
            pairs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weighted_mean_cases() {
        assert_eq!(weighted_mean(&[(10.0, 2.0), (20.0, 2.0)]).unwrap(), 15.0);
        assert_eq!(weighted_mean(&[(60.0, 10.0), (40.0, 30.0)]).unwrap(), 45.0);
        assert_eq!(weighted_mean(&[(37.5, 3.0)]).unwrap(), 37.5);
        assert!(weighted_mean(&[]).is_err());
        assert!(weighted_mean(&[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn delta_worked_example() {
        let d = delta_sigma(&[(60.0, 50.0, 10.0), (40.0, 50.0, 30.0)]).unwrap();
        assert_eq!(d.delta, -5.0);
        assert_eq!(d.fpv_mean, 45.0);
        assert_eq!(d.tpv_mean, 50.0);
    }

    #[test]
    fn delta_identical_views_is_zero() {
        let d = delta_sigma(&[(33.3, 33.3, 4.0), (71.0, 71.0, 9.0)]).unwrap();
        assert_eq!(d.delta, 0.0);
        assert!(delta_sigma(&[]).is_err());
    }

    #[test]
    fn metric_names_parse() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
            assert_eq!(m.label().parse::<Metric>().unwrap(), m);
        }
    }

    fn triples() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
        proptest::collection::vec((0.0..100.0f64, 0.0..100.0f64, 1u32..500), 1..40)
            .prop_map(|v| v.into_iter().map(|(f, t, w)| (f, t, w as f64)).collect())
    }

    proptest! {
        #[test]
        fn antisymmetric(v in triples()) {
            let d = delta_sigma(&v).unwrap();
            let swapped: Vec<_> = v.iter().map(|&(f, t, w)| (t, f, w)).collect();
            prop_assert_eq!(delta_sigma(&swapped).unwrap().delta, -d.delta);
        }

        #[test]
        fn matches_weighted_difference(v in triples()) {
            let d = delta_sigma(&v).unwrap();
            let total: f64 = v.iter().map(|x| x.2).sum();
            let direct = v.iter().map(|&(f, t, w)| (f - t) * w).sum::<f64>() / total;
            prop_assert!((d.delta - direct).abs() < 1e-9);
            prop_assert_eq!(d.delta, d.fpv_mean - d.tpv_mean);
        }

        #[test]
        fn duplicate_equals_double_weight(v in triples(), idx in 0usize..40) {
            let i = idx % v.len();
            let mut dup = v.clone();
            dup.push(v[i]);
            let mut doubled = v.clone();
            doubled[i].2 *= 2.0;
            let (a, b) = (delta_sigma(&dup).unwrap(), delta_sigma(&doubled).unwrap());
            prop_assert!((a.delta - b.delta).abs() < 1e-9);
        }

        #[test]
        fn equal_weights_reduce_to_plain_mean(v in triples()) {
            let eq: Vec<_> = v.iter().map(|&(f, t, _)| (f, t, 7.0)).collect();
            let plain = v.iter().map(|&(f, t, _)| f - t).sum::<f64>() / v.len() as f64;
            prop_assert!((delta_sigma(&eq).unwrap().delta - plain).abs() < 1e-9);
        }
    }
}
