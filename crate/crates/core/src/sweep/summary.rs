//! Per-sample aggregation of per-resonator fits.

use serde::{Deserialize, Serialize};

use super::{FitOutcome, SweepDataset, SweepKind, SATURATION_SLOPE_THRESHOLD};
use crate::error::SweepFitError;

/// Photon number at or above which a point counts as high power.
pub const HIGH_POWER_PHOTONS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (n − 1); zero for a single value.
    pub std: f64,
    pub count: usize,
}

/// Mean and sample standard deviation. `None` for an empty slice.
pub fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    // Welford update: exact for constant input.
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &v) in values.iter().enumerate() {
        let d = v - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (v - mean);
    }
    let std = if values.len() > 1 {
        (m2 / (values.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(MeanStd {
        mean,
        std,
        count: values.len(),
    })
}

/// Quantile by linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Lower quartile, median and upper quartile.
pub fn quartiles(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some((
        quantile(&sorted, 0.25),
        quantile(&sorted, 0.5),
        quantile(&sorted, 0.75),
    ))
}

/// Box-plot statistics with 1.5·IQR whiskers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    let (q1, median, q3) = quartiles(values)?;
    let iqr = q3 - q1;
    let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = values
        .iter()
        .cloned()
        .filter(|v| *v >= fence_lo && *v <= fence_hi);
    let whisker_low = inside.clone().fold(f64::INFINITY, f64::min);
    let whisker_high = inside.fold(f64::NEG_INFINITY, f64::max);
    let mut outliers: Vec<f64> = values
        .iter()
        .cloned()
        .filter(|v| *v < fence_lo || *v > fence_hi)
        .collect();
    outliers.sort_by(f64::total_cmp);
    Some(BoxStats {
        q1,
        median,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    })
}

/// Points eligible for the low/high-power columns: all points of a power
/// sweep, the coldest temperature of a temperature sweep.
fn base_temperature_points(data: &SweepDataset) -> Vec<usize> {
    match data.kind {
        SweepKind::PowerSweep => (0..data.points.len()).collect(),
        SweepKind::TemperatureSweep => {
            let coldest = data
                .points
                .iter()
                .map(|p| p.x)
                .fold(f64::INFINITY, f64::min);
            (0..data.points.len())
                .filter(|&i| data.points[i].x <= 1.05 * coldest)
                .collect()
        }
    }
}

/// Q_i at the point whose photon number is closest to one (in log distance).
pub fn low_power_qi(data: &SweepDataset) -> Option<f64> {
    base_temperature_points(data)
        .into_iter()
        .min_by(|&a, &b| {
            let da = data.operating_point(a).0.ln().abs();
            let db = data.operating_point(b).0.ln().abs();
            da.total_cmp(&db)
        })
        .map(|i| data.points[i].q_i)
}

/// Mean Q_i over points with ⟨n⟩ ≥ 10⁶, falling back to the highest-⟨n⟩ point.
pub fn high_power_qi(data: &SweepDataset) -> Option<f64> {
    let eligible = base_temperature_points(data);
    let high: Vec<f64> = eligible
        .iter()
        .copied()
        .filter(|&i| data.operating_point(i).0 >= HIGH_POWER_PHOTONS)
        .map(|i| data.points[i].q_i)
        .collect();
    if let Some(ms) = mean_std(&high) {
        return Some(ms.mean);
    }
    eligible
        .into_iter()
        .max_by(|&a, &b| {
            data.operating_point(a)
                .0
                .total_cmp(&data.operating_point(b).0)
        })
        .map(|i| data.points[i].q_i)
}

/// Summary row for one sample (one chip, one treatment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub sample_id: String,
    pub resonators: usize,
    pub f_delta_tls0: MeanStd,
    pub q_i_lp: MeanStd,
    pub q_i_lp_max: f64,
    pub q_i_hp: MeanStd,
    pub q_i_lp_box: BoxStats,
    /// Per resonator: TLS loss still falling with power at the top of the sweep.
    pub not_saturated: Vec<bool>,
}

/// Aggregates the fits and raw datasets of one sample's resonators.
pub fn summarize_sample(
    sample_id: &str,
    fits: &[FitOutcome],
    datasets: &[SweepDataset],
) -> Result<SampleSummary, SweepFitError> {
    if fits.is_empty() || fits.len() != datasets.len() {
        return Err(SweepFitError::InvalidDataset(format!(
            "sample {sample_id}: {} fits for {} datasets",
            fits.len(),
            datasets.len()
        )));
    }
    let empty = || SweepFitError::InvalidDataset(format!("sample {sample_id}: empty dataset"));
    let tls: Vec<f64> = fits.iter().map(|f| f.params.f_delta_tls0).collect();
    let lp: Vec<f64> = datasets
        .iter()
        .map(low_power_qi)
        .collect::<Option<_>>()
        .ok_or_else(empty)?;
    let hp: Vec<f64> = datasets
        .iter()
        .map(high_power_qi)
        .collect::<Option<_>>()
        .ok_or_else(empty)?;
    Ok(SampleSummary {
        sample_id: sample_id.to_string(),
        resonators: fits.len(),
        f_delta_tls0: mean_std(&tls).ok_or_else(empty)?,
        q_i_lp: mean_std(&lp).ok_or_else(empty)?,
        q_i_lp_max: lp.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        q_i_hp: mean_std(&hp).ok_or_else(empty)?,
        q_i_lp_box: box_stats(&lp).ok_or_else(empty)?,
        not_saturated: fits
            .iter()
            .map(|f| f.high_power_log_slope() > SATURATION_SLOPE_THRESHOLD)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_of_one_to_five() {
        assert_eq!(quartiles(&[5.0, 1.0, 3.0, 2.0, 4.0]), Some((2.0, 3.0, 4.0)));
        assert_eq!(quartiles(&[]), None);
    }

    #[test]
    fn mean_std_single_and_pair() {
        let one = mean_std(&[2.5]).unwrap();
        assert_eq!((one.mean, one.std), (2.5, 0.0));
        let two = mean_std(&[1.0, 3.0]).unwrap();
        assert_eq!(two.mean, 2.0);
        assert!((two.std - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn box_outliers() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0, 5.0, 100.0]).unwrap();
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.whisker_high, 5.0);
        assert_eq!(b.whisker_low, 1.0);
    }
}
