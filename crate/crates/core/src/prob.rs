//! Small numeric helpers shared by the feature extractors and the metrics.

/// Default additive smoothing applied to every category of a distribution.
pub const SMOOTHING_EPSILON: f64 = 1e-6;

/// Normalizes non-negative `raw` values into proportions, adds `epsilon` to
/// each, and renormalizes. With `epsilon == 0` an all-zero input has no
/// distribution and `None` is returned; with `epsilon > 0` it becomes uniform.
pub fn smooth_normalize(raw: &[f64], epsilon: f64) -> Option<Vec<f64>> {
    let total: f64 = raw.iter().sum();
    let k = raw.len() as f64;
    if total > 0.0 {
        let denom = 1.0 + k * epsilon;
        Some(raw.iter().map(|x| (x / total + epsilon) / denom).collect())
    } else if epsilon > 0.0 && !raw.is_empty() {
        Some(vec![1.0 / k; raw.len()])
    } else {
        None
    }
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Sample variance (n - 1 denominator).
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    Some(xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Sample standard deviation; zero for a single observation.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    match xs.len() {
        0 => None,
        1 => Some(0.0),
        _ => sample_variance(xs).map(f64::sqrt),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_keeps_unit_mass() {
        let p = smooth_normalize(&[3.0, 1.0, 0.0], SMOOTHING_EPSILON).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p[0] - 0.75).abs() < 1e-5);
        assert!(p[2] > 0.0);
    }

    #[test]
    fn zero_mass() {
        assert_eq!(smooth_normalize(&[0.0, 0.0], 0.0), None);
        assert_eq!(smooth_normalize(&[0.0, 0.0], 1e-6), Some(vec![0.5, 0.5]));
    }

    #[test]
    fn sd_of_known_values() {
        let sd = sample_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((sd - 2.138_089_935_299_395).abs() < 1e-12);
        assert_eq!(sample_sd(&[3.0]), Some(0.0));
    }
}
