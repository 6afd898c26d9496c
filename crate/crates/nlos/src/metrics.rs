//! Image comparison metrics shared by the validation command and the tests.

use ndarray::{ArrayBase, Data, Dimension};

/// Relative root-mean-square error ||a - b||_2 / ||b||_2 over all elements;
/// `b` is the reference. Returns infinity for a zero reference with a
/// nonzero candidate.
pub fn rel_rmse<S, D>(a: &ArrayBase<S, D>, b: &ArrayBase<S, D>) -> f64
where
    S: Data<Elem = f64>,
    D: Dimension,
{
    assert_eq!(a.shape(), b.shape(), "metric shapes must agree");
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

/// Peak signal-to-noise ratio in dB against a reference with the given peak
/// value.
pub fn psnr<S, D>(a: &ArrayBase<S, D>, reference: &ArrayBase<S, D>, peak: f64) -> f64
where
    S: Data<Elem = f64>,
    D: Dimension,
{
    assert_eq!(a.shape(), reference.shape(), "metric shapes must agree");
    let n = a.len() as f64;
    let mse: f64 = a
        .iter()
        .zip(reference.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// Sample mean and unbiased variance.
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n >= 2);
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

/// Kolmogorov-Smirnov statistic of a sample against the uniform law on
/// [lo, hi].
pub fn ks_statistic_uniform(sample: &mut [f64], lo: f64, hi: f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (k, x) in sample.iter().enumerate() {
        let cdf = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        let lo_step = k as f64 / n;
        let hi_step = (k + 1) as f64 / n;
        d = d.max((cdf - lo_step).abs()).max((hi_step - cdf).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn rel_rmse_basics() {
        let a = Array2::from_elem((4, 4), 1.0);
        let b = Array2::from_elem((4, 4), 1.0);
        assert_eq!(rel_rmse(&a, &b), 0.0);
        let c = Array2::from_elem((4, 4), 1.1);
        assert!((rel_rmse(&c, &b) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn psnr_matches_hand_value() {
        let a = Array2::from_elem((2, 2), 0.9);
        let b = Array2::from_elem((2, 2), 1.0);
        // mse = 0.01, peak 1 => 20 dB
        assert!((psnr(&a, &b, 1.0) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn ks_uniform_accepts_uniform_grid() {
        let mut s: Vec<f64> = (0..1000).map(|k| (k as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic_uniform(&mut s, 0.0, 1.0);
        assert!(d < 0.01, "d = {d}");
    }
}
