//! Shapiro-Wilk normality test, following Royston's AS R94 approximation
//! for the coefficients and the p-value transformation.

use crate::error::{Error, Result};
use crate::stats::dist::{normal_cdf, normal_inv_cdf};

/// Outcome of a Shapiro-Wilk test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShapiroResult {
    pub w: f64,
    pub p: f64,
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    // coefficients in ascending powers
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Shapiro-Wilk W and p-value for a sample of size 3..=5000.
///
/// Errors on samples that are too small, too large, or constant.
pub fn shapiro_wilk(sample: &[f64]) -> Result<ShapiroResult> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::Degenerate(format!(
            "shapiro-wilk requires 3 <= n <= 5000, got {}",
            n
        )));
    }
    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if x[0] == x[n - 1] {
        return Err(Error::Degenerate("degenerate sample: all values equal".into()));
    }

    let nf = n as f64;

    // expected normal order statistics (Blom-style plotting positions)
    let m: Vec<f64> = (1..=n)
        .map(|i| normal_inv_cdf((i as f64 - 0.375) / (nf + 0.25)))
        .collect();
    let summ2: f64 = m.iter().map(|v| v * v).sum();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / nf.sqrt();

    // weight vector a (antisymmetric, ascending)
    let mut a = vec![0.0; n];
    if n == 3 {
        a[0] = -std::f64::consts::FRAC_1_SQRT_2;
        a[2] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
        const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
        let a_n = m[n - 1] / ssumm2 + poly(&C1, rsn);
        if n > 5 {
            let a_n1 = m[n - 2] / ssumm2 + poly(&C2, rsn);
            let phi = (summ2 - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2])
                / (1.0 - 2.0 * a_n * a_n - 2.0 * a_n1 * a_n1);
            let sqrt_phi = phi.sqrt();
            a[n - 1] = a_n;
            a[n - 2] = a_n1;
            a[0] = -a_n;
            a[1] = -a_n1;
            for i in 2..n - 2 {
                a[i] = m[i] / sqrt_phi;
            }
        } else {
            let phi = (summ2 - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * a_n * a_n);
            let sqrt_phi = phi.sqrt();
            a[n - 1] = a_n;
            a[0] = -a_n;
            for i in 1..n - 1 {
                a[i] = m[i] / sqrt_phi;
            }
        }
    }

    let mean = x.iter().sum::<f64>() / nf;
    let ssq: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let num: f64 = a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum();
    let w = ((num * num) / ssq).min(1.0);

    // p-value per Royston's normalizing transformations
    let p = if n == 3 {
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = (0.75f64.sqrt()).asin();
        (pi6 * (w.sqrt().asin() - stqr)).clamp(0.0, 1.0)
    } else if n <= 11 {
        const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -0.0006714];
        const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
        let gamma = -2.273 + 0.459 * nf;
        let y = -(gamma - (1.0 - w).ln()).ln();
        let mu = poly(&C3, nf);
        let sigma = poly(&C4, nf).exp();
        1.0 - normal_cdf((y - mu) / sigma)
    } else {
        const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
        const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
        let ln_n = nf.ln();
        let y = (1.0 - w).ln();
        let mu = poly(&C5, ln_n);
        let sigma = poly(&C6, ln_n).exp();
        1.0 - normal_cdf((y - mu) / sigma)
    };

    Ok(ShapiroResult { w, p })
}
