//! Distribution CDFs and quantiles used by the hypothesis tests: standard
//! normal, Student's t, chi-square, and F, all expressed through the
//! regularized incomplete gamma/beta integrals.

use super::special::{reg_beta, reg_gamma_lower, reg_gamma_upper};

/// Standard normal CDF.
///
/// Evaluated through the incomplete gamma function: for x >= 0,
/// Phi(x) = (1 + P(1/2, x^2/2)) / 2, and by symmetry for x < 0 the
/// complement Q(1/2, x^2/2) / 2 keeps full precision in the lower tail.
pub fn normal_cdf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let half_sq = 0.5 * x * x;
    if x > 0.0 {
        0.5 + 0.5 * reg_gamma_lower(0.5, half_sq)
    } else {
        0.5 * reg_gamma_upper(0.5, half_sq)
    }
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile (inverse CDF).
///
/// Acklam's rational approximation refined by one Halley step against
/// [`normal_cdf`], giving near machine precision away from the extreme tails.
pub fn normal_inv_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0, 1)");

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    };

    // one Halley refinement step
    let e = normal_cdf(x) - p;
    let u = e / normal_pdf(x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Student's t CDF with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    if t == 0.0 {
        return 0.5;
    }
    let x = df / (df + t * t);
    let tail = 0.5 * reg_beta(0.5 * df, 0.5, x);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Chi-square CDF with `df` degrees of freedom.
pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    reg_gamma_lower(0.5 * df, 0.5 * x)
}

/// F distribution CDF with (`df1`, `df2`) degrees of freedom.
pub fn f_cdf(x: f64, df1: f64, df2: f64) -> f64 {
    assert!(df1 > 0.0 && df2 > 0.0, "degrees of freedom must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    reg_beta(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2))
}
