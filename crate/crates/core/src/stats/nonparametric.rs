//! Rank-based tests: Wilcoxon signed-rank, Friedman with the Iman-Davenport
//! correction, the Nemenyi critical difference, and Holm's step-down
//! adjustment for families of p-values.

use crate::error::{Error, Result};
use crate::stats::dist::{f_cdf, normal_cdf};

/// Average ranks (1-based) of `values`; tied values share the mean of the
/// positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// How a Wilcoxon p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

/// Outcome of a Wilcoxon signed-rank test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WilcoxonResult {
    pub w: f64,
    pub p: f64,
    pub method: WilcoxonMethod,
    /// nonzero differences actually ranked
    pub n_used: usize,
}

const EXACT_LIMIT: usize = 25;

/// Two-sided Wilcoxon signed-rank test on matched samples.
///
/// Zero differences are dropped. With at most 25 nonzero differences the
/// p-value is exact over all sign assignments; beyond that a tie-corrected
/// normal approximation with continuity correction is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "wilcoxon requires equal sample lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|v| *v != 0.0)
        .collect();
    let m = d.len();
    if m == 0 {
        return Err(Error::Degenerate(
            "wilcoxon: all differences are zero, nothing to rank".into(),
        ));
    }
    let abs_d: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&abs_d);
    let w_plus: f64 = d
        .iter()
        .zip(&ranks)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| r)
        .sum();
    let w_minus: f64 = ranks.iter().sum::<f64>() - w_plus;
    let w = w_plus.min(w_minus);

    if m <= EXACT_LIMIT {
        let p = exact_p(&ranks, w);
        Ok(WilcoxonResult {
            w,
            p,
            method: WilcoxonMethod::Exact,
            n_used: m,
        })
    } else {
        let mf = m as f64;
        let mean = mf * (mf + 1.0) / 4.0;
        let mut var = mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0;
        // tie correction over groups of equal |d|
        let mut sorted = abs_d.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut i = 0;
        while i < m {
            let mut j = i;
            while j + 1 < m && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            var -= (t * t * t - t) / 48.0;
            i = j + 1;
        }
        let z = (w - mean + 0.5) / var.sqrt();
        let p = (2.0 * normal_cdf(z)).min(1.0);
        Ok(WilcoxonResult {
            w,
            p,
            method: WilcoxonMethod::NormalApprox,
            n_used: m,
        })
    }
}

/// Exact two-sided p: the fraction of the 2^m sign assignments whose smaller
/// rank sum is at most the observed one. Counted by convolving the rank-sum
/// distribution; ranks are halves, so doubling makes every sum integral.
fn exact_p(ranks: &[f64], w_obs: f64) -> f64 {
    let m = ranks.len();
    let scaled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = scaled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in &scaled {
        reach += r;
        for s in (r..=reach).rev() {
            counts[s] += counts[s - r];
        }
    }
    let w2 = (w_obs * 2.0).round() as usize;
    let hits: u64 = (0..=total)
        .filter(|&s| s.min(total - s) <= w2)
        .map(|s| counts[s])
        .sum();
    hits as f64 / (1u64 << m) as f64
}

/// Outcome of a Friedman test across k models on n_s paired samples.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FriedmanResult {
    pub chi2: f64,
    /// Iman-Davenport statistic; absent when the chi-square hits its ceiling
    /// and the corrected statistic is unbounded
    pub f_id: Option<f64>,
    pub p: f64,
    pub mean_ranks: Vec<f64>,
    pub note: Option<String>,
}

/// Friedman rank test. Rows of `scores` are paired observations, columns are
/// models; within each row the best (largest) score receives rank 1. The
/// p-value comes from the Iman-Davenport F correction.
pub fn friedman(scores: &[Vec<f64>]) -> Result<FriedmanResult> {
    let n_s = scores.len();
    if n_s < 2 {
        return Err(Error::Degenerate(
            "friedman requires at least 2 paired samples".into(),
        ));
    }
    let k = scores[0].len();
    if k < 3 {
        return Err(Error::Degenerate(format!(
            "friedman requires at least 3 models, got {}",
            k
        )));
    }
    if scores.iter().any(|row| row.len() != k) {
        return Err(Error::Dimension("friedman rows differ in length".into()));
    }

    let mut rank_sums = vec![0.0; k];
    for row in scores {
        let negated: Vec<f64> = row.iter().map(|v| -v).collect();
        for (j, r) in average_ranks(&negated).into_iter().enumerate() {
            rank_sums[j] += r;
        }
    }
    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / n_s as f64).collect();

    let nf = n_s as f64;
    let kf = k as f64;
    let center = (kf + 1.0) / 2.0;
    let chi2 = 12.0 * nf / (kf * (kf + 1.0))
        * mean_ranks.iter().map(|r| (r - center) * (r - center)).sum::<f64>();

    let ceiling = nf * (kf - 1.0);
    if ceiling - chi2 <= 1e-9 {
        return Ok(FriedmanResult {
            chi2,
            f_id: None,
            p: 0.0,
            mean_ranks,
            note: Some(
                "rankings are identical in every sample; the corrected statistic is unbounded"
                    .into(),
            ),
        });
    }
    let f_id = (nf - 1.0) * chi2 / (ceiling - chi2);
    let p = 1.0 - f_cdf(f_id, kf - 1.0, (kf - 1.0) * (nf - 1.0));
    Ok(FriedmanResult {
        chi2,
        f_id: Some(f_id),
        p: p.clamp(0.0, 1.0),
        mean_ranks,
        note: None,
    })
}

/// Outcome of a Nemenyi post-hoc comparison.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NemenyiResult {
    pub critical_difference: f64,
    pub mean_ranks: Vec<f64>,
    /// significant[i][j] iff models i and j differ by more than the CD
    pub significant: Vec<Vec<bool>>,
}

/// Critical values q_alpha for the Nemenyi test (studentized range at
/// infinite df divided by sqrt 2), k = 2..=20.
const Q_05: [f64; 19] = [
    1.96, 2.3437, 2.569, 2.7278, 2.8497, 2.9483, 3.0309, 3.1017, 3.1637, 3.2187, 3.268, 3.3127,
    3.3536, 3.3912, 3.426, 3.4584, 3.4887, 3.5171, 3.5438,
];
const Q_10: [f64; 19] = [
    1.6449, 2.0523, 2.2913, 2.4595, 2.5885, 2.6927, 2.7799, 2.8546, 2.9199, 2.9778, 3.0297,
    3.0767, 3.1197, 3.1592, 3.1957, 3.2297, 3.2615, 3.2912, 3.3192,
];

/// The critical difference q_alpha * sqrt(k(k+1)/(6 n_s)) for k models over
/// n_s paired samples. Only alpha = 0.05 and alpha = 0.10 are tabulated.
pub fn nemenyi_critical_difference(k: usize, n_s: usize, alpha: f64) -> Result<f64> {
    if !(2..=20).contains(&k) {
        return Err(Error::Degenerate(format!(
            "nemenyi critical values cover 2..=20 models, got {}",
            k
        )));
    }
    if n_s == 0 {
        return Err(Error::Degenerate("nemenyi requires at least one sample".into()));
    }
    let q = if (alpha - 0.05).abs() < 1e-9 {
        Q_05[k - 2]
    } else if (alpha - 0.10).abs() < 1e-9 {
        Q_10[k - 2]
    } else {
        return Err(Error::Degenerate(format!(
            "nemenyi critical values are tabulated for alpha 0.05 and 0.10, got {}",
            alpha
        )));
    };
    let kf = k as f64;
    Ok(q * (kf * (kf + 1.0) / (6.0 * n_s as f64)).sqrt())
}

/// Nemenyi post-hoc test over the same score layout as [`friedman`].
pub fn nemenyi(scores: &[Vec<f64>], alpha: f64) -> Result<NemenyiResult> {
    let n_s = scores.len();
    if n_s == 0 {
        return Err(Error::Degenerate("nemenyi requires at least one sample".into()));
    }
    let k = scores[0].len();
    if scores.iter().any(|row| row.len() != k) {
        return Err(Error::Dimension("nemenyi rows differ in length".into()));
    }
    let cd = nemenyi_critical_difference(k, n_s, alpha)?;
    let mut rank_sums = vec![0.0; k];
    for row in scores {
        let negated: Vec<f64> = row.iter().map(|v| -v).collect();
        for (j, r) in average_ranks(&negated).into_iter().enumerate() {
            rank_sums[j] += r;
        }
    }
    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / n_s as f64).collect();
    let significant = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| i != j && (mean_ranks[i] - mean_ranks[j]).abs() > cd)
                .collect()
        })
        .collect();
    Ok(NemenyiResult {
        critical_difference: cd,
        mean_ranks,
        significant,
    })
}

/// Outcome of Holm's step-down correction.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HolmResult {
    /// per input p-value, in the original order
    pub reject: Vec<bool>,
    /// monotone adjusted p-values, in the original order
    pub adjusted: Vec<f64>,
}

/// Holm's step-down multiple-comparison procedure at level `alpha`.
pub fn holm(p_values: &[f64], alpha: f64) -> Result<HolmResult> {
    let m = p_values.len();
    if m == 0 {
        return Err(Error::Degenerate("holm requires at least one p-value".into()));
    }
    if p_values.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
        return Err(Error::Degenerate(
            "holm requires p-values in [0, 1]".into(),
        ));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).unwrap());

    let mut reject = vec![false; m];
    let mut adjusted = vec![0.0; m];
    let mut alive = true;
    let mut running_max = 0.0f64;
    for (i, &idx) in order.iter().enumerate() {
        let p = p_values[idx];
        let scale = (m - i) as f64;
        if alive && p <= alpha / scale {
            reject[idx] = true;
        } else {
            alive = false;
        }
        running_max = running_max.max((scale * p).min(1.0));
        adjusted[idx] = running_max;
    }
    Ok(HolmResult { reject, adjusted })
}
