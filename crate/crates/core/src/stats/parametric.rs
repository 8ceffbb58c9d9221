//! Parametric hypothesis tests: paired t and the Brown-Forsythe variant of
//! Levene's variance-homogeneity test.

use crate::error::{Error, Result};
use crate::stats::dist::{f_cdf, t_cdf};

/// Outcome of a paired t test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairedTResult {
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

/// Two-sided paired t test on matched samples `a` and `b`.
///
/// Differences that are all exactly zero yield t = 0, p = 1. Differences that
/// are constant but nonzero have no within-pair variance to test against and
/// are rejected.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<PairedTResult> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "paired t requires equal sample lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Degenerate(
            "paired t requires at least 2 pairs".into(),
        ));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    if var == 0.0 {
        if mean == 0.0 {
            return Ok(PairedTResult {
                t: 0.0,
                p: 1.0,
                df: nf - 1.0,
            });
        }
        return Err(Error::Degenerate(
            "zero-variance differences: samples are identical except constant shift".into(),
        ));
    }
    let se = (var / nf).sqrt();
    let t = mean / se;
    let df = nf - 1.0;
    let p = 2.0 * (1.0 - t_cdf(t.abs(), df));
    Ok(PairedTResult {
        t,
        p: p.clamp(0.0, 1.0),
        df,
    })
}

/// Outcome of a Levene (Brown-Forsythe) test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LeveneResult {
    pub w: f64,
    pub p: f64,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Brown-Forsythe test for equality of variances across two or more groups,
/// using absolute deviations from the group median.
///
/// When every deviation is zero (all groups internally constant) there is no
/// spread to compare and the test trivially passes with W = 0, p = 1.
pub fn levene(groups: &[&[f64]]) -> Result<LeveneResult> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::Degenerate(
            "levene requires at least 2 groups".into(),
        ));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::Degenerate(format!(
                "levene requires at least 2 observations per group, group {} has {}",
                i,
                g.len()
            )));
        }
    }
    let n_total: usize = groups.iter().map(|g| g.len()).sum();
    let nf = n_total as f64;
    let kf = k as f64;

    let z: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let med = median(g);
            g.iter().map(|v| (v - med).abs()).collect()
        })
        .collect();
    let group_means: Vec<f64> = z.iter().map(|zi| zi.iter().sum::<f64>() / zi.len() as f64).collect();
    let grand_mean = z.iter().flatten().sum::<f64>() / nf;

    let between: f64 = z
        .iter()
        .zip(&group_means)
        .map(|(zi, m)| zi.len() as f64 * (m - grand_mean) * (m - grand_mean))
        .sum();
    let within: f64 = z
        .iter()
        .zip(&group_means)
        .map(|(zi, m)| zi.iter().map(|v| (v - m) * (v - m)).sum::<f64>())
        .sum();

    if within == 0.0 {
        if between == 0.0 {
            return Ok(LeveneResult { w: 0.0, p: 1.0 });
        }
        return Err(Error::Degenerate(
            "levene is undefined: no within-group spread in deviations".into(),
        ));
    }

    let w = ((nf - kf) / (kf - 1.0)) * (between / within);
    let p = 1.0 - f_cdf(w, kf - 1.0, nf - kf);
    Ok(LeveneResult {
        w,
        p: p.clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paired_t_matches_oracle_on_constant_gap() {
        // d = [1..5] shifted: a - b = [1, 2, 3, 4, 5]
        let a = [2.0, 4.0, 6.0, 8.0, 10.0];
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = paired_t(&a, &b).unwrap();
        // oracle: t = 4.242640687119285, p = 0.013235599563682695
        assert!((r.t - 4.242640687119285).abs() < 1e-10, "t={}", r.t);
        assert!((r.p - 0.013235599563682695).abs() < 1e-8, "p={}", r.p);
    }

    #[test]
    fn identical_samples_give_unit_p() {
        let a = [1.0, 2.0, 3.0];
        let r = paired_t(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn zero_mean_differences_give_unit_p() {
        let a = [1.0, 0.0, 1.0, 0.0];
        let b = [0.0, 1.0, 0.0, 1.0];
        let r = paired_t(&a, &b).unwrap();
        assert_eq!(r.t, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_shift_is_an_error() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 3.0, 4.0];
        let err = paired_t(&a, &b).unwrap_err();
        assert!(err.to_string().contains("constant shift"), "{}", err);
    }

    #[test]
    fn mismatched_lengths_are_an_error() {
        assert!(paired_t(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn levene_detects_unequal_spread() {
        // Fixtures frozen from an independent statistical oracle:
        // a ~ N(0,1) n=30, b ~ N(0,8) n=30, W = 44.66322034764736, p = 9.965826214761078e-09
        let a = [
            0.00123, 0.298746, -0.274138, -0.890592, -0.454671, -0.991647, 0.060144, 1.340215,
            -0.492207, -0.620475, 0.489842, 0.356887, 0.105414, -0.930468, -0.029252, 0.695303,
            -1.344215, -0.457616, -1.901223, -1.289538, -1.841735, -0.235091, -1.267446, 0.271264,
            0.156751, -0.186931, -2.51676, -0.538693, -0.048501, 0.113309,
        ];
        let b = [
            -15.301358, -4.777533, -9.785191, -8.088372, 10.608986, -8.075347, -0.325217,
            8.843899, -5.836004, -1.117019, 1.104641, 0.637818, -12.250558, 0.761402, 13.588234,
            -15.471447, 8.593827, 1.19354, -6.414704, 20.004165, 7.622597, -11.992889, 0.745162,
            5.766896, -1.887821, 6.829103, -0.665173, 6.672476, 14.385226, -6.756623,
        ];
        let r = levene(&[&a, &b]).unwrap();
        assert!((r.w - 44.66322034764736).abs() < 1e-6, "W={}", r.w);
        assert!((r.p - 9.965826214761078e-09).abs() < 1e-10, "p={}", r.p);
    }

    #[test]
    fn levene_passes_equal_spread() {
        // Three same-variance groups, n=25 each: W = 0.39658973432400924, p = 0.6740701088041601
        let c1 = [
            0.034193, 1.359748, 1.224721, -0.510307, -0.29797, -0.527384, 0.569726, -0.056064,
            0.746886, -1.847325, 1.566549, -0.096432, 0.680378, -0.136566, -0.379099, 0.46311,
            0.824514, -0.20253, -0.152786, 0.685699, -0.870341, -1.514384, 0.394982, -0.670566,
            -1.920341,
        ];
        let c2 = [
            -0.814054, -0.467598, -1.193202, -1.492464, 0.036638, 0.897249, -0.233132, -0.743596,
            0.384994, 0.717236, -0.300011, 0.544668, 1.042875, -0.206956, -0.813516, 0.347651,
            0.247546, 1.098813, -1.284581, -0.661613, -0.838167, -1.734015, 0.126435, 0.527804,
            -0.73879,
        ];
        let c3 = [
            1.385647, 0.821924, 0.627376, 0.401707, 0.95567, -1.33198, 0.61393, 0.602777,
            -1.767719, 0.34703, -0.250421, 0.781523, -0.439062, -0.018241, 0.342852, -0.876262,
            0.598597, -0.104963, 0.492483, -0.521838, 1.086202, 0.605202, -0.178025, 0.631957,
            1.259755,
        ];
        let r = levene(&[&c1, &c2, &c3]).unwrap();
        assert!((r.w - 0.39658973432400924).abs() < 1e-8, "W={}", r.w);
        assert!((r.p - 0.6740701088041601).abs() < 1e-8, "p={}", r.p);
    }

    #[test]
    fn levene_on_identical_groups_is_trivially_one() {
        let g = [1.0, 2.0, 3.0, 4.0];
        let r = levene(&[&g, &g]).unwrap();
        assert_eq!(r.w, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn levene_rejects_single_group() {
        assert!(levene(&[&[1.0, 2.0][..]]).is_err());
    }
}
