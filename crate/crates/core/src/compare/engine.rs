//! The automated comparison procedure. Assumption checks pick the test
//! family, the family picks the tests, and a rejected omnibus triggers the
//! post-hoc analyses. Every branch lands in the report trail together with
//! the numbers that forced it.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{
    friedman, holm, levene, nemenyi, paired_t, shapiro_wilk, wilcoxon_signed_rank, WilcoxonMethod,
};

use super::{metric_direction, Direction, MetricSamples};

/// Test family selected by the assumption checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Parametric,
    Nonparametric,
}

/// One assumption test outcome. A degenerate input leaves the statistic
/// empty and carries the reason in the note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub test: String,
    pub subject: String,
    pub statistic: Option<f64>,
    pub p: Option<f64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// The omnibus test verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Omnibus {
    pub test: String,
    pub statistic: f64,
    /// Iman-Davenport F when the test is Friedman.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected_statistic: Option<f64>,
    pub p: f64,
    pub rejected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One pairwise post-hoc comparison. A pair the test cannot score keeps the
/// reason in its note and stays out of the Holm correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub model_a: String,
    pub model_b: String,
    pub test: String,
    pub statistic: Option<f64>,
    pub p: Option<f64>,
    pub adjusted_p: Option<f64>,
    pub reject: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Nemenyi post-hoc summary. Mean ranks use rank 1 = best.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NemenyiSummary {
    pub critical_difference: f64,
    pub mean_ranks: Vec<(String, f64)>,
    /// Pairs whose mean-rank gap exceeds the critical difference.
    pub separated: Vec<(String, String)>,
}

/// Full audit of one automated comparison: the assumption evidence, the
/// branch it forced, and every test outcome. The trail alone is enough to
/// replay each decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metric: String,
    pub alpha: f64,
    pub models: Vec<String>,
    pub n_samples: usize,
    pub assumptions: Vec<AssumptionCheck>,
    /// None only when the samples are identical and no test is needed.
    pub family: Option<Family>,
    pub family_reason: String,
    pub omnibus: Option<Omnibus>,
    pub post_hoc: Vec<PairwiseComparison>,
    pub nemenyi: Option<NemenyiSummary>,
    pub trail: Vec<String>,
}

impl ComparisonReport {
    /// Plain-text rendering of the full report.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "comparison on {}: {} models, {} paired samples, alpha = {}",
            self.metric,
            self.models.len(),
            self.n_samples,
            self.alpha
        );
        let _ = writeln!(out, "models: {}", self.models.join(", "));
        if !self.assumptions.is_empty() {
            let _ = writeln!(out, "assumptions:");
            for check in &self.assumptions {
                let verdict = if check.passed { "pass" } else { "fail" };
                match (check.statistic, check.p) {
                    (Some(statistic), Some(p)) => {
                        let _ = writeln!(
                            out,
                            "  {} on {}: statistic = {:.4}, p = {:.4} -> {}",
                            check.test, check.subject, statistic, p, verdict
                        );
                    }
                    _ => {
                        let _ = writeln!(
                            out,
                            "  {} on {}: unavailable ({}) -> {}",
                            check.test,
                            check.subject,
                            check.note.as_deref().unwrap_or("degenerate"),
                            verdict
                        );
                    }
                }
            }
        }
        match self.family {
            Some(Family::Parametric) => {
                let _ = writeln!(out, "family: parametric ({})", self.family_reason);
            }
            Some(Family::Nonparametric) => {
                let _ = writeln!(out, "family: nonparametric ({})", self.family_reason);
            }
            None => {
                let _ = writeln!(out, "family: none ({})", self.family_reason);
            }
        }
        if let Some(omnibus) = &self.omnibus {
            let corrected = omnibus
                .corrected_statistic
                .map(|f| format!(", corrected statistic = {:.4}", f))
                .unwrap_or_default();
            let verdict = if omnibus.rejected { "rejected" } else { "retained" };
            let _ = writeln!(
                out,
                "omnibus: {}: statistic = {:.4}{}, p = {:.4} -> null {}",
                omnibus.test, omnibus.statistic, corrected, omnibus.p, verdict
            );
            if let Some(note) = &omnibus.note {
                let _ = writeln!(out, "  note: {}", note);
            }
        }
        if let Some(nemenyi) = &self.nemenyi {
            let ranks: Vec<String> = nemenyi
                .mean_ranks
                .iter()
                .map(|(model, rank)| format!("{} = {:.2}", model, rank))
                .collect();
            let _ = writeln!(
                out,
                "nemenyi: critical difference = {:.4}; mean ranks: {}",
                nemenyi.critical_difference,
                ranks.join(", ")
            );
            if nemenyi.separated.is_empty() {
                let _ = writeln!(out, "  no pair separated");
            } else {
                for (a, b) in &nemenyi.separated {
                    let _ = writeln!(out, "  separated: {} vs {}", a, b);
                }
            }
        }
        if !self.post_hoc.is_empty() {
            let _ = writeln!(out, "post-hoc:");
            for pair in &self.post_hoc {
                let verdict = if pair.reject { "reject" } else { "retain" };
                match (pair.p, pair.adjusted_p) {
                    (Some(p), Some(adjusted)) => {
                        let _ = writeln!(
                            out,
                            "  {} vs {} [{}]: p = {:.4}, holm p = {:.4} -> {}",
                            pair.model_a, pair.model_b, pair.test, p, adjusted, verdict
                        );
                    }
                    _ => {
                        let _ = writeln!(
                            out,
                            "  {} vs {} [{}]: unavailable ({})",
                            pair.model_a,
                            pair.model_b,
                            pair.test,
                            pair.note.as_deref().unwrap_or("degenerate")
                        );
                    }
                }
            }
        }
        let _ = writeln!(out, "trail:");
        for (i, entry) in self.trail.iter().enumerate() {
            let _ = writeln!(out, "  {}. {}", i + 1, entry);
        }
        out
    }
}

/// Runs the automated comparison over paired samples. Degenerate inputs
/// become trail entries rather than failures; the call itself errors only
/// when the inputs leave nothing to test against.
pub fn compare(samples: &MetricSamples, alpha: f64) -> Result<ComparisonReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie in (0, 1), got {}",
            alpha
        )));
    }
    let k = samples.n_models();
    if k < 2 {
        return Err(Error::Degenerate(
            "a comparison needs at least 2 models".into(),
        ));
    }
    let mut report = ComparisonReport {
        metric: samples.metric().to_string(),
        alpha,
        models: samples.model_ids().to_vec(),
        n_samples: samples.n_samples(),
        assumptions: Vec::new(),
        family: None,
        family_reason: String::new(),
        omnibus: None,
        post_hoc: Vec::new(),
        nemenyi: None,
        trail: Vec::new(),
    };
    report.trail.push(format!(
        "comparing {} models on {} over {} paired samples at alpha = {}",
        k,
        samples.metric(),
        samples.n_samples(),
        alpha
    ));
    if k == 2 {
        compare_two(samples, alpha, &mut report);
        Ok(report)
    } else {
        compare_many(samples, alpha, &mut report)?;
        Ok(report)
    }
}

fn compare_two(samples: &MetricSamples, alpha: f64, report: &mut ComparisonReport) {
    let ids = samples.model_ids();
    let a = samples.values(0);
    let b = samples.values(1);
    let differences: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();

    if differences.iter().all(|d| *d == 0.0) {
        report.family_reason = "the samples are identical, so no test can separate them".into();
        report.trail.push(format!(
            "all {} paired differences between {} and {} are zero; no significant difference (p = 1)",
            differences.len(),
            ids[0],
            ids[1]
        ));
        return;
    }
    if differences.iter().all(|d| *d == differences[0]) {
        report.trail.push(format!(
            "{} and {} are identical except a constant shift of {:.6}; the paired t-test is \
             undefined on zero-variance differences",
            ids[0], ids[1], differences[0]
        ));
    }

    let normal = match shapiro_wilk(&differences) {
        Ok(result) => {
            let passed = result.p > alpha;
            report.trail.push(format!(
                "Shapiro-Wilk on the paired differences: W = {:.4}, p = {:.4} ({} normality at alpha = {})",
                result.w,
                result.p,
                if passed { "consistent with" } else { "rejects" },
                alpha
            ));
            report.assumptions.push(AssumptionCheck {
                test: "shapiro_wilk".into(),
                subject: "paired differences".into(),
                statistic: Some(result.w),
                p: Some(result.p),
                passed,
                note: None,
            });
            passed
        }
        Err(e) => {
            report.trail.push(format!(
                "Shapiro-Wilk is unavailable for the {} paired differences ({}); treating them as non-normal",
                differences.len(),
                e
            ));
            report.assumptions.push(AssumptionCheck {
                test: "shapiro_wilk".into(),
                subject: "paired differences".into(),
                statistic: None,
                p: None,
                passed: false,
                note: Some(e.to_string()),
            });
            false
        }
    };

    if normal {
        let shapiro_p = report.assumptions[0].p.expect("normal implies a p-value");
        report.family = Some(Family::Parametric);
        report.family_reason = format!(
            "the paired differences look normal (Shapiro-Wilk p = {:.4} > alpha = {})",
            shapiro_p, alpha
        );
        match paired_t(a, b) {
            Ok(result) => {
                let rejected = result.p <= alpha;
                report.trail.push(format!(
                    "paired t-test {} vs {}: t = {:.4} (df = {}), p = {:.4}; {}",
                    ids[0],
                    ids[1],
                    result.t,
                    result.df,
                    result.p,
                    if rejected {
                        "the difference is significant"
                    } else {
                        "no significant difference"
                    }
                ));
                report.omnibus = Some(Omnibus {
                    test: "paired_t".into(),
                    statistic: result.t,
                    corrected_statistic: None,
                    p: result.p,
                    rejected,
                    note: None,
                });
            }
            Err(e) => {
                report.trail.push(format!(
                    "the paired t-test failed on the {} differences ({}); falling back to Wilcoxon",
                    differences.len(),
                    e
                ));
                wilcoxon_omnibus(a, b, ids, alpha, report);
            }
        }
    } else {
        report.family = Some(Family::Nonparametric);
        report.family_reason = match report.assumptions[0].p {
            Some(p) => format!(
                "the paired differences are not normal (Shapiro-Wilk p = {:.4} <= alpha = {})",
                p, alpha
            ),
            None => format!(
                "normality cannot be assessed ({})",
                report.assumptions[0]
                    .note
                    .as_deref()
                    .unwrap_or("degenerate differences")
            ),
        };
        wilcoxon_omnibus(a, b, ids, alpha, report);
    }
}

fn wilcoxon_omnibus(
    a: &[f64],
    b: &[f64],
    ids: &[String],
    alpha: f64,
    report: &mut ComparisonReport,
) {
    match wilcoxon_signed_rank(a, b) {
        Ok(result) => {
            let rejected = result.p <= alpha;
            let method = match result.method {
                WilcoxonMethod::Exact => {
                    format!("exact over {} nonzero differences", result.n_used)
                }
                WilcoxonMethod::NormalApprox => format!(
                    "normal approximation over {} nonzero differences",
                    result.n_used
                ),
            };
            report.trail.push(format!(
                "Wilcoxon signed-rank {} vs {}: W = {:.4}, p = {:.4} ({}); {}",
                ids[0],
                ids[1],
                result.w,
                result.p,
                method,
                if rejected {
                    "the difference is significant"
                } else {
                    "no significant difference"
                }
            ));
            report.omnibus = Some(Omnibus {
                test: "wilcoxon_signed_rank".into(),
                statistic: result.w,
                corrected_statistic: None,
                p: result.p,
                rejected,
                note: Some(method),
            });
        }
        Err(e) => {
            report.trail.push(format!(
                "the Wilcoxon signed-rank test is unavailable for the {} pairs ({}); \
                 no significant difference can be claimed (p = 1)",
                a.len(),
                e
            ));
        }
    }
}

fn compare_many(samples: &MetricSamples, alpha: f64, report: &mut ComparisonReport) -> Result<()> {
    let k = samples.n_models();
    let ids = samples.model_ids().to_vec();

    let mut non_normal: Vec<String> = Vec::new();
    let mut min_shapiro_p: Option<f64> = None;
    for i in 0..k {
        match shapiro_wilk(samples.values(i)) {
            Ok(result) => {
                let passed = result.p > alpha;
                report.trail.push(format!(
                    "Shapiro-Wilk for {}: W = {:.4}, p = {:.4} ({} normality at alpha = {})",
                    ids[i],
                    result.w,
                    result.p,
                    if passed { "consistent with" } else { "rejects" },
                    alpha
                ));
                report.assumptions.push(AssumptionCheck {
                    test: "shapiro_wilk".into(),
                    subject: ids[i].clone(),
                    statistic: Some(result.w),
                    p: Some(result.p),
                    passed,
                    note: None,
                });
                min_shapiro_p = Some(min_shapiro_p.map_or(result.p, |m: f64| m.min(result.p)));
                if !passed {
                    non_normal.push(ids[i].clone());
                }
            }
            Err(e) => {
                report.trail.push(format!(
                    "Shapiro-Wilk is unavailable for the {} values of {} ({}); treating them as non-normal",
                    samples.n_samples(),
                    ids[i],
                    e
                ));
                report.assumptions.push(AssumptionCheck {
                    test: "shapiro_wilk".into(),
                    subject: ids[i].clone(),
                    statistic: None,
                    p: None,
                    passed: false,
                    note: Some(e.to_string()),
                });
                non_normal.push(ids[i].clone());
            }
        }
    }

    let groups: Vec<&[f64]> = (0..k).map(|i| samples.values(i)).collect();
    let (homogeneous, levene_p) = match levene(&groups) {
        Ok(result) => {
            let passed = result.p > alpha;
            report.trail.push(format!(
                "Levene across the {} models: W = {:.4}, p = {:.4} (variances look {})",
                k,
                result.w,
                result.p,
                if passed { "homogeneous" } else { "heterogeneous" }
            ));
            report.assumptions.push(AssumptionCheck {
                test: "levene".into(),
                subject: "all models".into(),
                statistic: Some(result.w),
                p: Some(result.p),
                passed,
                note: None,
            });
            (passed, Some(result.p))
        }
        Err(e) => {
            report.trail.push(format!(
                "Levene is unavailable across the {} models ({}); treating variances as heterogeneous",
                k, e
            ));
            report.assumptions.push(AssumptionCheck {
                test: "levene".into(),
                subject: "all models".into(),
                statistic: None,
                p: None,
                passed: false,
                note: Some(e.to_string()),
            });
            (false, None)
        }
    };

    if non_normal.is_empty() && homogeneous {
        report.family = Some(Family::Parametric);
        report.family_reason = format!(
            "every sample looks normal and variances are homogeneous (smallest Shapiro-Wilk \
             p = {:.4}, Levene p = {:.4}, both > alpha = {})",
            min_shapiro_p.expect("all models produced a Shapiro-Wilk p"),
            levene_p.expect("homogeneity implies a Levene p"),
            alpha
        );
        report.trail.push(format!(
            "all assumption checks passed; comparing the {} pairs with paired t-tests under \
             Holm correction",
            k * (k - 1) / 2
        ));
        pairwise_with_holm(samples, alpha, Family::Parametric, report)?;
        return Ok(());
    }

    report.family = Some(Family::Nonparametric);
    let mut reasons: Vec<String> = Vec::new();
    if !non_normal.is_empty() {
        reasons.push(format!(
            "normality fails for {} of {} models ({})",
            non_normal.len(),
            k,
            non_normal.join(", ")
        ));
    }
    if !homogeneous {
        reasons.push(match levene_p {
            Some(p) => format!("variances are heterogeneous (Levene p = {:.4})", p),
            None => "the variance check is unavailable".into(),
        });
    }
    report.family_reason = reasons.join("; ");

    let direction = metric_direction(samples.metric()).unwrap_or(Direction::Maximize);
    let mut matrix = samples.sample_matrix();
    if direction == Direction::Minimize {
        for row in &mut matrix {
            for value in row {
                *value = -*value;
            }
        }
        report.trail.push(format!(
            "{} is minimized, so its values are negated before ranking (rank 1 = best)",
            samples.metric()
        ));
    }

    match friedman(&matrix) {
        Ok(result) => {
            let rejected = result.p <= alpha;
            let corrected = match result.f_id {
                Some(f) => format!(", Iman-Davenport F = {:.4}", f),
                None => ", the Iman-Davenport correction is unbounded".into(),
            };
            report.trail.push(format!(
                "Friedman test: chi2_F = {:.4}{}, p = {:.4}; the null is {}",
                result.chi2,
                corrected,
                result.p,
                if rejected { "rejected" } else { "retained" }
            ));
            let ranks: Vec<String> = ids
                .iter()
                .zip(&result.mean_ranks)
                .map(|(model, rank)| format!("{} = {:.2}", model, rank))
                .collect();
            report
                .trail
                .push(format!("mean ranks (1 = best): {}", ranks.join(", ")));
            report.omnibus = Some(Omnibus {
                test: "friedman".into(),
                statistic: result.chi2,
                corrected_statistic: result.f_id,
                p: result.p,
                rejected,
                note: result.note.clone(),
            });
            if rejected {
                nemenyi_post_hoc(&matrix, &ids, alpha, report);
                pairwise_with_holm(samples, alpha, Family::Nonparametric, report)?;
            } else {
                report.trail.push(format!(
                    "the Friedman test retains the null at alpha = {}; post-hoc comparisons \
                     are not run",
                    alpha
                ));
            }
        }
        Err(e) => {
            report.trail.push(format!(
                "the Friedman test is unavailable for the {} x {} sample matrix ({})",
                samples.n_samples(),
                k,
                e
            ));
        }
    }
    Ok(())
}

fn nemenyi_post_hoc(matrix: &[Vec<f64>], ids: &[String], alpha: f64, report: &mut ComparisonReport) {
    match nemenyi(matrix, alpha) {
        Ok(result) => {
            report.trail.push(format!(
                "Nemenyi critical difference = {:.4} for {} models over {} samples at alpha = {}",
                result.critical_difference,
                ids.len(),
                matrix.len(),
                alpha
            ));
            let mut separated = Vec::new();
            for i in 0..ids.len() {
                for j in (i + 1)..ids.len() {
                    if result.significant[i][j] {
                        report.trail.push(format!(
                            "Nemenyi: |{:.2} - {:.2}| = {:.2} exceeds the critical difference \
                             {:.4}; {} and {} differ",
                            result.mean_ranks[i],
                            result.mean_ranks[j],
                            (result.mean_ranks[i] - result.mean_ranks[j]).abs(),
                            result.critical_difference,
                            ids[i],
                            ids[j]
                        ));
                        separated.push((ids[i].clone(), ids[j].clone()));
                    }
                }
            }
            if separated.is_empty() {
                report.trail.push(format!(
                    "no mean-rank gap exceeds the critical difference {:.4}",
                    result.critical_difference
                ));
            }
            report.nemenyi = Some(NemenyiSummary {
                critical_difference: result.critical_difference,
                mean_ranks: ids.iter().cloned().zip(result.mean_ranks).collect(),
                separated,
            });
        }
        Err(e) => {
            report.trail.push(format!(
                "the Nemenyi test is unavailable at alpha = {} ({}); relying on the pairwise \
                 Wilcoxon table",
                alpha, e
            ));
        }
    }
}

fn pairwise_with_holm(
    samples: &MetricSamples,
    alpha: f64,
    family: Family,
    report: &mut ComparisonReport,
) -> Result<()> {
    let k = samples.n_models();
    let ids = samples.model_ids();
    let test_name = match family {
        Family::Parametric => "paired_t",
        Family::Nonparametric => "wilcoxon_signed_rank",
    };
    let mut entries: Vec<PairwiseComparison> = Vec::new();
    let mut p_values: Vec<f64> = Vec::new();
    let mut scored: Vec<usize> = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let a = samples.values(i);
            let b = samples.values(j);
            let outcome = match family {
                Family::Parametric => paired_t(a, b).map(|r| (r.t, r.p)),
                Family::Nonparametric => wilcoxon_signed_rank(a, b).map(|r| (r.w, r.p)),
            };
            match outcome {
                Ok((statistic, p)) => {
                    scored.push(entries.len());
                    p_values.push(p);
                    entries.push(PairwiseComparison {
                        model_a: ids[i].clone(),
                        model_b: ids[j].clone(),
                        test: test_name.into(),
                        statistic: Some(statistic),
                        p: Some(p),
                        adjusted_p: None,
                        reject: false,
                        note: None,
                    });
                }
                Err(e) => {
                    report.trail.push(format!(
                        "{} {} vs {} is unavailable over the {} pairs ({}); the pair is left \
                         out of the Holm correction",
                        test_name,
                        ids[i],
                        ids[j],
                        samples.n_samples(),
                        e
                    ));
                    entries.push(PairwiseComparison {
                        model_a: ids[i].clone(),
                        model_b: ids[j].clone(),
                        test: test_name.into(),
                        statistic: None,
                        p: None,
                        adjusted_p: None,
                        reject: false,
                        note: Some(e.to_string()),
                    });
                }
            }
        }
    }

    if p_values.is_empty() {
        report.trail.push(format!(
            "none of the {} pairs produced a testable p-value; no post-hoc decision is possible",
            entries.len()
        ));
        report.post_hoc = entries;
        return Ok(());
    }

    let correction = holm(&p_values, alpha)?;
    let mut rejected = 0;
    for (slot, entry_index) in scored.iter().enumerate() {
        let entry = &mut entries[*entry_index];
        entry.adjusted_p = Some(correction.adjusted[slot]);
        entry.reject = correction.reject[slot];
        if entry.reject {
            rejected += 1;
        }
        report.trail.push(format!(
            "{} {} vs {}: statistic = {:.4}, p = {:.4}, Holm-adjusted p = {:.4}; {}",
            entry.test,
            entry.model_a,
            entry.model_b,
            entry.statistic.expect("scored pairs carry a statistic"),
            entry.p.expect("scored pairs carry a p-value"),
            correction.adjusted[slot],
            if entry.reject { "reject" } else { "retain" }
        ));
    }
    report.trail.push(format!(
        "Holm correction over {} testable pairs at alpha = {}: {} rejected",
        p_values.len(),
        alpha,
        rejected
    ));
    report.post_hoc = entries;
    Ok(())
}
