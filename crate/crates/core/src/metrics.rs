//! Confusion counts, per-group rates, and group-fairness gaps.
//!
//! Four notions are supported, each reported as a signed focal-minus-reference
//! difference (reports never take absolute values, so the direction of
//! advantage is preserved):
//!
//! * statistical parity (SP): difference in positive-prediction rates;
//! * equal opportunity (EOpp): difference in false-negative rates among
//!   truly positive rows;
//! * predictive equality (PE): difference in false-positive rates among
//!   truly negative rows;
//! * equalized odds (EOdds): mean of the signed TPR and FPR differences,
//!   with both components reported.
//!
//! Rates with empty denominators are explicitly undefined, never coerced to
//! zero; a gap is defined only when every constituent rate is defined.
//! Everything here is a pure function over immutable slices, safe for
//! arbitrary parallel invocation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("input vectors are empty")]
    EmptyInput,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("row {row}: label {value} is not binary")]
    InvalidLabel { row: usize, value: u8 },

    #[error("group {0} absent from data")]
    UnknownGroup(u16),

    #[error("focal and reference groups overlap")]
    OverlappingGroups,

    #[error("focal or reference group set is empty")]
    EmptyGroupSet,

    #[error("audit requires at least two groups")]
    SingleGroup,

    #[error("privileged set must be a nonempty proper subset of the observed groups")]
    InvalidPartition,
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// The four audited fairness notions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Notion {
    /// Statistical parity: positive-prediction rate difference.
    #[serde(rename = "SP")]
    StatisticalParity,
    /// Equal opportunity: false-negative rate difference.
    #[serde(rename = "EOpp")]
    EqualOpportunity,
    /// Predictive equality: false-positive rate difference.
    #[serde(rename = "PE")]
    PredictiveEquality,
    /// Equalized odds: mean of signed TPR and FPR differences.
    #[serde(rename = "EOdds")]
    EqualizedOdds,
}

impl Notion {
    pub const ALL: [Notion; 4] = [
        Notion::StatisticalParity,
        Notion::EqualOpportunity,
        Notion::PredictiveEquality,
        Notion::EqualizedOdds,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Notion::StatisticalParity => "SP",
            Notion::EqualOpportunity => "EOpp",
            Notion::PredictiveEquality => "PE",
            Notion::EqualizedOdds => "EOdds",
        }
    }
}

impl std::str::FromStr for Notion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "SP" => Ok(Notion::StatisticalParity),
            "EOpp" => Ok(Notion::EqualOpportunity),
            "PE" => Ok(Notion::PredictiveEquality),
            "EOdds" => Ok(Notion::EqualizedOdds),
            other => Err(format!("unknown fairness notion `{other}`")),
        }
    }
}

/// Integer confusion-matrix cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }
}

/// Prediction rates for one group (or pooled set of groups).
///
/// `None` marks a rate whose denominator is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    /// P(pred = 1), defined iff n > 0.
    pub ppr: Option<f64>,
    /// P(pred = 1 | outcome = 1), defined iff n_pos > 0.
    pub tpr: Option<f64>,
    /// P(pred = 1 | outcome = 0), defined iff n_neg > 0.
    pub fpr: Option<f64>,
    /// P(pred = 0 | outcome = 1), defined iff n_pos > 0.
    pub fnr: Option<f64>,
    pub n: u64,
    pub n_pos: u64,
    pub n_neg: u64,
}

/// What a gap compares the focal side against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Focal {
    /// One group versus the pooled rest.
    Group(u16),
    /// The pooled privileged set versus the pooled complement.
    Privileged,
}

/// One signed fairness gap. `value` is focal-minus-reference and is `None`
/// whenever any constituent rate is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapValue {
    pub notion: Notion,
    pub focal: Focal,
    pub value: Option<f64>,
    /// Signed TPR difference; populated for equalized odds when defined.
    pub tpr_diff: Option<f64>,
    /// Signed FPR difference; populated for equalized odds when defined.
    pub fpr_diff: Option<f64>,
}

fn check_binary(v: &[u8]) -> Result<()> {
    for (row, &x) in v.iter().enumerate() {
        if x > 1 {
            return Err(MetricsError::InvalidLabel { row, value: x });
        }
    }
    Ok(())
}

fn check_aligned(y_true: &[u8], y_pred: &[u8]) -> Result<()> {
    if y_true.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    check_binary(y_true)?;
    check_binary(y_pred)
}

/// Confusion-matrix counts over aligned binary vectors.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionCounts> {
    check_aligned(y_true, y_pred)?;
    let mut c = ConfusionCounts {
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => c.true_positives += 1,
            (0, 1) => c.false_positives += 1,
            (1, 0) => c.false_negatives += 1,
            _ => c.true_negatives += 1,
        }
    }
    Ok(c)
}

/// Fraction of correct predictions, (TP + TN) / n.
pub fn accuracy(y_true: &[u8], y_pred: &[u8]) -> Result<f64> {
    let c = confusion(y_true, y_pred)?;
    Ok((c.true_positives + c.true_negatives) as f64 / c.total() as f64)
}

fn rates_over<F: Fn(usize) -> bool>(y_true: &[u8], y_pred: &[u8], select: F) -> GroupRates {
    let mut n = 0u64;
    let mut n_pos = 0u64;
    let mut n_neg = 0u64;
    let mut pred_pos = 0u64;
    let mut tp = 0u64;
    let mut fp = 0u64;
    for i in 0..y_true.len() {
        if !select(i) {
            continue;
        }
        n += 1;
        if y_pred[i] == 1 {
            pred_pos += 1;
        }
        if y_true[i] == 1 {
            n_pos += 1;
            if y_pred[i] == 1 {
                tp += 1;
            }
        } else {
            n_neg += 1;
            if y_pred[i] == 1 {
                fp += 1;
            }
        }
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    GroupRates {
        ppr: ratio(pred_pos, n),
        tpr: ratio(tp, n_pos),
        fpr: ratio(fp, n_neg),
        fnr: ratio(n_pos - tp, n_pos),
        n,
        n_pos,
        n_neg,
    }
}

/// Rates over the rows belonging to group `g`.
pub fn group_rates(y_true: &[u8], y_pred: &[u8], group: &[u16], g: u16) -> Result<GroupRates> {
    check_aligned(y_true, y_pred)?;
    if group.len() != y_true.len() {
        return Err(MetricsError::LengthMismatch {
            left: y_true.len(),
            right: group.len(),
        });
    }
    if !group.contains(&g) {
        return Err(MetricsError::UnknownGroup(g));
    }
    Ok(rates_over(y_true, y_pred, |i| group[i] == g))
}

/// Pooled (micro-averaged) rates over all rows whose group is in `set`.
fn pooled_rates(y_true: &[u8], y_pred: &[u8], group: &[u16], set: &BTreeSet<u16>) -> GroupRates {
    rates_over(y_true, y_pred, |i| set.contains(&group[i]))
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

fn gap_from_rates(notion: Notion, focal: Focal, f: &GroupRates, r: &GroupRates) -> GapValue {
    let tpr_diff = diff(f.tpr, r.tpr);
    let fpr_diff = diff(f.fpr, r.fpr);
    let value = match notion {
        Notion::StatisticalParity => diff(f.ppr, r.ppr),
        Notion::EqualOpportunity => diff(f.fnr, r.fnr),
        Notion::PredictiveEquality => fpr_diff,
        Notion::EqualizedOdds => match (tpr_diff, fpr_diff) {
            (Some(t), Some(p)) => Some(0.5 * (t + p)),
            _ => None,
        },
    };
    let (tpr_diff, fpr_diff) = match notion {
        Notion::EqualizedOdds => (tpr_diff, fpr_diff),
        _ => (None, None),
    };
    GapValue {
        notion,
        focal,
        value,
        tpr_diff,
        fpr_diff,
    }
}

/// Signed gap between a focal group set and a disjoint reference set, both
/// pooled before computing rates. Undefined rates yield an undefined gap,
/// not an error.
pub fn fairness_gap(
    notion: Notion,
    y_true: &[u8],
    y_pred: &[u8],
    group: &[u16],
    focal: &BTreeSet<u16>,
    reference: &BTreeSet<u16>,
) -> Result<GapValue> {
    check_aligned(y_true, y_pred)?;
    if group.len() != y_true.len() {
        return Err(MetricsError::LengthMismatch {
            left: y_true.len(),
            right: group.len(),
        });
    }
    if focal.is_empty() || reference.is_empty() {
        return Err(MetricsError::EmptyGroupSet);
    }
    if !focal.is_disjoint(reference) {
        return Err(MetricsError::OverlappingGroups);
    }
    let focal_tag = if focal.len() == 1 {
        Focal::Group(*focal.iter().next().unwrap())
    } else {
        Focal::Privileged
    };
    let f = pooled_rates(y_true, y_pred, group, focal);
    let r = pooled_rates(y_true, y_pred, group, reference);
    Ok(gap_from_rates(notion, focal_tag, &f, &r))
}

/// One-vs-rest audit: for every group present in the data, all four gaps
/// with that group as focal and the pooled remainder as reference. Results
/// are ordered by group code, then notion.
pub fn subgroup_audit(y_true: &[u8], y_pred: &[u8], group: &[u16]) -> Result<Vec<GapValue>> {
    check_aligned(y_true, y_pred)?;
    if group.len() != y_true.len() {
        return Err(MetricsError::LengthMismatch {
            left: y_true.len(),
            right: group.len(),
        });
    }
    let present: BTreeSet<u16> = group.iter().copied().collect();
    if present.len() < 2 {
        return Err(MetricsError::SingleGroup);
    }
    let mut out = Vec::with_capacity(present.len() * Notion::ALL.len());
    for &g in &present {
        let focal = rates_over(y_true, y_pred, |i| group[i] == g);
        let rest = rates_over(y_true, y_pred, |i| group[i] != g);
        for notion in Notion::ALL {
            out.push(gap_from_rates(notion, Focal::Group(g), &focal, &rest));
        }
    }
    Ok(out)
}

/// Aggregate audit: all four gaps with the pooled privileged set as focal
/// and the pooled complement as reference.
pub fn aggregate_audit(
    y_true: &[u8],
    y_pred: &[u8],
    group: &[u16],
    privileged: &BTreeSet<u16>,
) -> Result<Vec<GapValue>> {
    check_aligned(y_true, y_pred)?;
    if group.len() != y_true.len() {
        return Err(MetricsError::LengthMismatch {
            left: y_true.len(),
            right: group.len(),
        });
    }
    let present: BTreeSet<u16> = group.iter().copied().collect();
    let privileged_present: BTreeSet<u16> = present.intersection(privileged).copied().collect();
    if privileged_present.is_empty() || privileged_present.len() == present.len() {
        return Err(MetricsError::InvalidPartition);
    }
    let f = pooled_rates(y_true, y_pred, group, &privileged_present);
    let unprivileged: BTreeSet<u16> = present.difference(privileged).copied().collect();
    let r = pooled_rates(y_true, y_pred, group, &unprivileged);
    Ok(Notion::ALL
        .iter()
        .map(|&notion| gap_from_rates(notion, Focal::Privileged, &f, &r))
        .collect())
}
