//! Machine-readable verification reports: one record per evaluated case,
//! plus a summary with the failure count and worst margin violation.
//!
//! JSON serialization has stable field order and round-trips losslessly
//! (floats use the shortest exact representation, big integers are decimal
//! strings). Timestamps and runtimes are volatile metadata: strip them with
//! [`Report::without_volatile`] before determinism comparisons.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cert::Certificate;
use crate::margin::VerificationCase;
use crate::matroid::MatroidCase;
use crate::rm::WeightBoundRow;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// λ-comparison table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub q: String,
    pub eps: f64,
    pub lambda_new: f64,
    /// Absent for `q = inf` (the older parameter is finite-q only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_old: Option<f64>,
    /// `lambda_old - lambda_new` when both exist.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub improvement: Option<f64>,
    pub pass: bool,
}

/// Rate-threshold table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub p: f64,
    pub threshold: f64,
    /// `1 - h₂(p)`, for comparison only.
    pub shannon_limit: f64,
    pub pass: bool,
}

/// Code-family member row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub r: u32,
    pub m: u32,
    pub n: usize,
    pub dim: usize,
    pub rate: f64,
    pub threshold: f64,
    pub below_threshold: bool,
    pub error_rate: f64,
    pub errors: u64,
    pub trials: u64,
    pub ci99_lo: f64,
    pub ci99_hi: f64,
    pub pass: bool,
}

/// Single block-error simulation row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BscRow {
    pub r: u32,
    pub m: u32,
    pub p: f64,
    pub trials: u64,
    pub errors: u64,
    pub rate: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub ci99_lo: f64,
    pub ci99_hi: f64,
    pub pass: bool,
}

/// One finite-difference sample of the concavity curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityRow {
    pub q: u32,
    pub z: f64,
    pub g: f64,
    pub second_difference: f64,
    pub pass: bool,
}

/// Per-q aggregate of a concavity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavitySummaryRow {
    pub q: u32,
    pub points: usize,
    pub max_second_difference: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub closed_form_ok: Option<bool>,
    pub superadditivity_ok: bool,
    pub pass: bool,
}

/// Weight-distribution bound row with its code parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub r: u32,
    pub m: u32,
    #[serde(flatten)]
    pub row: WeightBoundRow,
    /// Report-only rows always pass.
    pub pass: bool,
}

/// One evaluated case of any command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CaseRecord {
    Margin(VerificationCase),
    Matroid(MatroidCase),
    Certificate(Certificate),
    Concavity(ConcavityRow),
    ConcavitySummary(ConcavitySummaryRow),
    Lambda(LambdaRow),
    Threshold(ThresholdRow),
    Family(FamilyRow),
    Bsc(BscRow),
    Weight(WeightRow),
}

impl CaseRecord {
    pub fn pass(&self) -> bool {
        match self {
            CaseRecord::Margin(c) => c.pass,
            CaseRecord::Matroid(c) => c.pass,
            CaseRecord::Certificate(c) => c.pass,
            CaseRecord::Concavity(c) => c.pass,
            CaseRecord::ConcavitySummary(c) => c.pass,
            CaseRecord::Lambda(c) => c.pass,
            CaseRecord::Threshold(c) => c.pass,
            CaseRecord::Family(c) => c.pass,
            CaseRecord::Bsc(c) => c.pass,
            CaseRecord::Weight(c) => c.pass,
        }
    }

    /// The inequality margin, where the case has one.
    pub fn margin(&self) -> Option<f64> {
        match self {
            CaseRecord::Margin(c) => Some(c.margin),
            CaseRecord::Matroid(c) => Some(c.margin),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub failures: usize,
    /// `max(0, -min margin)` over margin-bearing cases.
    pub max_violation: f64,
    /// Wall-clock runtime; volatile, excluded from determinism comparisons.
    pub runtime_ms: u64,
}

/// Volatile metadata, excluded from determinism comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Meta {
    pub timestamp_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub cases: Vec<CaseRecord>,
    pub summary: Summary,
    pub meta: Meta,
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        params: BTreeMap<String, String>,
        cases: Vec<CaseRecord>,
        runtime_ms: u64,
    ) -> Self {
        let failures = cases.iter().filter(|c| !c.pass()).count();
        let max_violation = cases
            .iter()
            .filter_map(|c| c.margin())
            .map(|m| (-m).max(0.0))
            .fold(0.0, f64::max);
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let total = cases.len();
        Report {
            command: command.into(),
            params,
            cases,
            summary: Summary {
                total,
                failures,
                max_violation,
                runtime_ms,
            },
            meta: Meta { timestamp_unix },
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failures == 0
    }

    /// Copy with timestamp and runtime zeroed, for determinism comparisons.
    pub fn without_volatile(&self) -> Report {
        let mut copy = self.clone();
        copy.meta.timestamp_unix = 0;
        copy.summary.runtime_ms = 0;
        copy
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Report, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV with one case per row. Heterogeneous reports emit one header per
    /// case kind, ahead of that kind's first row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut last_kind: Option<&'static str> = None;
        for case in &self.cases {
            let (kind, header, row) = csv_parts(case);
            if last_kind != Some(kind) {
                out.push_str(&header);
                out.push('\n');
                last_kind = Some(kind);
            }
            out.push_str(&row);
            out.push('\n');
        }
        out.push_str(&format!(
            "summary,total={},failures={},max_violation={},runtime_ms={}\n",
            self.summary.total,
            self.summary.failures,
            fmt_f64(self.summary.max_violation),
            self.summary.runtime_ms
        ));
        out
    }
}

fn fmt_f64(v: f64) -> String {
    // shortest exact decimal; '.' separator, locale independent
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "-inf".into())
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_parts(case: &CaseRecord) -> (&'static str, String, String) {
    match case {
        CaseRecord::Margin(c) => (
            "margin",
            "kind,description,lhs,rhs,stderr,margin,pass,equality,note".into(),
            format!(
                "margin,{},{},{},{},{},{},{},{}",
                csv_escape(&c.description),
                fmt_opt(c.lhs),
                fmt_opt(c.rhs),
                c.stderr.map(fmt_f64).unwrap_or_default(),
                fmt_f64(c.margin),
                c.pass,
                c.equality,
                csv_escape(c.note.as_deref().unwrap_or(""))
            ),
        ),
        CaseRecord::Matroid(c) => (
            "matroid",
            "kind,description,p,t,lhs,rhs,margin,pass,equality".into(),
            format!(
                "matroid,{},{},{},{},{},{},{},{}",
                csv_escape(&c.description),
                fmt_f64(c.p),
                fmt_f64(c.t),
                fmt_f64(c.lhs),
                fmt_f64(c.rhs),
                fmt_f64(c.margin),
                c.pass,
                c.equality
            ),
        ),
        CaseRecord::Certificate(c) => (
            "certificate",
            "kind,q,degree,zero_prefix_ok,all_nonneg,formula_ok,q_lemma_ok,p_claims_ok,case2_ok,chain_ok,spot_check_ok,pass,coeffs"
                .into(),
            format!(
                "certificate,{},{},{},{},{},{},{},{},{},{},{},{}",
                c.q,
                c.degree,
                c.zero_prefix_ok,
                c.all_nonneg,
                c.formula_ok,
                c.q_lemma_ok,
                c.p_claims_ok,
                c.case2_ok,
                c.chain_ok,
                c.spot_check_ok,
                c.pass,
                csv_escape(&c.coeffs.join(" "))
            ),
        ),
        CaseRecord::Concavity(c) => (
            "concavity",
            "kind,q,z,g,second_difference,pass".into(),
            format!(
                "concavity,{},{},{},{},{}",
                c.q,
                fmt_f64(c.z),
                fmt_f64(c.g),
                fmt_f64(c.second_difference),
                c.pass
            ),
        ),
        CaseRecord::ConcavitySummary(c) => (
            "concavity_summary",
            "kind,q,points,max_second_difference,closed_form_ok,superadditivity_ok,pass".into(),
            format!(
                "concavity_summary,{},{},{},{},{},{}",
                c.q,
                c.points,
                fmt_f64(c.max_second_difference),
                c.closed_form_ok.map(|b| b.to_string()).unwrap_or_default(),
                c.superadditivity_ok,
                c.pass
            ),
        ),
        CaseRecord::Lambda(c) => (
            "lambda",
            "kind,q,eps,lambda_new,lambda_old,improvement,pass".into(),
            format!(
                "lambda,{},{},{},{},{},{}",
                csv_escape(&c.q),
                fmt_f64(c.eps),
                fmt_f64(c.lambda_new),
                c.lambda_old.map(fmt_f64).unwrap_or_default(),
                c.improvement.map(fmt_f64).unwrap_or_default(),
                c.pass
            ),
        ),
        CaseRecord::Threshold(c) => (
            "threshold",
            "kind,p,threshold,shannon_limit,pass".into(),
            format!(
                "threshold,{},{},{},{}",
                fmt_f64(c.p),
                fmt_f64(c.threshold),
                fmt_f64(c.shannon_limit),
                c.pass
            ),
        ),
        CaseRecord::Family(c) => (
            "family",
            "kind,r,m,n,dim,rate,threshold,below_threshold,error_rate,errors,trials,ci99_lo,ci99_hi,pass"
                .into(),
            format!(
                "family,{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.r,
                c.m,
                c.n,
                c.dim,
                fmt_f64(c.rate),
                fmt_f64(c.threshold),
                c.below_threshold,
                fmt_f64(c.error_rate),
                c.errors,
                c.trials,
                fmt_f64(c.ci99_lo),
                fmt_f64(c.ci99_hi),
                c.pass
            ),
        ),
        CaseRecord::Bsc(c) => (
            "bsc",
            "kind,r,m,p,trials,errors,rate,ci95_lo,ci95_hi,ci99_lo,ci99_hi,pass".into(),
            format!(
                "bsc,{},{},{},{},{},{},{},{},{},{},{}",
                c.r,
                c.m,
                fmt_f64(c.p),
                c.trials,
                c.errors,
                fmt_f64(c.rate),
                fmt_f64(c.ci95_lo),
                fmt_f64(c.ci95_hi),
                fmt_f64(c.ci99_lo),
                fmt_f64(c.ci99_hi),
                c.pass
            ),
        ),
        CaseRecord::Weight(c) => (
            "weight",
            "kind,r,m,i,i_star,a_i,log2_ai,bound1_log2,bound2_log2,regime,gap1,gap2".into(),
            format!(
                "weight,{},{},{},{},{},{},{},{},{},{},{}",
                c.r,
                c.m,
                c.row.i,
                c.row.i_star,
                c.row.count,
                fmt_opt(c.row.log2_count),
                c.row.bound1_log2.map(fmt_f64).unwrap_or_else(|| "inf".into()),
                fmt_f64(c.row.bound2_log2),
                c.row.regime,
                c.row.gap1.map(fmt_f64).unwrap_or_default(),
                c.row.gap2.map(fmt_f64).unwrap_or_default()
            ),
        ),
    }
}
