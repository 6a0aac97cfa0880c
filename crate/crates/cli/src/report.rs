//! Machine-readable report records.
//!
//! `log_statistic` is authoritative; `statistic` is its decoded value, or
//! `"inf"` when that is not representable.

use evalcomb_core::betting::Boundary;
use evalcomb_core::testkit::{ReportDetail, StatisticKind, TestReport};
use evalcomb_core::{LogValue, Regime};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Decimal {
    Number(f64),
    Text(String),
}

impl Decimal {
    pub fn from_log(v: LogValue) -> Self {
        let x = v.value();
        if x.is_finite() {
            Decimal::Number(x)
        } else {
            Decimal::Text("inf".into())
        }
    }

    fn render(&self) -> String {
        match self {
            Decimal::Number(x) => x.to_string(),
            Decimal::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordDetail {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmax_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_crossing: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub statistic_kind: StatisticKind,
    pub log_statistic: LogValue,
    pub statistic: Decimal,
    pub alpha: f64,
    pub reject: bool,
    pub p_bound: f64,
    pub regime: Regime,
    pub warnings: Vec<String>,
    pub detail: RecordDetail,
}

impl ReportRecord {
    pub fn from_report(r: &TestReport, n: usize) -> Self {
        let mut detail = RecordDetail {
            n,
            ..RecordDetail::default()
        };
        match &r.detail {
            ReportDetail::MaxAverage(a) => {
                detail.argmax_k = Some(a.argmax_k);
            }
            ReportDetail::OptimizedBetting(o) => {
                detail.lambda_star = Some(o.lambda_star);
                detail.boundary = Some(o.boundary);
            }
            ReportDetail::Ville(t) => {
                detail.first_crossing = t.first_crossing;
            }
        }
        ReportRecord {
            statistic_kind: r.statistic_kind,
            log_statistic: r.log_statistic,
            statistic: Decimal::from_log(r.log_statistic),
            alpha: r.alpha,
            reject: r.reject,
            p_bound: r.p_bound,
            regime: r.regime,
            warnings: r.warnings.clone(),
            detail,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn tsv_row(&self) -> String {
        let log = match self.log_statistic {
            v if v.is_infinite() => "inf".to_owned(),
            v if v.is_zero() => "-inf".to_owned(),
            v => v.log().to_string(),
        };
        [
            self.statistic_kind.to_string(),
            log,
            self.statistic.render(),
            self.alpha.to_string(),
            self.reject.to_string(),
            self.p_bound.to_string(),
            self.regime.to_string(),
            self.warnings.join("; "),
        ]
        .join("\t")
    }
}

pub const TSV_HEADER: &str =
    "statistic_kind\tlog_statistic\tstatistic\talpha\treject\tp_bound\tregime\twarnings";

#[cfg(test)]
mod tests {
    use super::*;
    use evalcomb_core::{test_max_average, test_optimized_betting, validate_evalues};

    #[test]
    fn json_round_trips() {
        let e = validate_evalues(&[0.0, 8.0, f64::INFINITY], Regime::Sequential).unwrap();
        for r in [test_max_average(&e, 0.05).unwrap(), test_optimized_betting(&e, 0.05).unwrap()] {
            let rec = ReportRecord::from_report(&r, e.len());
            let json = rec.to_json();
            let back: ReportRecord = serde_json::from_str(&json).unwrap();
            assert_eq!(back, rec);
            assert_eq!(back.to_json(), json);
            assert_eq!(rec.statistic, Decimal::Text("inf".into()));
        }
    }

    #[test]
    fn tsv_columns_match_header() {
        let e = validate_evalues(&[2.0, 1.0], Regime::Independent).unwrap();
        let rec = ReportRecord::from_report(&test_optimized_betting(&e, 0.5).unwrap(), 2);
        let row = rec.tsv_row();
        assert_eq!(row.split('\t').count(), TSV_HEADER.split('\t').count());
        assert!(row.starts_with("optimized_betting\t"));
    }
}
