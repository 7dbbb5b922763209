use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::estimate::{ErrorEstimate, Verdict};
use crate::error::Result;

/// One JSON-lines record. Everything except `metadata` is a pure function of
/// the experiment inputs (seeds included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub experiment: String,
    pub inputs: Value,
    pub p_hat: Option<f64>,
    pub ci: Option<[f64; 2]>,
    pub bound: Option<f64>,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub result: Value,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub metadata: Value,
}

impl ReportRecord {
    pub fn from_estimate(experiment: &str, inputs: Value, est: &ErrorEstimate) -> Self {
        Self {
            experiment: experiment.to_string(),
            inputs,
            p_hat: Some(est.p_hat),
            ci: Some([est.ci_lo, est.ci_hi]),
            bound: Some(est.bound),
            verdict: match est.verdict {
                Verdict::Consistent => "consistent",
                Verdict::Exceeded => "exceeded",
            }
            .to_string(),
            result: serde_json::to_value(est).unwrap_or(Value::Null),
            metadata: Value::Null,
        }
    }

    /// A record without a probability estimate (builds, rate reports, ...).
    pub fn summary(experiment: &str, inputs: Value, verdict: &str, result: Value) -> Self {
        Self {
            experiment: experiment.to_string(),
            inputs,
            p_hat: None,
            ci: None,
            bound: None,
            verdict: verdict.to_string(),
            result,
            metadata: Value::Null,
        }
    }

    pub fn with_metadata(mut self, metadata: Value) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn to_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn line_round_trip() {
        let est = ErrorEstimate::from_counts(0, 100, 0.01).unwrap();
        let rec = ReportRecord::from_estimate("missed_id", json!({"n": 16}), &est);
        let line = rec.to_line().unwrap();
        assert!(!line.contains('\n'));
        let back: ReportRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.verdict, "consistent");
    }
}
