//! Downstream task harnesses: semi-supervised node classification and link
//! prediction.

mod classify;
mod linkpred;
mod metrics;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use classify::{make_classify_split, train_classifier, Classifier, ClassifyConfig, ClassifySplit, LogisticConfig};
pub use linkpred::{
    cosine, heuristic_score, make_link_split, score_pairs, write_pair_scores, Heuristic, LinkSplit, LinkSplitConfig,
};
pub use metrics::{auc, mean_average_precision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classify,
    Linkpred,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub method: String,
    pub metrics: BTreeMap<String, f64>,
    pub split_seed: u64,
}

impl EvalReport {
    pub fn new(task: Task, method: impl Into<String>, split_seed: u64) -> Self {
        Self { task, method: method.into(), metrics: BTreeMap::new(), split_seed }
    }

    pub fn with_metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_owned(), value);
        self
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned two-column table.
    pub fn to_table(&self) -> String {
        let task = match self.task {
            Task::Classify => "classify",
            Task::Linkpred => "linkpred",
        };
        let mut rows: Vec<(String, String)> = vec![
            ("task".into(), task.into()),
            ("method".into(), self.method.clone()),
            ("split_seed".into(), self.split_seed.to_string()),
        ];
        rows.extend(self.metrics.iter().map(|(k, v)| (k.clone(), format!("{v:.4}"))));
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_renders_json_and_table() {
        let r = EvalReport::new(Task::Linkpred, "cn", 7).with_metric("auc", 0.75).with_metric("map", 0.5);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["task"], "linkpred");
        assert_eq!(json["metrics"]["auc"], 0.75);
        let table = r.to_table();
        assert!(table.contains("auc         0.7500"), "{table}");
        assert!(table.lines().all(|l| l.len() >= 12));
    }
}
