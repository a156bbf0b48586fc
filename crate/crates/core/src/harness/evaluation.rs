use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::calibration::ModelFile;
use crate::synth::QueryDistance;
use crate::thresholds::{verify, Decision, ThresholdMethod, ThresholdSpec};
use crate::{Error, Result};

/// Impostor-trial outcome for one `(method, target_fpr)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationEntry {
    pub method: ThresholdMethod,
    pub target_fpr: f64,
    pub accepted: u64,
    pub total: u64,
    pub attained_fpr: f64,
    pub ratio: f64,
    /// Impostor trials against classes that have no threshold for this pair.
    pub unscored: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub entries: Vec<EvaluationEntry>,
}

impl EvaluationReport {
    pub fn entry(&self, method: ThresholdMethod, target_fpr: f64) -> Option<&EvaluationEntry> {
        self.entries
            .iter()
            .find(|e| e.method == method && e.target_fpr == target_fpr)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table: one row per target FPR, an `FPR  Ratio` column pair
    /// per method.
    pub fn to_table(&self) -> String {
        let mut methods: Vec<ThresholdMethod> = Vec::new();
        let mut targets: Vec<f64> = Vec::new();
        for e in &self.entries {
            if !methods.contains(&e.method) {
                methods.push(e.method);
            }
            if !targets.contains(&e.target_fpr) {
                targets.push(e.target_fpr);
            }
        }
        methods.sort_by_key(|m| ThresholdMethod::ALL.iter().position(|x| x == m));
        targets.sort_by(|a, b| b.total_cmp(a));

        const COL: usize = 28;
        let mut out = String::new();
        let _ = write!(out, "{:<12}", "Target FPR");
        for m in &methods {
            let _ = write!(out, "| {:<COL$}", m.title());
        }
        out.push('\n');
        let _ = write!(out, "{:<12}", "");
        for _ in &methods {
            let _ = write!(out, "| {:<10}{:<18}", "FPR", "Ratio");
        }
        out.push('\n');
        out.push_str(&"-".repeat(12 + methods.len() * (COL + 2)));
        out.push('\n');
        for &t in &targets {
            let _ = write!(out, "{:<12}", format!("{:.2}%", 100.0 * t));
            for &m in &methods {
                match self.entry(m, t) {
                    Some(e) => {
                        let _ = write!(
                            out,
                            "| {:<10}{:<18}",
                            format!("{:.2}%", 100.0 * e.attained_fpr),
                            format!("{:.2}", e.ratio)
                        );
                    }
                    None => {
                        let _ = write!(out, "| {:<COL$}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Counts impostor trials (query class differs from the claimed class)
/// accepted under each stored threshold.
///
/// Every claimed class must exist in the model file.
pub fn run_evaluation(model: &ModelFile, trials: &[QueryDistance]) -> Result<EvaluationReport> {
    let index: HashMap<&str, usize> = model
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.class_id.as_str(), i))
        .collect();
    let impostors = trials
        .iter()
        .filter(|t| t.true_class != t.claimed_class)
        .map(|t| {
            index
                .get(t.claimed_class.as_str())
                .map(|&i| (i, t.distance))
                .ok_or_else(|| Error::MissingClass(t.claimed_class.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut entries = Vec::new();
    for &method in &model.methods {
        for &target_fpr in &model.target_fprs {
            let specs: Vec<Option<ThresholdSpec>> = model
                .classes
                .iter()
                .map(|c| {
                    c.thresholds
                        .iter()
                        .find(|s| s.method == method && s.target_fpr == target_fpr)
                        .copied()
                })
                .collect();
            let (mut accepted, mut total, mut unscored) = (0u64, 0u64, 0u64);
            for &(class, distance) in &impostors {
                match &specs[class] {
                    Some(spec) => {
                        total += 1;
                        if verify(distance, spec) == Decision::Accept {
                            accepted += 1;
                        }
                    }
                    None => unscored += 1,
                }
            }
            let attained_fpr = if total == 0 {
                0.0
            } else {
                accepted as f64 / total as f64
            };
            entries.push(EvaluationEntry {
                method,
                target_fpr,
                accepted,
                total,
                attained_fpr,
                ratio: attained_fpr / target_fpr,
                unscored,
            });
        }
    }
    Ok(EvaluationReport { entries })
}
