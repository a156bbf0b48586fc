use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::{load_distances, DistanceFormat};
use crate::error::{create_file, json_err, open_file};
use crate::model::{fit_with, FitConstraints, FitOptions, FittedModel, InterClassDistances};
use crate::synth::{self, EmbeddingConfig};
use crate::thresholds::{
    check_fpr, class_data_threshold, generic_data_threshold, model_threshold, ThresholdMethod,
    ThresholdSpec,
};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File {
        path: PathBuf,
        format: DistanceFormat,
        bounded: bool,
    },
    Synth(EmbeddingConfig),
}

/// Parameter bounds for the fit: given outright, or a dimensionality range
/// with the sigma range derived from the data by [`auto_constraints`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintChoice {
    Fixed(FitConstraints),
    Auto {
        dim_low: u32,
        dim_high: u32,
        sigma_steps: usize,
    },
}

impl Default for ConstraintChoice {
    fn default() -> Self {
        Self::Auto {
            dim_low: 15,
            dim_high: 22,
            sigma_steps: 50,
        }
    }
}

impl ConstraintChoice {
    pub fn resolve(&self, classes: &[InterClassDistances]) -> Result<FitConstraints> {
        match *self {
            Self::Fixed(c) => {
                c.validate()?;
                Ok(c)
            }
            Self::Auto {
                dim_low,
                dim_high,
                sigma_steps,
            } => auto_constraints(classes, dim_low, dim_high, sigma_steps),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRun {
    pub constraints: ConstraintChoice,
    pub fit_options: FitOptions,
    pub target_fprs: Vec<f64>,
    pub methods: Vec<ThresholdMethod>,
    pub source: DataSource,
}

impl CalibrationRun {
    pub fn validate(&self) -> Result<()> {
        if self.target_fprs.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one target FPR is required".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one threshold method is required".into(),
            ));
        }
        for &e in &self.target_fprs {
            check_fpr(e)?;
        }
        if let ConstraintChoice::Fixed(c) = &self.constraints {
            c.validate()?;
        }
        Ok(())
    }
}

/// Everything learned for one enrolled class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub class_id: String,
    pub distances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FittedModel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    pub thresholds: Vec<ThresholdSpec>,
}

impl ClassEntry {
    pub fn threshold(&self, method: ThresholdMethod, target_fpr: f64) -> Option<f64> {
        self.thresholds
            .iter()
            .find(|t| t.method == method && t.target_fpr == target_fpr)
            .map(|t| t.threshold)
    }
}

/// The persisted calibration result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<FitConstraints>,
    pub fit_options: FitOptions,
    pub target_fprs: Vec<f64>,
    pub methods: Vec<ThresholdMethod>,
    pub classes: Vec<ClassEntry>,
}

impl ModelFile {
    pub fn class(&self, class_id: &str) -> Result<&ClassEntry> {
        self.classes
            .iter()
            .find(|c| c.class_id == class_id)
            .ok_or_else(|| Error::MissingClass(class_id.to_owned()))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(create_file(path)?);
        w.write_all(self.to_json()?.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: Self = serde_json::from_reader(BufReader::new(open_file(path)?))
            .map_err(|e| json_err(path, e))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "{}: unsupported model schema version {} (expected {SCHEMA_VERSION})",
                path.display(),
                file.schema_version
            )));
        }
        Ok(file)
    }

    /// Recomputes every class's thresholds for the given targets and methods
    /// from the stored distances and fits. Requesting `model` for a class
    /// without a fit records an error for that class.
    pub fn recompute_thresholds(
        &mut self,
        target_fprs: &[f64],
        methods: &[ThresholdMethod],
    ) -> Result<()> {
        for &e in target_fprs {
            check_fpr(e)?;
        }
        let pooled: Vec<f64> = self
            .classes
            .iter()
            .flat_map(|c| c.distances.iter().copied())
            .collect();
        let series = self.fit_options.series;
        for class in &mut self.classes {
            class.thresholds.clear();
            class.errors.retain(|e| e.starts_with("fit:"));
            for &method in methods {
                for &eps in target_fprs {
                    let value = match method {
                        ThresholdMethod::GenericData => generic_data_threshold(&pooled, eps),
                        ThresholdMethod::ClassData => InterClassDistances::new(
                            class.class_id.clone(),
                            class.distances.clone(),
                        )
                        .and_then(|d| class_data_threshold(&d, eps)),
                        ThresholdMethod::Model => match &class.fit {
                            Some(m) => model_threshold(m, eps, &series),
                            None => {
                                if !class.errors.iter().any(|e| e.starts_with("fit:")) {
                                    class.errors.push("fit: class has no fitted model".into());
                                }
                                continue;
                            }
                        },
                    };
                    match value.and_then(|t| ThresholdSpec::new(eps, method, t)) {
                        Ok(spec) => class.thresholds.push(spec),
                        Err(e) => class
                            .errors
                            .push(format!("threshold {method} @ {eps}: {e}")),
                    }
                }
            }
        }
        self.target_fprs = target_fprs.to_vec();
        self.methods = methods.to_vec();
        Ok(())
    }
}

/// Sigma grid centred on the scale at which the pooled mean squared distance
/// matches `2 · dim_mid` (class centres and query both spread like the
/// population), spanning a factor of two either side.
pub fn auto_constraints(
    classes: &[InterClassDistances],
    dim_low: u32,
    dim_high: u32,
    sigma_steps: usize,
) -> Result<FitConstraints> {
    let (sum, count) = classes
        .iter()
        .flat_map(|c| c.distances.iter())
        .fold((0.0, 0usize), |(s, n), d| (s + d * d, n + 1));
    if count == 0 {
        return Err(Error::EmptyInput(
            "no distances to derive a sigma range from",
        ));
    }
    let dim_mid = 0.5 * (dim_low as f64 + dim_high as f64);
    let centre = (sum / count as f64 / (2.0 * dim_mid)).sqrt();
    FitConstraints::new(dim_low, dim_high, 0.5 * centre, 2.0 * centre, sigma_steps)
}

/// Fits (when `model` is requested) and thresholds every class.
///
/// A class whose fit fails keeps its entry, with the failure recorded in
/// `errors`, and the remaining classes carry on.
pub fn calibrate(
    classes: &[InterClassDistances],
    constraints: ConstraintChoice,
    fit_options: &FitOptions,
    target_fprs: &[f64],
    methods: &[ThresholdMethod],
) -> Result<ModelFile> {
    let fitting = methods.contains(&ThresholdMethod::Model);
    let constraints = if fitting {
        Some(constraints.resolve(classes)?)
    } else {
        None
    };

    let entries = classes
        .iter()
        .map(|d| {
            let mut entry = ClassEntry {
                class_id: d.class_id.clone(),
                distances: d.distances.clone(),
                fit: None,
                errors: Vec::new(),
                thresholds: Vec::new(),
            };
            if let Some(c) = &constraints {
                match fit_with(d, c, fit_options) {
                    Ok(m) => entry.fit = Some(m),
                    Err(e) => entry.errors.push(format!("fit: {e}")),
                }
            }
            entry
        })
        .collect();

    let mut file = ModelFile {
        schema_version: SCHEMA_VERSION,
        constraints,
        fit_options: *fit_options,
        target_fprs: Vec::new(),
        methods: Vec::new(),
        classes: entries,
    };
    file.recompute_thresholds(target_fprs, methods)?;
    Ok(file)
}

pub fn run_calibration(run: &CalibrationRun) -> Result<ModelFile> {
    run.validate()?;
    let classes = match &run.source {
        DataSource::File {
            path,
            format,
            bounded,
        } => load_distances(path, *format, *bounded)?.classes,
        DataSource::Synth(cfg) => synth::interclass_distances(&synth::generate(cfg, 0)?)?,
    };
    calibrate(
        &classes,
        run.constraints,
        &run.fit_options,
        &run.target_fprs,
        &run.methods,
    )
}
