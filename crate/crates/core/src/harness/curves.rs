use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::calibration::ModelFile;
use crate::error::create_file;
use crate::model::{scaled_squares, EmpiricalCdf};
use crate::specfun::noncentral_chi2_cdf;
use crate::{Error, Result};

/// One row of a fit-quality plot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub empirical_cdf: f64,
    pub model_cdf: f64,
}

/// Empirical and fitted CDFs at the class's sorted standardised samples
/// `(δ / sigma_opt)^2`.
pub fn curve_points(model: &ModelFile, class_id: &str) -> Result<Vec<CurvePoint>> {
    let class = model.class(class_id)?;
    let fit = class
        .fit
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("class `{class_id}` has no fitted model")))?;
    let mut samples = scaled_squares(&class.distances, fit.sigma);
    samples.sort_by(f64::total_cmp);
    let ecdf = EmpiricalCdf::new(&samples)?;
    samples
        .iter()
        .map(|&x| {
            Ok(CurvePoint {
                x,
                empirical_cdf: ecdf.eval(x),
                model_cdf: noncentral_chi2_cdf(
                    x,
                    fit.dim as f64,
                    fit.lambda,
                    &model.fit_options.series,
                )?,
            })
        })
        .collect()
}

pub fn write_curves<W: Write>(out: W, points: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `x,empirical_cdf,model_cdf` for one class to `out_path`.
pub fn emit_curves(model: &ModelFile, class_id: &str, out_path: &Path) -> Result<()> {
    let points = curve_points(model, class_id)?;
    write_curves(BufWriter::new(create_file(out_path)?), &points)
}
