//! Batch calibration and evaluation: distance-file ingestion, the persisted
//! model file, impostor-trial evaluation reports and CDF curve export.

pub mod calibration;
pub mod curves;
pub mod evaluation;
pub mod io;

pub use calibration::{
    auto_constraints, calibrate, run_calibration, CalibrationRun, ClassEntry, ConstraintChoice,
    DataSource, ModelFile, SCHEMA_VERSION,
};
pub use curves::{curve_points, emit_curves, CurvePoint};
pub use evaluation::{run_evaluation, EvaluationEntry, EvaluationReport};
pub use io::{
    load_distances, load_pattern_set, load_query_distances, write_matrix_csv,
    write_query_distances, DistanceFormat, DistanceTable,
};
