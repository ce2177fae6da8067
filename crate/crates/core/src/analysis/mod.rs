//! Feature extraction, standard-model falsification and the uniqueness check.

mod falsify;
mod features;
mod uniqueness;

pub use falsify::{
    falsification_report, FalsificationReport, FalsificationRow, FeatureVerdict,
    FEATURE_BOUNDARY, RATIO_TOL,
};
pub use features::{
    extract_features, feature_sweep, sweep, FeatureReport, FeatureSweep, SweepOptions, SweepRow,
    DEFAULT_ASYMPTOTE_TOL,
};
pub use uniqueness::{
    verify_uniqueness, FamilyPoint, GeneralLinearFamily, PointVerdict, UniquenessOptions,
    UniquenessVerdict, DEFAULT_RESIDUAL_TOL,
};
