//! Numerical certification of ground states for Dirichlet Laplacians on
//! tubular layers built over complete non-compact surfaces.
//!
//! The crate is generic over the scalar type through [`real::Real`]; the
//! aliases at the root pin the common `f64` instantiations.

pub mod certify;
pub mod error;
pub mod forms;
pub mod layer;
pub mod linalg;
pub mod real;
pub mod solver;
pub mod surface;

pub use certify::{
    certify_general_curve, certify_nonneg_curvature, ess_spectrum_probe, CandidateCurve,
    CertFamily, Certificate, CutoffKind, CutoffSpec, Verdict,
};
pub use error::{Error, Result};
pub use forms::{eval_forms, eval_forms_pair, FormValue, LayerField, TransverseProfile};
pub use layer::{layer_metric_at, LayerConfig, LayerMetric, FOLD_TOL};
pub use real::Real;
pub use solver::{solve_axisym, truncation_study, SpectrumResult, TruncatedLayer};
pub use surface::admissibility::{admissibility, AdmissibilityReport};
pub use surface::families::FamilyTag;
pub use surface::Surface;

/// Double-precision instantiations used by the CLI and most callers.
pub type Surface64 = surface::Surface<f64>;
pub type LayerConfig64 = layer::LayerConfig<f64>;
pub type LayerField64 = forms::LayerField<f64>;
pub type Certificate64 = Certificate;
pub type SpectrumResult64 = solver::SpectrumResult<f64>;

/// Single-precision aliases (exploratory sweeps; not used for certificates).
pub type Surface32 = surface::Surface<f32>;
pub type LayerConfig32 = layer::LayerConfig<f32>;
