use thiserror::Error;

/// Errors surfaced by the geometry, form-evaluation and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate immersion: det(g) = {det_g} at (u, v) = ({u}, {v})")]
    ImmersionFailure { u: f64, v: f64, det_g: f64 },

    #[error("layer folds onto itself: J = {j} at geodesic radius {rho} (t = {t})")]
    LayerFold { rho: f64, t: f64, j: f64 },

    #[error("layer self-intersection risk: C*a = {ca} >= 1 (C = {c}, a = {a})")]
    SelfIntersectionRisk { c: f64, a: f64, ca: f64 },

    #[error("field support [{support_lo}, {support_hi}] escapes quadrature coverage [{cover_lo}, {cover_hi}]")]
    Coverage {
        support_lo: f64,
        support_hi: f64,
        cover_lo: f64,
        cover_hi: f64,
    },

    #[error("zero-norm field")]
    ZeroNorm,

    #[error("operation requires a radially symmetric surface")]
    NonRadial,

    #[error("cutoff radii out of order or out of coverage: {0}")]
    BadRadii(String),

    #[error("curve normal is not aligned with the chosen direction: measured delta2 = {delta2}")]
    AlignmentFailure { delta2: f64 },

    #[error("eigensolver did not converge: best residual {residual} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("quadrature tail estimate {tail} exceeds tolerance {tol}")]
    QuadratureTail { tail: f64, tol: f64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
