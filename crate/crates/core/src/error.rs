use thiserror::Error;

/// Errors produced by grid construction, surface sampling and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: need a > b > 0, got b = {b}, a = {a}")]
    InvalidDomain { b: f64, a: f64 },

    #[error("invalid resolution: need n_s >= 8 and n_theta >= 8 even, got {n_s} x {n_theta}")]
    InvalidResolution { n_s: usize, n_theta: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("level index {index} out of range (max {max})")]
    LevelOutOfRange { index: usize, max: usize },

    #[error("unknown surface: {0}")]
    UnknownSurface(String),

    #[error("unknown check: {0}")]
    UnknownCheck(String),

    #[error("degenerate immersion: |f_r|^2 = {min_fr_sq:e} below machine floor")]
    DegenerateImmersion { min_fr_sq: f64 },

    #[error("immersion is not conformal: residual {residual:e} exceeds {limit:e}")]
    NotConformal { residual: f64, limit: f64 },

    #[error(
        "nonvanishing real period: ({0:e}, {1:e}, {2:e}); the Weierstrass data \
         does not close up on the annulus",
        periods[0], periods[1], periods[2]
    )]
    NonvanishingRealPeriod { periods: [f64; 3] },

    #[error("Weierstrass g has a zero or pole on the annulus (min |g| = {min_abs_g:e})")]
    PoleOnAnnulus { min_abs_g: f64 },

    #[error("linear solver failed to converge: residual {residual:e}")]
    SolverDivergence { residual: f64 },

    #[error("one-form is not closed after star: loop-integral spread {spread:e} exceeds {limit:e}")]
    NotClosed { spread: f64, limit: f64 },

    #[error("frame does not span the immersion's tangent planes (defect {defect:e})")]
    FrameNotTangent { defect: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
