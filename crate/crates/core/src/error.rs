use thiserror::Error;

/// Errors shared across the crate. Validation failures carry the residual
/// that tripped them so callers can log how far off the input was.
#[derive(Debug, Error)]
pub enum Error {
    #[error("label {0} has no gamma partner")]
    UnpairedLabel(String),
    #[error("matrix is not Hermitian (residual {residual:.3e}, tolerance {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("matrix is not self-dual (residual {residual:.3e}, tolerance {tol:.3e})")]
    NotSelfDual { residual: f64, tol: f64 },
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("unitary does not commute with gamma (residual {residual:.3e})")]
    NotGammaCommuting { residual: f64 },
    #[error("determinant has imaginary part {imag:.3e}; numerical breakdown")]
    DetNotReal { imag: f64 },
    #[error("matrix is not an orthogonal projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },
    #[error("projection is not a basis projection (residual {residual:.3e})")]
    NotBasisProjection { residual: f64 },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("box radius {small} does not fit inside {big}")]
    BoxMismatch { small: i64, big: i64 },
    #[error("eigensolver failed to converge")]
    EigensolverFailure,
    #[error("z is within {dist:.3e} of the spectrum")]
    ZNearSpectrum { dist: f64 },
    #[error("insufficient data: {n} usable pairs (need at least {need})")]
    InsufficientData { n: usize, need: usize },
    #[error("spectral gap closed (gap {gap:.3e} <= zero tolerance {zero_tol:.3e})")]
    GapClosed { gap: f64, zero_tol: f64 },
    #[error("filter cutoff {nu0:.3e} exceeds minimum cross-band difference {min_diff:.3e}")]
    CutoffTooLarge { nu0: f64, min_diff: f64 },
    #[error("gap closed on path at s = {s}")]
    GapClosedOnPath { s: f64 },
    #[error("step floor reached: transport error {transport_error:.3e} at h = {h:.3e}")]
    StepFloorReached { transport_error: f64, h: f64 },
    #[error("ill-conditioned intersection count: eigenvalue {eigenvalue} in the ambiguous band")]
    IllConditioned { eigenvalue: f64 },
    #[error("index methods disagree: {0}")]
    MethodDisagreement(String),
    #[error("matrix is not skew-symmetric (residual {residual:.3e})")]
    NotSkew { residual: f64 },
    #[error("Pfaffian requires even dimension, got {0}")]
    OddDimension(usize),
    #[error("vector length {got} does not match space dimension {expected}")]
    SpaceMismatch { expected: usize, got: usize },
    #[error("Fock oracle supports at most {max} modes, got {got}")]
    TooManyModes { max: usize, got: usize },
    #[error("no gap closing at s = {s}: gap {gap:.3e} still open")]
    StillGapped { s: f64, gap: f64 },
    #[error("wedge intersection is degenerate: {0}")]
    DegenerateWedge(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Residual tolerances used by the validating constructors. Defaults follow
/// the values the test suite pins down; runs may override them through the
/// CLI configuration.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative Hermiticity residual for Hamiltonians.
    pub hermitian_rel: f64,
    /// Relative self-duality residual for Hamiltonians.
    pub self_dual_rel: f64,
    /// Relative trace residual (scaled additionally by the dimension).
    pub trace_rel: f64,
    /// Absolute residual for projections (idempotency and Hermiticity).
    pub projection: f64,
    /// Absolute residual for the basis-projection identity ΓPΓ = 1 - P.
    pub basis_projection: f64,
    /// Absolute unitarity residual.
    pub unitary: f64,
    /// Absolute residual for gamma commutation of unitaries.
    pub gamma_commute: f64,
    /// Imaginary part of a Bogoliubov determinant before we declare breakdown.
    pub det_imag: f64,
    /// Factor of the spectral norm below which eigenvalues count as zero.
    pub zero_tol_factor: f64,
    /// Skew-symmetry residual accepted by the Pfaffian.
    pub skew: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian_rel: 1e-10,
            self_dual_rel: 1e-10,
            trace_rel: 1e-9,
            projection: 1e-10,
            basis_projection: 1e-9,
            unitary: 1e-10,
            gamma_commute: 1e-9,
            det_imag: 1e-6,
            zero_tol_factor: 1e-8,
            skew: 1e-9,
        }
    }
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian_rel: 1e-10,
        self_dual_rel: 1e-10,
        trace_rel: 1e-9,
        projection: 1e-10,
        basis_projection: 1e-9,
        unitary: 1e-10,
        gamma_commute: 1e-9,
        det_imag: 1e-6,
        zero_tol_factor: 1e-8,
        skew: 1e-9,
    };
}
