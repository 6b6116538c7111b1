//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong between raw parameters and a CSV row.
///
/// Variants are grouped by origin: parameter validation and the optical
/// spring fixed point, the rational-function engine, filter construction,
/// and the covariance/entanglement layer.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A raw input violates its physical domain (mass ≤ 0, negative
    /// pressure, ζ ≤ 0, …). `requirement` states the violated condition.
    #[error("parameter `{name}` must satisfy {requirement}, got {value:e}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    /// The (g_m, ω_m) optical-spring fixed point failed to settle.
    #[error(
        "optical-spring fixed point did not converge within {max_iter} \
         iterations (last relative step {last_step:e})"
    )]
    NonConvergent { max_iter: usize, last_step: f64 },

    /// The radicand of ω_θ (quartic root) or γ_θ (square root) came out
    /// nonpositive: the operating point has no stable effective oscillator.
    #[error(
        "effective parameter {name} is complex: radicand {radicand:e} ≤ 0; \
         the operating point is outside the stable estimation regime"
    )]
    ComplexEffectiveParams { name: &'static str, radicand: f64 },

    /// The polynomial root iteration stalled before reaching its tolerance.
    #[error(
        "root finding on a degree-{degree} polynomial stalled \
         (worst relative correction {residual:e})"
    )]
    RootFindingFailure { degree: usize, residual: f64 },

    /// A causal/anti-causal projection needs a strictly proper function.
    #[error(
        "rational function must be strictly proper here \
         (numerator degree {num_deg}, denominator degree {den_deg})"
    )]
    NotStrictlyProper { num_deg: usize, den_deg: usize },

    /// A pole sits on (or numerically indistinguishable from) the real
    /// axis, so the half-plane split and real-line integrals are undefined.
    #[error(
        "pole at {re:e} {im:+e}i lies on the real axis; \
         causal/anti-causal decomposition is undefined"
    )]
    RealAxisPole { re: f64, im: f64 },

    /// Spectral factorization was handed something that is not a strictly
    /// positive real spectrum on the real axis.
    #[error("spectrum is not real and strictly positive: S({omega:e}) = {value:e}")]
    NotPositive { omega: f64, value: f64 },

    /// The product of the two spectral factors failed to reproduce the
    /// input spectrum within tolerance.
    #[error(
        "spectral factorization residual {max_rel:e} exceeds \
         the {tol:e} relative tolerance"
    )]
    FactorizationMismatch { max_rel: f64, tol: f64 },

    /// A real-line integral does not exist.
    #[error("integral diverges: {reason}")]
    Divergent { reason: String },

    /// The residue-sum and adaptive-quadrature integration paths disagree,
    /// which flags a root-finding or projection defect rather than a
    /// physics result.
    #[error(
        "residue ({residue:e}) and quadrature ({quadrature:e}) integration \
         disagree by {rel:e} relative"
    )]
    OracleDisagreement {
        residue: f64,
        quadrature: f64,
        rel: f64,
    },

    /// The homodyne gain c_θ vanished (θ = α): the record carries no
    /// position information and every filter denominator degenerates.
    #[error(
        "homodyne gain c_theta = {c_theta:e} is below the usable threshold \
         {threshold:e}: the measurement rate vanishes at theta = alpha"
    )]
    ZeroGain { c_theta: f64, threshold: f64 },

    /// Closed-form bias and the record-only integral disagree beyond the
    /// contract tolerance — an algebra regression, not a physics outcome.
    #[error(
        "closed-form {name} = {closed:e} disagrees with its record-only \
         integral {integral:e} by {rel:e} relative"
    )]
    BiasMismatch {
        name: &'static str,
        closed: f64,
        integral: f64,
        rel: f64,
    },

    /// Σ² − 4·det𝒱 < 0 in the symplectic-eigenvalue formula: the assembled
    /// matrix is not a valid two-mode covariance matrix.
    #[error(
        "symplectic eigenvalue branch is complex \
         (discriminant {discriminant:e} < 0)"
    )]
    ComplexBranch { discriminant: f64 },

    /// The smallest partial-transpose symplectic eigenvalue came out
    /// nonpositive, so the logarithm in the negativity is undefined.
    #[error(
        "covariance matrix is unphysical: smallest symplectic eigenvalue \
         squared = {nu2:e} ≤ 0"
    )]
    UnphysicalCovariance { nu2: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
