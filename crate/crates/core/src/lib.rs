//! Record-only estimation of causal conditional variances for a detuned
//! cavity optomechanical system under continuous homodyne detection.
//!
//! A laser-driven Fabry–Pérot cavity with one movable mirror is read out by
//! homodyne detection at quadrature angle θ. In the adiabatic regime
//! (cavity decay κ much faster than the mechanical frequency) the homodyne
//! record I(t) is linearly related to the mirror position, and the optimal
//! causal estimate of the mirror quadratures (q, p) is a stationary Wiener
//! filter. This crate computes, in closed form and by independent
//! rational-function integration:
//!
//! * every derived system parameter (optical spring, measurement strength,
//!   effective estimation frequency ω_θ and damping γ_θ) — [`params`];
//! * all stationary symmetrized spectra S_qq, S_qp, S_pp, S_qI, S_pI, S_II
//!   as rational functions of angular frequency — [`spectra`];
//! * causal and anti-causal Wiener filters, both from closed forms and from
//!   the generic Wiener–Hopf construction (spectral factorization plus
//!   causal projection) — [`filters`] and [`ratfun`];
//! * conditional variances, the record-only (relative-estimate) variances,
//!   and the reconstruction biases α_θ, β_θ that separate them, together
//!   with regime approximations and a table of kernel moment integrals —
//!   [`estimation`];
//! * two applications: logarithmic-negativity entanglement verification for
//!   a power-recycled two-mode setup, and conditional momentum-squeezing
//!   scans at the optimal homodyne angle — [`applications`].
//!
//! Quadratures are normalized so that [q, p] = 2i; all internal frequencies
//! are angular (rad/s). The deterministic validation corpus and the
//! self-test audit used by the CLI live in [`corpus`].

pub mod applications;
pub mod corpus;
pub mod error;
pub mod estimation;
pub mod filters;
pub mod params;
pub mod ratfun;
pub mod spectra;

pub use error::{CoreError, Result};
