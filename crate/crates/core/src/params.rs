//! Raw system parameters and every derived symbol used downstream.
//!
//! The cavity (decay κ, detuning Δ, length ℓ, resonance ω_c) is driven with
//! input power P_in and read out by homodyne detection at angle θ. The
//! movable mirror (mass m, bare frequency Ω, damping Γ) sits in a thermal
//! bath at temperature T. Everything internal is SI with angular
//! frequencies in rad/s; the CLI converts from the Hz-keyed config.
//!
//! The optical spring makes the effective mechanical frequency ω_m and the
//! coupling g_m mutually dependent:
//!
//! ```text
//! ω_m² = Ω² + 16 Δ g_m² Ω / (κ² + 4Δ²),
//! g_m² = ω_c P_in κ / (m ω_m ℓ² (κ² + 4Δ²)),
//! ```
//!
//! solved here by a damped fixed-point iteration from ω_m = Ω. All other
//! derived quantities are explicit:
//!
//! ```text
//! α   = arctan(2Δ/κ)                     homodyne rotation of the record
//! ξ   = 16 g_m² cos²α / (κ ω_m)          radiation-pressure strength
//! c_θ = √(ω_m ξ) sin(θ−α),  L_θ = √(ω_m ξ) cos(θ−α)
//! n̄   = 2Γ(2n_th+1) + ω_m ξ              total force noise (rad/s)
//! M_θ = 2N_th + 1                        homodyne shot-noise level
//! λ_θ = c_θ²/M_θ,  Λ_θ = c_θ L_θ/M_θ
//! ω_θ = (ω_m⁴ + 2Λ_θ ω_m³ + n̄ λ_θ ω_m²)^{1/4}
//! γ_θ = √(Γ² − 2ω_m(ω_m+Λ_θ) + 2ω_θ²)
//! ```
//!
//! ω_θ and γ_θ are the frequency and damping of the effective oscillator
//! F′(ω) = ω_θ² − iγ_θω − ω² that governs every causal filter.

use crate::error::{CoreError, Result};

/// Reduced Planck constant [J·s] (exact SI).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant [J/K] (exact SI).
pub const K_B: f64 = 1.380_649e-23;
/// Default cavity length [m].
pub const DEFAULT_ELL: f64 = 0.1;
/// Default cavity angular frequency [rad/s] (2π × 2.818×10¹⁴ Hz).
pub const DEFAULT_OMEGA_C: f64 = 2.0 * std::f64::consts::PI * 2.818e14;

/// How the thermal phonon occupation of the mechanical mode is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalOccupation {
    /// Direct bath coupling: n_th = k_B T / (ħ ω_m).
    Intrinsic,
    /// Cold-damped (feedback-cooled) mode: the loop replaces the bath by an
    /// effective temperature, and the structural coupling makes the
    /// occupation scale as n_th = k_B T_eff Ω / (ħ ω_m²). `t_eff` is in K,
    /// typically Γ_bare·T/γ_m.
    EffectiveBath { t_eff: f64 },
}

/// How the shot-noise level M_θ = 2N_th+1 is treated.
///
/// At optical frequencies N_th ≈ 0.022 even at room temperature, so M_θ is
/// within 5% of 1; `Unit` pins it to exactly 1 for analyses quoted in that
/// approximation, `Exact` keeps the computed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotNoiseModel {
    Exact,
    Unit,
}

/// Raw physical inputs. Angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Mirror mass [kg].
    pub m: f64,
    /// Bare mechanical angular frequency Ω [rad/s].
    pub omega_0: f64,
    /// Cavity decay rate κ [rad/s].
    pub kappa: f64,
    /// Laser–cavity detuning Δ [rad/s].
    pub delta: f64,
    /// Mechanical damping rate Γ [rad/s].
    pub gamma: f64,
    /// Input laser power [W].
    pub p_in: f64,
    /// Bath temperature [K].
    pub temperature: f64,
    /// Homodyne angle θ [rad]. The canonical domain is [0, π); values
    /// outside are accepted (the optimal angle at Δ=0 is a hair below 0).
    pub theta: f64,
    /// Cavity length ℓ [m].
    pub ell: f64,
    /// Cavity angular frequency ω_c [rad/s] (laser frequency ω_L ≈ ω_c).
    pub omega_c: f64,
    /// Thermal occupation model for n_th.
    pub occupation: ThermalOccupation,
    /// Shot-noise level handling for M_θ.
    pub shot_noise: ShotNoiseModel,
}

impl SystemParams {
    fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 8] = [
            ("m", self.m, self.m > 0.0),
            ("Omega", self.omega_0, self.omega_0 > 0.0),
            ("kappa", self.kappa, self.kappa > 0.0),
            ("Gamma", self.gamma, self.gamma >= 0.0),
            ("P_in", self.p_in, self.p_in >= 0.0),
            ("T", self.temperature, self.temperature >= 0.0),
            ("ell", self.ell, self.ell > 0.0),
            ("omega_c", self.omega_c, self.omega_c > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(CoreError::InvalidParameter {
                    name,
                    requirement: "be positive and finite (Gamma, P_in, T may be 0)",
                    value,
                });
            }
        }
        if !self.theta.is_finite() || !self.delta.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "theta/Delta",
                requirement: "be finite",
                value: f64::NAN,
            });
        }
        if let ThermalOccupation::EffectiveBath { t_eff } = self.occupation {
            if !(t_eff >= 0.0) || !t_eff.is_finite() {
                return Err(CoreError::InvalidParameter {
                    name: "T_eff",
                    requirement: "be nonnegative and finite",
                    value: t_eff,
                });
            }
        }
        Ok(())
    }
}

/// Every derived symbol, plus a copy of the inputs that produced it.
///
/// All rates are angular (rad/s); n_th, N_th, ξ, M_θ are dimensionless.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// The raw inputs this record was derived from.
    pub sys: SystemParams,
    /// Mechanical damping Γ [rad/s] (copied from `sys.gamma` for formulas).
    pub Gamma: f64,
    /// Optomechanical coupling g_m [rad/s].
    pub g_m: f64,
    /// Optical-spring-shifted mechanical frequency ω_m [rad/s].
    pub omega_m: f64,
    /// Input phase rotation α = arctan(2Δ/κ) [rad].
    pub alpha: f64,
    /// Radiation-pressure measurement strength ξ (dimensionless).
    pub xi: f64,
    /// Homodyne gain c_θ = √(ω_m ξ) sin(θ−α).
    pub c_theta: f64,
    /// Force–shot cross gain L_θ = √(ω_m ξ) cos(θ−α).
    pub L_theta: f64,
    /// Total force noise n̄ = 2Γ(2n_th+1) + ω_m ξ [rad/s].
    pub n_bar: f64,
    /// Shot-noise level M_θ = 2N_th+1 (exactly 1 under `ShotNoiseModel::Unit`).
    pub M_theta: f64,
    /// Measurement strength λ_θ = c_θ²/M_θ [rad/s].
    pub lambda_theta: f64,
    /// Cross rate Λ_θ = c_θL_θ/M_θ [rad/s].
    pub Lambda_theta: f64,
    /// Effective estimation frequency ω_θ [rad/s].
    pub omega_theta: f64,
    /// Effective estimation damping γ_θ [rad/s].
    pub gamma_theta: f64,
    /// Thermal phonon occupation n_th.
    pub n_th: f64,
    /// Thermal photon occupation N_th = k_B T/(ħ ω_c).
    pub N_th: f64,
}

/// Fixed-point controls for the optical-spring solve. The damped update
/// ω ← (ω + ω_new)/2 keeps the iteration contractive even when the spring
/// shift is large.
const SPRING_TOL: f64 = 1e-14;
const SPRING_MAX_ITER: usize = 1000;

/// Compute all derived parameters from the raw ones.
///
/// Errors with [`CoreError::NonConvergent`] if the optical-spring fixed
/// point stalls and [`CoreError::ComplexEffectiveParams`] if the ω_θ or γ_θ
/// radicand is negative (unstable operating point).
pub fn derive(sys: &SystemParams) -> Result<DerivedParams> {
    sys.validate()?;
    let k2 = sys.kappa * sys.kappa + 4.0 * sys.delta * sys.delta;
    let alpha = (2.0 * sys.delta / sys.kappa).atan();

    let g2_of = |omega_m: f64| -> f64 {
        sys.omega_c * sys.p_in * sys.kappa / (sys.m * omega_m * sys.ell * sys.ell * k2)
    };

    // ω_m² = Ω² + 16 Δ g²(ω_m) Ω / k2, damped fixed point from ω_m = Ω.
    // Δ = 0 kills the spring term, so ω_m = Ω exactly and no iteration runs.
    let mut omega_m = sys.omega_0;
    if sys.delta != 0.0 {
        let mut converged = false;
        let mut last_step = f64::INFINITY;
        for _ in 0..SPRING_MAX_ITER {
            let radicand =
                sys.omega_0 * sys.omega_0 + 16.0 * sys.delta * g2_of(omega_m) * sys.omega_0 / k2;
            if radicand <= 0.0 {
                return Err(CoreError::ComplexEffectiveParams {
                    name: "omega_m",
                    radicand,
                });
            }
            let next = 0.5 * (omega_m + radicand.sqrt());
            last_step = ((next - omega_m) / next).abs();
            omega_m = next;
            if last_step < SPRING_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(CoreError::NonConvergent {
                max_iter: SPRING_MAX_ITER,
                last_step,
            });
        }
    }

    let g2 = g2_of(omega_m);
    let cos_alpha = alpha.cos();
    let xi = 16.0 * g2 * cos_alpha * cos_alpha / (sys.kappa * omega_m);

    let n_th = match sys.occupation {
        ThermalOccupation::Intrinsic => K_B * sys.temperature / (HBAR * omega_m),
        ThermalOccupation::EffectiveBath { t_eff } => {
            K_B * t_eff * sys.omega_0 / (HBAR * omega_m * omega_m)
        }
    };
    #[allow(non_snake_case)]
    let N_th = K_B * sys.temperature / (HBAR * sys.omega_c);
    #[allow(non_snake_case)]
    let M_theta = match sys.shot_noise {
        ShotNoiseModel::Exact => 2.0 * N_th + 1.0,
        ShotNoiseModel::Unit => 1.0,
    };
    let n_bar = 2.0 * sys.gamma * (2.0 * n_th + 1.0) + omega_m * xi;

    let root = (omega_m * xi).sqrt();
    let delta_angle = sys.theta - alpha;
    let c_theta = root * delta_angle.sin();
    #[allow(non_snake_case)]
    let L_theta = root * delta_angle.cos();
    let lambda_theta = c_theta * c_theta / M_theta;
    #[allow(non_snake_case)]
    let Lambda_theta = c_theta * L_theta / M_theta;

    let wm2 = omega_m * omega_m;
    let omega_theta4 =
        wm2 * wm2 + 2.0 * Lambda_theta * omega_m * wm2 + n_bar * lambda_theta * wm2;
    if omega_theta4 <= 0.0 {
        return Err(CoreError::ComplexEffectiveParams {
            name: "omega_theta",
            radicand: omega_theta4,
        });
    }
    let omega_theta = omega_theta4.powf(0.25);

    let gamma_theta_sq = sys.gamma * sys.gamma - 2.0 * omega_m * (omega_m + Lambda_theta)
        + 2.0 * omega_theta * omega_theta;
    // θ = α gives γ_θ² = Γ² up to rounding of the ω_m² cancellation; clamp
    // only losses that are small relative to the cancelled scale.
    let scale = sys.gamma * sys.gamma + 2.0 * wm2 + 2.0 * omega_theta * omega_theta;
    let gamma_theta = if gamma_theta_sq >= 0.0 {
        gamma_theta_sq.sqrt()
    } else if gamma_theta_sq > -1e-12 * scale {
        0.0
    } else {
        return Err(CoreError::ComplexEffectiveParams {
            name: "gamma_theta",
            radicand: gamma_theta_sq,
        });
    };

    Ok(DerivedParams {
        sys: *sys,
        Gamma: sys.gamma,
        g_m: g2.sqrt(),
        omega_m,
        alpha,
        xi,
        c_theta,
        L_theta,
        n_bar,
        M_theta,
        lambda_theta,
        Lambda_theta,
        omega_theta,
        gamma_theta,
        n_th,
        N_th,
    })
}

/// Residual of the optical-spring fixed point,
/// |ω_m² − Ω² − 16Δg_m²Ω/(κ²+4Δ²)| / ω_m². Exposed for the invariant tests.
pub fn spring_residual(d: &DerivedParams) -> f64 {
    let s = &d.sys;
    let k2 = s.kappa * s.kappa + 4.0 * s.delta * s.delta;
    let wm2 = d.omega_m * d.omega_m;
    ((wm2 - s.omega_0 * s.omega_0 - 16.0 * s.delta * d.g_m * d.g_m * s.omega_0 / k2) / wm2).abs()
}

/// Ideal-gas damping estimate for a suspended mirror,
///
/// ```text
/// Γ ≈ 7×10⁻⁶ Hz · (P/10⁻³ Pa) · (T/300 K)^{−1/2} · (1 mg/m)^{1/3} · (20 g cm⁻³/ρ)^{2/3}
/// ```
///
/// Inputs in SI (Pa, K, kg, kg/m³); the returned rate is in Hz (cycles),
/// not rad/s, matching how damping rates are quoted in configs.
pub fn gas_damping(pressure: f64, temperature: f64, mass: f64, density: f64) -> Result<f64> {
    let inputs: [(&'static str, f64); 4] = [
        ("P_gas", pressure),
        ("T", temperature),
        ("m", mass),
        ("rho", density),
    ];
    for (name, value) in inputs {
        if !(value > 0.0) || !value.is_finite() {
            return Err(CoreError::InvalidParameter {
                name,
                requirement: "be positive and finite",
                value,
            });
        }
    }
    Ok(7e-6
        * (pressure / 1e-3)
        * (300.0 / temperature).sqrt()
        * (1e-6 / mass).cbrt()
        * (2.0e4 / density).powf(2.0 / 3.0))
}
