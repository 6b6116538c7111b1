//! Two applications of record-only estimation.
//!
//! **Entanglement verification.** A power-recycling mirror splits the cavity
//! into hybridized ± modes with asymmetric decay rates κ₊ = κ₋/ζ, each
//! independently coupled to the mirror; feedback cooling replaces the bare
//! damping by an effective γ_m at an effective bath temperature
//! T_eff = Γ·T/γ_m (structural coupling). Each mode gets a 2×2 conditional
//! covariance block whose diagonal is either the causal pair (V_q^c, V_p^c)
//! or the record-only pair (V_Δq, V_Δp), while the off-diagonal is the
//! record-accessible cross covariance in **both** cases — using the
//! relative-estimate cross (which vanishes identically) would lose the
//! q–p correlations entirely. The beam splitter to the symmetric/
//! antisymmetric basis assembles the 4×4 matrix whose logarithmic
//! negativity is the entanglement witness: E_N > 0 iff entangled.
//!
//! **Momentum squeezing.** At the optimal homodyne angle
//! θ_opt = α − arctan(2/ξ_eff)/2 the conditional momentum variance dips
//! below the position variance; scanning input power maps where
//! V_p/V_q < 1 and how far the record-only ratio deviates from the causal
//! one. Near θ = α the homodyne gain c_θ vanishes and estimation degrades —
//! scan rows entering that band are flagged rather than dropped.

use nalgebra::{Matrix2, Matrix4};
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::estimation::{causal_variances, relative_estimate};
use crate::params::{derive, DerivedParams, SystemParams, ThermalOccupation};

/// Soft-flag band around the zero-gain angle: rows with
/// |sin(θ−α)| below this are still computed (the hard failure lives at
/// [`crate::filters::ZERO_GAIN_REL`]) but marked [`RowFlag::NearZeroGain`],
/// since the conditional variances there are dominated by the vanishing
/// measurement rate and lose physical meaning first.
pub const NEAR_ZERO_GAIN_SIN: f64 = 1e-3;

/// One of the two power-recycled cavity modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Symmetric mode, decay κ₊ = κ₋/ζ.
    Plus,
    /// Antisymmetric mode, decay κ₋ (the base value).
    Minus,
}

/// Which variance set fills the diagonal of each mode's covariance block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// True causal conditional variances (V_q^c, V_p^c).
    Causal,
    /// Record-only relative-estimate variances (V_Δq, V_Δp).
    MeasurementBased,
}

/// Which measurement-strength parameter defines ξ_eff in the optimal-angle
/// formula θ_opt = α − arctan(2/ξ_eff)/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XiEffMode {
    /// ξ_eff = n̄/ω_m — the full force-noise-to-frequency ratio, which is
    /// what the conditional-variance algebra actually extremizes.
    NbarOverOmegaM,
    /// ξ_eff = ξ — the bare radiation-pressure strength, for sensitivity
    /// analysis (coincides with the above when thermal force noise is
    /// negligible).
    Xi,
}

/// Homodyne-angle policy for squeezing scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleMode {
    /// Fixed amplitude quadrature, θ = 0.
    X,
    /// Re-resolve θ = θ_opt at every grid point (it moves with power).
    Opt,
}

/// Per-row health flag for scan outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowFlag {
    Clear,
    /// |sin(θ−α)| < [`NEAR_ZERO_GAIN_SIN`]: values computed but degraded.
    NearZeroGain,
    /// Homodyne gain numerically zero; row values are NaN.
    ZeroGain,
    /// A non-gain numerical failure (root finding, branch, convergence);
    /// row values are NaN.
    NumericalFailure,
}

impl std::fmt::Display for RowFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RowFlag::Clear => "",
            RowFlag::NearZeroGain => "near-zero-gain",
            RowFlag::ZeroGain => "zero-gain",
            RowFlag::NumericalFailure => "numerical-failure",
        })
    }
}

/// Inputs for the two-mode (power-recycled, feedback-cooled) system.
///
/// `base` describes the antisymmetric mode's cavity (κ = κ₋) and the bare
/// mechanics; `zeta` sets the recycling asymmetry κ₊ = κ₋/ζ; `gamma_m` is
/// the effective feedback damping [rad/s] that replaces the bare Γ in both
/// modes; `detuning_ratio` fixes Δ_±/κ_± for both modes.
#[derive(Clone, Copy, Debug)]
pub struct TwoModeConfig {
    pub base: SystemParams,
    pub zeta: f64,
    pub gamma_m: f64,
    pub detuning_ratio: f64,
}

impl TwoModeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0) || !self.zeta.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "zeta",
                requirement: "be positive and finite",
                value: self.zeta,
            });
        }
        if !(self.gamma_m > 0.0) || !self.gamma_m.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "gamma_m",
                requirement: "be positive and finite",
                value: self.gamma_m,
            });
        }
        if self.gamma_m < self.base.gamma {
            return Err(CoreError::InvalidParameter {
                name: "gamma_m",
                requirement: "be at least the bare damping (feedback adds damping)",
                value: self.gamma_m,
            });
        }
        if !self.detuning_ratio.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "detuning_ratio",
                requirement: "be finite",
                value: self.detuning_ratio,
            });
        }
        Ok(())
    }

    /// The raw parameter set of one mode: per-mode κ and Δ, feedback
    /// damping, and the effective thermal bath the feedback loop leaves
    /// behind (T_eff = Γ·T/γ_m with the structural n_th scaling).
    pub fn mode_system(&self, mode: Mode) -> SystemParams {
        let kappa = match mode {
            Mode::Plus => self.base.kappa / self.zeta,
            Mode::Minus => self.base.kappa,
        };
        let t_eff = self.base.gamma * self.base.temperature / self.gamma_m;
        SystemParams {
            kappa,
            delta: self.detuning_ratio * kappa,
            gamma: self.gamma_m,
            occupation: ThermalOccupation::EffectiveBath { t_eff },
            ..self.base
        }
    }
}

/// Derived parameters of one hybridized mode.
pub fn mode_params(cfg: &TwoModeConfig, mode: Mode) -> Result<DerivedParams> {
    cfg.validate()?;
    derive(&cfg.mode_system(mode))
}

/// 4×4 symmetric covariance matrix over (q₁, p₁, q₂, p₂), the
/// symmetric/antisymmetric combinations of the two mode oscillators.
#[derive(Clone, Copy, Debug)]
pub struct CovMatrix4 {
    pub mat: Matrix4<f64>,
}

impl CovMatrix4 {
    pub fn v11(&self) -> Matrix2<f64> {
        self.mat.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn v22(&self) -> Matrix2<f64> {
        self.mat.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn v12(&self) -> Matrix2<f64> {
        self.mat.fixed_view::<2, 2>(0, 2).into_owned()
    }
}

/// The orthogonal beam splitter from the ± mode basis to the 1/2 output
/// basis, acting on (q₊, p₊, q₋, p₋).
fn beam_splitter() -> Matrix4<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix4::new(
        s, 0.0, s, 0.0, //
        0.0, s, 0.0, s, //
        s, 0.0, -s, 0.0, //
        0.0, s, 0.0, -s,
    )
}

/// Both 2×2 conditional covariance blocks of one mode: (causal,
/// measurement-based). The shared off-diagonal is the record-only cross
/// covariance −∫Re[H_q H_p* S_II] dω/2π, whose value equals the closed
/// causal V_qp^c = (γ_θ−Γ)²/(2λ_θω_m) — [`causal_variances`] has already
/// verified that identity against the residue integral, so the closed value
/// is used directly.
fn mode_blocks(d: &DerivedParams) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let cv = causal_variances(d)?;
    let re = relative_estimate(d)?;
    let causal = Matrix2::new(cv.V_q_c, cv.V_qp_c, cv.V_qp_c, cv.V_p_c);
    let estimated = Matrix2::new(re.V_dq, cv.V_qp_c, cv.V_qp_c, re.V_dp);
    Ok((causal, estimated))
}

fn assemble(vp: &Matrix2<f64>, vm: &Matrix2<f64>) -> CovMatrix4 {
    let mut block = Matrix4::zeros();
    block.fixed_view_mut::<2, 2>(0, 0).copy_from(vp);
    block.fixed_view_mut::<2, 2>(2, 2).copy_from(vm);
    let s = beam_splitter();
    CovMatrix4 {
        mat: s * block * s.transpose(),
    }
}

/// Conditional covariance matrix of the beam-split two-mode state.
///
/// With `Method::MeasurementBased` every entry is obtainable from the
/// photocurrent record alone. `zeta = 1` is accepted but degenerate: the
/// modes coincide, the off-diagonal blocks cancel exactly, and the state is
/// separable by construction — callers probing entanglement there should
/// expect E_N ≤ 0.
pub fn two_mode_covariance(cfg: &TwoModeConfig, method: Method) -> Result<CovMatrix4> {
    let dp = mode_params(cfg, Mode::Plus)?;
    let dm = mode_params(cfg, Mode::Minus)?;
    let (cp, ep) = mode_blocks(&dp)?;
    let (cm, em) = mode_blocks(&dm)?;
    Ok(match method {
        Method::Causal => assemble(&cp, &cm),
        Method::MeasurementBased => assemble(&ep, &em),
    })
}

/// Logarithmic negativity of a two-mode Gaussian state,
/// E_N = −½ log₂ ν̃², where ν̃² = (Σ − √(Σ²−4 det V))/2 is the smaller
/// partially-transposed symplectic eigenvalue squared and
/// Σ = det V11 + det V22 − 2 det V12.
///
/// Reported signed (no clamp at zero): entanglement is the separate verdict
/// E_N > 0, and ratios of E_N values are meaningful only unclamped.
pub fn log_negativity(v: &CovMatrix4) -> Result<f64> {
    let sigma = v.v11().determinant() + v.v22().determinant() - 2.0 * v.v12().determinant();
    let det_v = v.mat.determinant();
    let disc = sigma * sigma - 4.0 * det_v;
    if disc < 0.0 {
        return Err(CoreError::ComplexBranch { discriminant: disc });
    }
    let nu2 = (sigma - disc.sqrt()) / 2.0;
    if nu2 <= 0.0 {
        return Err(CoreError::UnphysicalCovariance { nu2 });
    }
    Ok(-0.5 * nu2.log2())
}

/// One row of the entanglement-ratio scan over feedback damping.
#[derive(Clone, Copy, Debug)]
pub struct EntangleRow {
    /// Feedback damping γ_m [rad/s].
    pub gamma_m: f64,
    pub e_n_causal: f64,
    pub e_n_est: f64,
    /// E_N^est / E_N^causal.
    pub ratio: f64,
    pub flag: RowFlag,
}

fn entangle_row(cfg: &TwoModeConfig, gamma_m: f64) -> EntangleRow {
    let row_cfg = TwoModeConfig { gamma_m, ..*cfg };
    let outcome = (|| -> Result<(f64, f64)> {
        let e_c = log_negativity(&two_mode_covariance(&row_cfg, Method::Causal)?)?;
        let e_e = log_negativity(&two_mode_covariance(&row_cfg, Method::MeasurementBased)?)?;
        Ok((e_c, e_e))
    })();
    match outcome {
        Ok((e_n_causal, e_n_est)) => EntangleRow {
            gamma_m,
            e_n_causal,
            e_n_est,
            ratio: e_n_est / e_n_causal,
            flag: RowFlag::Clear,
        },
        Err(err) => EntangleRow {
            gamma_m,
            e_n_causal: f64::NAN,
            e_n_est: f64::NAN,
            ratio: f64::NAN,
            flag: match err {
                CoreError::ZeroGain { .. } => RowFlag::ZeroGain,
                _ => RowFlag::NumericalFailure,
            },
        },
    }
}

/// Sweep the feedback damping and compare measurement-based to causal
/// entanglement. Rows are computed in parallel but returned in grid order;
/// a row that fails numerically is flagged and carries NaNs instead of
/// aborting the scan.
pub fn entanglement_ratio_scan(
    cfg: &TwoModeConfig,
    gamma_m_grid: &[f64],
) -> Result<Vec<EntangleRow>> {
    cfg.validate()?;
    Ok(gamma_m_grid
        .par_iter()
        .map(|&g| entangle_row(cfg, g))
        .collect())
}

/// The homodyne angle minimizing the conditional momentum variance,
/// θ_opt = α − arctan(2/ξ_eff)/2.
pub fn optimal_angle(d: &DerivedParams, xi_mode: XiEffMode) -> f64 {
    let xi_eff = match xi_mode {
        XiEffMode::NbarOverOmegaM => d.n_bar / d.omega_m,
        XiEffMode::Xi => d.xi,
    };
    d.alpha - (2.0 / xi_eff).atan() / 2.0
}

/// One row of the momentum-squeezing power scan.
#[derive(Clone, Copy, Debug)]
pub struct SqueezeScanPoint {
    /// Input power [W].
    pub p_in: f64,
    /// V_p^c / V_q^c.
    pub ratio_causal: f64,
    /// V_Δp / V_Δq.
    pub ratio_estimated: f64,
    /// The homodyne angle actually used [rad].
    pub theta_used: f64,
    pub flag: RowFlag,
}

fn squeeze_row(
    base: &SystemParams,
    p_in: f64,
    angle_mode: AngleMode,
    detuning_ratio: f64,
    xi_mode: XiEffMode,
) -> SqueezeScanPoint {
    let mut sys = SystemParams {
        p_in,
        delta: detuning_ratio * base.kappa,
        ..*base
    };
    let outcome = (|| -> Result<(f64, f64, f64, RowFlag)> {
        if let AngleMode::Opt = angle_mode {
            // ω_m, n̄, ξ, α are all θ-independent, so a probe derivation at
            // θ = 0 fixes the optimal angle for the true run.
            let probe = derive(&SystemParams { theta: 0.0, ..sys })?;
            sys.theta = optimal_angle(&probe, xi_mode);
        } else {
            sys.theta = 0.0;
        }
        let d = derive(&sys)?;
        let cv = causal_variances(&d)?;
        let re = relative_estimate(&d)?;
        let flag = if (d.sys.theta - d.alpha).sin().abs() < NEAR_ZERO_GAIN_SIN {
            RowFlag::NearZeroGain
        } else {
            RowFlag::Clear
        };
        Ok((cv.V_p_c / cv.V_q_c, re.V_dp / re.V_dq, d.sys.theta, flag))
    })();
    match outcome {
        Ok((ratio_causal, ratio_estimated, theta_used, flag)) => SqueezeScanPoint {
            p_in,
            ratio_causal,
            ratio_estimated,
            theta_used,
            flag,
        },
        Err(err) => SqueezeScanPoint {
            p_in,
            ratio_causal: f64::NAN,
            ratio_estimated: f64::NAN,
            theta_used: sys.theta,
            flag: match err {
                CoreError::ZeroGain { .. } => RowFlag::ZeroGain,
                _ => RowFlag::NumericalFailure,
            },
        },
    }
}

/// Scan input power and report the momentum-to-position variance ratio,
/// causal and record-only. With [`AngleMode::Opt`] the homodyne angle is
/// re-resolved at every power (θ_opt moves with the measurement strength).
/// `detuning_ratio` overrides the base detuning as Δ = ratio·κ. Rows are
/// computed in parallel, returned in grid order, and flagged (not dropped)
/// when they fall into the zero-gain band.
pub fn squeezing_scan(
    base: &SystemParams,
    p_grid: &[f64],
    angle_mode: AngleMode,
    detuning_ratio: f64,
    xi_mode: XiEffMode,
) -> Result<Vec<SqueezeScanPoint>> {
    if !detuning_ratio.is_finite() {
        return Err(CoreError::InvalidParameter {
            name: "detuning_ratio",
            requirement: "be finite",
            value: detuning_ratio,
        });
    }
    Ok(p_grid
        .par_iter()
        .map(|&p| squeeze_row(base, p, angle_mode, detuning_ratio, xi_mode))
        .collect())
}
