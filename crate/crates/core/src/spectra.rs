//! Symmetrized stationary spectral densities of the mirror and the homodyne
//! record, built as exact rational functions of ω.
//!
//! With the mechanical susceptibility denominator F(ω) = ω_m² − iΓω − ω²
//! and total force noise n̄, the mirror spectra are
//!
//! ```text
//! S_qq = ω_m² n̄ / |F|²,   S_qp = (iω/ω_m) S_qq,   S_pp = (ω²/ω_m²) S_qq,
//! ```
//!
//! and the record couples through the homodyne gains c_θ, L_θ:
//!
//! ```text
//! S_qI = c_θ S_qq + ω_m L_θ / F,
//! S_pI = −(iω/ω_m) S_qI,
//! S_II = c_θ² S_qq + c_θ (S_qI + S̄_qI) + M_θ,
//! ```
//!
//! where S̄_qI(ω) = conj(S_qI(ω)) on the real axis, i.e. the cross term is
//! 2c_θ·Re S_qI kept at the rational-function level so S_II stays a genuine
//! rational function. Everything is stored over the common real denominator
//! |F|² = F·F̃ (F̃ the coefficient-conjugated polynomial), so projections and
//! residue integrals downstream are exact up to root finding.
//!
//! The record spectrum factors exactly: S_II = M_θ|F′|²/|F|² with
//! F′(ω) = ω_θ² − iγ_θω − ω² — that identity is what makes every Wiener
//! object in this crate closed-form, and the test suite checks it on a grid.

use crate::error::{CoreError, Result};
use crate::params::DerivedParams;
use crate::ratfun::{integrate_real_line, Poly, RationalFn, C64};

/// Relative agreement required between the closed-form unconditional
/// variances and the residue-integral oracle.
const UNCONDITIONAL_TOL: f64 = 1e-9;

/// All stationary spectra for one operating point, plus the derived
/// parameters they were built from.
#[allow(non_snake_case)]
#[derive(Clone, Debug)]
pub struct SpectrumSet {
    /// Parameters this set was built from.
    pub d: DerivedParams,
    /// Position spectrum (real, ≥ 0 on the real axis).
    pub S_qq: RationalFn,
    /// Momentum spectrum (real, ≥ 0).
    pub S_pp: RationalFn,
    /// Symmetrized position–momentum cross spectrum (purely imaginary).
    pub S_qp: RationalFn,
    /// Homodyne record spectrum (real, > 0).
    pub S_II: RationalFn,
    /// Position–record cross spectrum.
    pub S_qI: RationalFn,
    /// Momentum–record cross spectrum.
    pub S_pI: RationalFn,
    /// Susceptibility denominator F(ω) = ω_m² − iΓω − ω² as a rational
    /// function (denominator 1), for reuse by filter constructions.
    pub F: RationalFn,
}

/// Build every spectral density from the derived parameters.
pub fn build_spectra(d: &DerivedParams) -> SpectrumSet {
    let wm = d.omega_m;
    let wm2 = wm * wm;
    let nbar = d.n_bar;
    let c = d.c_theta;
    #[allow(non_snake_case)]
    let L = d.L_theta;
    #[allow(non_snake_case)]
    let M = d.M_theta;

    // F = ω_m² − iΓω − ω², F̃ its coefficient conjugate; F·F̃ = |F|² on the
    // real axis with exactly real coefficients (the imaginary parts cancel
    // term by term).
    let f = Poly::new(vec![
        C64::new(wm2, 0.0),
        C64::new(0.0, -d.Gamma),
        C64::new(-1.0, 0.0),
    ]);
    let f_conj = f.conj_reflect();
    let ff = f.mul(&f_conj);

    let s_qq = RationalFn::new(Poly::from_real(&[wm2 * nbar]), ff.clone());
    let s_qp = RationalFn::new(
        Poly::new(vec![C64::new(0.0, 0.0), C64::new(0.0, wm * nbar)]),
        ff.clone(),
    );
    let s_pp = RationalFn::new(Poly::from_real(&[0.0, 0.0, nbar]), ff.clone());

    // S_qI = (c ω_m² n̄ + ω_m L F̃)/(F F̃).
    let sqi_num = Poly::from_real(&[c * wm2 * nbar]).add(&f_conj.scale(C64::new(wm * L, 0.0)));
    let s_qi = RationalFn::new(sqi_num.clone(), ff.clone());

    // S_pI = −(iω/ω_m) S_qI.
    let s_pi = RationalFn::new(
        sqi_num.mul(&Poly::new(vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0 / wm)])),
        ff.clone(),
    );

    // S_II = (c² ω_m² n̄ + c ω_m L (F + F̃) + M F F̃)/(F F̃): the middle term
    // is the symmetrized cross contribution 2c·Re[S_qI] − 2c²S_qq brought
    // over the common denominator. Equal to M|F′|²/|F|² identically.
    let sii_num = Poly::from_real(&[c * c * wm2 * nbar])
        .add(&f.add(&f_conj).scale(C64::new(c * wm * L, 0.0)))
        .add(&ff.scale(C64::new(M, 0.0)));
    let s_ii = RationalFn::new(sii_num, ff);

    SpectrumSet {
        d: *d,
        S_qq: s_qq,
        S_pp: s_pp,
        S_qp: s_qp,
        S_II: s_ii,
        S_qI: s_qi,
        S_pI: s_pi,
        F: RationalFn::from_poly(f),
    }
}

/// Stationary variances without any filtering: V_q = V_p = n̄/(2Γ),
/// V_qp = 0. Both the closed forms and the residue integrals of the spectra
/// are computed and must agree to 10⁻⁹ relative; the closed values are
/// returned as `(V_q, V_p, V_qp)`.
pub fn unconditional_variances(s: &SpectrumSet) -> Result<(f64, f64, f64)> {
    let gamma = s.d.Gamma;
    if gamma == 0.0 {
        return Err(CoreError::Divergent {
            reason: "undamped oscillator (Γ = 0) has no stationary variance".into(),
        });
    }
    let closed = s.d.n_bar / (2.0 * gamma);

    let vq_int = integrate_real_line(&s.S_qq)?.re;
    let vp_int = integrate_real_line(&s.S_pp)?.re;
    let vqp_int = integrate_real_line(&s.S_qp)?.re;

    for (name, integral) in [("V_q", vq_int), ("V_p", vp_int)] {
        let rel = ((integral - closed) / closed).abs();
        if rel > UNCONDITIONAL_TOL {
            return Err(CoreError::BiasMismatch {
                name,
                closed,
                integral,
                rel,
            });
        }
    }
    // The cross variance vanishes by parity; compare on the V_q scale.
    if vqp_int.abs() > UNCONDITIONAL_TOL * closed {
        return Err(CoreError::BiasMismatch {
            name: "V_qp",
            closed: 0.0,
            integral: vqp_int,
            rel: vqp_int.abs() / closed,
        });
    }
    Ok((closed, closed, 0.0))
}
