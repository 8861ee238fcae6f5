//! Generalized damping torque analysis in the jerk space.
//!
//! With `Δx = T_J·Δα`, the turbine-generator part of the jerk-basis model is
//!
//! ```text
//! T_J·Δζ + T_J·b22·Δα − b21·Δf = ΔT,    ΔT = b23·Δμ − b24·Δy_L
//! ```
//!
//! where the governor rows close `Δμ` and `Δy_L` over `Δf`. Writing
//! `ΔT = K(jω)·Δf = Re K·Δf + (Im K/ω)·Δα` splits the feedback into a damping
//! torque `D_m = −Im K/ω` and a synchronizing torque `K_m = −Re K`.
//!
//! Sign convention: `K_yL = b24·H_yL` and `K_μ = b23·H_μ`, so that
//! `K = K_μ − K_yL` and `D_m = Im(K_yL)/ω − Im(K_μ)/ω`. With this choice the
//! integral-loop path (`Im(K_yL)/ω`) is the positive term and the governor
//! path (`−Im(K_μ)/ω`) the negative one.

use num_complex::Complex64;
use serde::Serialize;

use crate::eigen::{self, serialize_complex, ModeEstimate, ModeSource};
use crate::error::{Error, Result};
use crate::model::{coeffs_a, coeffs_b, CoeffA, CoeffB, SystemModel};
use crate::params::SystemParams;

/// Δμ/Δf and Δy_L/Δf from the two governor state equations at `s = jω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GovernorResponse {
    pub h_mu: Complex64,
    pub h_yl: Complex64,
}

pub fn governor_response(a: &CoeffA, omega: f64) -> GovernorResponse {
    let s = Complex64::new(0.0, omega);
    let h_yl = a.a41 / (s + a.a44);
    let h_mu = (-a.a31 + a.a34 * h_yl) / (s + a.a33);
    GovernorResponse { h_mu, h_yl }
}

/// Torque coefficients of the governor feedback at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorqueResponse {
    pub omega: f64,
    #[serde(serialize_with = "serialize_complex")]
    pub k_yl: Complex64,
    #[serde(serialize_with = "serialize_complex")]
    pub k_mu: Complex64,
    /// `ΔT/Δf = K_μ − K_yL`.
    #[serde(serialize_with = "serialize_complex")]
    pub k_total: Complex64,
}

impl TorqueResponse {
    /// Integral-loop damping, `Im(K_yL)/ω`.
    pub fn path1(&self) -> f64 {
        self.k_yl.im / self.omega
    }

    /// Governor-path damping, `−Im(K_μ)/ω`.
    pub fn path2(&self) -> f64 {
        -self.k_mu.im / self.omega
    }

    /// `−Im(K)/ω`.
    pub fn damping(&self) -> f64 {
        -self.k_total.im / self.omega
    }

    /// `−Re(K)`.
    pub fn synchronizing(&self) -> f64 {
        -self.k_total.re
    }
}

pub fn torque_response(a: &CoeffA, b: &CoeffB, omega: f64) -> TorqueResponse {
    let h = governor_response(a, omega);
    let k_yl = b.b24 * h.h_yl;
    let k_mu = b.b23 * h.h_mu;
    TorqueResponse {
        omega,
        k_yl,
        k_mu,
        k_total: k_mu - k_yl,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    GovernorPositive,
    GovernorNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionReport {
    pub omega: f64,
    /// |governor-path damping| / integral-loop damping.
    pub ratio: f64,
    /// Net governor damping `D_m` from the exact torque response.
    pub governor_net_damping: f64,
    pub verdict: Verdict,
}

/// All damping and synchronizing terms at one evaluation frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampingDecomposition {
    /// `T_J·b22 = D + K_L + 2·T_J/T_W`.
    pub inherent: f64,
    pub path1: f64,
    pub path2: f64,
    pub d_m: f64,
    pub d_total: f64,
    pub k_m: f64,
    pub criterion: f64,
    pub omega_eval: f64,
}

impl DampingDecomposition {
    /// `D_total > 0`.
    pub fn is_stable(&self) -> bool {
        self.d_total > 0.0
    }

    /// Real part of the mode implied by the total damping.
    pub fn implied_real_part(&self, t_j: f64) -> f64 {
        -self.d_total / (2.0 * t_j)
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("omega must be > 0, got {omega}")))
    }
}

pub fn damping_decomposition(p: &SystemParams, omega: f64) -> Result<DampingDecomposition> {
    check_omega(omega)?;
    let model = SystemModel::new(*p)?;
    Ok(decompose(&model, omega))
}

pub(crate) fn decompose(model: &SystemModel, omega: f64) -> DampingDecomposition {
    let p = &model.params;
    let torque = torque_response(&model.a, &model.b, omega);
    let inherent = p.t_j * model.b.b22;
    let (path1, path2) = (torque.path1(), torque.path2());
    let d_m = path1 + path2;
    DampingDecomposition {
        inherent,
        path1,
        path2,
        d_m,
        d_total: inherent + d_m,
        k_m: torque.synchronizing(),
        criterion: criterion_ratio(p, omega),
        omega_eval: omega,
    }
}

/// Closed form of the integral-loop damping:
/// `2·K_I1·K_P2/T_y · |jω(1 + K_P1·b_P) + K_I1·b_P|⁻²`.
pub fn approx_path1(p: &SystemParams, omega: f64) -> f64 {
    let g = p.droop_divisor();
    let denom = Complex64::new(p.k_i1 * p.b_p, omega * g).norm_sqr();
    2.0 * p.k_i1 * p.k_p2 / p.t_y / denom
}

/// Closed form of the governor-path damping (negative).
pub fn approx_path2(p: &SystemParams, omega: f64) -> f64 {
    let g = p.droop_divisor();
    let servo = p.k_p2 / p.t_y;
    let lead = servo * (1.0 / p.t_w + servo) / Complex64::new(servo, omega).norm_sqr();
    let w2 = omega * omega;
    let proportional = 2.0 * (p.b_p * p.k_i1 * p.k_i1 + p.k_p1 * g * w2)
        / (g * g * w2 + (p.k_i1 * p.b_p).powi(2));
    -lead * (approx_path1(p, omega) + proportional)
}

/// The proportional criterion; greater than one means the governor as a
/// whole contributes negative damping.
pub fn criterion_ratio(p: &SystemParams, omega: f64) -> f64 {
    let g = p.droop_divisor();
    let servo = p.k_p2 / p.t_y;
    let first = (1.0 / p.t_w + servo) / Complex64::new(servo, omega).norm_sqr();
    let second = servo + p.k_i1 * (p.b_p + p.k_p1 / (p.k_i1 * p.k_i1) * omega * omega * g);
    first * second
}

pub fn proportional_criterion(p: &SystemParams, omega: f64) -> Result<CriterionReport> {
    let d = damping_decomposition(p, omega)?;
    let ratio = criterion_ratio(p, omega);
    Ok(CriterionReport {
        omega,
        ratio,
        governor_net_damping: d.d_m,
        verdict: if ratio > 1.0 {
            Verdict::GovernorNegative
        } else {
            Verdict::GovernorPositive
        },
    })
}

/// Mode from the closed-loop quadratic `T_J·λ² + D_total·λ + (K_m − b21) = 0`.
/// The real part is exactly `−D_total/(2·T_J)`.
pub fn mode_from_torque(p: &SystemParams, d: &DampingDecomposition) -> ModeEstimate {
    let b21 = coeffs_b(&coeffs_a(p), p.t_j).b21;
    let radicand = d.d_total * d.d_total - 4.0 * p.t_j * (d.k_m - b21);
    torque_mode(p.t_j, d.d_total, radicand)
}

/// Same expression with the radicand as printed, `D_total² − 4·T_J·(b21 + K_m)`.
/// Kept for comparison; it disagrees with the full eigenanalysis for the
/// typical parameters.
pub fn mode_from_torque_printed(p: &SystemParams, d: &DampingDecomposition) -> ModeEstimate {
    let b21 = coeffs_b(&coeffs_a(p), p.t_j).b21;
    let radicand = d.d_total * d.d_total - 4.0 * p.t_j * (b21 + d.k_m);
    torque_mode(p.t_j, d.d_total, radicand)
}

fn torque_mode(t_j: f64, d_total: f64, radicand: f64) -> ModeEstimate {
    let lambda = Complex64::new(-d_total / (2.0 * t_j), radicand.abs().sqrt() / (2.0 * t_j));
    let mut mode = ModeEstimate::new(lambda, ModeSource::TorqueFormula);
    // keep the real part bit-exact
    mode.lambda.re = -d_total / (2.0 * t_j);
    mode
}

/// Evaluation frequency for the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaEstimate {
    pub omega: f64,
    pub eigen_omega: f64,
    pub refined: bool,
    pub iterations: usize,
    /// False when refinement was requested but did not converge; `omega`
    /// then falls back to `eigen_omega`.
    pub converged: bool,
}

/// Dominant oscillatory eigenvalue of the original matrix.
pub fn eigen_mode(p: &SystemParams) -> Result<ModeEstimate> {
    let model = SystemModel::new(*p)?;
    let eigs = eigen::eigenvalues(&model.original().entries)?;
    eigen::dominant_oscillatory_mode(&eigs)
}

/// Imaginary part of [`eigen_mode`].
pub fn eigen_omega(p: &SystemParams) -> Result<f64> {
    Ok(eigen_mode(p)?.omega())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub omega: f64,
    pub iterations: usize,
    pub converged: bool,
}

const FIXED_POINT_TOL: f64 = 1e-6;
const FIXED_POINT_MAX: usize = 50;

/// Iterates `ω ← Im(mode_from_torque(p, decomposition(p, ω)))` from `omega0`.
pub fn fixed_point_omega(p: &SystemParams, omega0: f64) -> Result<FixedPoint> {
    check_omega(omega0)?;
    let model = SystemModel::new(*p)?;
    let mut omega = omega0;
    for iteration in 1..=FIXED_POINT_MAX {
        let d = decompose(&model, omega);
        let next = mode_from_torque(&model.params, &d).omega();
        if !(next.is_finite() && next > 0.0) {
            return Ok(FixedPoint { omega, iterations: iteration, converged: false });
        }
        let delta = (next - omega).abs();
        omega = next;
        if delta < FIXED_POINT_TOL {
            return Ok(FixedPoint { omega, iterations: iteration, converged: true });
        }
    }
    Ok(FixedPoint { omega, iterations: FIXED_POINT_MAX, converged: false })
}

/// Eigenanalysis frequency, optionally refined by the torque fixed point.
pub fn self_consistent_omega(p: &SystemParams, refine: bool) -> Result<OmegaEstimate> {
    let eigen_omega = eigen_omega(p)?;
    if !refine {
        return Ok(OmegaEstimate {
            omega: eigen_omega,
            eigen_omega,
            refined: false,
            iterations: 0,
            converged: true,
        });
    }
    let fp = fixed_point_omega(p, eigen_omega)?;
    Ok(OmegaEstimate {
        omega: if fp.converged { fp.omega } else { eigen_omega },
        eigen_omega,
        refined: true,
        iterations: fp.iterations,
        converged: fp.converged,
    })
}
