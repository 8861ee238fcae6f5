//! State-space models of the HSMSL system.
//!
//! The original model uses states (Δf, ΔT_md, Δμ, Δy_L), where ΔT_md is the
//! output of the `3/(1 + 0.5·T_W·s)` part of the turbine transfer function
//! `(1 − T_W s)/(1 + 0.5·T_W s) = 3/(1 + 0.5·T_W s) − 2`. Replacing ΔT_md with
//! the multi-information variable
//!
//! ```text
//! Δx = −T_J·a11·Δf + T_J·a12·ΔT_md − T_J·a13·Δμ   (= T_J·Δḟ)
//! ```
//!
//! gives the jerk-basis model (Δf, Δx, Δμ, Δy_L) in which the turbine-generator
//! part reduces to a second-order equation in Δf.
//!
//! The printed coefficient list labels two different terms `a23`; here
//! `a33 = K_P2/T_y` (the Δμ self-term) and `a23 = 6/T_W` (turbine split).

use std::fmt;

use serde::Serialize;

use crate::linalg::{self, Mat4};
use crate::params::SystemParams;

/// Coefficients of the original state matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffA {
    pub a11: f64,
    pub a12: f64,
    pub a13: f64,
    pub a22: f64,
    pub a23: f64,
    pub a31: f64,
    pub a33: f64,
    pub a34: f64,
    pub a41: f64,
    pub a44: f64,
}

/// Coefficients of the Δx row of the jerk-basis matrix. Only built from a
/// [`CoeffA`] by [`coeffs_b`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffB {
    pub b21: f64,
    pub b22: f64,
    pub b23: f64,
    pub b24: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// (Δf, ΔT_md, Δμ, Δy_L)
    Original,
    /// (Δf, Δx, Δμ, Δy_L)
    Jerk,
}

impl Basis {
    pub fn state_names(self) -> [&'static str; 4] {
        match self {
            Basis::Original => ["df", "dTmd", "dmu", "dyL"],
            Basis::Jerk => ["df", "dx", "dmu", "dyL"],
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Original => "original",
            Basis::Jerk => "jerk",
        })
    }
}

impl std::str::FromStr for Basis {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "original" => Ok(Basis::Original),
            "jerk" => Ok(Basis::Jerk),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown basis `{other}` (expected original or jerk)"
            ))),
        }
    }
}

/// A 4×4 state matrix tagged with the basis its states live in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateMatrix {
    pub entries: Mat4,
    pub basis: Basis,
}

impl StateMatrix {
    /// Positions (0-based) that are structurally zero in this basis.
    pub fn zero_pattern(basis: Basis) -> &'static [(usize, usize)] {
        match basis {
            Basis::Original => &[(1, 0), (1, 3), (2, 1), (3, 1), (3, 2)],
            Basis::Jerk => &[(0, 0), (0, 2), (0, 3), (2, 1), (3, 1), (3, 2)],
        }
    }

    pub fn respects_zero_pattern(&self) -> bool {
        Self::zero_pattern(self.basis)
            .iter()
            .all(|&(i, j)| self.entries[i][j] == 0.0)
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.entries)
    }
}

pub fn coeffs_a(p: &SystemParams) -> CoeffA {
    let g = p.droop_divisor();
    CoeffA {
        a11: (p.d + p.k_l) / p.t_j,
        a12: 1.0 / p.t_j,
        a13: 2.0 / p.t_j,
        a22: 2.0 / p.t_w,
        a23: 6.0 / p.t_w,
        a31: p.k_p2 * p.k_p1 / (p.t_y * g),
        a33: p.k_p2 / p.t_y,
        a34: p.k_p2 / (p.t_y * g),
        a41: p.k_i1 * (-1.0 + p.b_p * p.k_p1 / g),
        a44: p.k_i1 * p.b_p / g,
    }
}

pub fn coeffs_b(a: &CoeffA, t_j: f64) -> CoeffB {
    CoeffB {
        b21: t_j * (a.a13 * a.a31 - a.a22 * a.a11),
        b22: a.a11 + a.a22,
        b23: t_j * (a.a12 * a.a23 + a.a13 * a.a33 - a.a22 * a.a13),
        b24: t_j * a.a13 * a.a34,
    }
}

pub fn matrix_a(a: &CoeffA) -> StateMatrix {
    StateMatrix {
        entries: [
            [-a.a11, a.a12, -a.a13, 0.0],
            [0.0, -a.a22, a.a23, 0.0],
            [-a.a31, 0.0, -a.a33, a.a34],
            [a.a41, 0.0, 0.0, -a.a44],
        ],
        basis: Basis::Original,
    }
}

/// Maps original-basis states to jerk-basis states.
pub fn transform_matrix(a: &CoeffA, t_j: f64) -> Mat4 {
    [
        [1.0, 0.0, 0.0, 0.0],
        [-t_j * a.a11, t_j * a.a12, -t_j * a.a13, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

/// Closed-form inverse of [`transform_matrix`]: only row 2 is non-trivial.
pub fn inverse_transform(a: &CoeffA, t_j: f64) -> Mat4 {
    let pivot = t_j * a.a12;
    [
        [1.0, 0.0, 0.0, 0.0],
        [t_j * a.a11 / pivot, 1.0 / pivot, t_j * a.a13 / pivot, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn matrix_b(a: &CoeffA, b: &CoeffB) -> StateMatrix {
    StateMatrix {
        entries: [
            [0.0, a.a12, 0.0, 0.0],
            [b.b21, -b.b22, b.b23, -b.b24],
            [-a.a31, 0.0, -a.a33, a.a34],
            [a.a41, 0.0, 0.0, -a.a44],
        ],
        basis: Basis::Jerk,
    }
}

/// Everything derived from one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemModel {
    pub params: SystemParams,
    pub a: CoeffA,
    pub b: CoeffB,
}

impl SystemModel {
    pub fn new(params: SystemParams) -> crate::Result<Self> {
        let params = params.validate()?;
        let a = coeffs_a(&params);
        let b = coeffs_b(&a, params.t_j);
        Ok(Self { params, a, b })
    }

    pub fn original(&self) -> StateMatrix {
        matrix_a(&self.a)
    }

    pub fn jerk(&self) -> StateMatrix {
        matrix_b(&self.a, &self.b)
    }

    pub fn matrix(&self, basis: Basis) -> StateMatrix {
        match basis {
            Basis::Original => self.original(),
            Basis::Jerk => self.jerk(),
        }
    }

    pub fn transform(&self) -> Mat4 {
        transform_matrix(&self.a, self.params.t_j)
    }

    pub fn inverse_transform(&self) -> Mat4 {
        inverse_transform(&self.a, self.params.t_j)
    }

    /// `max|T·A·T⁻¹ − B|`.
    pub fn similarity_residual(&self) -> f64 {
        let t = self.transform();
        let tat = linalg::mul(
            &linalg::mul(&t, &self.original().entries),
            &self.inverse_transform(),
        );
        linalg::max_abs_diff(&tat, &self.jerk().entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Param;
    use proptest::prelude::*;

    // Hand evaluation with the typical values: 1 + KP1·bP = 1.068,
    // KP2/Ty = 16.8, D + KL = 1.03.
    const G: f64 = 1.068;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn typical_a_coefficients() {
        let a = coeffs_a(&SystemParams::typical());
        assert!(close(a.a11, 1.03 / 6.4, 1e-15));
        assert!(close(a.a11, 0.160938, 1e-6));
        assert!(close(a.a12, 0.15625, 1e-15));
        assert!(close(a.a22, 4.0 / 3.0, 1e-15));
        assert!(close(a.a33, 16.8, 1e-14));
        assert!(close(a.a31, 3.36 * 1.7 / (0.2 * G), 1e-14));
        assert!(close(a.a31, 26.7416, 1e-5));
        assert!(close(a.a34, 15.7303, 1e-5));
        assert!(close(a.a41, -1.2 / G, 1e-14));
        assert!(close(a.a41, -1.12360, 1e-5));
        assert!(close(a.a44, 0.048 / G, 1e-14));
        assert!(close(a.a44, 0.0449438, 1e-6));
    }

    #[test]
    fn no_load_damping_gives_zero_a11() {
        for t_j in [0.5, 6.4, 20.0] {
            let p = SystemParams { d: 0.0, k_l: 0.0, t_j, ..SystemParams::typical() };
            assert_eq!(coeffs_a(&p).a11, 0.0);
        }
    }

    #[test]
    fn typical_b_coefficients() {
        let p = SystemParams::typical();
        let b = coeffs_b(&coeffs_a(&p), p.t_j);
        assert!(close(p.t_j * b.b22, 9.56, 1e-3));
        // b23 = 2/TW + 2·KP2/Ty, b24 = 2·a34
        assert!(close(b.b23, 2.0 / 1.5 + 33.6, 1e-14));
        assert!(close(b.b23, 34.933, 1e-5));
        assert!(close(b.b24, 31.461, 1e-4));
    }

    #[test]
    fn b21_vanishes_without_coupling() {
        let mut a = coeffs_a(&SystemParams::typical());
        a.a31 = 0.0;
        a.a11 = 0.0;
        assert_eq!(coeffs_b(&a, 6.4).b21, 0.0);
    }

    #[test]
    fn original_matrix_entries() {
        let a = coeffs_a(&SystemParams::typical());
        let m = matrix_a(&a);
        assert!(close(m.entries[0][0], -0.160938, 1e-6));
        assert!(close(m.entries[2][2], -16.8, 1e-14));
        assert!(m.respects_zero_pattern());
        assert_eq!(m.trace(), -(a.a11 + a.a22 + a.a33 + a.a44));
    }

    #[test]
    fn zero_coefficients_give_zero_matrix() {
        let a = CoeffA {
            a11: 0.0, a12: 0.0, a13: 0.0, a22: 0.0, a23: 0.0,
            a31: 0.0, a33: 0.0, a34: 0.0, a41: 0.0, a44: 0.0,
        };
        let m = matrix_a(&a);
        assert!(m.entries.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn transform_row_two() {
        let p = SystemParams::typical();
        let a = coeffs_a(&p);
        let t = transform_matrix(&a, p.t_j);
        assert!(close(t[1][0], -1.03, 1e-14));
        assert!(close(t[1][1], 1.0, 1e-15));
        assert!(close(t[1][2], -2.0, 1e-15));
        assert_eq!(t[1][3], 0.0);
        let inv = linalg::inverse(&t).unwrap();
        assert!(linalg::max_abs_diff(&linalg::mul(&inv, &t), &linalg::IDENTITY) < 1e-12);
        assert!(linalg::max_abs_diff(&inv, &inverse_transform(&a, p.t_j)) < 1e-12);
    }

    #[test]
    fn jerk_matrix_entries() {
        let model = SystemModel::new(SystemParams::typical()).unwrap();
        let b = model.jerk();
        assert!(close(b.entries[0][1], 0.15625, 1e-15));
        assert!(close(b.entries[1][1], -(1.03 / 6.4 + 4.0 / 3.0), 1e-15));
        assert!(close(b.entries[1][1], -1.494271, 1e-6));
        assert!(b.respects_zero_pattern());
        assert!(model.similarity_residual() <= 1e-10);
    }

    #[test]
    fn invalid_params_rejected_by_model() {
        let p = SystemParams::typical().with(Param::TW, -1.0);
        assert!(SystemModel::new(p).is_err());
    }

    fn valid_params() -> impl Strategy<Value = SystemParams> {
        (
            (0.5f64..20.0, 0.0f64..5.0, 0.0f64..2.0),
            (0.2f64..10.0, 0.05f64..20.0, 0.01f64..2.0),
            (0.0f64..10.0, 0.01f64..10.0, 0.0f64..0.5),
        )
            .prop_map(|((t_j, d, k_l), (t_w, k_p2, t_y), (k_p1, k_i1, b_p))| SystemParams {
                t_j, d, k_l, t_w, k_p2, t_y, k_p1, k_i1, b_p,
            })
    }

    proptest! {
        #[test]
        fn structural_identities(p in valid_params()) {
            let a = coeffs_a(&p);
            let b = coeffs_b(&a, p.t_j);
            let rel = |x: f64, y: f64| (x - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(x.abs());
            prop_assert!(rel(a.a13, 2.0 * a.a12));
            prop_assert!(rel(a.a23, 3.0 * a.a22));
            prop_assert!(rel(a.a31, p.k_p1 * a.a34));
            prop_assert_eq!(b.b22, a.a11 + a.a22);
            prop_assert!(rel(b.b24, 2.0 * a.a34));
        }

        #[test]
        fn similarity_and_trace(p in valid_params()) {
            let model = SystemModel::new(p).unwrap();
            let scale = linalg::max_abs(&model.jerk().entries).max(1.0);
            prop_assert!(model.similarity_residual() <= 1e-10 * scale);
            let (ta, tb) = (model.original().trace(), model.jerk().trace());
            prop_assert!((ta - tb).abs() <= 1e-12 * ta.abs().max(1.0));
            prop_assert!(model.original().respects_zero_pattern());
            prop_assert!(model.jerk().respects_zero_pattern());
        }
    }
}
