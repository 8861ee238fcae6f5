//! Combined eigen + damping torque analysis of one parameter set.

use serde::Serialize;

use crate::eigen::{self, ComplexParts, ModeEstimate};
use crate::error::Result;
use crate::gdta::{self, CriterionReport, DampingDecomposition, OmegaEstimate};
use crate::model::SystemModel;
use crate::params::SystemParams;

/// Relative gap in oscillation frequency above which a torque-formula mode
/// is flagged as disagreeing with the eigenanalysis.
pub const FREQUENCY_AGREEMENT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stability {
    pub verdict: StabilityVerdict,
    /// `D_total > 0`.
    pub damping_positive: bool,
    /// `re(λ) < 0` for the dominant mode.
    pub eigen_stable: bool,
    /// The two stability tests disagree.
    pub diagnostic_disagreement: bool,
}

impl Stability {
    /// Stable only when both tests say so; a disagreement is flagged, not reconciled.
    pub fn classify(damping_positive: bool, eigen_stable: bool) -> Self {
        Self {
            verdict: if damping_positive && eigen_stable {
                StabilityVerdict::Stable
            } else {
                StabilityVerdict::Unstable
            },
            damping_positive,
            eigen_stable,
            diagnostic_disagreement: damping_positive != eigen_stable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub params: SystemParams,
    pub eigenvalues: Vec<ComplexParts>,
    pub dominant_mode: ModeEstimate,
    pub omega: OmegaEstimate,
    pub decomposition: DampingDecomposition,
    pub criterion: CriterionReport,
    /// Mode from the closed-loop quadratic of the jerk-space equation.
    pub torque_mode: ModeEstimate,
    /// Mode from the radicand with `b21 + K_m`, reported for comparison.
    pub torque_mode_printed: ModeEstimate,
    pub printed_form_disagrees: bool,
    /// `|re(λ_eigen) − (−D_total/(2·T_J))|`.
    pub real_part_discrepancy: f64,
    pub stability: Stability,
}

impl AnalysisReport {
    pub fn compute(p: &SystemParams, refine_omega: bool) -> Result<Self> {
        let model = SystemModel::new(*p)?;
        let eigs = eigen::eigenvalues(&model.original().entries)?;
        let dominant_mode = eigen::dominant_oscillatory_mode(&eigs)?;
        let omega = gdta::self_consistent_omega(p, refine_omega)?;
        let decomposition = gdta::damping_decomposition(p, omega.omega)?;
        let criterion = gdta::proportional_criterion(p, omega.omega)?;
        let torque_mode = gdta::mode_from_torque(p, &decomposition);
        let torque_mode_printed = gdta::mode_from_torque_printed(p, &decomposition);

        let eigen_im = dominant_mode.lambda.im;
        let printed_form_disagrees =
            (torque_mode_printed.lambda.im - eigen_im).abs() > FREQUENCY_AGREEMENT * eigen_im;

        let damping_positive = decomposition.is_stable();
        let eigen_stable = dominant_mode.lambda.re < 0.0;
        let stability = Stability::classify(damping_positive, eigen_stable);

        Ok(Self {
            params: model.params,
            eigenvalues: eigs.iter().map(|&z| z.into()).collect(),
            dominant_mode,
            omega,
            real_part_discrepancy: (dominant_mode.lambda.re
                - decomposition.implied_real_part(p.t_j))
            .abs(),
            decomposition,
            criterion,
            torque_mode,
            torque_mode_printed,
            printed_form_disagrees,
            stability,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Param;

    #[test]
    fn typical_report() {
        let r = AnalysisReport::compute(&SystemParams::typical(), false).unwrap();
        assert_eq!(r.eigenvalues.len(), 4);
        assert!((r.dominant_mode.lambda.re + 0.0031).abs() < 1e-3);
        assert!((r.dominant_mode.lambda.im - 0.4846).abs() < 1e-3);
        assert!((r.decomposition.d_total - 0.04).abs() <= 0.01);
        assert_eq!(r.stability.verdict, StabilityVerdict::Stable);
        assert!(!r.stability.diagnostic_disagreement);
        assert!(r.printed_form_disagrees);
        assert!(r.real_part_discrepancy < 1e-3);
    }

    #[test]
    fn unstable_case() {
        // weaker generator damping tips the mode into the right half plane
        let r = AnalysisReport::compute(&SystemParams::typical().with(Param::D, 0.5), false).unwrap();
        assert!(r.dominant_mode.lambda.re > 0.0);
        assert_eq!(r.stability.verdict, StabilityVerdict::Unstable);
        assert!(!r.stability.damping_positive);
        assert!(!r.stability.diagnostic_disagreement);
    }

    #[test]
    fn disagreement_is_reported_not_reconciled() {
        for (dp, es) in [(true, false), (false, true)] {
            let s = Stability::classify(dp, es);
            assert_eq!(s.verdict, StabilityVerdict::Unstable);
            assert!(s.diagnostic_disagreement);
        }
        assert_eq!(Stability::classify(true, true).verdict, StabilityVerdict::Stable);
        assert!(!Stability::classify(false, false).diagnostic_disagreement);
    }

    #[test]
    fn margins_nearly_coincide() {
        // the sign change in D_total and in re(λ) sit within 1e-3 in D
        let crossing = |f: &dyn Fn(f64) -> f64| {
            let (mut lo, mut hi) = (0.9, 1.0);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 { hi = mid } else { lo = mid }
            }
            0.5 * (lo + hi)
        };
        let rep = |d: f64| AnalysisReport::compute(&SystemParams::typical().with(Param::D, d), false).unwrap();
        let d_damp = crossing(&|d| rep(d).decomposition.d_total);
        let d_eig = crossing(&|d| -rep(d).dominant_mode.lambda.re);
        assert!((d_damp - d_eig).abs() < 1e-3, "{d_damp} vs {d_eig}");
    }

    #[test]
    fn serializes_documented_keys() {
        let r = AnalysisReport::compute(&SystemParams::typical(), false).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "params", "eigenvalues", "dominant_mode", "omega", "decomposition", "criterion",
            "torque_mode", "torque_mode_printed", "printed_form_disagrees",
            "real_part_discrepancy", "stability",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["params"]["KP2"], 3.36);
        assert_eq!(v["dominant_mode"]["source"], "full_eigen");
        assert_eq!(v["criterion"]["verdict"], "governor_negative");
        assert!(v["eigenvalues"][0]["re"].is_number());
        assert_eq!(v["stability"]["diagnostic_disagreement"], false);
    }
}
