//! End-to-end acceptance checks against the reference operating point.
//! Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ulfo_core::eigen::{self, dominant_oscillatory_mode};
use ulfo_core::gdta::{self, Verdict};
use ulfo_core::linalg::{self, Mat4};
use ulfo_core::sim::{self, SimConfig};
use ulfo_core::study::{self, ScenarioRanges, SweepSpec, Trend};
use ulfo_core::{Basis, Param, SystemModel, SystemParams};

const RE_REF: f64 = -0.0031;
const IM_REF: f64 = 0.4846;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn within_rel(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn typical_model() -> SystemModel {
    SystemModel::new(SystemParams::typical()).expect("typical parameters are valid")
}

fn mode_reproduction() -> Outcome {
    let m = typical_model().original().entries;
    let mut best = Duration::MAX;
    let mut eigs = [Complex64::new(0.0, 0.0); 4];
    for _ in 0..200 {
        let start = Instant::now();
        eigs = eigen::eigenvalues(std::hint::black_box(&m)).expect("eigenvalues");
        best = best.min(start.elapsed());
    }
    let Some(mode) = eigs.iter().find(|z| z.im > 0.0 && within(z.re, RE_REF, 5e-4) && within(z.im, IM_REF, 5e-3)) else {
        return outcome(false, format!("no eigenvalue near {RE_REF} + j{IM_REF}: {eigs:?}"));
    };
    let fast = best < Duration::from_millis(1);
    outcome(fast, format!("λ = {:.5} ± j{:.5}, {:.1} µs", mode.re, mode.im, best.as_secs_f64() * 1e6))
}

fn frequency() -> Outcome {
    let eigs = eigen::eigenvalues(&typical_model().original().entries).expect("eigenvalues");
    let mode = dominant_oscillatory_mode(&eigs).expect("oscillatory");
    outcome(within(mode.frequency_hz, 0.077, 0.001), format!("f = {:.5} Hz", mode.frequency_hz))
}

fn inherent_damping() -> Outcome {
    let model = typical_model();
    let inherent = model.params.t_j * model.b.b22;
    outcome(within(inherent, 9.56, 0.01), format!("T_J·b22 = {inherent:.5}"))
}

fn path_values() -> Outcome {
    let p = SystemParams::typical();
    let k_yl = gdta::approx_path1(&p, IM_REF);
    let k_mu = -gdta::approx_path2(&p, IM_REF);
    outcome(
        within_rel(k_yl, 149.4, 0.01) && within_rel(k_mu, 158.92, 0.01),
        format!("Im(K_yL)/ω = {k_yl:.3}, Im(K_μ)/ω = {k_mu:.3}"),
    )
}

fn total_damping() -> Outcome {
    let p = SystemParams::typical();
    let omega = gdta::eigen_omega(&p).expect("oscillatory");
    let d = gdta::damping_decomposition(&p, omega).expect("decomposition");
    let implied = d.implied_real_part(p.t_j);
    outcome(
        within(d.d_total, 0.04, 0.01) && within(implied, RE_REF, 5e-4),
        format!("D_total = {:.5}, −D_total/(2T_J) = {implied:.5} at ω = {omega:.5}", d.d_total),
    )
}

fn criterion_ratio() -> Outcome {
    let p = SystemParams::typical();
    let omega = gdta::eigen_omega(&p).expect("oscillatory");
    let c = gdta::proportional_criterion(&p, omega).expect("criterion");
    outcome(
        within_rel(c.ratio, 1.064, 0.02) && c.verdict == Verdict::GovernorNegative,
        format!("ratio = {:.5}, verdict {:?}", c.ratio, c.verdict),
    )
}

fn monte_carlo() -> Outcome {
    let ranges = ScenarioRanges::default_ranges();
    let mut details = Vec::new();
    let mut pass = true;
    for seed in [1, 7, 42, 2024, 987_654_321] {
        let start = Instant::now();
        let scenarios = match study::sample_scenarios(&ranges, 500, seed) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        let result = study::montecarlo_dm(&scenarios);
        let elapsed = start.elapsed();
        let all_negative = result.records.iter().all(|r| r.d_m < 0.0);
        let all_above = result.records.iter().all(|r| r.ratio > 1.0);
        pass &= result.failures.is_empty()
            && result.records.len() == 500
            && all_negative
            && all_above
            && elapsed < Duration::from_secs(5);
        details.push(format!(
            "seed {seed}: {}/500 D_m<0, {}/500 ratio>1, {:.0} ms",
            result.summary.negative_count,
            result.summary.ratio_above_one,
            elapsed.as_secs_f64() * 1e3
        ));
    }
    outcome(pass, details.join("; "))
}

fn random_valid_params(rng: &mut ChaCha8Rng) -> SystemParams {
    loop {
        let mut p = SystemParams::typical();
        for param in Param::ALL {
            let m = 10f64.powf(rng.gen_range(-1.0..1.0));
            p.set(param, p.get(param) * m);
        }
        if let Ok(p) = p.validate() {
            return p;
        }
    }
}

fn similarity() -> Outcome {
    let mut worst = typical_model().similarity_residual();
    let typical = worst;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let model = SystemModel::new(random_valid_params(&mut rng)).expect("valid");
        worst = worst.max(model.similarity_residual());
    }
    outcome(worst <= 1e-10, format!("typical {typical:.2e}, worst over 1000 random sets {worst:.2e}"))
}

fn jerk_equivalence() -> Outcome {
    let cfg = SimConfig::new(0.01, 200.0, SimConfig::DEFAULT_DISTURBANCE, Basis::Original).expect("config");
    match sim::equivalence_check(&SystemParams::typical(), &cfg) {
        Ok(eq) => outcome(eq.max_df_deviation <= 1e-8, format!("max |ΔΔf| = {:.2e}", eq.max_df_deviation)),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn simulation_closure() -> Outcome {
    let cfg = SimConfig::with_defaults(Basis::Original);
    let trace = match sim::simulate(&typical_model().original(), &cfg) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    match sim::estimate_damping(&trace) {
        Ok(est) => outcome(
            within(est.sigma, RE_REF, 0.002) && within_rel(est.omega, IM_REF, 0.02),
            format!("σ = {:.5}, ω = {:.5} from {} peaks", est.sigma, est.omega, est.peak_count),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn sensitivity_directions() -> Outcome {
    let p = SystemParams::typical();
    let table = match study::adjustment_report(&p) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let wanted = [
        (Param::KI1, 1.0),
        (Param::BP, -1.0),
        (Param::KP2, -1.0),
        (Param::D, -1.0),
        (Param::TJ, -1.0),
        (Param::KL, -1.0),
        (Param::TW, 1.0),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (param, sign) in wanted {
        let d = table.iter().find(|s| s.param == param).expect("all parameters").derivative;
        pass &= d * sign > 0.0;
        details.push(format!("{param} {d:+.4}"));
    }
    let spec = SweepSpec::linspace(Param::KP1, 0.3, 5.0, 50, p).expect("grid");
    match study::sweep(&spec) {
        Ok(r) => {
            let summary = r.summary.expect("oscillatory along the sweep");
            pass &= summary.trend == Trend::NonMonotone && summary.sign_changes >= 1;
            details.push(format!(
                "KP1 sweep {:?} ({} sign change(s), min at {:.3})",
                summary.trend, summary.sign_changes, summary.argmin_value
            ));
        }
        Err(e) => {
            pass = false;
            details.push(e.to_string());
        }
    }
    outcome(pass, details.join(", "))
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Mat4 {
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    std::array::from_fn(|_| std::array::from_fn(|_| scale * rng.gen_range(-1.0..1.0)))
}

fn eigen_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst_res, mut worst_trace, mut worst_det) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let m = random_matrix(&mut rng);
        let eigs = match eigen::eigenvalues(&m) {
            Ok(e) => e,
            Err(e) => return outcome(false, e.to_string()),
        };
        let norm = linalg::frobenius_norm(&m);
        for &z in &eigs {
            // det(λI − M) by LU, scaled by the size of its terms
            let scale = (norm + z.norm()).powi(4);
            worst_res = worst_res.max(linalg::shifted_determinant(&m, z).norm() / scale);
        }
        let sum: Complex64 = eigs.iter().sum();
        let product: Complex64 = eigs.iter().product();
        worst_trace = worst_trace.max((sum - linalg::trace(&m)).norm() / norm);
        worst_det = worst_det.max((product - linalg::determinant(&m)).norm() / norm.powi(4));
    }
    outcome(
        worst_res <= 1e-6 && worst_trace <= 1e-7 && worst_det <= 1e-7,
        format!("residual {worst_res:.1e}, trace {worst_trace:.1e}, det {worst_det:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 12] = [
        ("mode reproduction", mode_reproduction),
        ("oscillation frequency", frequency),
        ("inherent damping", inherent_damping),
        ("closed-form path values", path_values),
        ("total damping and implied real part", total_damping),
        ("governor criterion", criterion_ratio),
        ("Monte-Carlo governor damping", monte_carlo),
        ("similarity transform", similarity),
        ("jerk-form equivalence", jerk_equivalence),
        ("simulation vs eigenvalue", simulation_closure),
        ("sensitivity directions", sensitivity_directions),
        ("eigensolver oracle", eigen_oracle),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
