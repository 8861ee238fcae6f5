//! Batch studies: random scenarios, one-parameter sweeps and sensitivity tables.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gdta::{self, approx_path1, criterion_ratio};
use crate::model::SystemModel;
use crate::params::{Param, SystemParams};

/// Identifier of the scenario generator, recorded in study outputs.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.3/seed_from_u64";

/// Rejected draws allowed per requested scenario.
const RESAMPLE_FACTOR: usize = 100;

/// Per-parameter multiplier ranges around a base parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioRanges {
    pub base: SystemParams,
    /// `(lower, upper)` multipliers in [`Param::ALL`] order.
    pub multipliers: [(f64, f64); 9],
    pub t_y_max: f64,
    pub t_w_min: f64,
}

impl ScenarioRanges {
    /// Every parameter in `[lower, upper]·base`, `T_y ≤ 0.5`, `T_W ≥ 1`.
    pub fn uniform(base: SystemParams, lower: f64, upper: f64) -> Self {
        Self {
            base,
            multipliers: [(lower, upper); 9],
            t_y_max: 0.5,
            t_w_min: 1.0,
        }
    }

    /// `[0.5, 1.5]` around the typical set.
    pub fn default_ranges() -> Self {
        Self::uniform(SystemParams::typical(), 0.5, 1.5)
    }

    /// All multipliers fixed at 1: every draw reproduces `base`.
    pub fn degenerate(base: SystemParams) -> Self {
        Self::uniform(base, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for (param, &(lo, hi)) in Param::ALL.iter().zip(&self.multipliers) {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
                return Err(Error::InvalidConfig(format!(
                    "multiplier range for {param} must satisfy 0 <= lower <= upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> SystemParams {
        let mut p = self.base;
        for (param, &(lo, hi)) in Param::ALL.into_iter().zip(&self.multipliers) {
            let m = if lo == hi { lo } else { rng.gen_range(lo..hi) };
            p.set(param, self.base.get(param) * m);
        }
        p.t_y = p.t_y.min(self.t_y_max);
        p.t_w = p.t_w.max(self.t_w_min);
        p
    }
}

/// `n` valid parameter sets with an oscillatory dominant mode, deterministic
/// in `seed`.
pub fn sample_scenarios(r: &ScenarioRanges, n: usize, seed: u64) -> Result<Vec<SystemParams>> {
    if n == 0 {
        return Err(Error::InvalidConfig("scenario count must be >= 1".into()));
    }
    r.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = Vec::with_capacity(n);
    let mut rejected = 0;
    let mut attempts = 0;
    while accepted.len() < n {
        attempts += 1;
        let p = r.draw(&mut rng);
        if p.validate().is_ok() && gdta::eigen_mode(&p).is_ok() {
            accepted.push(p);
        } else {
            rejected += 1;
            if rejected > RESAMPLE_FACTOR * n {
                return Err(Error::ResampleCapExceeded {
                    accepted: accepted.len(),
                    requested: n,
                    attempts,
                });
            }
        }
    }
    Ok(accepted)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioRecord {
    pub scenario_id: usize,
    pub params: SystemParams,
    pub omega: f64,
    pub d_m: f64,
    pub d_total: f64,
    pub ratio: f64,
    pub re_lambda: f64,
    pub im_lambda: f64,
    /// `|approx_path1 − path1| / path1`.
    pub path1_rel_error: f64,
}

impl ScenarioRecord {
    /// Negative governor damping iff the criterion exceeds one.
    pub fn criterion_agrees(&self) -> bool {
        (self.ratio > 1.0) == (self.d_m < 0.0)
    }

    /// `|re(λ) − (−D_total/(2·T_J))|`.
    pub fn real_part_gap(&self) -> f64 {
        (self.re_lambda + self.d_total / (2.0 * self.params.t_j)).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioFailure {
    pub scenario_id: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub n: usize,
    pub evaluated: usize,
    pub failed: usize,
    pub negative_count: usize,
    pub fraction_negative: f64,
    pub ratio_above_one: usize,
    pub criterion_agreement: f64,
    pub worst_path1_rel_error: f64,
    pub max_real_part_gap: f64,
    /// Scenarios where the governor damping came out non-negative.
    pub counterexamples: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub records: Vec<ScenarioRecord>,
    pub failures: Vec<ScenarioFailure>,
    pub summary: MonteCarloSummary,
}

impl MonteCarloResult {
    /// `scenario_id,TJ,D,KL,TW,KP2,Ty,KP1,KI1,bP,omega,Dm,ratio,re_lambda,im_lambda`
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "scenario_id,TJ,D,KL,TW,KP2,Ty,KP1,KI1,bP,omega,Dm,ratio,re_lambda,im_lambda")?;
        for r in &self.records {
            write!(w, "{}", r.scenario_id)?;
            for param in Param::ALL {
                write!(w, ",{:.16e}", r.params.get(param))?;
            }
            writeln!(
                w,
                ",{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.omega, r.d_m, r.ratio, r.re_lambda, r.im_lambda
            )?;
        }
        Ok(())
    }
}

fn evaluate_scenario(scenario_id: usize, p: &SystemParams) -> Result<ScenarioRecord> {
    let model = SystemModel::new(*p)?;
    let mode = gdta::eigen_mode(p)?;
    let omega = mode.omega();
    let d = gdta::decompose(&model, omega);
    let approx = approx_path1(p, omega);
    Ok(ScenarioRecord {
        scenario_id,
        params: *p,
        omega,
        d_m: d.d_m,
        d_total: d.d_total,
        ratio: criterion_ratio(p, omega),
        re_lambda: mode.lambda.re,
        im_lambda: mode.lambda.im,
        path1_rel_error: (approx - d.path1).abs() / d.path1.abs(),
    })
}

/// Evaluates governor damping and the criterion for every scenario. Runs in
/// parallel; output order follows input order.
pub fn montecarlo_dm(scenarios: &[SystemParams]) -> MonteCarloResult {
    let outcomes: Vec<Result<ScenarioRecord>> = scenarios
        .par_iter()
        .enumerate()
        .map(|(id, p)| evaluate_scenario(id, p))
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (scenario_id, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(ScenarioFailure { scenario_id, message: e.to_string() }),
        }
    }

    let evaluated = records.len();
    let negative_count = records.iter().filter(|r| r.d_m < 0.0).count();
    let agreeing = records.iter().filter(|r| r.criterion_agrees()).count();
    let fraction = |k: usize| if evaluated == 0 { 0.0 } else { k as f64 / evaluated as f64 };
    let summary = MonteCarloSummary {
        n: scenarios.len(),
        evaluated,
        failed: failures.len(),
        negative_count,
        fraction_negative: fraction(negative_count),
        ratio_above_one: records.iter().filter(|r| r.ratio > 1.0).count(),
        criterion_agreement: fraction(agreeing),
        worst_path1_rel_error: records.iter().map(|r| r.path1_rel_error).fold(0.0, f64::max),
        max_real_part_gap: records.iter().map(|r| r.real_part_gap()).fold(0.0, f64::max),
        counterexamples: records.iter().filter(|r| r.d_m >= 0.0).map(|r| r.scenario_id).collect(),
    };
    MonteCarloResult { records, failures, summary }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: Param,
    pub grid: Vec<f64>,
    pub base: SystemParams,
}

impl SweepSpec {
    /// `steps` evenly spaced values from `from` to `to` inclusive.
    pub fn linspace(param: Param, from: f64, to: f64, steps: usize, base: SystemParams) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidConfig("steps must be >= 1".into()));
        }
        let grid = if steps == 1 {
            vec![from]
        } else {
            (0..steps)
                .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
                .collect()
        };
        let spec = Self { param, grid, base };
        spec.validate()?;
        Ok(spec)
    }

    /// Declared default grid (50 points) for the governor parameters.
    pub fn default_for(param: Param, base: SystemParams) -> Result<Self> {
        let (from, to) = match param {
            Param::KI1 => (0.2, 3.0),
            Param::BP => (0.01, 0.10),
            Param::KP1 => (0.3, 5.0),
            Param::KP2 => (1.0, 6.0),
            other => {
                let v = base.get(other);
                (0.5 * v, 1.5 * v)
            }
        };
        Self::linspace(param, from, to, 50, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("sweep grid is empty".into()));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("sweep grid must be sorted ascending".into()));
        }
        for &v in &self.grid {
            self.base.with(self.param, v).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    /// False when the dominant mode is not oscillatory (values are NaN).
    pub oscillatory: bool,
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub d_total: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    NonMonotone,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummary {
    /// Behaviour of `re(λ)` along the grid.
    pub trend: Trend,
    /// Sign changes of the finite differences of `re(λ)`.
    pub sign_changes: usize,
    pub min_re_lambda: f64,
    pub argmin_value: f64,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub param: Param,
    pub points: Vec<SweepPoint>,
    /// `None` with fewer than two oscillatory points.
    pub summary: Option<SweepSummary>,
}

impl SweepResult {
    /// `param,value,re_lambda,im_lambda,D_total,ratio`
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "param,value,re_lambda,im_lambda,D_total,ratio")?;
        for pt in &self.points {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.param, pt.value, pt.re_lambda, pt.im_lambda, pt.d_total, pt.ratio
            )?;
        }
        Ok(())
    }
}

fn sweep_point(p: &SystemParams, value: f64) -> Result<SweepPoint> {
    let model = SystemModel::new(*p)?;
    match gdta::eigen_mode(p) {
        Ok(mode) => {
            let omega = mode.omega();
            let d = gdta::decompose(&model, omega);
            Ok(SweepPoint {
                value,
                oscillatory: true,
                re_lambda: mode.lambda.re,
                im_lambda: omega,
                d_total: d.d_total,
                ratio: criterion_ratio(p, omega),
            })
        }
        Err(Error::NoOscillatoryMode) => Ok(SweepPoint {
            value,
            oscillatory: false,
            re_lambda: f64::NAN,
            im_lambda: f64::NAN,
            d_total: f64::NAN,
            ratio: f64::NAN,
        }),
        Err(e) => Err(e),
    }
}

pub fn sweep(s: &SweepSpec) -> Result<SweepResult> {
    s.validate()?;
    let points = s
        .grid
        .par_iter()
        .map(|&v| sweep_point(&s.base.with(s.param, v), v))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&points);
    Ok(SweepResult { param: s.param, points, summary })
}

fn summarize(points: &[SweepPoint]) -> Option<SweepSummary> {
    let valid: Vec<&SweepPoint> = points.iter().filter(|p| p.oscillatory).collect();
    if valid.len() < 2 {
        return None;
    }
    let diffs: Vec<f64> = valid.windows(2).map(|w| w[1].re_lambda - w[0].re_lambda).collect();
    let signs: Vec<f64> = diffs.iter().filter(|d| **d != 0.0).map(|d| d.signum()).collect();
    let sign_changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let trend = match (signs.first(), sign_changes) {
        (None, _) => Trend::Constant,
        (Some(_), c) if c > 0 => Trend::NonMonotone,
        (Some(&s), _) if s > 0.0 => Trend::Increasing,
        _ => Trend::Decreasing,
    };
    let best = valid
        .iter()
        .min_by(|a, b| a.re_lambda.total_cmp(&b.re_lambda))
        .expect("non-empty");
    Some(SweepSummary {
        trend,
        sign_changes,
        min_re_lambda: best.re_lambda,
        argmin_value: best.value,
        skipped: points.len() - valid.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increase,
    Decrease,
}

/// Qualitative stability-enhancing adjustments from the damping analysis.
pub fn expected_direction(param: Param) -> Option<Direction> {
    match param {
        Param::KI1 | Param::TW => Some(Direction::Decrease),
        Param::BP | Param::KP2 | Param::D | Param::TJ | Param::KL => Some(Direction::Increase),
        Param::KP1 | Param::Ty => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sensitivity {
    pub param: Param,
    pub value: f64,
    /// `∂re(λ)/∂θ`.
    pub derivative: f64,
    /// Direction that moves `re(λ)` left.
    pub recommended: Option<Direction>,
    pub expected: Option<Direction>,
    pub agrees: Option<bool>,
}

fn dominant_re(p: &SystemParams) -> Result<f64> {
    Ok(gdta::eigen_mode(p)?.lambda.re)
}

/// Central ±1% finite differences of `re(λ)` for all nine parameters. Zero
/// valued parameters use a forward step of 1e−4.
pub fn adjustment_report(p: &SystemParams) -> Result<Vec<Sensitivity>> {
    let p = p.validate()?;
    dominant_re(&p)?;
    Param::ALL
        .into_iter()
        .map(|param| {
            let value = p.get(param);
            let derivative = if value == 0.0 {
                let h = 1e-4;
                (dominant_re(&p.with(param, h))? - dominant_re(&p)?) / h
            } else {
                let h = 0.01 * value;
                (dominant_re(&p.with(param, value + h))? - dominant_re(&p.with(param, value - h))?)
                    / (2.0 * h)
            };
            let recommended = if derivative < 0.0 {
                Some(Direction::Increase)
            } else if derivative > 0.0 {
                Some(Direction::Decrease)
            } else {
                None
            };
            let expected = expected_direction(param);
            let agrees = expected.map(|e| recommended == Some(e));
            Ok(Sensitivity { param, value, derivative, recommended, expected, agrees })
        })
        .collect()
}
