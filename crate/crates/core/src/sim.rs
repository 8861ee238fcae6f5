//! Fixed-step time-domain simulation of the linear models.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Vec4};
use crate::model::{Basis, StateMatrix, SystemModel};
use crate::params::SystemParams;

/// States beyond this magnitude count as a blow-up.
const DIVERGENCE_LIMIT: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub x0: Vec4,
    pub basis: Basis,
}

impl SimConfig {
    pub const DEFAULT_DISTURBANCE: Vec4 = [0.01, 0.0, 0.0, 0.0];

    pub fn new(dt: f64, t_end: f64, x0: Vec4, basis: Basis) -> Result<Self> {
        let cfg = Self { dt, t_end, x0, basis };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 1% frequency disturbance, `dt = 0.01`, 600 s.
    pub fn with_defaults(basis: Basis) -> Self {
        Self {
            dt: 0.01,
            t_end: 600.0,
            x0: Self::DEFAULT_DISTURBANCE,
            basis,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(Error::InvalidConfig(format!("dt must be in (0, 0.1], got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 10.0 * self.dt) {
            return Err(Error::InvalidConfig(format!(
                "t_end must be >= 10·dt = {}, got {}",
                10.0 * self.dt,
                self.t_end
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("initial state must be finite".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub basis: Basis,
    pub times: Vec<f64>,
    pub states: Vec<Vec4>,
    /// Frequency acceleration Δα = Δḟ from the Δf state equation.
    pub alpha: Vec<f64>,
    /// Frequency jerk Δζ = Δα̇ from the state equations.
    pub zeta: Vec<f64>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn frequency(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|x| x[0])
    }

    pub fn final_state(&self) -> Vec4 {
        *self.states.last().expect("trace has at least one sample")
    }

    /// `t,df,dx_or_dTmd,dmu,dyL,alpha,zeta`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,df,dx_or_dTmd,dmu,dyL,alpha,zeta")?;
        for k in 0..self.len() {
            let x = &self.states[k];
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[k], x[0], x[1], x[2], x[3], self.alpha[k], self.zeta[k]
            )?;
        }
        Ok(())
    }
}

fn rk4_step(f: impl Fn(&Vec4) -> Vec4, x: &Vec4, dt: f64) -> Vec4 {
    let offset = |base: &Vec4, k: &Vec4, h: f64| -> Vec4 { std::array::from_fn(|i| base[i] + h * k[i]) };
    let k1 = f(x);
    let k2 = f(&offset(x, &k1, dt / 2.0));
    let k3 = f(&offset(x, &k2, dt / 2.0));
    let k4 = f(&offset(x, &k3, dt));
    std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn check_state(x: &Vec4, time: f64) -> Result<()> {
    if x.iter().all(|v| v.is_finite() && v.abs() <= DIVERGENCE_LIMIT) {
        Ok(())
    } else {
        Err(Error::Divergence { time })
    }
}

/// Integrates `ẋ = M·x` with classical RK4.
pub fn simulate(m: &StateMatrix, cfg: &SimConfig) -> Result<SimTrace> {
    cfg.validate()?;
    if m.basis != cfg.basis {
        return Err(Error::WrongBasis { expected: cfg.basis, found: m.basis });
    }
    let n = cfg.steps();
    let mut trace = SimTrace {
        basis: m.basis,
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        alpha: Vec::with_capacity(n + 1),
        zeta: Vec::with_capacity(n + 1),
    };
    let f = |x: &Vec4| linalg::mul_vec(&m.entries, x);
    let mut x = cfg.x0;
    for k in 0..=n {
        let t = k as f64 * cfg.dt;
        if k > 0 {
            x = rk4_step(f, &x, cfg.dt);
            check_state(&x, t)?;
        }
        let dx = f(&x);
        trace.times.push(t);
        trace.states.push(x);
        trace.alpha.push(dx[0]);
        trace.zeta.push(f(&dx)[0]);
    }
    Ok(trace)
}

/// Deviations between the matrix-form and the second-order jerk-form runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equivalence {
    /// `max|Δf_matrix − Δf_jerk_form|`.
    pub max_df_deviation: f64,
    /// `max|Δx − T_J·Δα|`.
    pub max_x_alpha_deviation: f64,
    /// `max|Δẋ − T_J·Δζ|`.
    pub max_xdot_zeta_deviation: f64,
}

/// Simulates the jerk-basis matrix directly and, separately, the
/// second-order equation `T_J·Δζ = b21·Δf − T_J·b22·Δα + b23·Δμ − b24·Δy_L`
/// closed through the governor rows. `cfg.x0` is mapped into the jerk basis
/// when given in the original one.
pub fn equivalence_check(p: &SystemParams, cfg: &SimConfig) -> Result<Equivalence> {
    let model = SystemModel::new(*p)?;
    let (a, b, t_j) = (model.a, model.b, model.params.t_j);
    let x0 = match cfg.basis {
        Basis::Jerk => cfg.x0,
        Basis::Original => linalg::mul_vec(&model.transform(), &cfg.x0),
    };
    let jerk_cfg = SimConfig { x0, basis: Basis::Jerk, ..*cfg };
    let matrix_run = simulate(&model.jerk(), &jerk_cfg)?;

    // (Δf, Δα, Δμ, Δy_L)
    let second_order = |y: &Vec4| -> Vec4 {
        let [f, alpha, mu, yl] = *y;
        let torque = b.b23 * mu - b.b24 * yl;
        [
            alpha,
            (b.b21 * f - t_j * b.b22 * alpha + torque) / t_j,
            -a.a31 * f - a.a33 * mu + a.a34 * yl,
            a.a41 * f - a.a44 * yl,
        ]
    };
    let mut y = [x0[0], x0[1] / t_j, x0[2], x0[3]];
    let jerk_b = model.jerk().entries;
    let mut out = Equivalence {
        max_df_deviation: 0.0,
        max_x_alpha_deviation: 0.0,
        max_xdot_zeta_deviation: 0.0,
    };
    for (k, x) in matrix_run.states.iter().enumerate() {
        if k > 0 {
            y = rk4_step(second_order, &y, cfg.dt);
            check_state(&y, matrix_run.times[k])?;
        }
        let zeta = second_order(&y)[1];
        let xdot = linalg::mul_vec(&jerk_b, x)[1];
        out.max_df_deviation = out.max_df_deviation.max((x[0] - y[0]).abs());
        out.max_x_alpha_deviation = out.max_x_alpha_deviation.max((x[1] - t_j * y[1]).abs());
        out.max_xdot_zeta_deviation = out.max_xdot_zeta_deviation.max((xdot - t_j * zeta).abs());
    }
    Ok(out)
}

/// Simulates the original model, maps every state through the basis
/// transform and compares with a jerk-basis run from the mapped initial
/// state. `cfg.x0` is in the original basis.
pub fn flow_similarity_deviation(p: &SystemParams, cfg: &SimConfig) -> Result<f64> {
    let model = SystemModel::new(*p)?;
    let t = model.transform();
    let original = simulate(&model.original(), &SimConfig { basis: Basis::Original, ..*cfg })?;
    let jerk_cfg = SimConfig { x0: linalg::mul_vec(&t, &cfg.x0), basis: Basis::Jerk, ..*cfg };
    let jerk = simulate(&model.jerk(), &jerk_cfg)?;
    Ok(original
        .states
        .iter()
        .zip(&jerk.states)
        .flat_map(|(xa, xb)| {
            let mapped = linalg::mul_vec(&t, xa);
            (0..4).map(move |i| (mapped[i] - xb[i]).abs())
        })
        .fold(0.0, f64::max))
}

/// (Δf, Δα) pairs of a jerk-basis trace.
pub fn phase_trace(trace: &SimTrace) -> Result<Vec<(f64, f64)>> {
    if trace.basis != Basis::Jerk {
        return Err(Error::WrongBasis { expected: Basis::Jerk, found: trace.basis });
    }
    Ok(trace.frequency().zip(trace.alpha.iter().copied()).collect())
}

/// A positive local maximum of Δf, refined by parabolic interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub time: f64,
    pub amplitude: f64,
}

pub fn positive_peaks(times: &[f64], values: &[f64]) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for k in 1..values.len().saturating_sub(1) {
        let (prev, here, next) = (values[k - 1], values[k], values[k + 1]);
        if here > 0.0 && here > prev && here >= next {
            let curvature = prev - 2.0 * here + next;
            let shift = if curvature < 0.0 { 0.5 * (prev - next) / curvature } else { 0.0 };
            let dt = times[k + 1] - times[k];
            peaks.push(Peak {
                time: times[k] + shift * dt,
                amplitude: here - 0.25 * (prev - next) * shift,
            });
        }
    }
    peaks
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DampingEstimate {
    /// Decay rate (1/s); negative for a decaying oscillation.
    pub sigma: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    pub peak_count: usize,
}

/// Log-decrement estimate from the positive peaks of Δf: `omega` from the
/// mean peak-to-peak period, `sigma` from the mean logarithmic decrement per
/// unit time.
pub fn estimate_damping(trace: &SimTrace) -> Result<DampingEstimate> {
    let df: Vec<f64> = trace.frequency().collect();
    let peaks = positive_peaks(&trace.times, &df);
    if peaks.len() < 3 {
        return Err(Error::InsufficientCycles { peaks: peaks.len() });
    }
    let (first, last) = (peaks[0], peaks[peaks.len() - 1]);
    let span = last.time - first.time;
    let cycles = (peaks.len() - 1) as f64;
    let sigma = (last.amplitude / first.amplitude).ln() / span;
    let omega = 2.0 * PI * cycles / span;
    if !(sigma.is_finite() && omega.is_finite()) {
        return Err(Error::NonFinite("damping estimate"));
    }
    Ok(DampingEstimate { sigma, omega, peak_count: peaks.len() })
}
