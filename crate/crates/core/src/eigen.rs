//! Eigenvalues of 4×4 real matrices.
//!
//! The characteristic polynomial comes from the Faddeev–LeVerrier recurrence
//! and its roots from Aberth's simultaneous iteration. The residual
//! `det(λI − M)` is evaluated independently by complex LU
//! ([`crate::linalg::shifted_determinant`]) and serves as the oracle in tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};

pub type ComplexValue = Complex64;

/// Serializable `{re, im}` view of a complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexParts {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexParts {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

const MAX_ITERATIONS: usize = 200;

/// Imaginary parts at or below this are treated as real when picking modes.
pub const OSCILLATORY_THRESHOLD: f64 = 1e-9;

/// Coefficients of `det(sI − M)`, highest power first; element 0 is exactly 1.
pub fn char_poly(m: &Mat4) -> Result<[f64; 5]> {
    if !linalg::is_finite(m) {
        return Err(Error::NonFinite("matrix"));
    }
    let mut coeffs = [1.0, 0.0, 0.0, 0.0, 0.0];
    // M_k = A·M_{k−1} + c_{k−1}·I, c_k = −tr(A·M_k)/k
    let mut mk = linalg::ZERO;
    for k in 1..=4 {
        let mut next = linalg::mul(m, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += coeffs[k - 1];
        }
        mk = next;
        coeffs[k] = -linalg::trace(&linalg::mul(m, &mk)) / k as f64;
    }
    Ok(coeffs)
}

/// Horner evaluation of `p` and `p'` at `z` (coefficients highest first).
pub fn eval_poly(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Rounding-level bound on `|p(z)|`.
fn eval_noise(coeffs: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().fold(0.0, |acc, c| acc * r + c.abs()) * 8.0 * f64::EPSILON
}

/// Roots of a monic quartic with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSet {
    /// Sorted by descending real part, then descending imaginary part.
    pub roots: [Complex64; 4],
    pub iterations: usize,
    /// Largest relative condition number over the roots; infinite when a
    /// cluster was collapsed to a multiple root.
    pub condition: f64,
    /// A group of roots was recognized as one multiple root and replaced
    /// by its centroid. Accuracy is then limited to about 1e−4.
    pub clustered: bool,
}

/// All four roots of `s⁴ + c₃s³ + c₂s² + c₁s + c₀`, given as `[1, c₃, c₂, c₁, c₀]`.
pub fn poly_roots(coeffs: &[f64; 5]) -> Result<RootSet> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficients"));
    }
    if coeffs[0] != 1.0 {
        return Err(Error::InvalidConfig(format!(
            "polynomial must be monic, leading coefficient is {}",
            coeffs[0]
        )));
    }

    let (mut z, iterations) = aberth(coeffs)?;
    let clustered = collapse_clusters(coeffs, &mut z);
    pair_conjugates(&mut z);
    sort_roots(&mut z);

    let condition = if clustered {
        f64::INFINITY
    } else {
        z.iter()
            .map(|&r| root_condition(coeffs, r))
            .fold(0.0, f64::max)
    };

    // |p(r)| ≤ 1e−8·max|cₖ|, scaled by |r|⁴ for roots outside the unit disc
    let max_coeff = coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let residual_ok = z.iter().all(|&r| {
        let p = eval_poly(coeffs, r).0.norm();
        r.is_finite()
            && (p <= 1e-8 * max_coeff * r.norm().max(1.0).powi(4)
                || p <= 1e3 * eval_noise(coeffs, r))
    });
    if !residual_ok {
        return Err(Error::NoConvergence { iterations });
    }

    Ok(RootSet {
        roots: z,
        iterations,
        condition,
        clustered,
    })
}

fn aberth(coeffs: &[f64; 5]) -> Result<([Complex64; 4], usize)> {
    // Circle around the root centroid, radius from the Fujiwara-type bound
    // on |root − centroid|, angles offset to break conjugate symmetry.
    let center = -coeffs[1] / 4.0;
    let radius = (1..=4)
        .map(|k| coeffs[k].abs().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: [Complex64; 4] = std::array::from_fn(|k| {
        let theta = 2.0 * PI * k as f64 / 4.0 + 0.4;
        let r = radius * (1.0 + 0.05 * k as f64);
        Complex64::new(center, 0.0) + Complex64::from_polar(r, theta)
    });

    for iteration in 1..=MAX_ITERATIONS {
        let mut converged = true;
        for i in 0..4 {
            let (p, dp) = eval_poly(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..4)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                // p' vanished away from a root; nudge and keep iterating
                z[i] += Complex64::new(1e-8, 1e-8) * z[i].norm().max(1.0);
                converged = false;
                continue;
            }
            z[i] -= step;
            if step.norm() > 4.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                converged = false;
            }
        }
        if converged {
            return Ok((z, iteration));
        }
    }
    // Stalling at the rounding floor is normal for multiple roots; the
    // residual check in `poly_roots` decides.
    Ok((z, MAX_ITERATIONS))
}

/// Replaces a tight group of roots by its centroid when the centroid fits
/// the polynomial at least as well as the members do. Returns whether any
/// cluster was collapsed.
fn collapse_clusters(coeffs: &[f64; 5], z: &mut [Complex64; 4]) -> bool {
    let mut label = [0usize, 1, 2, 3];
    for i in 0..4 {
        for j in i + 1..4 {
            let scale = z[i].norm().max(z[j].norm()).max(1.0);
            if (z[i] - z[j]).norm() <= 1e-3 * scale {
                let (from, to) = (label[j], label[i]);
                label.iter_mut().filter(|l| **l == from).for_each(|l| *l = to);
            }
        }
    }
    let mut collapsed = false;
    for group in 0..4 {
        let members: Vec<usize> = (0..4).filter(|&i| label[i] == group).collect();
        if members.len() < 2 {
            continue;
        }
        let centroid = members.iter().map(|&i| z[i]).sum::<Complex64>() / members.len() as f64;
        let member_residual = members
            .iter()
            .map(|&i| eval_poly(coeffs, z[i]).0.norm().max(eval_noise(coeffs, z[i])))
            .fold(0.0, f64::max);
        if eval_poly(coeffs, centroid).0.norm() <= 10.0 * member_residual {
            members.iter().for_each(|&i| z[i] = centroid);
            collapsed = true;
        }
    }
    collapsed
}

/// Forces exact conjugate symmetry, as required for a real polynomial.
fn pair_conjugates(z: &mut [Complex64; 4]) {
    let mut done = [false; 4];
    for i in 0..4 {
        if done[i] || z[i].im.abs() <= 1e-12 * z[i].norm().max(1.0) {
            continue;
        }
        let target = z[i].conj();
        let partner = (0..4)
            .filter(|&j| j != i && !done[j] && z[j].im * z[i].im < 0.0)
            .min_by(|&a, &b| (z[a] - target).norm().total_cmp(&(z[b] - target).norm()));
        if let Some(j) = partner {
            if (z[j] - target).norm() <= 1e-6 * z[i].norm().max(1.0) {
                let upper = if z[i].im > 0.0 { z[i] } else { z[j] };
                let lower = if z[i].im > 0.0 { z[j] } else { z[i] };
                let avg = (upper + lower.conj()) / 2.0;
                z[i] = if z[i].im > 0.0 { avg } else { avg.conj() };
                z[j] = z[i].conj();
                done[i] = true;
                done[j] = true;
            }
        }
    }
    for i in 0..4 {
        if !done[i] && z[i].im.abs() <= 1e-6 * z[i].norm().max(1.0) {
            z[i].im = 0.0;
        }
    }
}

fn sort_roots(z: &mut [Complex64; 4]) {
    z.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// Relative condition of a simple root: `Σ|cₖ||r|ᵏ / (|r|·|p'(r)|)`.
fn root_condition(coeffs: &[f64; 5], r: Complex64) -> f64 {
    let (_, dp) = eval_poly(coeffs, r);
    let rn = r.norm();
    let mag = coeffs.iter().fold(0.0, |acc, c| acc * rn + c.abs());
    mag / (rn.max(f64::MIN_POSITIVE) * dp.norm())
}

/// Eigenvalues sorted by descending real part, ties by descending imaginary part.
pub fn eigenvalues(m: &Mat4) -> Result<[Complex64; 4]> {
    Ok(poly_roots(&char_poly(m)?)?.roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSource {
    FullEigen,
    TorqueFormula,
}

/// A complex mode with its oscillation frequency and damping ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeEstimate {
    #[serde(serialize_with = "serialize_complex")]
    pub lambda: Complex64,
    pub frequency_hz: f64,
    pub damping_ratio: f64,
    pub source: ModeSource,
}

impl ModeEstimate {
    /// Normalizes to the upper half plane.
    pub fn new(lambda: Complex64, source: ModeSource) -> Self {
        let lambda = if lambda.im < 0.0 { lambda.conj() } else { lambda };
        let magnitude = lambda.norm();
        Self {
            lambda,
            frequency_hz: lambda.im / (2.0 * PI),
            damping_ratio: if magnitude > 0.0 { -lambda.re / magnitude } else { 0.0 },
            source,
        }
    }

    /// Angular frequency, rad/s.
    pub fn omega(&self) -> f64 {
        self.lambda.im
    }
}

pub(crate) fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    ComplexParts::from(*z).serialize(s)
}

/// The least damped mode with positive imaginary part.
pub fn dominant_oscillatory_mode(eigs: &[Complex64]) -> Result<ModeEstimate> {
    eigs.iter()
        .filter(|z| z.im > OSCILLATORY_THRESHOLD)
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .map(|&z| ModeEstimate::new(z, ModeSource::FullEigen))
        .ok_or(Error::NoOscillatoryMode)
}
