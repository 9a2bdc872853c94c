//! Periodically kicked Harper chain in the zero- and one-particle sectors.
//!
//! One period is `exp(-i tau hop) * diag(exp(-i tau g cos(2 pi j eta / N)))` with
//! nearest-neighbour hopping of amplitude +1. The vacuum does not evolve.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{Boundary, InitialState};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarperSpec {
    n: usize,
    g: f64,
    eta: f64,
    tau: f64,
    boundary: Boundary,
}

impl HarperSpec {
    pub fn new(n: usize, g: f64, eta: f64, tau: f64, boundary: Boundary) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 sites, got {n}"
            )));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "kick interval must be positive, got {tau}"
            )));
        }
        if !g.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidSpec(
                "potential strength and eta must be finite".into(),
            ));
        }
        Ok(HarperSpec {
            n,
            g,
            eta,
            tau,
            boundary,
        })
    }

    /// Open chain with `eta = sqrt 2`.
    pub fn with_defaults(n: usize, g: f64, tau: f64) -> Result<Self> {
        Self::new(n, g, std::f64::consts::SQRT_2, tau, Boundary::Open)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Kick phase angle `tau g cos(2 pi j eta / N)` at site `j`.
    pub fn kick_angle(&self, j: usize) -> f64 {
        self.tau * self.g * (2.0 * PI * j as f64 * self.eta / self.n as f64).cos()
    }

    /// Single-particle hopping matrix.
    pub fn hopping(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut h = DMatrix::zeros(n, n);
        for j in 0..n - 1 {
            h[(j, j + 1)] += 1.0;
            h[(j + 1, j)] += 1.0;
        }
        if self.boundary == Boundary::Closed {
            h[(n - 1, 0)] += 1.0;
            h[(0, n - 1)] += 1.0;
        }
        h
    }
}

/// One-period single-particle unitary.
#[derive(Debug, Clone)]
pub struct FloquetStep {
    pub matrix: DMatrix<Complex64>,
}

impl FloquetStep {
    /// Largest entry of `U^dagger U - 1`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        (self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let n = amps.len();
        (0..n)
            .map(|i| (0..n).map(|k| self.matrix[(i, k)] * amps[k]).sum())
            .collect()
    }
}

/// `exp(-i tau hop)` from the analytic hopping modes.
pub fn hop_factor(spec: &HarperSpec) -> DMatrix<Complex64> {
    let n = spec.n;
    let tau = spec.tau;
    let mut u = DMatrix::from_element(n, n, ZERO);
    match spec.boundary {
        Boundary::Open => {
            let norm = 2.0 / (n + 1) as f64;
            for k in 1..=n {
                let p = PI * k as f64 / (n + 1) as f64;
                let ph = Complex64::from_polar(1.0, -tau * 2.0 * p.cos());
                let mode: Vec<f64> = (1..=n).map(|j| (p * j as f64).sin()).collect();
                for a in 0..n {
                    for b in 0..n {
                        u[(a, b)] += ph * (norm * mode[a] * mode[b]);
                    }
                }
            }
        }
        Boundary::Closed => {
            for k in 0..n {
                let p = 2.0 * PI * k as f64 / n as f64;
                let ph = Complex64::from_polar(1.0 / n as f64, -tau * 2.0 * p.cos());
                for a in 0..n {
                    for b in 0..n {
                        u[(a, b)] += ph * Complex64::from_polar(1.0, p * (a as f64 - b as f64));
                    }
                }
            }
        }
    }
    u
}

pub fn floquet_step(spec: &HarperSpec) -> FloquetStep {
    let mut u = hop_factor(spec);
    for j in 0..spec.n {
        let kick = Complex64::from_polar(1.0, -spec.kick_angle(j + 1));
        for a in 0..spec.n {
            u[(a, j)] *= kick;
        }
    }
    FloquetStep { matrix: u }
}

/// Vacuum amplitude and one-particle amplitudes over sites `1..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarperState {
    pub vacuum: Complex64,
    pub amps: Vec<Complex64>,
}

impl HarperState {
    /// The qubit `alpha|0> + beta|1>` written on `site`.
    pub fn encoded(n: usize, site: usize, initial: &InitialState) -> Result<Self> {
        if site == 0 || site > n {
            return Err(Error::SiteOutOfRange { site, n });
        }
        let mut amps = vec![ZERO; n];
        amps[site - 1] = initial.beta;
        Ok(HarperState {
            vacuum: initial.alpha,
            amps,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.vacuum.norm_sqr() + self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }
}

/// Applies `kicks` periods to the state encoded on site 1.
pub fn propagate(spec: &HarperSpec, kicks: usize, initial: &InitialState) -> Result<HarperState> {
    let step = floquet_step(spec);
    let mut s = HarperState::encoded(spec.n, 1, initial)?;
    for _ in 0..kicks {
        s.amps = step.apply(&s.amps);
    }
    Ok(s)
}

/// Site readout after a number-basis measurement at site `m` after `n0` kicks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorFrame {
    pub kicks: usize,
    /// Occupations with the measurement.
    pub x_tilde: Vec<f64>,
    /// Coherences with the measurement.
    pub y_tilde: Vec<Complex64>,
    /// Occupations without it.
    pub x: Vec<f64>,
    /// `x_tilde - x`.
    pub f: Vec<f64>,
    /// Bloch-averaged fidelity with the measurement.
    pub fidelity: Vec<f64>,
    /// Fidelity of the given input state with the measurement.
    pub fidelity_state: Vec<f64>,
}

/// Runs the measured and unmeasured chains side by side, one frame per kick
/// from `n0` to `n_max`.
pub fn detector_frames(
    spec: &HarperSpec,
    m: usize,
    n0: usize,
    n_max: usize,
    initial: &InitialState,
) -> Result<Vec<DetectorFrame>> {
    if m == 0 || m > spec.n {
        return Err(Error::SiteOutOfRange { site: m, n: spec.n });
    }
    if n_max < n0 {
        return Err(Error::InvalidSpec(format!(
            "readout kick {n_max} precedes the measurement kick {n0}"
        )));
    }
    let step = floquet_step(spec);
    let mut free = HarperState::encoded(spec.n, 1, initial)?.amps;
    for _ in 0..n0 {
        free = step.apply(&free);
    }
    // branches in units of beta
    let beta = initial.beta;
    let unit: Vec<Complex64> = if beta == ZERO {
        vec![ZERO; spec.n]
    } else {
        free.iter().map(|a| a / beta).collect()
    };
    let mut survive = unit.clone();
    survive[m - 1] = ZERO;
    let mut collapse = vec![ZERO; spec.n];
    collapse[m - 1] = unit[m - 1];
    let mut frames = Vec::with_capacity(n_max - n0 + 1);
    let (a, b2) = (initial.alpha, beta.norm_sqr());
    for kicks in n0..=n_max {
        if kicks > n0 {
            free = step.apply(&free);
            survive = step.apply(&survive);
            collapse = step.apply(&collapse);
        }
        let x: Vec<f64> = free.iter().map(|v| v.norm_sqr()).collect();
        let x_tilde: Vec<f64> = survive
            .iter()
            .zip(&collapse)
            .map(|(h, k)| b2 * (h.norm_sqr() + k.norm_sqr()))
            .collect();
        let y_tilde: Vec<Complex64> = survive.iter().map(|h| a * beta.conj() * h.conj()).collect();
        let f = x_tilde.iter().zip(&x).map(|(p, q)| p - q).collect();
        let fidelity = survive
            .iter()
            .zip(&collapse)
            .map(|(h, k)| 0.5 + (h.norm_sqr() + k.norm_sqr()) / 6.0 + h.re / 3.0)
            .collect();
        let fidelity_state = x_tilde
            .iter()
            .zip(&y_tilde)
            .map(|(&xt, yt)| a.norm_sqr() * (1.0 - xt) + b2 * xt + 2.0 * (a.conj() * beta * yt).re)
            .collect();
        frames.push(DetectorFrame {
            kicks,
            x_tilde,
            y_tilde,
            x,
            f,
            fidelity,
            fidelity_state,
        });
    }
    Ok(frames)
}

pub fn qdp_and_detect(
    spec: &HarperSpec,
    m: usize,
    n0: usize,
    n: usize,
    initial: &InitialState,
) -> Result<DetectorFrame> {
    Ok(detector_frames(spec, m, n0, n, initial)?
        .pop()
        .expect("at least one frame"))
}

/// Per-state fidelity of every site for kicks `0..=n_max` (rows by kick).
pub fn fidelity_frames(
    spec: &HarperSpec,
    n_max: usize,
    initial: &InitialState,
) -> Result<Vec<Vec<f64>>> {
    let step = floquet_step(spec);
    let mut s = HarperState::encoded(spec.n, 1, initial)?;
    let (a, b) = (initial.alpha, initial.beta);
    let mut rows = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        if k > 0 {
            s.amps = step.apply(&s.amps);
        }
        rows.push(
            s.amps
                .iter()
                .map(|psi| {
                    let x = b.norm_sqr() * psi.norm_sqr();
                    let y = a * b.conj() * psi.conj();
                    a.norm_sqr() * (1.0 - x) + b.norm_sqr() * x + 2.0 * (a.conj() * b * y).re
                })
                .collect(),
        );
    }
    Ok(rows)
}

/// Participation width `1 / sum p_l^2` of a non-negative profile.
pub fn spread_metric(profile: &[f64]) -> Result<f64> {
    let total: f64 = profile.iter().sum();
    if !(total > 0.0) || profile.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::Domain(
            "profile must be non-negative with positive weight".into(),
        ));
    }
    Ok(1.0 / profile.iter().map(|v| (v / total).powi(2)).sum::<f64>())
}

/// Kicks after `n0` until `|f_target|` first exceeds `threshold`.
pub fn first_passage(
    spec: &HarperSpec,
    m: usize,
    n0: usize,
    target: usize,
    threshold: f64,
    max_kicks: usize,
    initial: &InitialState,
) -> Result<Option<usize>> {
    if target == 0 || target > spec.n {
        return Err(Error::SiteOutOfRange {
            site: target,
            n: spec.n,
        });
    }
    let frames = detector_frames(spec, m, n0, n0 + max_kicks, initial)?;
    Ok(frames
        .iter()
        .position(|fr| fr.f[target - 1].abs() > threshold))
}
