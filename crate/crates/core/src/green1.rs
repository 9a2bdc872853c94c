//! One-magnon propagators: exact mode sums on finite chains and Bessel forms for long chains.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bessel::{bessel_j_table, signed_order};
use crate::chain::{check_time, Boundary, ChainSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenMethod {
    Bessel,
    MomentumSum,
}

impl std::str::FromStr for GreenMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bessel" => Ok(GreenMethod::Bessel),
            "momentum" | "momentum_sum" | "momentum-sum" | "modes" => Ok(GreenMethod::MomentumSum),
            other => Err(Error::InvalidSpec(format!(
                "unknown propagator method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Green1Value {
    pub value: Complex64,
    pub source: usize,
    pub target: usize,
    pub t: f64,
    pub method: GreenMethod,
}

/// `i^k` for any integer `k`.
pub fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// Single-excitation eigenmodes of a finite chain.
#[derive(Debug, Clone)]
pub struct OneMagnonModes {
    spec: ChainSpec,
    /// Energies measured from the polarized state.
    energies: Vec<f64>,
    /// `modes[k * n + (x - 1)]` is mode `k` at site `x`.
    modes: Vec<Complex64>,
}

impl OneMagnonModes {
    pub fn new(spec: &ChainSpec) -> Self {
        let n = spec.n();
        let (j, delta) = (spec.j(), spec.delta());
        let mut energies = Vec::with_capacity(n);
        let mut modes = Vec::with_capacity(n * n);
        match spec.boundary() {
            Boundary::Closed => {
                let norm = 1.0 / (n as f64).sqrt();
                for k in 0..n {
                    let p = 2.0 * PI * k as f64 / n as f64;
                    energies.push(4.0 * j * (delta - p.cos()));
                    modes.extend((1..=n).map(|x| Complex64::from_polar(norm, p * x as f64)));
                }
            }
            Boundary::Open if delta == 0.0 => {
                let norm = (2.0 / (n + 1) as f64).sqrt();
                for i in 1..=n {
                    let p = PI * i as f64 / (n + 1) as f64;
                    energies.push(-4.0 * j * p.cos());
                    modes.extend((1..=n).map(|x| Complex64::new(norm * (p * x as f64).sin(), 0.0)));
                }
            }
            Boundary::Open if delta == 1.0 => {
                for k in 0..n {
                    let p = PI * k as f64 / n as f64;
                    let norm = if k == 0 {
                        (1.0 / n as f64).sqrt()
                    } else {
                        (2.0 / n as f64).sqrt()
                    };
                    energies.push(4.0 * j * (1.0 - p.cos()));
                    modes.extend(
                        (1..=n).map(|x| Complex64::new(norm * (p * (x as f64 - 0.5)).cos(), 0.0)),
                    );
                }
            }
            Boundary::Open => {
                let h = single_excitation_matrix(spec);
                let eig = SymmetricEigen::new(h);
                for k in 0..n {
                    energies.push(eig.eigenvalues[k]);
                    modes.extend(
                        eig.eigenvectors
                            .column(k)
                            .iter()
                            .map(|&v| Complex64::new(v, 0.0)),
                    );
                }
            }
        }
        OneMagnonModes {
            spec: *spec,
            energies,
            modes,
        }
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    /// Energies relative to the polarized state.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn mode(&self, k: usize) -> &[Complex64] {
        let n = self.spec.n();
        &self.modes[k * n..(k + 1) * n]
    }

    /// Evolves site amplitudes (index 0 is site 1) for time `t`, global phase included.
    pub fn propagate(&self, amps: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.spec.n();
        let global = phase(-self.spec.ground_energy() * t);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, &e) in self.energies.iter().enumerate() {
            let mode = self.mode(k);
            let c: Complex64 = mode.iter().zip(amps).map(|(m, a)| m.conj() * a).sum();
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let c = c * phase(-e * t);
            for (o, m) in out.iter_mut().zip(mode) {
                *o += m * c;
            }
        }
        for o in &mut out {
            *o *= global;
        }
        out
    }

    pub fn amplitude(&self, source: usize, target: usize, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &e) in self.energies.iter().enumerate() {
            let mode = self.mode(k);
            acc += mode[target - 1] * mode[source - 1].conj() * phase(-e * t);
        }
        acc * phase(-self.spec.ground_energy() * t)
    }
}

/// Single-excitation block of the Hamiltonian relative to the polarized energy.
pub fn single_excitation_matrix(spec: &ChainSpec) -> DMatrix<f64> {
    let n = spec.n();
    let mut h = DMatrix::zeros(n, n);
    for (a, b) in spec.bond_list() {
        let (a, b) = (a - 1, b - 1);
        h[(a, a)] += 2.0 * spec.j() * spec.delta();
        h[(b, b)] += 2.0 * spec.j() * spec.delta();
        h[(a, b)] -= 2.0 * spec.j();
        h[(b, a)] -= 2.0 * spec.j();
    }
    h
}

/// Bessel-series propagator: infinite line (closed, minimal image) or semi-infinite chain (open).
#[derive(Debug, Clone, Copy)]
pub struct BesselPropagator {
    spec: ChainSpec,
}

impl BesselPropagator {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        if spec.boundary() == Boundary::Open && spec.delta() != 0.0 && spec.delta() != 1.0 {
            return Err(Error::Unsupported(format!(
                "open-chain Bessel form exists only for anisotropy 0 or 1, got {}",
                spec.delta()
            )));
        }
        Ok(BesselPropagator { spec: *spec })
    }

    pub fn table(&self, t: f64) -> Result<Vec<f64>> {
        bessel_j_table(2 * self.spec.n() + 1, 4.0 * self.spec.j() * t)
    }

    pub fn amplitude_with(&self, table: &[f64], source: usize, target: usize, t: f64) -> Complex64 {
        let spec = &self.spec;
        let e0 = spec.ground_energy();
        let d = target as i64 - source as i64;
        match spec.boundary() {
            Boundary::Closed => {
                let n = spec.n() as i64;
                let mut d = d.rem_euclid(n);
                if 2 * d > n {
                    d -= n;
                }
                phase(-(e0 + 4.0 * spec.j() * spec.delta()) * t) * i_pow(d) * signed_order(table, d)
            }
            Boundary::Open => {
                let s = (target + source) as i64;
                if spec.delta() == 0.0 {
                    phase(-e0 * t)
                        * (i_pow(d) * signed_order(table, d) - i_pow(s) * signed_order(table, s))
                } else {
                    phase(-(e0 + 4.0 * spec.j()) * t)
                        * (i_pow(d) * signed_order(table, d)
                            + i_pow(s - 1) * signed_order(table, s - 1))
                }
            }
        }
    }

    pub fn amplitude(&self, source: usize, target: usize, t: f64) -> Result<Complex64> {
        let table = self.table(t)?;
        Ok(self.amplitude_with(&table, source, target, t))
    }
}

/// Either propagator behind one interface.
#[derive(Debug, Clone)]
pub enum OneMagnonPropagator {
    Modes(OneMagnonModes),
    Bessel(BesselPropagator),
}

impl OneMagnonPropagator {
    pub fn new(spec: &ChainSpec, method: GreenMethod) -> Result<Self> {
        Ok(match method {
            GreenMethod::MomentumSum => OneMagnonPropagator::Modes(OneMagnonModes::new(spec)),
            GreenMethod::Bessel => OneMagnonPropagator::Bessel(BesselPropagator::new(spec)?),
        })
    }

    pub fn spec(&self) -> &ChainSpec {
        match self {
            OneMagnonPropagator::Modes(m) => &m.spec,
            OneMagnonPropagator::Bessel(b) => &b.spec,
        }
    }

    pub fn method(&self) -> GreenMethod {
        match self {
            OneMagnonPropagator::Modes(_) => GreenMethod::MomentumSum,
            OneMagnonPropagator::Bessel(_) => GreenMethod::Bessel,
        }
    }

    pub fn amplitude(&self, source: usize, target: usize, t: f64) -> Result<Complex64> {
        let spec = self.spec();
        spec.check_site(source)?;
        spec.check_site(target)?;
        check_time(t)?;
        if t == 0.0 {
            return Ok(Complex64::new(
                if source == target { 1.0 } else { 0.0 },
                0.0,
            ));
        }
        match self {
            OneMagnonPropagator::Modes(m) => Ok(m.amplitude(source, target, t)),
            OneMagnonPropagator::Bessel(b) => b.amplitude(source, target, t),
        }
    }

    /// Amplitudes from `source` to every site 1..=N.
    pub fn column(&self, source: usize, t: f64) -> Result<Vec<Complex64>> {
        let spec = self.spec();
        spec.check_site(source)?;
        check_time(t)?;
        let n = spec.n();
        let mut unit = vec![Complex64::new(0.0, 0.0); n];
        unit[source - 1] = Complex64::new(1.0, 0.0);
        if t == 0.0 {
            return Ok(unit);
        }
        match self {
            OneMagnonPropagator::Modes(m) => Ok(m.propagate(&unit, t)),
            OneMagnonPropagator::Bessel(b) => {
                let table = b.table(t)?;
                Ok((1..=n)
                    .map(|y| b.amplitude_with(&table, source, y, t))
                    .collect())
            }
        }
    }

    /// Evolves a one-magnon amplitude vector for time `t`.
    pub fn propagate(&self, amps: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        check_time(t)?;
        let n = self.spec().n();
        if amps.len() != n {
            return Err(Error::InvalidSpec(format!(
                "expected {n} amplitudes, got {}",
                amps.len()
            )));
        }
        if t == 0.0 {
            return Ok(amps.to_vec());
        }
        match self {
            OneMagnonPropagator::Modes(m) => Ok(m.propagate(amps, t)),
            OneMagnonPropagator::Bessel(b) => {
                let table = b.table(t)?;
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                for (x, a) in amps.iter().enumerate() {
                    if *a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (y, o) in out.iter_mut().enumerate() {
                        *o += a * b.amplitude_with(&table, x + 1, y + 1, t);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// `G` from `source` to `target` after time `t`. Builds a propagator per call;
/// reuse [`OneMagnonPropagator`] for batches.
pub fn green1(
    source: usize,
    target: usize,
    t: f64,
    spec: &ChainSpec,
    method: GreenMethod,
) -> Result<Green1Value> {
    let value = OneMagnonPropagator::new(spec, method)?.amplitude(source, target, t)?;
    Ok(Green1Value {
        value,
        source,
        target,
        t,
        method,
    })
}
