//! Chain geometry, QDP events and the physical conventions every other module inherits.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Sign and unit conventions, fixed by calibration against the dense oracle.
///
/// Changing any line changes [`convention_hash`], which is stamped into golden
/// records and CLI metadata so stale baselines are detected.
pub const CONVENTION_LEDGER: &str = "\
hamiltonian: H = -J sum_bonds (sx sx + sy sy + delta sz sz), evolution exp(-i H t), hbar = 1
flip-flop matrix element: -2J; antiparallel bond cost: +2J*delta
reference energy: eps0 = -J*delta*bonds (bonds = N-1 open, N closed)
one magnon, closed: eps1(p) = eps0 + 4J*delta - 4J cos p, p = 2 pi I / N
one magnon, open: tridiagonal modes (sine for delta = 0, cos(p(x-1/2)) with p = pi k / N for delta = 1)
bessel argument: 4 J t; line propagator exp(-i 4 J delta t) i^(x'-x) J_(x'-x)(4 J t)
open image terms: delta = 0 -> - i^(x+x') J_(x+x'); delta = 1 -> + i^(x+x'-1) J_(x+x'-1) with exp(-i 4 J t)
two magnon: S' = (a + i b)/(a - i b), a = cos(P/2) - delta cos k, b = delta sin k, psi = e^{i(p1 x1 + p2 x2)} - S' e^{i(p1 x2 + p2 x1)}
scattering measure: 1/(8 pi^2) over the full torus; bound measure (1/pi) sin^2 th cos^(r+r'-2) th, E = 4J sin^2 th
gate: V|0> = gamma|0> + delta|1>, V|1> = -conj(delta)|0> + conj(gamma)|1>
";

pub fn convention_hash() -> String {
    hex::encode(Sha256::digest(CONVENTION_LEDGER.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Closed,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Closed => "closed",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "closed" | "periodic" | "ring" => Ok(Boundary::Closed),
            other => Err(Error::InvalidSpec(format!("unknown boundary '{other}'"))),
        }
    }
}

/// Heisenberg chain parameters. Sites are labelled 1..=n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n: usize,
    boundary: Boundary,
    j: f64,
    delta: f64,
}

impl ChainSpec {
    pub const DEFAULT_J: f64 = 0.5;
    pub const DEFAULT_DELTA: f64 = 1.0;

    pub fn new(n: usize, boundary: Boundary, j: f64, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 sites, got {n}"
            )));
        }
        if !(j.is_finite() && j > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "exchange J must be positive, got {j}"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidSpec("anisotropy must be finite".into()));
        }
        Ok(ChainSpec {
            n,
            boundary,
            j,
            delta,
        })
    }

    /// Chain with the default couplings J = 1/2, anisotropy 1.
    pub fn with_defaults(n: usize, boundary: Boundary) -> Result<Self> {
        Self::new(n, boundary, Self::DEFAULT_J, Self::DEFAULT_DELTA)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn j(&self) -> f64 {
        self.j
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn bonds(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.n - 1,
            Boundary::Closed => self.n,
        }
    }

    /// Energy of the fully polarized state.
    pub fn ground_energy(&self) -> f64 {
        -self.j * self.delta * self.bonds() as f64
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n {
            Err(Error::SiteOutOfRange { site, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Nearest-neighbour bonds; a closed chain of two sites carries the bond twice.
    pub fn bond_list(&self) -> Vec<(usize, usize)> {
        let mut bonds: Vec<(usize, usize)> = (1..self.n).map(|x| (x, x + 1)).collect();
        if self.boundary == Boundary::Closed {
            bonds.push((self.n, 1));
        }
        bonds
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.n, self.boundary, self.j, delta)
    }
}

pub fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite, got {t}")));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `alpha |0...0> + beta |1 0...0>` with the excitation on site 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl InitialState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(InitialState { alpha, beta })
    }

    /// Real amplitudes with `|alpha|^2 = alpha2`.
    pub fn from_population(alpha2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(Error::InvalidSpec(format!(
                "alpha^2 must lie in [0, 1], got {alpha2}"
            )));
        }
        Self::new(
            Complex64::new(alpha2.sqrt(), 0.0),
            Complex64::new((1.0 - alpha2).sqrt(), 0.0),
        )
    }
}

/// Single-qubit gate amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub gamma: Complex64,
    pub delta: Complex64,
}

impl Gate {
    pub fn new(gamma: Complex64, delta: Complex64) -> Result<Self> {
        let norm = gamma.norm_sqr() + delta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitaryGate(norm));
        }
        Ok(Gate { gamma, delta })
    }

    pub fn identity() -> Self {
        Gate {
            gamma: Complex64::new(1.0, 0.0),
            delta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn bit_flip() -> Self {
        Gate {
            gamma: Complex64::new(0.0, 0.0),
            delta: Complex64::new(1.0, 0.0),
        }
    }

    /// Equal-weight gate with gamma = delta = 1/sqrt(2).
    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Gate {
            gamma: Complex64::new(h, 0.0),
            delta: Complex64::new(h, 0.0),
        }
    }

    /// Real gamma = `gamma_abs`, delta = `delta_abs` e^{i phase}.
    pub fn from_abs_phase(gamma_abs: f64, delta_abs: f64, delta_phase: f64) -> Result<Self> {
        Self::new(
            Complex64::new(gamma_abs, 0.0),
            Complex64::from_polar(delta_abs, delta_phase),
        )
    }

    /// exp(-i angle n.sigma) for a unit axis in the x-y plane.
    pub fn from_axis_angle(angle: f64, nx: f64, ny: f64) -> Result<Self> {
        let len = (nx * nx + ny * ny).sqrt();
        if (len - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "axis must be a unit vector in the x-y plane, |n| = {len}"
            )));
        }
        Self::new(
            Complex64::new(angle.cos(), 0.0),
            Complex64::new(ny, -nx) * angle.sin(),
        )
    }

    /// Maps the qubit amplitudes `(a0, a1)` to `V (a0, a1)`.
    pub fn apply(&self, a0: Complex64, a1: Complex64) -> (Complex64, Complex64) {
        (
            self.gamma * a0 - self.delta.conj() * a1,
            self.delta * a0 + self.gamma.conj() * a1,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QdpKind {
    None,
    Projective,
    LocalUnitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QdpEvent {
    pub kind: QdpKind,
    pub site: usize,
    pub t0: f64,
    pub gate: Option<Gate>,
}

impl QdpEvent {
    pub fn none() -> Self {
        QdpEvent {
            kind: QdpKind::None,
            site: 1,
            t0: 0.0,
            gate: None,
        }
    }

    pub fn projective(site: usize, t0: f64) -> Result<Self> {
        check_time(t0)?;
        if site == 0 {
            return Err(Error::SiteOutOfRange { site, n: 0 });
        }
        Ok(QdpEvent {
            kind: QdpKind::Projective,
            site,
            t0,
            gate: None,
        })
    }

    pub fn local_unitary(site: usize, t0: f64, gate: Gate) -> Result<Self> {
        check_time(t0)?;
        if site == 0 {
            return Err(Error::SiteOutOfRange { site, n: 0 });
        }
        Gate::new(gate.gamma, gate.delta)?;
        Ok(QdpEvent {
            kind: QdpKind::LocalUnitary,
            site,
            t0,
            gate: Some(gate),
        })
    }

    pub fn validate(&self, spec: &ChainSpec) -> Result<()> {
        if self.kind == QdpKind::None {
            return Ok(());
        }
        spec.check_site(self.site)?;
        check_time(self.t0)?;
        match (self.kind, self.gate) {
            (QdpKind::LocalUnitary, None) => Err(Error::InvalidSpec(
                "local unitary event needs a gate".into(),
            )),
            (QdpKind::LocalUnitary, Some(g)) => Gate::new(g.gamma, g.delta).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Gate of a unitary event, identity otherwise.
    pub fn gate_or_identity(&self) -> Gate {
        self.gate.unwrap_or_else(Gate::identity)
    }
}

/// Moments of the amplitudes of a Haar-random qubit state `alpha|0> + beta|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochMoments {
    pub m_a2: f64,
    pub m_b2: f64,
    pub m_a2b2: f64,
    pub m_b4: f64,
    pub m_ab: f64,
}

pub const BLOCH_MOMENTS: BlochMoments = BlochMoments {
    m_a2: 0.5,
    m_b2: 0.5,
    m_a2b2: 1.0 / 6.0,
    m_b4: 1.0 / 3.0,
    m_ab: 0.0,
};

/// Closed-chain one-magnon energy.
pub fn dispersion_one_magnon(p: f64, spec: &ChainSpec) -> f64 {
    spec.ground_energy() + 4.0 * spec.j * (spec.delta - p.cos())
}

/// Quantized one-magnon momenta with their integer labels, in (0, 2 pi].
pub fn momentum_grid(spec: &ChainSpec) -> Vec<(f64, usize)> {
    momentum_grid_for(spec.n, spec.boundary)
}

pub fn momentum_grid_for(n: usize, boundary: Boundary) -> Vec<(f64, usize)> {
    (1..=n)
        .map(|i| match boundary {
            Boundary::Closed => (2.0 * PI * i as f64 / n as f64, i),
            Boundary::Open => (PI * i as f64 / (n + 1) as f64, i),
        })
        .collect()
}

pub fn two_magnon_energy(p1: f64, p2: f64, spec: &ChainSpec) -> f64 {
    spec.ground_energy() + 4.0 * spec.j * (2.0 * spec.delta - p1.cos() - p2.cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        let closed = ChainSpec::with_defaults(4, Boundary::Closed).unwrap();
        let ps: Vec<f64> = momentum_grid(&closed).iter().map(|p| p.0).collect();
        let want = [PI / 2.0, PI, 1.5 * PI, 2.0 * PI];
        for (a, b) in ps.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let open = ChainSpec::with_defaults(3, Boundary::Open).unwrap();
        let ps: Vec<f64> = momentum_grid(&open).iter().map(|p| p.0).collect();
        for (a, b) in ps.iter().zip([PI / 4.0, PI / 2.0, 0.75 * PI]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_site_grid() {
        assert!(ChainSpec::with_defaults(1, Boundary::Open).is_err());
        assert_eq!(momentum_grid_for(1, Boundary::Open), vec![(PI / 2.0, 1)]);
    }

    #[test]
    fn ground_energies() {
        let open = ChainSpec::with_defaults(10, Boundary::Open).unwrap();
        assert_eq!(open.ground_energy(), -4.5);
        let closed = ChainSpec::with_defaults(10, Boundary::Closed).unwrap();
        assert_eq!(closed.ground_energy(), -5.0);
    }

    #[test]
    fn dispersion_at_xx_point() {
        let spec = ChainSpec::new(10, Boundary::Closed, 0.5, 0.0).unwrap();
        let e0 = spec.ground_energy();
        assert!((dispersion_one_magnon(0.0, &spec) - (e0 - 2.0)).abs() < 1e-15);
        assert!((dispersion_one_magnon(PI, &spec) - (e0 + 2.0)).abs() < 1e-15);
        assert!((dispersion_one_magnon(PI / 2.0, &spec) - e0).abs() < 1e-15);
    }

    #[test]
    fn two_magnon_examples() {
        let iso = ChainSpec::with_defaults(10, Boundary::Closed).unwrap();
        let e0 = iso.ground_energy();
        assert!((two_magnon_energy(PI / 2.0, PI / 2.0, &iso) - (e0 + 4.0)).abs() < 1e-14);
        assert!((two_magnon_energy(0.0, 0.0, &iso) - e0).abs() < 1e-14);
        let xx = iso.with_delta(0.0).unwrap();
        assert!((two_magnon_energy(0.0, PI, &xx) - xx.ground_energy()).abs() < 1e-14);
    }

    #[test]
    fn gate_validation() {
        assert!(Gate::new(Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0)).is_err());
        let g = Gate::from_axis_angle(0.3, 0.6, 0.8).unwrap();
        assert!((g.gamma.norm_sqr() + g.delta.norm_sqr() - 1.0).abs() < 1e-15);
        let (a, b) = Gate::identity().apply(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        assert_eq!((a, b), (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)));
    }

    #[test]
    fn gate_is_unitary_for_complex_gamma() {
        let g = Gate::new(
            Complex64::from_polar(0.6, 0.4),
            Complex64::from_polar(0.8, -1.1),
        )
        .unwrap();
        let (a0, a1) = g.apply(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let (b0, b1) = g.apply(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let overlap = a0.conj() * b0 + a1.conj() * b1;
        assert!(overlap.norm() < 1e-15);
        assert!((b0.norm_sqr() + b1.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn event_site_checked_against_chain() {
        let spec = ChainSpec::with_defaults(5, Boundary::Open).unwrap();
        let ev = QdpEvent::projective(6, 1.0).unwrap();
        assert!(matches!(
            ev.validate(&spec),
            Err(Error::SiteOutOfRange { .. })
        ));
        assert!(QdpEvent::projective(2, -1.0).is_err());
    }

    #[test]
    fn hash_is_stable_hex() {
        let h = convention_hash();
        assert_eq!(h.len(), 64);
        assert_eq!(h, convention_hash());
    }
}
