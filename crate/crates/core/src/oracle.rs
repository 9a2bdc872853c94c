//! Brute-force reference: dense Heisenberg blocks, exact evolution by
//! eigendecomposition, local projectors and gates, single-site RDMs, and the
//! spectral projector onto the two-magnon bound band.
//!
//! Basis states are bitmasks; bit `x - 1` set means a down spin on site `x`.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::chain::{Boundary, ChainSpec, Gate};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const MAX_FULL_SITES: usize = 12;
pub const MAX_SECTOR_SITES: usize = 64;
const MAX_BLOCK_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Full,
    /// Exactly this many down spins.
    Excitations(usize),
    /// Zero up to this many down spins.
    UpTo(usize),
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `n`-bit masks with `k` bits set, in increasing numeric order.
fn masks_with(n: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomial(n, k));
    // lexicographic combinations of bit positions, high position varying slowest
    let mut pos: Vec<usize> = (0..k).collect();
    loop {
        out.push(pos.iter().fold(0u64, |m, &p| m | (1u64 << p)));
        let limit = |i: usize, pos: &[usize]| if i + 1 < k { pos[i + 1] } else { n };
        let Some(i) = (0..k).find(|&i| pos[i] + 1 < limit(i, &pos)) else {
            break;
        };
        pos[i] += 1;
        for (j, p) in pos.iter_mut().enumerate().take(i) {
            *p = j;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Basis {
    n: usize,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
    blocks: Vec<(usize, Range<usize>)>,
}

impl Basis {
    pub fn new(n: usize, sector: Sector) -> Result<Self> {
        let counts: Vec<usize> = match sector {
            Sector::Full => {
                if n > MAX_FULL_SITES {
                    return Err(Error::SizeLimit(format!(
                        "full space limited to {MAX_FULL_SITES} sites, got {n}"
                    )));
                }
                (0..=n).collect()
            }
            Sector::Excitations(k) => vec![k],
            Sector::UpTo(k) => (0..=k.min(n)).collect(),
        };
        if n > MAX_SECTOR_SITES {
            return Err(Error::SizeLimit(format!(
                "sectors limited to {MAX_SECTOR_SITES} sites, got {n}"
            )));
        }
        let mut states = Vec::new();
        let mut blocks = Vec::new();
        for k in counts {
            let dim = binomial(n, k);
            if dim > MAX_BLOCK_DIM {
                return Err(Error::SizeLimit(format!(
                    "block with {k} excitations on {n} sites has dimension {dim}"
                )));
            }
            let start = states.len();
            states.extend(masks_with(n, k));
            blocks.push((k, start..states.len()));
        }
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Basis {
            n,
            states,
            index,
            blocks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.states.len()
    }
    pub fn states(&self) -> &[u64] {
        &self.states
    }
    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.index.get(&mask).copied()
    }
    pub fn blocks(&self) -> &[(usize, Range<usize>)] {
        &self.blocks
    }
}

/// Bitmask with down spins on the given sites.
pub fn mask_of(sites: &[usize]) -> u64 {
    sites.iter().fold(0u64, |m, &x| m | (1u64 << (x - 1)))
}

/// Hamiltonian in magnetization blocks with lazily computed eigendecompositions.
#[derive(Debug)]
pub struct DenseHamiltonian {
    spec: ChainSpec,
    basis: Arc<Basis>,
    blocks: Vec<DMatrix<f64>>,
    eigen: Vec<OnceLock<SymmetricEigen<f64, nalgebra::Dyn>>>,
}

pub fn build_hamiltonian(spec: &ChainSpec, sector: Sector) -> Result<DenseHamiltonian> {
    let basis = Arc::new(Basis::new(spec.n(), sector)?);
    let bonds = spec.bond_list();
    let (j, delta) = (spec.j(), spec.delta());
    let mut blocks = Vec::with_capacity(basis.blocks.len());
    for (_, range) in &basis.blocks {
        let dim = range.len();
        let mut h = DMatrix::zeros(dim, dim);
        for (local, &s) in basis.states[range.clone()].iter().enumerate() {
            for &(a, b) in &bonds {
                let (ba, bb) = ((s >> (a - 1)) & 1, (s >> (b - 1)) & 1);
                if ba == bb {
                    h[(local, local)] -= j * delta;
                } else {
                    h[(local, local)] += j * delta;
                    let flipped = s ^ ((1u64 << (a - 1)) | (1u64 << (b - 1)));
                    let other = basis.index[&flipped] - range.start;
                    h[(other, local)] -= 2.0 * j;
                }
            }
        }
        blocks.push(h);
    }
    let eigen = blocks.iter().map(|_| OnceLock::new()).collect();
    Ok(DenseHamiltonian {
        spec: *spec,
        basis,
        blocks,
        eigen,
    })
}

impl DenseHamiltonian {
    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }
    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }
    pub fn block(&self, i: usize) -> &DMatrix<f64> {
        &self.blocks[i]
    }

    fn eigen(&self, i: usize) -> &SymmetricEigen<f64, nalgebra::Dyn> {
        self.eigen[i].get_or_init(|| SymmetricEigen::new(self.blocks[i].clone()))
    }

    /// Block eigenvalues, ascending.
    pub fn eigenvalues(&self, i: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigen(i).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Assembled matrix over the whole basis; only for small bases.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let dim = self.basis.dim();
        if dim > MAX_BLOCK_DIM {
            return Err(Error::SizeLimit(format!(
                "dense assembly of dimension {dim}"
            )));
        }
        let mut h = DMatrix::zeros(dim, dim);
        for ((_, range), b) in self.basis.blocks.iter().zip(&self.blocks) {
            h.view_mut((range.start, range.start), (range.len(), range.len()))
                .copy_from(b);
        }
        Ok(h)
    }
}

/// Amplitude vector over a [`Basis`].
#[derive(Debug, Clone)]
pub struct DenseState {
    basis: Arc<Basis>,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn zeros(basis: &Arc<Basis>) -> Self {
        DenseState {
            basis: Arc::clone(basis),
            amps: vec![ZERO; basis.dim()],
        }
    }

    /// State from `(mask, amplitude)` pairs; every mask must be in the basis.
    pub fn from_amplitudes(basis: &Arc<Basis>, entries: &[(u64, Complex64)]) -> Result<Self> {
        let mut s = Self::zeros(basis);
        for &(m, a) in entries {
            let i = basis
                .index_of(m)
                .ok_or_else(|| Error::Domain(format!("basis state {m:#b} outside the basis")))?;
            s.amps[i] += a;
        }
        Ok(s)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
    pub fn amplitude(&self, mask: u64) -> Complex64 {
        self.basis.index_of(mask).map_or(ZERO, |i| self.amps[i])
    }
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Occupation and coherence `(x, y)` of site `l`: `x = <n_l>`, `y = <0|rho_l|1>`.
    pub fn site_rdm(&self, l: usize) -> Result<(f64, Complex64)> {
        check_site(l, self.basis.n)?;
        let bit = 1u64 << (l - 1);
        let mut x = 0.0;
        let mut y = ZERO;
        for (i, &s) in self.basis.states.iter().enumerate() {
            let a = self.amps[i];
            if s & bit != 0 {
                x += a.norm_sqr();
            } else if a != ZERO {
                y += a * self.amplitude(s | bit).conj();
            }
        }
        Ok((x, y))
    }
}

fn check_site(site: usize, n: usize) -> Result<()> {
    if site == 0 || site > n {
        Err(Error::SiteOutOfRange { site, n })
    } else {
        Ok(())
    }
}

/// Exact `exp(-i H t)` applied block by block; blocks without support are skipped.
pub fn evolve(state: &DenseState, h: &DenseHamiltonian, t: f64) -> Result<DenseState> {
    if !Arc::ptr_eq(&state.basis, &h.basis) && state.basis.states != h.basis.states {
        return Err(Error::Domain(
            "state and Hamiltonian use different bases".into(),
        ));
    }
    let mut out = DenseState {
        basis: Arc::clone(&h.basis),
        amps: vec![ZERO; state.amps.len()],
    };
    for (bi, (_, range)) in h.basis.blocks.iter().enumerate() {
        let part = &state.amps[range.clone()];
        if part.iter().all(|a| *a == ZERO) {
            continue;
        }
        let eig = h.eigen(bi);
        let v = &eig.eigenvectors;
        let dim = range.len();
        let mut coeff = vec![ZERO; dim];
        for (k, c) in coeff.iter_mut().enumerate() {
            let col = v.column(k);
            let proj: Complex64 = col.iter().zip(part).map(|(&e, &a)| a * e).sum();
            *c = proj * Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
        }
        for (i, o) in out.amps[range.clone()].iter_mut().enumerate() {
            *o = coeff.iter().enumerate().map(|(k, &c)| c * v[(i, k)]).sum();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalOp {
    /// Keep the spin-up component of the site.
    Project0,
    /// Keep the spin-down component of the site.
    Project1,
    Gate(Gate),
}

/// Applies a projector or single-site gate to a pure state.
pub fn apply_local(op: LocalOp, site: usize, state: &DenseState) -> Result<DenseState> {
    check_site(site, state.basis.n)?;
    let bit = 1u64 << (site - 1);
    let mut out = state.clone();
    match op {
        LocalOp::Project0 | LocalOp::Project1 => {
            let keep_down = matches!(op, LocalOp::Project1);
            for (i, &s) in state.basis.states.iter().enumerate() {
                if (s & bit != 0) != keep_down {
                    out.amps[i] = ZERO;
                }
            }
        }
        LocalOp::Gate(g) => {
            let g = Gate::new(g.gamma, g.delta)?;
            for (i, &s) in state.basis.states.iter().enumerate() {
                if s & bit != 0 {
                    continue;
                }
                let partner = state.basis.index_of(s | bit);
                let a0 = state.amps[i];
                let a1 = partner.map_or(ZERO, |p| state.amps[p]);
                let (b0, b1) = g.apply(a0, a1);
                out.amps[i] = b0;
                match partner {
                    Some(p) => out.amps[p] = b1,
                    None if b1.norm() > 0.0 => {
                        return Err(Error::Domain(
                            "gate moves amplitude outside the basis".into(),
                        ));
                    }
                    None => {}
                }
            }
            // states whose up-partner is missing
            for (i, &s) in state.basis.states.iter().enumerate() {
                if s & bit != 0 && state.basis.index_of(s & !bit).is_none() && state.amps[i] != ZERO
                {
                    return Err(Error::Domain(
                        "gate moves amplitude outside the basis".into(),
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Dense density matrix over a small basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<Basis>,
    pub rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_state(state: &DenseState) -> Result<Self> {
        let dim = state.basis.dim();
        if dim > MAX_BLOCK_DIM {
            return Err(Error::SizeLimit(format!(
                "density matrix of dimension {dim}"
            )));
        }
        let v = DMatrix::from_column_slice(dim, 1, &state.amps);
        Ok(DensityMatrix {
            basis: Arc::clone(&state.basis),
            rho: &v * v.adjoint(),
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// `P O P` for a projector; `V rho V^dagger` for a gate.
    pub fn apply_local(&self, op: LocalOp, site: usize) -> Result<Self> {
        check_site(site, self.basis.n)?;
        let dim = self.basis.dim();
        let bit = 1u64 << (site - 1);
        let mut rho = self.rho.clone();
        match op {
            LocalOp::Project0 | LocalOp::Project1 => {
                let keep_down = matches!(op, LocalOp::Project1);
                for (i, &si) in self.basis.states.iter().enumerate() {
                    for (k, &sk) in self.basis.states.iter().enumerate() {
                        if (si & bit != 0) != keep_down || (sk & bit != 0) != keep_down {
                            rho[(i, k)] = ZERO;
                        }
                    }
                }
            }
            LocalOp::Gate(g) => {
                let mut v = DMatrix::<Complex64>::zeros(dim, dim);
                for i in 0..dim {
                    let mut e = vec![ZERO; dim];
                    e[i] = Complex64::new(1.0, 0.0);
                    let s = DenseState {
                        basis: Arc::clone(&self.basis),
                        amps: e,
                    };
                    let col = apply_local(LocalOp::Gate(g), site, &s)?;
                    v.set_column(i, &nalgebra::DVector::from_column_slice(&col.amps));
                }
                rho = &v * rho * v.adjoint();
            }
        }
        Ok(DensityMatrix {
            basis: Arc::clone(&self.basis),
            rho,
        })
    }

    /// Non-selective measurement `P0 rho P0 + P1 rho P1`.
    pub fn measure(&self, site: usize) -> Result<Self> {
        let a = self.apply_local(LocalOp::Project0, site)?;
        let b = self.apply_local(LocalOp::Project1, site)?;
        Ok(DensityMatrix {
            basis: Arc::clone(&self.basis),
            rho: a.rho + b.rho,
        })
    }
}

/// Mixture of unnormalized pure branches; a density matrix without the `dim^2` storage.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub branches: Vec<DenseState>,
}

impl Ensemble {
    pub fn pure(state: DenseState) -> Self {
        Ensemble {
            branches: vec![state],
        }
    }

    pub fn measure(&self, site: usize) -> Result<Self> {
        let mut branches = Vec::with_capacity(2 * self.branches.len());
        for b in &self.branches {
            for op in [LocalOp::Project0, LocalOp::Project1] {
                let p = apply_local(op, site, b)?;
                if p.norm_sqr() > 0.0 {
                    branches.push(p);
                }
            }
        }
        Ok(Ensemble { branches })
    }

    pub fn evolve(&self, h: &DenseHamiltonian, t: f64) -> Result<Self> {
        let branches = self
            .branches
            .iter()
            .map(|b| evolve(b, h, t))
            .collect::<Result<_>>()?;
        Ok(Ensemble { branches })
    }

    pub fn trace(&self) -> f64 {
        self.branches.iter().map(DenseState::norm_sqr).sum()
    }

    pub fn site_rdm(&self, l: usize) -> Result<(f64, Complex64)> {
        let mut x = 0.0;
        let mut y = ZERO;
        for b in &self.branches {
            let (bx, by) = b.site_rdm(l)?;
            x += bx;
            y += by;
        }
        Ok((x, y))
    }
}

/// Two-magnon eigenstates split into the bound band and the scattering continuum.
#[derive(Debug, Clone)]
pub struct BoundBand {
    pub projector: DMatrix<f64>,
    pub count: usize,
    pub scattering_count: usize,
    /// Eigenvector indices classified bound by energy but not confined to
    /// separations <= 5 with 90% weight.
    pub ambiguous: Vec<usize>,
    /// `(energy above eps0, cos P, weight at separation <= 5, bound)` per eigenvector.
    pub states: Vec<(f64, f64, f64, bool)>,
    pub basis: Arc<Basis>,
}

/// Spectral projector onto the bound band of a closed isotropic chain.
///
/// Eigenvectors are taken from `H + eta (T + T^dagger)` with `T` the lattice
/// translation; it commutes with `H`, so the eigenvectors stay exact and carry a
/// definite `cos P`. A state is bound when its energy lies below the continuum
/// edge `8J(1 - cos(P/2))` of its total momentum.
pub fn bound_band_projector(spec: &ChainSpec) -> Result<BoundBand> {
    if spec.boundary() != Boundary::Closed || spec.delta() != 1.0 {
        return Err(Error::Unsupported(
            "bound band is defined for closed isotropic chains".into(),
        ));
    }
    let n = spec.n();
    if !(4..=MAX_SECTOR_SITES).contains(&n) {
        return Err(Error::SizeLimit(format!(
            "bound band needs 4 <= N <= {MAX_SECTOR_SITES}, got {n}"
        )));
    }
    let h = build_hamiltonian(spec, Sector::Excitations(2))?;
    let basis = Arc::clone(h.basis());
    let dim = basis.dim();
    let e0 = spec.ground_energy();
    let mut shift = DMatrix::<f64>::zeros(dim, dim);
    for (i, &s) in basis.states.iter().enumerate() {
        let rotated = ((s << 1) | (s >> (n - 1))) & ((1u64 << n) - 1);
        let k = basis.index[&rotated];
        shift[(k, i)] += 0.5;
        shift[(i, k)] += 0.5;
    }
    let eta = 1e-3 * spec.j();
    let eig = SymmetricEigen::new(h.block(0) + &shift * eta);
    let hb = h.block(0);
    let sep: Vec<usize> = basis
        .states
        .iter()
        .map(|&s| {
            let a = s.trailing_zeros() as usize;
            let b = 63 - s.leading_zeros() as usize;
            (b - a).min(n - (b - a))
        })
        .collect();
    let mut projector = DMatrix::zeros(dim, dim);
    let mut states = Vec::with_capacity(dim);
    let mut ambiguous = Vec::new();
    let mut count = 0;
    for k in 0..dim {
        let v = eig.eigenvectors.column(k);
        let energy = v.dot(&(hb * v)) - e0;
        let cos_p = v.dot(&(&shift * v)).clamp(-1.0, 1.0);
        let half = ((1.0 + cos_p) / 2.0).sqrt();
        let edge = 8.0 * spec.j() * (1.0 - half);
        let near: f64 = v
            .iter()
            .zip(&sep)
            .filter(|(_, &d)| d <= 5)
            .map(|(c, _)| c * c)
            .sum();
        let bound = energy < edge - 1e-9;
        if bound {
            count += 1;
            projector += v * v.transpose();
            if near < 0.9 {
                ambiguous.push(k);
            }
        }
        states.push((energy, cos_p, near, bound));
    }
    Ok(BoundBand {
        projector,
        count,
        scattering_count: dim - count,
        ambiguous,
        states,
        basis,
    })
}
