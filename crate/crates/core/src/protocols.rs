//! Transfer fidelity of the qubit `alpha|0> + beta|1>` encoded on site 1, with and
//! without an instantaneous local operation (projective measurement or gate) at
//! site `m`, time `t0`.
//!
//! A time exactly equal to `t0` counts as after the operation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bethe::{Green2Part, PreparedSource, RingPairPropagator, TwoMagnonResolution};
use crate::chain::{
    check_time, BlochMoments, Boundary, ChainSpec, Gate, InitialState, QdpEvent, QdpKind,
    BLOCH_MOMENTS,
};
use crate::error::{Error, Result};
use crate::green1::{GreenMethod, OneMagnonPropagator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Single-site reduced density matrix `[[1 - x, y], [y*, x]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdmElements {
    pub l: usize,
    pub t: f64,
    pub x: f64,
    pub y: Complex64,
}

impl RdmElements {
    /// Overlap with the input qubit state.
    pub fn fidelity(&self, initial: &InitialState) -> f64 {
        let (a, b) = (initial.alpha, initial.beta);
        a.norm_sqr() * (1.0 - self.x) + b.norm_sqr() * self.x + 2.0 * (a.conj() * b * self.y).re
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        (-tol..=1.0 + tol).contains(&self.x) && self.y.norm_sqr() <= self.x * (1.0 - self.x) + tol
    }
}

fn phase(e: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -e * t)
}

/// Bloch average of `|alpha|^2 (1 - |beta|^2 s) + |beta|^4 s + 2 Re(|alpha|^2 |beta|^2 c)`,
/// the per-state fidelity when the occupation is `|beta|^2 s` and the coherence is
/// `alpha beta* c*`.
fn averaged(m: &BlochMoments, s: f64, c: Complex64) -> f64 {
    m.m_a2 - m.m_a2b2 * s + m.m_b4 * s + 2.0 * m.m_a2b2 * c.re
}

fn one_magnon(spec: &ChainSpec) -> Result<OneMagnonPropagator> {
    OneMagnonPropagator::new(spec, GreenMethod::MomentumSum)
}

pub fn fidelity_free(l: usize, t: f64, spec: &ChainSpec) -> Result<f64> {
    let g = one_magnon(spec)?.amplitude(1, l, t)?;
    Ok(averaged(
        &BLOCH_MOMENTS,
        g.norm_sqr(),
        phase(spec.ground_energy(), t) * g.conj(),
    ))
}

pub fn free_rdm(l: usize, t: f64, spec: &ChainSpec, initial: &InitialState) -> Result<RdmElements> {
    let g = one_magnon(spec)?.amplitude(1, l, t)?;
    let (a, b) = (initial.alpha, initial.beta);
    Ok(RdmElements {
        l,
        t,
        x: b.norm_sqr() * g.norm_sqr(),
        y: a * b.conj() * phase(spec.ground_energy(), t) * g.conj(),
    })
}

/// Per-state free fidelity.
pub fn fidelity_free_state(
    l: usize,
    t: f64,
    spec: &ChainSpec,
    initial: &InitialState,
) -> Result<f64> {
    Ok(free_rdm(l, t, spec, initial)?.fidelity(initial))
}

/// Survive (`h`) and collapse (`k`) amplitudes of a measurement at `m`, `t0`;
/// `x = h + k` is the undisturbed amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QdpPropagators {
    pub h: Complex64,
    pub k: Complex64,
    pub x: Complex64,
}

fn check_order(t: f64, t0: f64) -> Result<()> {
    check_time(t)?;
    check_time(t0)?;
    if t < t0 {
        return Err(Error::BeforeInterruption { t, t0 });
    }
    Ok(())
}

/// Literal sum over intermediate sites `y'' != m` for `h`; `k` goes through `m`.
pub fn hk_propagators(
    y: usize,
    target: usize,
    m: usize,
    t: f64,
    t0: f64,
    spec: &ChainSpec,
) -> Result<QdpPropagators> {
    check_order(t, t0)?;
    spec.check_site(m)?;
    let prop = one_magnon(spec)?;
    let first = prop.column(y, t0)?;
    let mut h = ZERO;
    let mut k = ZERO;
    for (i, &g) in first.iter().enumerate() {
        let mid = i + 1;
        let second = prop.amplitude(mid, target, t - t0)?;
        if mid == m {
            k = g * second;
        } else {
            h += g * second;
        }
    }
    Ok(QdpPropagators { h, k, x: h + k })
}

/// Cached one-magnon data for a measurement at a fixed site and time.
#[derive(Debug, Clone)]
pub struct ProjectiveQdp {
    spec: ChainSpec,
    m: usize,
    t0: f64,
    prop: OneMagnonPropagator,
    before: Vec<Complex64>,
}

/// `h`, `k` and the undisturbed `g` for every target site at one time.
#[derive(Debug, Clone)]
pub struct ProjectiveFields {
    pub t: f64,
    pub h: Vec<Complex64>,
    pub k: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl ProjectiveQdp {
    pub fn new(spec: &ChainSpec, m: usize, t0: f64) -> Result<Self> {
        Self::with_method(spec, m, t0, GreenMethod::MomentumSum)
    }

    pub fn with_method(spec: &ChainSpec, m: usize, t0: f64, method: GreenMethod) -> Result<Self> {
        spec.check_site(m)?;
        check_time(t0)?;
        let prop = OneMagnonPropagator::new(spec, method)?;
        let before = prop.column(1, t0)?;
        Ok(ProjectiveQdp {
            spec: *spec,
            m,
            t0,
            prop,
            before,
        })
    }

    pub fn fields(&self, t: f64) -> Result<ProjectiveFields> {
        check_order(t, self.t0)?;
        let dt = t - self.t0;
        let mut survive = self.before.clone();
        survive[self.m - 1] = ZERO;
        let h = self.prop.propagate(&survive, dt)?;
        let through = self.before[self.m - 1];
        let k = self
            .prop
            .column(self.m, dt)?
            .into_iter()
            .map(|v| v * through)
            .collect();
        let g = self.prop.column(1, t)?;
        Ok(ProjectiveFields { t, h, k, g })
    }

    fn eps0(&self) -> f64 {
        self.spec.ground_energy()
    }

    pub fn fidelity_row(&self, t: f64) -> Result<Vec<f64>> {
        let f = self.fields(t)?;
        let ph = phase(self.eps0(), t);
        Ok(f.h
            .iter()
            .zip(&f.k)
            .map(|(h, k)| averaged(&BLOCH_MOMENTS, h.norm_sqr() + k.norm_sqr(), ph * h.conj()))
            .collect())
    }

    /// Projective minus free fidelity for every target site.
    pub fn delta_row(&self, t: f64) -> Result<Vec<f64>> {
        let f = self.fields(t)?;
        let back = phase(self.eps0(), t).conj();
        Ok(f.k
            .iter()
            .zip(&f.g)
            .map(|(k, g)| (k.norm_sqr() - ((back + g.conj()) * k).re) / 3.0)
            .collect())
    }

    pub fn rdm(&self, l: usize, t: f64, initial: &InitialState) -> Result<RdmElements> {
        self.spec.check_site(l)?;
        let f = self.fields(t)?;
        let (a, b) = (initial.alpha, initial.beta);
        let (h, k) = (f.h[l - 1], f.k[l - 1]);
        Ok(RdmElements {
            l,
            t,
            x: b.norm_sqr() * (h.norm_sqr() + k.norm_sqr()),
            y: a * b.conj() * phase(self.eps0(), t) * h.conj(),
        })
    }
}

pub fn fidelity_projective(l: usize, m: usize, t: f64, t0: f64, spec: &ChainSpec) -> Result<f64> {
    spec.check_site(l)?;
    Ok(ProjectiveQdp::new(spec, m, t0)?.fidelity_row(t)?[l - 1])
}

pub fn delta_fidelity_projective(
    l: usize,
    m: usize,
    t: f64,
    t0: f64,
    spec: &ChainSpec,
) -> Result<f64> {
    spec.check_site(l)?;
    Ok(ProjectiveQdp::new(spec, m, t0)?.delta_row(t)?[l - 1])
}

pub fn projective_rdm(
    l: usize,
    m: usize,
    t: f64,
    t0: f64,
    spec: &ChainSpec,
    initial: &InitialState,
) -> Result<RdmElements> {
    ProjectiveQdp::new(spec, m, t0)?.rdm(l, t, initial)
}

/// Responses of the chain to the two basis inputs after a gate at `m`, `t0`.
///
/// `vacuum_*` and `one_*` come from `|0>` (`_a`) and `|1>` (`_b`); the two-magnon
/// part, present only for the `|1>` input, is `delta * pair`.
#[derive(Debug, Clone)]
pub struct UnitaryResponse {
    pub t: f64,
    pub vacuum_a: Complex64,
    pub one_a: Vec<Complex64>,
    pub vacuum_b: Complex64,
    pub one_b: Vec<Complex64>,
    /// Two-magnon amplitudes per pair, without the `delta` factor.
    pub pair: Vec<((usize, usize), Complex64)>,
}

/// Full state `A|vac> + sum B_y |y> + sum C_{y1 y2} |y1 y2>` for one input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitaryQdpState {
    pub t: f64,
    pub vacuum: Complex64,
    pub one: Vec<Complex64>,
    pub two: Vec<((usize, usize), Complex64)>,
    pub norm: f64,
    /// Two-magnon weight implied by one-magnon unitarity, for comparison with the computed one.
    pub expected_two_weight: f64,
}

/// Gate at site `m`, time `t0`, with cached two-magnon quadrature.
#[derive(Debug, Clone)]
pub struct UnitaryQdp {
    spec: ChainSpec,
    m: usize,
    t0: f64,
    gate: Gate,
    t_max: f64,
    prop: OneMagnonPropagator,
    before: Vec<Complex64>,
    pairs: Option<(RingPairPropagator, PreparedSource)>,
}

impl UnitaryQdp {
    /// Valid for `t0 <= t <= t_max`.
    pub fn new(spec: &ChainSpec, event: &QdpEvent, t_max: f64) -> Result<Self> {
        let res = RingPairPropagator::resolution_for(spec, (t_max - event.t0).max(0.0));
        Self::with_resolution(spec, event, t_max, res)
    }

    pub fn with_resolution(
        spec: &ChainSpec,
        event: &QdpEvent,
        t_max: f64,
        res: TwoMagnonResolution,
    ) -> Result<Self> {
        if event.kind != QdpKind::LocalUnitary {
            return Err(Error::InvalidSpec(
                "unitary pipeline needs a local unitary event".into(),
            ));
        }
        event.validate(spec)?;
        check_order(t_max, event.t0)?;
        let gate = event.gate_or_identity();
        let (m, t0) = (event.site, event.t0);
        let prop = one_magnon(spec)?;
        let before = prop.column(1, t0)?;
        let pairs = if gate.delta == ZERO {
            None
        } else {
            if spec.boundary() != Boundary::Closed {
                return Err(Error::Unsupported(
                    "gates that create a second magnon need a closed chain (two-magnon integrals)"
                        .into(),
                ));
            }
            let ring = RingPairPropagator::new(spec, res)?;
            let sources: Vec<((usize, usize), Complex64)> = before
                .iter()
                .enumerate()
                .filter(|&(i, g)| i + 1 != m && *g != ZERO)
                .map(|(i, &g)| ((i + 1, m), g))
                .collect();
            let prepared = ring.prepare(&sources)?;
            Some((ring, prepared))
        };
        Ok(UnitaryQdp {
            spec: *spec,
            m,
            t0,
            gate,
            t_max,
            prop,
            before,
            pairs,
        })
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn resolution(&self) -> Option<&TwoMagnonResolution> {
        self.pairs.as_ref().map(|(r, _)| r.line().resolution())
    }

    fn check_t(&self, t: f64) -> Result<()> {
        check_order(t, self.t0)?;
        if t > self.t_max + 1e-12 {
            return Err(Error::Domain(format!(
                "time {t} beyond the prepared range {}",
                self.t_max
            )));
        }
        Ok(())
    }

    /// Two-magnon amplitudes at `targets` for the selected part, `delta` factor excluded.
    pub fn pair_amplitudes(
        &self,
        t: f64,
        targets: &[(usize, usize)],
        part: Green2Part,
    ) -> Result<Vec<Complex64>> {
        self.check_t(t)?;
        match &self.pairs {
            None => Ok(vec![ZERO; targets.len()]),
            Some((ring, prepared)) => ring.evolve(prepared, targets, t - self.t0, part),
        }
    }

    pub fn response(
        &self,
        t: f64,
        targets: &[(usize, usize)],
        part: Green2Part,
    ) -> Result<UnitaryResponse> {
        self.check_t(t)?;
        let (g, d) = (self.gate.gamma, self.gate.delta);
        let e0 = self.spec.ground_energy();
        let dt = t - self.t0;
        let from_m = self.prop.column(self.m, dt)?;
        let through = self.before[self.m - 1];
        let mut survive = self.before.clone();
        survive[self.m - 1] = ZERO;
        let h = self.prop.propagate(&survive, dt)?;
        let one_a = from_m.iter().map(|v| d * phase(e0, self.t0) * v).collect();
        let one_b = h
            .iter()
            .zip(&from_m)
            .map(|(h, v)| g * h + g.conj() * through * v)
            .collect();
        let vals = self.pair_amplitudes(t, targets, part)?;
        Ok(UnitaryResponse {
            t,
            vacuum_a: g * phase(e0, t),
            one_a,
            vacuum_b: -d.conj() * through * phase(e0, dt),
            one_b,
            pair: targets.iter().copied().zip(vals).collect(),
        })
    }

    pub fn state(&self, t: f64, initial: &InitialState) -> Result<UnitaryQdpState> {
        let n = self.spec.n();
        let targets: Vec<(usize, usize)> = (1..=n)
            .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
            .collect();
        let r = self.response(t, &targets, Green2Part::Total)?;
        let (a, b) = (initial.alpha, initial.beta);
        let vacuum = a * r.vacuum_a + b * r.vacuum_b;
        let one: Vec<Complex64> = r
            .one_a
            .iter()
            .zip(&r.one_b)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let two: Vec<((usize, usize), Complex64)> = r
            .pair
            .iter()
            .map(|&(p, v)| (p, b * self.gate.delta * v))
            .collect();
        let norm = vacuum.norm_sqr()
            + one.iter().map(|v| v.norm_sqr()).sum::<f64>()
            + two.iter().map(|(_, v)| v.norm_sqr()).sum::<f64>();
        let expected = (b * self.gate.delta).norm_sqr() * self.expected_pair_weight();
        Ok(UnitaryQdpState {
            t,
            vacuum,
            one,
            two,
            norm,
            expected_two_weight: expected,
        })
    }

    /// `sum_{y != m} |G(1 -> y, t0)|^2`.
    pub fn expected_pair_weight(&self) -> f64 {
        self.before
            .iter()
            .enumerate()
            .filter(|(i, _)| i + 1 != self.m)
            .map(|(_, g)| g.norm_sqr())
            .sum()
    }

    fn pairs_with(&self, l: usize) -> Vec<(usize, usize)> {
        (1..=self.spec.n())
            .filter(|&y| y != l)
            .map(|y| if y < l { (y, l) } else { (l, y) })
            .collect()
    }

    /// Reduced density matrix of site `l` for a given input.
    pub fn rdm(&self, l: usize, t: f64, initial: &InitialState) -> Result<RdmElements> {
        self.spec.check_site(l)?;
        let targets = self.pairs_with(l);
        let r = self.response(t, &targets, Green2Part::Total)?;
        let (a, b) = (initial.alpha, initial.beta);
        let vac = a * r.vacuum_a + b * r.vacuum_b;
        let one: Vec<Complex64> = r
            .one_a
            .iter()
            .zip(&r.one_b)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let bd = b * self.gate.delta;
        let mut x = one[l - 1].norm_sqr();
        let mut y = vac * one[l - 1].conj();
        for &((p, q), v) in &r.pair {
            let other = if p == l { q } else { p };
            let c = bd * v;
            x += c.norm_sqr();
            y += one[other - 1] * c.conj();
        }
        Ok(RdmElements { l, t, x, y })
    }

    /// Bloch-averaged fidelity of site `l`.
    pub fn fidelity(&self, l: usize, t: f64) -> Result<f64> {
        self.spec.check_site(l)?;
        let targets = self.pairs_with(l);
        let r = self.response(t, &targets, Green2Part::Total)?;
        Ok(self.average_from(l, &r))
    }

    /// `1/3 + (1/6) sum_R |M00(R) + M11(R)|^2` over configurations `R` of the other
    /// sites, with `M` the 2x2 map from input qubit to site `l`; this is the Haar
    /// average of `|<v|M|v>|^2` for normalized responses.
    fn average_from(&self, l: usize, r: &UnitaryResponse) -> f64 {
        let d = self.gate.delta;
        let mut s = (r.vacuum_a + r.one_b[l - 1]).norm_sqr();
        for &((p, q), v) in &r.pair {
            let other = if p == l { q } else { p };
            s += (r.one_a[other - 1] + d * v).norm_sqr();
        }
        1.0 / 3.0 + s / 6.0
    }

    /// Fidelity for every site at time `t`.
    pub fn fidelity_row(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.spec.n();
        let targets: Vec<(usize, usize)> = (1..=n)
            .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
            .collect();
        let full = self.response(t, &targets, Green2Part::Total)?;
        Ok((1..=n)
            .map(|l| {
                let sub = UnitaryResponse {
                    pair: full
                        .pair
                        .iter()
                        .copied()
                        .filter(|((p, q), _)| *p == l || *q == l)
                        .collect(),
                    ..full.clone()
                };
                self.average_from(l, &sub)
            })
            .collect())
    }

    /// `(|delta|^2 / 6) sum_{y != l} |pair(l, y)|^2` for the chosen part, every site.
    pub fn split_row(&self, t: f64, part: Green2Part) -> Result<Vec<f64>> {
        let n = self.spec.n();
        let targets: Vec<(usize, usize)> = (1..=n)
            .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
            .collect();
        let vals = self.pair_amplitudes(t, &targets, part)?;
        let mut row = vec![0.0; n];
        for (&(p, q), v) in targets.iter().zip(&vals) {
            row[p - 1] += v.norm_sqr();
            row[q - 1] += v.norm_sqr();
        }
        let w = self.gate.delta.norm_sqr() / 6.0;
        Ok(row.into_iter().map(|s| s * w).collect())
    }
}

pub fn unitary_qdp_state(
    event: &QdpEvent,
    t: f64,
    spec: &ChainSpec,
    initial: &InitialState,
) -> Result<UnitaryQdpState> {
    UnitaryQdp::new(spec, event, t)?.state(t, initial)
}

pub fn fidelity_unitary_qdp(l: usize, event: &QdpEvent, t: f64, spec: &ChainSpec) -> Result<f64> {
    UnitaryQdp::new(spec, event, t)?.fidelity(l, t)
}

pub fn unitary_rdm(
    l: usize,
    event: &QdpEvent,
    t: f64,
    spec: &ChainSpec,
    initial: &InitialState,
) -> Result<RdmElements> {
    UnitaryQdp::new(spec, event, t)?.rdm(l, t, initial)
}

pub fn two_magnon_split_fidelity(
    l: usize,
    event: &QdpEvent,
    t: f64,
    spec: &ChainSpec,
    part: Green2Part,
) -> Result<f64> {
    spec.check_site(l)?;
    Ok(UnitaryQdp::new(spec, event, t)?.split_row(t, part)?[l - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Free,
    ProjectiveQdp,
    UnitaryQdp,
    /// With-event minus free fidelity for the event's kind.
    Difference,
    /// Two-magnon weight carried by the bound part only.
    SplitBound,
    /// Two-magnon weight carried by the scattering part only.
    SplitScattering,
}

/// Values over a site-by-time lattice, stored time-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FidelityGrid {
    pub scenario: Scenario,
    pub event: QdpEvent,
    pub spec: ChainSpec,
    pub sites: Vec<usize>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl FidelityGrid {
    pub fn get(&self, site_index: usize, time_index: usize) -> f64 {
        self.values[time_index * self.sites.len() + site_index]
    }

    /// Largest value with its `(site, time)`.
    pub fn max(&self) -> Option<(f64, usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &v)| {
                (
                    v,
                    self.sites[i % self.sites.len()],
                    self.times[i / self.sites.len()],
                )
            })
    }

    pub fn column(&self, site_index: usize) -> Vec<f64> {
        (0..self.times.len())
            .map(|k| self.get(site_index, k))
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Evenly spaced times `start, start + step, ..` up to and including `stop`.
pub fn time_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidSpec(format!(
            "bad time range {start}..{stop} step {step}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + step * i as f64).collect())
}

fn pick(row: Vec<f64>, sites: &[usize]) -> Vec<f64> {
    sites.iter().map(|&l| row[l - 1]).collect()
}

/// Fills a grid; cells before the event time use the undisturbed evolution
/// (zero for differences and split weights).
pub fn fill_grid(
    spec: &ChainSpec,
    scenario: Scenario,
    event: &QdpEvent,
    sites: &[usize],
    times: &[f64],
) -> Result<FidelityGrid> {
    fill_grid_with(
        spec,
        scenario,
        event,
        sites,
        times,
        GreenMethod::MomentumSum,
    )
}

/// As [`fill_grid`] with a chosen one-magnon method. Gate events always use
/// mode sums, since their two-magnon part lives on the finite ring.
pub fn fill_grid_with(
    spec: &ChainSpec,
    scenario: Scenario,
    event: &QdpEvent,
    sites: &[usize],
    times: &[f64],
    method: GreenMethod,
) -> Result<FidelityGrid> {
    for &l in sites {
        spec.check_site(l)?;
    }
    for &t in times {
        check_time(t)?;
    }
    if method != GreenMethod::MomentumSum
        && scenario != Scenario::Free
        && event.kind == QdpKind::LocalUnitary
    {
        return Err(Error::Unsupported(
            "gate events need the mode-sum propagator".into(),
        ));
    }
    let free_prop = OneMagnonPropagator::new(spec, method)?;
    let e0 = spec.ground_energy();
    let free_row = |t: f64| -> Result<Vec<f64>> {
        let g = free_prop.column(1, t)?;
        Ok(g.iter()
            .map(|g| averaged(&BLOCH_MOMENTS, g.norm_sqr(), phase(e0, t) * g.conj()))
            .collect())
    };
    let needs_event = !matches!(scenario, Scenario::Free);
    if needs_event {
        event.validate(spec)?;
        if event.kind == QdpKind::None {
            return Err(Error::InvalidSpec(format!(
                "{scenario:?} grid needs a QDP event"
            )));
        }
    }
    let kind = event.kind;
    let t_max = times.iter().copied().fold(event.t0, f64::max);
    let projective = if needs_event && kind == QdpKind::Projective {
        Some(ProjectiveQdp::with_method(
            spec, event.site, event.t0, method,
        )?)
    } else {
        None
    };
    let unitary = if needs_event && kind == QdpKind::LocalUnitary {
        Some(UnitaryQdp::new(spec, event, t_max)?)
    } else {
        None
    };
    match (scenario, kind) {
        (Scenario::ProjectiveQdp, QdpKind::Projective)
        | (Scenario::UnitaryQdp, QdpKind::LocalUnitary)
        | (Scenario::Free | Scenario::Difference, _)
        | (Scenario::SplitBound | Scenario::SplitScattering, QdpKind::LocalUnitary) => {}
        _ => {
            return Err(Error::InvalidSpec(format!(
                "{scenario:?} grid does not match a {kind:?} event"
            )))
        }
    }
    let rows: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| -> Result<Vec<f64>> {
            let after = needs_event && t >= event.t0;
            let row = match scenario {
                Scenario::Free => free_row(t)?,
                Scenario::ProjectiveQdp | Scenario::UnitaryQdp if !after => free_row(t)?,
                Scenario::Difference | Scenario::SplitBound | Scenario::SplitScattering
                    if !after =>
                {
                    vec![0.0; spec.n()]
                }
                Scenario::ProjectiveQdp => projective
                    .as_ref()
                    .expect("projective event")
                    .fidelity_row(t)?,
                Scenario::UnitaryQdp => unitary.as_ref().expect("unitary event").fidelity_row(t)?,
                Scenario::Difference => match (&projective, &unitary) {
                    (Some(p), _) => p.delta_row(t)?,
                    (_, Some(u)) => {
                        let free = free_row(t)?;
                        u.fidelity_row(t)?
                            .into_iter()
                            .zip(free)
                            .map(|(a, b)| a - b)
                            .collect()
                    }
                    _ => unreachable!("event kind checked above"),
                },
                Scenario::SplitBound => unitary
                    .as_ref()
                    .expect("unitary event")
                    .split_row(t, Green2Part::Bound)?,
                Scenario::SplitScattering => unitary
                    .as_ref()
                    .expect("unitary event")
                    .split_row(t, Green2Part::Scattering)?,
            };
            Ok(pick(row, sites))
        })
        .collect::<Result<_>>()?;
    Ok(FidelityGrid {
        scenario,
        event: *event,
        spec: *spec,
        sites: sites.to_vec(),
        times: times.to_vec(),
        values: rows.into_iter().flatten().collect(),
    })
}
