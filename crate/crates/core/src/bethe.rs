//! Two-magnon propagation on the infinite line: bound and scattering contributions
//! as momentum integrals, plus image folding onto a finite ring.
//!
//! Pair coordinates are `(x1, x2)` with `x1 < x2`; the centre-of-mass label is
//! `X = x1 + x2` and the separation is `r = x2 - x1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{check_time, Boundary, ChainSpec};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, multi_graded_breaks, CompositeRule, Grading};

pub type Pair = (i64, i64);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPhase {
    pub theta: f64,
    pub p1: f64,
    pub p2: f64,
    pub delta: f64,
}

impl ScatterPhase {
    /// `e^{i theta}`.
    pub fn factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }
}

fn phase_parts(total: f64, rel: f64, delta: f64) -> (f64, f64) {
    ((0.5 * total).cos() - delta * rel.cos(), delta * rel.sin())
}

/// Two-body phase with `tan(theta/2) = delta sin k / (cos(P/2) - delta cos k)`,
/// `P = p1 + p2`, `k = (p1 - p2)/2`, reported in (-pi, pi].
pub fn theta_phase(p1: f64, p2: f64, delta: f64) -> ScatterPhase {
    let (a, b) = phase_parts(p1 + p2, 0.5 * (p1 - p2), delta);
    let theta = if b == 0.0 {
        0.0
    } else if a == 0.0 {
        PI
    } else {
        2.0 * (b / a).atan()
    };
    ScatterPhase {
        theta,
        p1,
        p2,
        delta,
    }
}

/// `(a + i b)/(a - i b)` in centre-of-mass/relative momenta; 1 where a = b = 0.
fn exchange_factor(total: f64, rel: f64, delta: f64) -> Complex64 {
    let (a, b) = phase_parts(total, rel, delta);
    if a == 0.0 && b == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let num = Complex64::new(a, b);
    num / num.conj()
}

/// Unnormalized scattering state `e^{i(p1 x1 + p2 x2)} - e^{i theta} e^{i(p1 x2 + p2 x1)}`.
pub fn scattering_wavefunction(x1: i64, x2: i64, p1: f64, p2: f64, delta: f64) -> Complex64 {
    let s = exchange_factor(p1 + p2, 0.5 * (p1 - p2), delta);
    let (x1, x2) = (x1 as f64, x2 as f64);
    Complex64::from_polar(1.0, p1 * x1 + p2 * x2)
        - s * Complex64::from_polar(1.0, p1 * x2 + p2 * x1)
}

/// Bound-pair rapidity `q`; the two rapidities are `q +- i/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundStateParam {
    pub q: f64,
}

impl BoundStateParam {
    pub fn rapidities(&self) -> (Complex64, Complex64) {
        (Complex64::new(self.q, 0.5), Complex64::new(self.q, -0.5))
    }

    /// Total momentum `2 atan(1/q)` on the branch (0, 2 pi).
    pub fn total_momentum(&self) -> f64 {
        2.0 * (1.0f64).atan2(self.q)
    }

    pub fn energy(&self, spec: &ChainSpec) -> f64 {
        spec.ground_energy() + 4.0 * spec.j() / (1.0 + self.q * self.q)
    }
}

/// Unnormalized isotropic bound-pair amplitude `(q^2/(1+q^2))^{r/2} e^{i X atan(1/q)}`.
pub fn bound_wavefunction(x1: i64, x2: i64, q: f64) -> Result<Complex64> {
    if x1 >= x2 {
        return Err(Error::Domain(format!(
            "bound amplitude needs x1 < x2, got ({x1}, {x2})"
        )));
    }
    if !q.is_finite() {
        return Err(Error::Domain("rapidity must be finite".into()));
    }
    let r = (x2 - x1) as f64;
    let ratio = q * q / (1.0 + q * q);
    let angle = (1.0 / q).atan();
    Ok(Complex64::from_polar(
        ratio.powf(0.5 * r),
        (x1 + x2) as f64 * angle,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Green2Part {
    Bound,
    Scattering,
    Total,
}

impl std::str::FromStr for Green2Part {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bound" => Ok(Green2Part::Bound),
            "scattering" => Ok(Green2Part::Scattering),
            "total" => Ok(Green2Part::Total),
            other => Err(Error::InvalidSpec(format!(
                "unknown two-magnon part '{other}'"
            ))),
        }
    }
}

/// Which scattering measure to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterForm {
    /// Full torus with measure 1/(8 pi^2).
    FullRange,
    /// Momenta restricted to `[-phi, phi]`, `phi = acos(delta)`, measure 1/(4 phi^2).
    /// Unvalidated; kept for comparison only.
    RestrictedExperimental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Green2Value {
    pub value: Complex64,
    pub source: (usize, usize),
    pub target: (usize, usize),
    pub t: f64,
    pub part: Green2Part,
    pub error_estimate: f64,
}

/// Panel sizes for the momentum integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoMagnonResolution {
    pub order: usize,
    /// Largest panel in the centre-of-mass momentum.
    pub com_width: f64,
    /// Largest panel in the relative momentum.
    pub rel_width: f64,
    /// Largest panel in the bound-pair angle.
    pub bound_width: f64,
    pub grading: Grading,
}

impl TwoMagnonResolution {
    /// Resolution for centre-of-mass offsets up to `com_offset` (difference of `X`),
    /// separations summing to at most `rel_sum`, and times up to `t_max`.
    pub fn for_window(com_offset: f64, rel_sum: f64, t_max: f64, j: f64) -> Self {
        let f_com = 0.5 * com_offset + 4.0 * j * t_max + 4.0;
        let f_rel = rel_sum + 8.0 * j * t_max + 4.0;
        let f_bound = com_offset + 4.0 * j * t_max + rel_sum.sqrt() + 4.0;
        TwoMagnonResolution {
            order: 16,
            com_width: (12.0 / f_com).min(0.3),
            rel_width: (12.0 / f_rel).min(0.3),
            bound_width: (12.0 / f_bound).min(0.2),
            grading: Grading {
                ratio: 0.25,
                levels: 10,
            },
        }
    }

    /// Finer rule used for error estimates.
    pub fn refined(&self) -> Self {
        TwoMagnonResolution {
            order: self.order + 6,
            com_width: self.com_width * 0.8,
            rel_width: self.rel_width * 0.8,
            bound_width: self.bound_width * 0.8,
            grading: Grading {
                ratio: self.grading.ratio,
                levels: self.grading.levels + 3,
            },
        }
    }
}

/// Cached momentum nodes for one chain and one resolution.
#[derive(Debug, Clone)]
pub struct PairPropagator {
    j: f64,
    delta: f64,
    eps0: f64,
    resolution: TwoMagnonResolution,
    com: CompositeRule,
    rel: CompositeRule,
    /// Row-major `[com][rel]` exchange factors and energies.
    exchange: Vec<Complex64>,
    energy: Vec<f64>,
    bound: Option<CompositeRule>,
}

/// Source amplitudes projected onto the momentum nodes; reusable across times.
#[derive(Debug, Clone)]
pub struct PreparedSource {
    scatter: Vec<Complex64>,
    bound: Vec<Complex64>,
}

fn bound_available(delta: f64) -> bool {
    delta == 1.0
}

impl PairPropagator {
    pub fn new(spec: &ChainSpec, resolution: TwoMagnonResolution) -> Result<Self> {
        let (j, delta) = (spec.j(), spec.delta());
        let mut com_centers = vec![0.0];
        if delta.abs() < 1.0 {
            let c = 2.0 * delta.acos();
            com_centers.extend([c, -c]);
        }
        let com_breaks = multi_graded_breaks(
            -PI,
            PI,
            &com_centers,
            &resolution.grading,
            resolution.com_width,
        );
        let rel_breaks =
            multi_graded_breaks(-PI, PI, &[0.0], &resolution.grading, resolution.rel_width);
        let com = CompositeRule::from_breaks(&com_breaks, resolution.order)?;
        let rel = CompositeRule::from_breaks(&rel_breaks, resolution.order)?;
        let mut exchange = Vec::with_capacity(com.len() * rel.len());
        let mut energy = Vec::with_capacity(com.len() * rel.len());
        for &big in &com.nodes {
            for &k in &rel.nodes {
                exchange.push(exchange_factor(big, k, delta));
                energy.push(8.0 * j * (delta - (0.5 * big).cos() * k.cos()));
            }
        }
        let bound = if bound_available(delta) {
            let panels = (PI / resolution.bound_width).ceil() as usize;
            Some(CompositeRule::uniform(
                -0.5 * PI,
                0.5 * PI,
                panels,
                resolution.order,
            )?)
        } else {
            None
        };
        Ok(PairPropagator {
            j,
            delta,
            eps0: spec.ground_energy(),
            resolution,
            com,
            rel,
            exchange,
            energy,
            bound,
        })
    }

    pub fn resolution(&self) -> &TwoMagnonResolution {
        &self.resolution
    }

    pub fn node_counts(&self) -> (usize, usize, usize) {
        (
            self.com.len(),
            self.rel.len(),
            self.bound.as_ref().map_or(0, |b| b.len()),
        )
    }

    fn check_part(&self, part: Green2Part) -> Result<()> {
        if part != Green2Part::Scattering && self.bound.is_none() && self.delta != 0.0 {
            return Err(Error::Unsupported(format!(
                "bound-pair contribution is implemented for anisotropy 1 only (got {})",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn prepare(&self, sources: &[(Pair, Complex64)]) -> Result<PreparedSource> {
        for &((a, b), _) in sources {
            if a >= b {
                return Err(Error::Domain(format!(
                    "source pair ({a}, {b}) is not ordered"
                )));
            }
        }
        let mk = self.rel.len();
        // conj(psi(X, r)) = e^{-i P X/2} (e^{i k r} - conj(S) e^{-i k r})
        let scatter: Vec<Complex64> = self
            .com
            .nodes
            .par_iter()
            .enumerate()
            .flat_map_iter(|(ip, &big)| {
                let mut plus = vec![ZERO; mk];
                let mut minus = vec![ZERO; mk];
                for &((a, b), amp) in sources {
                    let x = (a + b) as f64;
                    let r = (b - a) as f64;
                    let c = amp * Complex64::from_polar(1.0, -0.5 * big * x);
                    for (ik, &k) in self.rel.nodes.iter().enumerate() {
                        let e = Complex64::from_polar(1.0, k * r);
                        plus[ik] += c * e;
                        minus[ik] += c * e.conj();
                    }
                }
                let row = &self.exchange[ip * mk..(ip + 1) * mk];
                (0..mk).map(move |ik| plus[ik] - row[ik].conj() * minus[ik])
            })
            .collect();
        let bound = match &self.bound {
            Some(rule) => rule
                .nodes
                .iter()
                .map(|&th| {
                    let (s, c) = th.sin_cos();
                    sources
                        .iter()
                        .map(|&((a, b), amp)| {
                            amp * Complex64::from_polar(
                                c.powi((b - a - 1) as i32) * s,
                                -th * (a + b) as f64,
                            )
                        })
                        .sum()
                })
                .collect(),
            None => Vec::new(),
        };
        Ok(PreparedSource { scatter, bound })
    }

    /// Amplitudes at `targets` after time `t`, global phase `e^{-i eps0 t}` included.
    pub fn evolve(
        &self,
        source: &PreparedSource,
        targets: &[Pair],
        t: f64,
        part: Green2Part,
    ) -> Result<Vec<Complex64>> {
        check_time(t)?;
        self.check_part(part)?;
        for &(a, b) in targets {
            if a >= b {
                return Err(Error::Domain(format!(
                    "target pair ({a}, {b}) is not ordered"
                )));
            }
        }
        let global = Complex64::from_polar(1.0, -self.eps0 * t);
        let mut out = vec![ZERO; targets.len()];
        if part != Green2Part::Bound {
            let s = self.scatter_part(source, targets, t);
            for (o, v) in out.iter_mut().zip(s) {
                *o += v;
            }
        }
        if part != Green2Part::Scattering {
            if let Some(rule) = &self.bound {
                let b = self.bound_part(rule, source, targets, t);
                for (o, v) in out.iter_mut().zip(b) {
                    *o += v;
                }
            }
        }
        for o in &mut out {
            *o *= global;
        }
        Ok(out)
    }

    fn scatter_part(&self, source: &PreparedSource, targets: &[Pair], t: f64) -> Vec<Complex64> {
        let mk = self.rel.len();
        let mut seps: Vec<i64> = targets.iter().map(|&(a, b)| b - a).collect();
        seps.sort_unstable();
        seps.dedup();
        let norm = 1.0 / (8.0 * PI * PI);
        // phases e^{i k r} for every separation
        let rel_phase: Vec<Vec<Complex64>> = seps
            .iter()
            .map(|&r| {
                self.rel
                    .nodes
                    .iter()
                    .map(|&k| Complex64::from_polar(1.0, k * r as f64))
                    .collect()
            })
            .collect();
        // F[P][r] = sum_k w_k A(P,k) (e^{-ikr} - S e^{ikr})
        let reduced: Vec<Vec<Complex64>> = self
            .com
            .nodes
            .par_iter()
            .enumerate()
            .map(|(ip, _)| {
                let row = ip * mk;
                let weighted: Vec<(Complex64, Complex64)> = (0..mk)
                    .map(|ik| {
                        let idx = row + ik;
                        let a = source.scatter[idx]
                            * Complex64::from_polar(self.rel.weights[ik], -self.energy[idx] * t);
                        (a, a * self.exchange[idx])
                    })
                    .collect();
                rel_phase
                    .iter()
                    .map(|ph| {
                        weighted
                            .iter()
                            .zip(ph)
                            .map(|(&(a, b), &e)| a * e.conj() - b * e)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        targets
            .par_iter()
            .map(|&(a, b)| {
                let x = (a + b) as f64;
                let ir = seps.binary_search(&(b - a)).expect("separation present");
                let acc: Complex64 = self
                    .com
                    .nodes
                    .iter()
                    .zip(&self.com.weights)
                    .zip(&reduced)
                    .map(|((&big, &w), f)| f[ir] * Complex64::from_polar(w, 0.5 * big * x))
                    .sum();
                acc * norm
            })
            .collect()
    }

    fn bound_part(
        &self,
        rule: &CompositeRule,
        source: &PreparedSource,
        targets: &[Pair],
        t: f64,
    ) -> Vec<Complex64> {
        let weighted: Vec<Complex64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .zip(&source.bound)
            .map(|((&th, &w), &s)| {
                s * Complex64::from_polar(w / PI, -4.0 * self.j * th.sin().powi(2) * t)
            })
            .collect();
        targets
            .par_iter()
            .map(|&(a, b)| {
                rule.nodes
                    .iter()
                    .zip(&weighted)
                    .map(|(&th, &wv)| {
                        let (s, c) = th.sin_cos();
                        wv * Complex64::from_polar(
                            c.powi((b - a - 1) as i32) * s,
                            th * (a + b) as f64,
                        )
                    })
                    .sum()
            })
            .collect()
    }

    /// Literal restricted-range scattering integral for a single pair (experimental).
    pub fn scatter_restricted(&self, source: Pair, target: Pair, t: f64) -> Result<Complex64> {
        if self.delta.abs() >= 1.0 {
            return Err(Error::Unsupported(
                "restricted form needs |anisotropy| < 1".into(),
            ));
        }
        let phi = self.delta.acos();
        let width = self.resolution.com_width.min(self.resolution.rel_width);
        let panels = ((2.0 * phi) / width).ceil() as usize;
        let rule = CompositeRule::uniform(-phi, phi, panels, self.resolution.order)?;
        let mut acc = ZERO;
        for (&p1, &w1) in rule.nodes.iter().zip(&rule.weights) {
            for (&p2, &w2) in rule.nodes.iter().zip(&rule.weights) {
                let e = 4.0 * self.j * (2.0 * self.delta - p1.cos() - p2.cos());
                let psi_t = scattering_wavefunction(target.0, target.1, p1, p2, self.delta);
                let psi_s = scattering_wavefunction(source.0, source.1, p1, p2, self.delta);
                acc += psi_t * psi_s.conj() * Complex64::from_polar(w1 * w2, -e * t);
            }
        }
        Ok(acc / (4.0 * phi * phi) * Complex64::from_polar(1.0, -self.eps0 * t))
    }
}

/// Reach of one magnon after time `t`: beyond this the amplitude is negligible.
pub fn light_cone(j: f64, t: f64) -> f64 {
    let z = 4.0 * j * t;
    z + 3.0 * z.cbrt() + 12.0
}

/// Folds infinite-line pair amplitudes onto a ring of `n` sites by summing the
/// images of each target pair (translations by multiples of `n` of either particle).
#[derive(Debug, Clone)]
pub struct RingPairPropagator {
    n: usize,
    line: PairPropagator,
}

impl RingPairPropagator {
    pub fn new(spec: &ChainSpec, resolution: TwoMagnonResolution) -> Result<Self> {
        if spec.boundary() != Boundary::Closed {
            return Err(Error::Unsupported(
                "two-magnon momentum integrals need a closed chain".into(),
            ));
        }
        Ok(RingPairPropagator {
            n: spec.n(),
            line: PairPropagator::new(spec, resolution)?,
        })
    }

    /// Resolution large enough for any pair on the ring up to time `t_max`.
    pub fn resolution_for(spec: &ChainSpec, t_max: f64) -> TwoMagnonResolution {
        let n = spec.n() as f64;
        let cone = light_cone(spec.j(), t_max);
        let span = 2.0 * (n + cone);
        TwoMagnonResolution::for_window(span, span, t_max, spec.j())
    }

    pub fn line(&self) -> &PairPropagator {
        &self.line
    }

    pub fn prepare(&self, sources: &[((usize, usize), Complex64)]) -> Result<PreparedSource> {
        let lifted: Vec<(Pair, Complex64)> = sources
            .iter()
            .map(|&((a, b), amp)| {
                let (a, b) = ordered(a, b)?;
                check_ring_site(a, self.n)?;
                check_ring_site(b, self.n)?;
                Ok(((a as i64, b as i64), amp))
            })
            .collect::<Result<_>>()?;
        self.line.prepare(&lifted)
    }

    /// Lifts of ring pair `(y1, y2)` inside the window `[lo, hi]` of line sites,
    /// with sign `(-1)^floor(separation / N)`. The sign makes the fold exact for
    /// free fermions (anisotropy 0); with interactions it is an approximation once
    /// amplitudes wrap the ring.
    fn images(&self, y1: usize, y2: usize, lo: i64, hi: i64) -> Vec<(Pair, f64)> {
        let n = self.n as i64;
        let (y1, y2) = (y1 as i64, y2 as i64);
        let ws = |y: i64| (lo - y).div_euclid(n)..=(hi - y).div_euclid(n) + 1;
        let mut out = Vec::new();
        for w1 in ws(y1) {
            let a = y1 + w1 * n;
            if a < lo || a > hi {
                continue;
            }
            for w2 in ws(y2) {
                let b = y2 + w2 * n;
                if b < lo || b > hi {
                    continue;
                }
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                let sign = if ((b - a) / n) % 2 == 0 { 1.0 } else { -1.0 };
                out.push(((a, b), sign));
            }
        }
        out
    }

    /// Ring amplitudes at ordered `targets` after time `t`, for sources spanning sites `1..=N`.
    pub fn evolve(
        &self,
        source: &PreparedSource,
        targets: &[(usize, usize)],
        t: f64,
        part: Green2Part,
    ) -> Result<Vec<Complex64>> {
        let cone = light_cone(self.line.j, t).ceil() as i64;
        let (lo, hi) = (1 - cone, self.n as i64 + cone);
        let mut lifted = Vec::new();
        let mut owner = Vec::new();
        for (i, &(a, b)) in targets.iter().enumerate() {
            let (a, b) = ordered(a, b)?;
            check_ring_site(a, self.n)?;
            check_ring_site(b, self.n)?;
            for (p, sign) in self.images(a, b, lo, hi) {
                lifted.push(p);
                owner.push((i, sign));
            }
        }
        let vals = self.line.evolve(source, &lifted, t, part)?;
        let mut out = vec![ZERO; targets.len()];
        for ((i, sign), v) in owner.into_iter().zip(vals) {
            out[i] += v * sign;
        }
        Ok(out)
    }
}

fn check_ring_site(x: usize, n: usize) -> Result<()> {
    if x == 0 || x > n {
        Err(Error::SiteOutOfRange { site: x, n })
    } else {
        Ok(())
    }
}

/// Normalizes a pair to `x1 < x2`.
pub fn ordered(a: usize, b: usize) -> Result<(usize, usize)> {
    match a.cmp(&b) {
        std::cmp::Ordering::Less => Ok((a, b)),
        std::cmp::Ordering::Greater => Ok((b, a)),
        std::cmp::Ordering::Equal => {
            Err(Error::Domain(format!("two magnons cannot share site {a}")))
        }
    }
}

/// Options for single-element evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Green2Options {
    pub tol: f64,
    pub form: ScatterForm,
}

impl Default for Green2Options {
    fn default() -> Self {
        Green2Options {
            tol: 1e-6,
            form: ScatterForm::FullRange,
        }
    }
}

/// Two-magnon propagator element on a closed chain, pairs folded onto the ring.
pub fn green2_with(
    source: (usize, usize),
    target: (usize, usize),
    t: f64,
    spec: &ChainSpec,
    part: Green2Part,
    options: &Green2Options,
) -> Result<Green2Value> {
    check_time(t)?;
    let source = ordered(source.0, source.1)?;
    let target = ordered(target.0, target.1)?;
    if spec.boundary() != Boundary::Closed {
        return Err(Error::Unsupported(
            "two-magnon momentum integrals need a closed chain".into(),
        ));
    }
    check_ring_site(source.1, spec.n())?;
    check_ring_site(target.1, spec.n())?;
    if options.form == ScatterForm::RestrictedExperimental {
        if part != Green2Part::Scattering {
            return Err(Error::Unsupported(
                "restricted form covers the scattering part only".into(),
            ));
        }
        let res = RingPairPropagator::resolution_for(spec, t);
        let prop = PairPropagator::new(spec, res)?;
        let value = prop.scatter_restricted(
            (source.0 as i64, source.1 as i64),
            (target.0 as i64, target.1 as i64),
            t,
        )?;
        let fine = PairPropagator::new(spec, res.refined())?.scatter_restricted(
            (source.0 as i64, source.1 as i64),
            (target.0 as i64, target.1 as i64),
            t,
        )?;
        return Ok(Green2Value {
            value: fine,
            source,
            target,
            t,
            part,
            error_estimate: (fine - value).norm(),
        });
    }
    let res = RingPairPropagator::resolution_for(spec, t);
    let eval = |res: TwoMagnonResolution| -> Result<Complex64> {
        let ring = RingPairPropagator::new(spec, res)?;
        let prepared = ring.prepare(&[(source, Complex64::new(1.0, 0.0))])?;
        Ok(ring.evolve(&prepared, &[target], t, part)?[0])
    };
    let coarse = eval(res)?;
    let fine = eval(res.refined())?;
    let error_estimate = (fine - coarse).norm();
    if error_estimate > options.tol {
        return Err(Error::NonConvergence {
            achieved: error_estimate,
            requested: options.tol,
        });
    }
    Ok(Green2Value {
        value: fine,
        source,
        target,
        t,
        part,
        error_estimate,
    })
}

pub fn green2_scattering(
    x1: usize,
    x2: usize,
    y1: usize,
    y2: usize,
    t: f64,
    spec: &ChainSpec,
) -> Result<Green2Value> {
    green2_with(
        (x1, x2),
        (y1, y2),
        t,
        spec,
        Green2Part::Scattering,
        &Green2Options::default(),
    )
}

pub fn green2(
    x1: usize,
    x2: usize,
    y1: usize,
    y2: usize,
    t: f64,
    spec: &ChainSpec,
) -> Result<Green2Value> {
    green2_with(
        (x1, x2),
        (y1, y2),
        t,
        spec,
        Green2Part::Total,
        &Green2Options::default(),
    )
}

/// Bound contribution by adaptive quadrature of the single-angle integral,
/// summed over the ring images of the target.
pub fn green2_bound(
    x1: usize,
    x2: usize,
    y1: usize,
    y2: usize,
    t: f64,
    spec: &ChainSpec,
) -> Result<Green2Value> {
    green2_bound_tol(x1, x2, y1, y2, t, spec, Green2Options::default().tol)
}

#[allow(clippy::too_many_arguments)]
pub fn green2_bound_tol(
    x1: usize,
    x2: usize,
    y1: usize,
    y2: usize,
    t: f64,
    spec: &ChainSpec,
    tol: f64,
) -> Result<Green2Value> {
    check_time(t)?;
    let source = ordered(x1, x2)?;
    let target = ordered(y1, y2)?;
    if spec.boundary() != Boundary::Closed {
        return Err(Error::Unsupported(
            "two-magnon momentum integrals need a closed chain".into(),
        ));
    }
    if !bound_available(spec.delta()) {
        if spec.delta() == 0.0 {
            return Ok(Green2Value {
                value: ZERO,
                source,
                target,
                t,
                part: Green2Part::Bound,
                error_estimate: 0.0,
            });
        }
        return Err(Error::Unsupported(
            "bound-pair contribution is implemented for anisotropy 1 only".into(),
        ));
    }
    check_ring_site(source.1, spec.n())?;
    check_ring_site(target.1, spec.n())?;
    let n = spec.n() as i64;
    let cone = light_cone(spec.j(), t).ceil() as i64;
    let ring = RingPairPropagator::new(
        spec,
        TwoMagnonResolution::for_window(1.0, 1.0, 0.0, spec.j()),
    )?;
    // same window as the folded total so the parts add up
    let images = ring.images(target.0, target.1, 1 - cone, n + cone);
    let (sx, sr) = ((source.0 + source.1) as i64, (source.1 - source.0) as i64);
    let four_j_t = 4.0 * spec.j() * t;
    let mut value = ZERO;
    let mut error = 0.0;
    for ((a, b), sign) in images {
        let sum = sr + (b - a);
        let shift = (a + b - sx) as f64;
        let panels = (four_j_t + shift.abs() + (sum as f64).sqrt()).ceil() as usize / 2 + 4;
        let r = adaptive(
            |th: f64| {
                let (s, c) = th.sin_cos();
                Complex64::from_polar(
                    s * s * c.powi((sum - 2) as i32) / PI,
                    th * shift - four_j_t * s * s,
                )
            },
            -0.5 * PI,
            0.5 * PI,
            panels,
            12,
            tol * 1e-2,
        )?;
        value += r.value * sign;
        error += r.error;
    }
    if error > tol {
        return Err(Error::NonConvergence {
            achieved: error,
            requested: tol,
        });
    }
    value *= Complex64::from_polar(1.0, -spec.ground_energy() * t);
    Ok(Green2Value {
        value,
        source,
        target,
        t,
        part: Green2Part::Bound,
        error_estimate: error,
    })
}
