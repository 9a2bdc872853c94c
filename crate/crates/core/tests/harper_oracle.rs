use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qdp_core::bessel::bessel_j;
use qdp_core::harper::{
    detector_frames, first_passage, floquet_step, propagate, qdp_and_detect, spread_metric,
    HarperSpec,
};
use qdp_core::{Boundary, InitialState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn expm_hermitian(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        eig.eigenvalues
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * t)),
    ));
    &v * d * v.adjoint()
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn potential(spec: &HarperSpec) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        spec.n(),
        (1..=spec.n())
            .map(|j| spec.g() * (2.0 * PI * j as f64 * spec.eta() / spec.n() as f64).cos()),
    ))
}

fn power(u: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let mut p = DMatrix::identity(u.nrows(), u.ncols());
    for _ in 0..n {
        p = u * p;
    }
    p
}

#[test]
fn step_against_dense_exponential() {
    let spec = HarperSpec::new(100, 1.0, SQRT_2, 0.1, Boundary::Closed).unwrap();
    let hop = expm_hermitian(&spec.hopping(), spec.tau());
    let kick = DMatrix::from_diagonal(&DVector::from_iterator(
        100,
        (1..=100).map(|j| Complex64::from_polar(1.0, -spec.kick_angle(j))),
    ));
    let step = floquet_step(&spec);
    let err = max_diff(&step.matrix, &(hop * kick));
    assert!(err < 1e-12, "{err}");
    assert!(step.unitarity_error() < 1e-12);
}

#[test]
fn free_hopping_commutes() {
    for b in [Boundary::Open, Boundary::Closed] {
        let spec = HarperSpec::new(15, 0.0, SQRT_2, 0.3, b).unwrap();
        let want = expm_hermitian(&spec.hopping(), 7.0 * 0.3);
        let got = power(&floquet_step(&spec).matrix, 7);
        assert!(max_diff(&got, &want) < 1e-12);
    }
}

#[test]
fn free_ring_is_a_bessel_sum() {
    // exp(-i t hop) on a ring: sum over windings of (-i)^d J_d(2t)
    let n = 11;
    let tau = 0.25;
    let kicks = 12;
    let t = tau * kicks as f64;
    let spec = HarperSpec::new(n, 0.0, SQRT_2, tau, Boundary::Closed).unwrap();
    let u = power(&floquet_step(&spec).matrix, kicks);
    for a in 0..n {
        for b in 0..n {
            let mut want = ZERO;
            for w in -8i64..=8 {
                let d = b as i64 - a as i64 + w * n as i64;
                want += Complex64::new(0.0, -1.0).powi(d.abs() as i32)
                    * bessel_j(d.abs(), 2.0 * t).unwrap();
            }
            assert!((u[(a, b)] - want).norm() < 1e-12);
        }
    }
}

#[test]
fn trotter_ladder_is_first_order() {
    let t = 2.0;
    let mut errs = Vec::new();
    for k in 0..4 {
        let kicks = 20usize << k;
        let tau = t / kicks as f64;
        let spec = HarperSpec::new(12, 1.0, SQRT_2, tau, Boundary::Closed).unwrap();
        let want = expm_hermitian(&(spec.hopping() + potential(&spec)), t);
        errs.push(max_diff(&power(&floquet_step(&spec).matrix, kicks), &want));
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.8..2.2).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn norm_is_conserved() {
    let spec = HarperSpec::with_defaults(40, 2.0, 0.7).unwrap();
    let s = InitialState::from_population(0.3).unwrap();
    for kicks in [1, 10, 150] {
        let out = propagate(&spec, kicks, &s).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        assert_eq!(out.vacuum, s.alpha);
    }
}

// Jordan-Wigner Fock-space model: bit j-1 of the index is the occupation of site j.
struct Fock {
    n: usize,
}

impl Fock {
    fn dim(&self) -> usize {
        1 << self.n
    }

    // c_j^dagger |s>, with the string over sites below j
    fn create(&self, j: usize, s: usize) -> Option<(usize, f64)> {
        let bit = 1 << (j - 1);
        if s & bit != 0 {
            return None;
        }
        let sign = if (s & (bit - 1)).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        Some((s | bit, sign))
    }

    fn annihilate(&self, j: usize, s: usize) -> Option<(usize, f64)> {
        let bit = 1 << (j - 1);
        if s & bit == 0 {
            return None;
        }
        let sign = if (s & (bit - 1)).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        Some((s & !bit, sign))
    }

    fn hopping(&self, boundary: Boundary) -> DMatrix<f64> {
        let mut bonds: Vec<(usize, usize)> = (1..self.n).map(|j| (j, j + 1)).collect();
        if boundary == Boundary::Closed {
            bonds.push((self.n, 1));
        }
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for s in 0..self.dim() {
            for &(a, b) in &bonds {
                for (from, to) in [(b, a), (a, b)] {
                    if let Some((s1, e1)) = self.annihilate(from, s) {
                        if let Some((s2, e2)) = self.create(to, s1) {
                            h[(s2, s)] += e1 * e2;
                        }
                    }
                }
            }
        }
        h
    }

    fn step(&self, spec: &HarperSpec) -> DMatrix<Complex64> {
        let hop = expm_hermitian(&self.hopping(spec.boundary()), spec.tau());
        let kick = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|s| {
                let angle: f64 = (1..=self.n)
                    .filter(|j| s >> (j - 1) & 1 == 1)
                    .map(|j| spec.kick_angle(j))
                    .sum();
                Complex64::from_polar(1.0, -angle)
            }),
        ));
        hop * kick
    }

    fn project(&self, site: usize, occupied: bool, v: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|s| {
                if (s >> (site - 1) & 1 == 1) == occupied {
                    v[s]
                } else {
                    ZERO
                }
            }),
        )
    }

    // (<1|rho_l|1>, <0|rho_l|1>)
    fn site_rdm(&self, l: usize, v: &DVector<Complex64>) -> (f64, Complex64) {
        let bit = 1 << (l - 1);
        let mut x = 0.0;
        let mut y = ZERO;
        for s in 0..self.dim() {
            if s & bit != 0 {
                x += v[s].norm_sqr();
            } else {
                y += v[s] * v[s | bit].conj();
            }
        }
        (x, y)
    }
}

#[test]
fn single_particle_sector_matches_fock_space() {
    let n = 10;
    let fock = Fock { n };
    let initial = InitialState::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
    for boundary in [Boundary::Open, Boundary::Closed] {
        let spec = HarperSpec::new(n, 1.7, SQRT_2, 0.45, boundary).unwrap();
        let u = fock.step(&spec);
        let (m, n0, n_max) = (4, 3, 9);
        let mut psi = DVector::from_element(fock.dim(), ZERO);
        psi[0] = initial.alpha;
        psi[1] = initial.beta;
        let mut free = psi.clone();
        for _ in 0..n0 {
            psi = &u * psi;
        }
        let mut empty = fock.project(m, false, &psi);
        let mut full = fock.project(m, true, &psi);
        let frames = detector_frames(&spec, m, n0, n_max, &initial).unwrap();
        for _ in 0..n0 {
            free = &u * free;
        }
        for frame in &frames {
            for l in 1..=n {
                let (xa, ya) = fock.site_rdm(l, &empty);
                let (xb, yb) = fock.site_rdm(l, &full);
                let (x0, _) = fock.site_rdm(l, &free);
                assert!((frame.x_tilde[l - 1] - xa - xb).abs() < 1e-12);
                assert!((frame.y_tilde[l - 1] - ya - yb).norm() < 1e-12);
                assert!((frame.x[l - 1] - x0).abs() < 1e-12);
            }
            empty = &u * empty;
            full = &u * full;
            free = &u * free;
        }
    }
}

#[test]
fn detector_sums_to_zero() {
    let spec = HarperSpec::with_defaults(60, 1.0, 0.3).unwrap();
    let s = InitialState::from_population(0.5).unwrap();
    for frame in detector_frames(&spec, 1, 5, 120, &s).unwrap() {
        assert!(frame.f.iter().sum::<f64>().abs() < 1e-10);
        for l in 0..60 {
            let (x, y) = (frame.x_tilde[l], frame.y_tilde[l]);
            // RDM stays a positive matrix
            assert!(y.norm_sqr() <= x * (1.0 - x) + 1e-12);
        }
    }
}

#[test]
fn signal_front_has_finite_speed_when_kicks_are_fast() {
    let spec = HarperSpec::with_defaults(100, 1.0, 0.1).unwrap();
    let s = InitialState::from_population(0.5).unwrap();
    let frames = detector_frames(&spec, 1, 5, 305, &s).unwrap();
    // front = farthest site with a visible signal
    let front = |k: usize| {
        (0..100)
            .rev()
            .find(|&l| frames[k].f[l].abs() > 1e-3)
            .unwrap_or(0)
    };
    let fronts: Vec<usize> = [100, 200, 300].iter().map(|&k| front(k)).collect();
    assert!(fronts[0] < fronts[1] && fronts[1] < fronts[2], "{fronts:?}");
    assert!(fronts[2] < 99);
}

#[test]
fn localization_narrows_the_profile() {
    let s = InitialState::from_population(0.75).unwrap();
    let width = |g: f64| {
        let spec = HarperSpec::with_defaults(100, g, 0.1).unwrap();
        let out = propagate(&spec, 300, &s).unwrap();
        spread_metric(&out.amps.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>()).unwrap()
    };
    let (loose, tight) = (width(1.0), width(3.0));
    assert!(tight < loose, "{tight} vs {loose}");
}

#[test]
fn slow_kicks_reach_the_far_end_quickly() {
    let s = InitialState::from_population(0.5).unwrap();
    let pass = |tau: f64| {
        let spec = HarperSpec::with_defaults(100, 1.0, tau).unwrap();
        first_passage(&spec, 1, 5, 100, 1e-3, 2000, &s).unwrap()
    };
    let fast = pass(0.9).expect("signal at tau 0.9");
    let slow = pass(0.1).expect("signal at tau 0.1");
    assert!(4 * fast < slow, "{fast} vs {slow}");
}

#[test]
fn qdp_readout_matches_last_frame() {
    let spec = HarperSpec::with_defaults(20, 1.0, 0.2).unwrap();
    let s = InitialState::from_population(0.5).unwrap();
    let one = qdp_and_detect(&spec, 2, 3, 17, &s).unwrap();
    let all = detector_frames(&spec, 2, 3, 17, &s).unwrap();
    assert_eq!(one.f, all.last().unwrap().f);
    assert_eq!(one.kicks, 17);
}
