use num_complex::Complex64;
use qdp_core::bessel::bessel_j;
use qdp_core::bethe::{
    bound_wavefunction, green2, green2_bound, green2_scattering, scattering_wavefunction,
    BoundStateParam, Green2Part, PairPropagator, RingPairPropagator, TwoMagnonResolution,
};
use qdp_core::green1::i_pow;
use qdp_core::oracle::{
    bound_band_projector, build_hamiltonian, evolve, mask_of, DenseHamiltonian, DenseState, Sector,
};
use qdp_core::{two_magnon_energy, Boundary, ChainSpec, Error};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn ring(n: usize, delta: f64) -> ChainSpec {
    ChainSpec::new(n, Boundary::Closed, 0.5, delta).unwrap()
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n)
        .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
        .collect()
}

fn ed_pair_state(h: &DenseHamiltonian, src: (usize, usize), t: f64) -> DenseState {
    let s = DenseState::from_amplitudes(h.basis(), &[(mask_of(&[src.0, src.1]), ONE)]).unwrap();
    evolve(&s, h, t).unwrap()
}

fn max_ring_error(spec: &ChainSpec, src: (usize, usize), t: f64) -> f64 {
    let h = build_hamiltonian(spec, Sector::Excitations(2)).unwrap();
    let exact = ed_pair_state(&h, src, t);
    let prop = RingPairPropagator::new(spec, RingPairPropagator::resolution_for(spec, t)).unwrap();
    let prepared = prop.prepare(&[(src, ONE)]).unwrap();
    let targets = all_pairs(spec.n());
    let vals = prop
        .evolve(&prepared, &targets, t, Green2Part::Total)
        .unwrap();
    targets
        .iter()
        .zip(&vals)
        .map(|(&(a, b), v)| (v - exact.amplitude(mask_of(&[a, b]))).norm())
        .fold(0.0, f64::max)
}

#[test]
fn forty_site_ring_inside_light_cone() {
    let spec = ring(40, 1.0);
    assert!(max_ring_error(&spec, (1, 2), 2.0) < 1e-8);
    assert!(max_ring_error(&spec, (10, 14), 3.0) < 1e-8);
    let single = green2(1, 2, 3, 4, 2.0, &spec).unwrap();
    let h = build_hamiltonian(&spec, Sector::Excitations(2)).unwrap();
    let want = ed_pair_state(&h, (1, 2), 2.0).amplitude(mask_of(&[3, 4]));
    assert!((single.value - want).norm() < 5e-3);
    assert!(single.error_estimate < 1e-6);
}

#[test]
fn anisotropic_total_needs_bound_pairs() {
    let spec = ring(30, 0.4);
    let prop =
        RingPairPropagator::new(&spec, RingPairPropagator::resolution_for(&spec, 1.0)).unwrap();
    let prepared = prop.prepare(&[((7, 9), ONE)]).unwrap();
    assert!(matches!(
        prop.evolve(&prepared, &[(8, 9)], 1.0, Green2Part::Total),
        Err(Error::Unsupported(_))
    ));
    assert!(prop
        .evolve(&prepared, &[(8, 9)], 1.0, Green2Part::Scattering)
        .is_ok());
}

#[test]
fn free_fermion_fold_is_exact_after_wrapping() {
    assert!(max_ring_error(&ring(12, 0.0), (1, 2), 4.0) < 1e-9);
    assert!(max_ring_error(&ring(8, 0.0), (1, 4), 5.0) < 1e-9);
}

#[test]
fn free_factorization_on_the_line() {
    let spec = ring(64, 0.0);
    let t = 3.0;
    let z = 4.0 * spec.j() * t;
    let amp = |x: i64, y: i64| i_pow(y - x) * bessel_j(y - x, z).unwrap();
    let res = TwoMagnonResolution::for_window(40.0, 40.0, t, spec.j());
    let prop = PairPropagator::new(&spec, res).unwrap();
    for src in [(0i64, 1i64), (-3, 4)] {
        let prepared = prop.prepare(&[(src, ONE)]).unwrap();
        let targets: Vec<(i64, i64)> = (-12..12)
            .flat_map(|a| (a + 1..13).map(move |b| (a, b)))
            .collect();
        let vals = prop
            .evolve(&prepared, &targets, t, Green2Part::Total)
            .unwrap();
        let phase = Complex64::from_polar(1.0, -spec.ground_energy() * t);
        for (&(a, b), v) in targets.iter().zip(&vals) {
            let det = amp(src.0, a) * amp(src.1, b) - amp(src.0, b) * amp(src.1, a);
            assert!((v - phase * det).norm() < 1e-6, "{src:?} -> ({a}, {b})");
        }
    }
}

#[test]
fn completeness_at_time_zero() {
    let spec = ring(16, 1.0);
    for src in [(1, 2), (3, 9)] {
        for tgt in [(1, 2), (3, 9), (2, 3), (4, 9)] {
            let v = green2(src.0, src.1, tgt.0, tgt.1, 0.0, &spec)
                .unwrap()
                .value;
            let want = if src == tgt {
                ONE
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert!((v - want).norm() < 1e-3, "{src:?} {tgt:?} {v}");
            let split = green2_bound(src.0, src.1, tgt.0, tgt.1, 0.0, &spec)
                .unwrap()
                .value
                + green2_scattering(src.0, src.1, tgt.0, tgt.1, 0.0, &spec)
                    .unwrap()
                    .value;
            assert!((split - want).norm() < 1e-3);
        }
    }
}

#[test]
fn line_norm_is_conserved() {
    let spec = ring(64, 1.0);
    let t_max = 10.0;
    let reach = 4.0 * spec.j() * t_max + 3.0 * (4.0 * spec.j() * t_max).cbrt() + 12.0;
    let w = reach.ceil() as i64;
    let res = TwoMagnonResolution::for_window(2.0 * w as f64, 2.0 * w as f64, t_max, spec.j());
    let prop = PairPropagator::new(&spec, res).unwrap();
    let prepared = prop.prepare(&[((0, 3), ONE)]).unwrap();
    let targets: Vec<(i64, i64)> = (-w..=w + 3)
        .flat_map(|a| (a + 1..=w + 3).map(move |b| (a, b)))
        .collect();
    for t in [0.0, 2.0, 5.0, 10.0] {
        let norm: f64 = prop
            .evolve(&prepared, &targets, t, Green2Part::Total)
            .unwrap()
            .iter()
            .map(|v| v.norm_sqr())
            .sum();
        assert!((norm - 1.0).abs() < 1e-3, "t={t}: {norm}");
    }
}

#[test]
fn bound_band_of_twenty_site_ring() {
    let spec = ring(20, 1.0);
    let band = bound_band_projector(&spec).unwrap();
    assert!((17..=20).contains(&band.count), "count {}", band.count);
    let p = &band.projector;
    assert!((p * p - p).amax() < 1e-10);
    let h = build_hamiltonian(&spec, Sector::Excitations(2)).unwrap();
    let hb = h.block(0);
    assert!((hb * p - p * hb).amax() < 1e-8);
    assert_eq!(band.count + band.scattering_count, 190);
}

#[test]
fn bound_part_against_projection() {
    let spec = ring(40, 1.0);
    let band = bound_band_projector(&spec).unwrap();
    let h = build_hamiltonian(&spec, Sector::Excitations(2)).unwrap();
    let project = |src: (usize, usize), tgt: (usize, usize), t: f64| {
        let s = ed_pair_state(&h, src, t);
        let row = band.basis.index_of(mask_of(&[tgt.0, tgt.1])).unwrap();
        band.projector
            .row(row)
            .iter()
            .zip(s.amplitudes())
            .map(|(&p, &a)| a * p)
            .sum::<Complex64>()
    };
    // finite-ring bound band versus infinite-line bound continuum
    for (src, tgt, t, tol) in [
        ((1, 2), (3, 4), 2.0, 2e-3),
        ((10, 12), (11, 14), 1.5, 2e-3),
        ((5, 6), (5, 6), 0.0, 1e-3),
    ] {
        let ours = green2_bound(src.0, src.1, tgt.0, tgt.1, t, &spec)
            .unwrap()
            .value;
        assert!(
            (ours - project(src, tgt, t)).norm() < tol,
            "{src:?} -> {tgt:?}"
        );
    }
    let far = green2_bound(1, 30, 1, 30, 0.0, &spec).unwrap().value;
    assert!(far.norm() < 1e-2 && project((1, 30), (1, 30), 0.0).norm() < 1e-2);
}

fn residual(spec: &ChainSpec, psi: impl Fn(i64, i64) -> Complex64, energy: f64) -> f64 {
    let h = build_hamiltonian(spec, Sector::Excitations(2)).unwrap();
    let basis = h.basis();
    let pairs: Vec<(i64, i64)> = basis
        .states()
        .iter()
        .map(|&s| (s.trailing_zeros() as i64 + 1, 64 - s.leading_zeros() as i64))
        .collect();
    let v: Vec<Complex64> = pairs.iter().map(|&(a, b)| psi(a, b)).collect();
    let hb = h.block(0);
    let n = spec.n() as i64;
    let mut worst: f64 = 0.0;
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if a < 6 || b > n - 5 {
            continue;
        }
        let hv: Complex64 = (0..v.len()).map(|k| v[k] * hb[(i, k)]).sum();
        worst = worst.max((hv - v[i] * energy).norm() / v[i].norm().max(1e-3));
    }
    worst
}

#[test]
fn scattering_states_solve_the_local_equations() {
    for delta in [1.0, 0.6, -0.3] {
        let spec = ring(40, delta);
        for (p1, p2) in [(0.4, 2.1), (-1.3, 0.2), (2.9, -2.6)] {
            let r = residual(
                &spec,
                |a, b| scattering_wavefunction(a, b, p1, p2, delta),
                two_magnon_energy(p1, p2, &spec),
            );
            assert!(r < 1e-10, "delta={delta} ({p1}, {p2}): {r:e}");
        }
    }
}

#[test]
fn bound_states_solve_the_local_equations() {
    let spec = ring(40, 1.0);
    for q in [0.3, 1.0, 2.5] {
        let param = BoundStateParam { q };
        let r = residual(
            &spec,
            |a, b| bound_wavefunction(a, b, q).unwrap(),
            param.energy(&spec),
        );
        assert!(r < 1e-10, "q={q}: {r:e}");
    }
}

#[test]
fn argument_errors() {
    let spec = ring(12, 1.0);
    assert!(matches!(
        green2(3, 3, 1, 2, 1.0, &spec),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        green2(1, 13, 1, 2, 1.0, &spec),
        Err(Error::SiteOutOfRange { .. })
    ));
    assert!(matches!(
        green2(1, 2, 1, 3, -1.0, &spec),
        Err(Error::NegativeTime(_))
    ));
    let open = ChainSpec::new(12, Boundary::Open, 0.5, 1.0).unwrap();
    assert!(matches!(
        green2(1, 2, 3, 4, 1.0, &open),
        Err(Error::Unsupported(_))
    ));
    assert!(matches!(
        green2_bound(1, 2, 3, 4, 1.0, &ring(12, 0.5)),
        Err(Error::Unsupported(_))
    ));
    assert_eq!(
        green2_bound(1, 2, 3, 4, 1.0, &ring(12, 0.0)).unwrap().value,
        Complex64::new(0.0, 0.0)
    );
    // unordered pairs are normalized
    let a = green2(2, 1, 4, 3, 1.0, &spec).unwrap();
    let b = green2(1, 2, 3, 4, 1.0, &spec).unwrap();
    assert_eq!(a.value, b.value);
}
