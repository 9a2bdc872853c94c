use num_complex::Complex64;
use qdp_core::oracle::{build_hamiltonian, evolve, mask_of, DenseState, Sector};
use qdp_core::{dispersion_one_magnon, green1, momentum_grid, Boundary, ChainSpec, GreenMethod};

fn ed_column(spec: &ChainSpec, source: usize, t: f64) -> Vec<Complex64> {
    let h = build_hamiltonian(spec, Sector::Excitations(1)).unwrap();
    let s =
        DenseState::from_amplitudes(h.basis(), &[(mask_of(&[source]), Complex64::new(1.0, 0.0))])
            .unwrap();
    let s = evolve(&s, &h, t).unwrap();
    (1..=spec.n()).map(|y| s.amplitude(mask_of(&[y]))).collect()
}

#[test]
fn calibration_open_twelve() {
    let spec = ChainSpec::with_defaults(12, Boundary::Open).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.5, 1.0, 2.0, 5.0] {
        for x in 1..=12 {
            let col = ed_column(&spec, x, t);
            for (i, want) in col.iter().enumerate() {
                let got = green1(x, i + 1, t, &spec, GreenMethod::MomentumSum)
                    .unwrap()
                    .value;
                worst = worst.max((got - want).norm());
            }
        }
    }
    assert!(worst <= 1e-10, "worst {worst:e}");
}

#[test]
fn frozen_nearest_neighbour_amplitude() {
    // exact-diagonalization value of the 1 -> 2 amplitude, open N = 12, t = 1
    let spec = ChainSpec::with_defaults(12, Boundary::Open).unwrap();
    let oracle = ed_column(&spec, 1, 1.0)[1];
    let frozen = Complex64::new(FROZEN_RE, FROZEN_IM);
    assert!(
        (oracle - frozen).norm() < 1e-13,
        "oracle moved: {oracle:.17e}"
    );
    let got = green1(1, 2, 1.0, &spec, GreenMethod::MomentumSum)
        .unwrap()
        .value;
    assert!((got - frozen).norm() < 1e-12);
}

const FROZEN_RE: f64 = 5.327_191_751_544_978e-1;
const FROZEN_IM: f64 = -4.163_095_435_538_982_6e-1;

#[test]
fn ring_and_anisotropic_chains() {
    for (boundary, delta) in [
        (Boundary::Closed, 1.0),
        (Boundary::Closed, 0.3),
        (Boundary::Open, 0.0),
        (Boundary::Open, -0.7),
    ] {
        let spec = ChainSpec::new(9, boundary, 0.8, delta).unwrap();
        for t in [0.3, 2.7] {
            let col = ed_column(&spec, 4, t);
            for (i, want) in col.iter().enumerate() {
                let got = green1(4, i + 1, t, &spec, GreenMethod::MomentumSum)
                    .unwrap()
                    .value;
                assert!(
                    (got - want).norm() < 1e-11,
                    "{boundary} delta={delta} t={t} y={}",
                    i + 1
                );
            }
        }
    }
}

#[test]
fn ring_dispersion_matches_spectrum() {
    let spec = ChainSpec::with_defaults(10, Boundary::Closed).unwrap();
    let h = build_hamiltonian(&spec, Sector::Excitations(1)).unwrap();
    let spectrum = h.eigenvalues(0);
    let mut predicted: Vec<f64> = momentum_grid(&spec)
        .iter()
        .map(|&(p, _)| dispersion_one_magnon(p, &spec))
        .collect();
    predicted.sort_by(f64::total_cmp);
    for (a, b) in spectrum.iter().zip(&predicted) {
        assert!((a - b).abs() < 1e-12);
    }
    // band bottom sits 2 above the polarized energy at J = 1/2, delta = 1
    assert!((spectrum[0] - (spec.ground_energy() + 0.0)).abs() < 1e-12);
    let xx = ChainSpec::new(10, Boundary::Closed, 0.5, 0.0).unwrap();
    assert!((dispersion_one_magnon(0.0, &xx) - (xx.ground_energy() - 2.0)).abs() < 1e-15);
}
