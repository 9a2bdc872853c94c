//! Oracle baselines frozen as JSON records under `tests/golden/`.
//!
//! `QDP_BLESS_GOLDEN=1 cargo test --test golden_files` rewrites them from the
//! dense oracle. A normal run checks both that the oracle still reproduces the
//! frozen numbers and that the analytic code agrees within each record's tolerance.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use qdp_core::bethe::green2;
use qdp_core::golden::GoldenRecord;
use qdp_core::oracle::{build_hamiltonian, evolve, mask_of, DenseState, Ensemble, Sector};
use qdp_core::protocols::ProjectiveQdp;
use qdp_core::{green1, Boundary, ChainSpec, GreenMethod, InitialState};
use serde_json::json;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ORACLE_DRIFT: f64 = 1e-12;

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"))
}

/// Writes the record when blessing, otherwise loads it and checks the oracle has not moved.
fn frozen(
    name: &str,
    inputs: BTreeMap<String, serde_json::Value>,
    oracle: &[Complex64],
    tolerance: f64,
) -> GoldenRecord {
    let file = path(name);
    if std::env::var_os("QDP_BLESS_GOLDEN").is_some() {
        let mut rec = GoldenRecord::new(inputs, oracle, tolerance);
        rec.metadata
            .insert("oracle".into(), "dense exact diagonalization".into());
        std::fs::create_dir_all(file.parent().unwrap()).unwrap();
        std::fs::write(&file, rec.encode().unwrap()).unwrap();
        return rec;
    }
    let text = std::fs::read_to_string(&file).unwrap_or_else(|e| panic!("{}: {e}", file.display()));
    let rec = GoldenRecord::decode(&text).unwrap();
    assert_eq!(rec.inputs, inputs, "{name}: inputs changed");
    let drift = rec.max_deviation(oracle).unwrap();
    assert!(drift < ORACLE_DRIFT, "{name}: oracle drifted by {drift:e}");
    rec
}

fn inputs(pairs: &[(&str, serde_json::Value)]) -> BTreeMap<String, serde_json::Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

#[test]
fn one_magnon_open_twelve() {
    let spec = ChainSpec::with_defaults(12, Boundary::Open).unwrap();
    let times = [0.5, 1.0, 2.0, 5.0];
    let h = build_hamiltonian(&spec, Sector::Excitations(1)).unwrap();
    let start = DenseState::from_amplitudes(h.basis(), &[(mask_of(&[1]), ONE)]).unwrap();
    let mut oracle = Vec::new();
    let mut ours = Vec::new();
    for t in times {
        let s = evolve(&start, &h, t).unwrap();
        for y in 1..=12 {
            oracle.push(s.amplitude(mask_of(&[y])));
            ours.push(
                green1(1, y, t, &spec, GreenMethod::MomentumSum)
                    .unwrap()
                    .value,
            );
        }
    }
    let rec = frozen(
        "green1_open12",
        inputs(&[
            ("n", json!(12)),
            ("boundary", json!("open")),
            ("j", json!(0.5)),
            ("delta", json!(1.0)),
            ("source", json!(1)),
            ("times", json!(times)),
        ]),
        &oracle,
        1e-10,
    );
    rec.check(&ours).unwrap();
}

#[test]
fn two_magnon_ring_forty() {
    let spec = ChainSpec::with_defaults(40, Boundary::Closed).unwrap();
    let targets = [(3, 4), (2, 3), (1, 3), (4, 6), (2, 5)];
    let h = build_hamiltonian(&spec, Sector::Excitations(2)).unwrap();
    let start = DenseState::from_amplitudes(h.basis(), &[(mask_of(&[1, 2]), ONE)]).unwrap();
    let s = evolve(&start, &h, 2.0).unwrap();
    let oracle: Vec<Complex64> = targets
        .iter()
        .map(|&(a, b)| s.amplitude(mask_of(&[a, b])))
        .collect();
    let ours: Vec<Complex64> = targets
        .iter()
        .map(|&(a, b)| green2(1, 2, a, b, 2.0, &spec).unwrap().value)
        .collect();
    let rec = frozen(
        "green2_ring40",
        inputs(&[
            ("n", json!(40)),
            ("boundary", json!("closed")),
            ("j", json!(0.5)),
            ("delta", json!(1.0)),
            ("source", json!([1, 2])),
            ("targets", json!(targets)),
            ("t", json!(2.0)),
        ]),
        &oracle,
        5e-3,
    );
    rec.check(&ours).unwrap();
}

#[test]
fn projective_mini_grid() {
    let spec = ChainSpec::with_defaults(12, Boundary::Open).unwrap();
    let (m, t0) = (5, 1.5);
    let times = [1.5, 2.5, 4.0, 6.0];
    let h = build_hamiltonian(&spec, Sector::UpTo(1)).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // octahedron of input states, exact for the Bloch average
    let states: Vec<InitialState> = [
        (c(1.0, 0.0), c(0.0, 0.0)),
        (c(0.0, 0.0), c(1.0, 0.0)),
        (c(r, 0.0), c(r, 0.0)),
        (c(r, 0.0), c(-r, 0.0)),
        (c(r, 0.0), c(0.0, r)),
        (c(r, 0.0), c(0.0, -r)),
    ]
    .into_iter()
    .map(|(a, b)| InitialState::new(a, b).unwrap())
    .collect();
    let q = ProjectiveQdp::new(&spec, m, t0).unwrap();
    let mut oracle = Vec::new();
    let mut ours = Vec::new();
    for t in times {
        let ens: Vec<Ensemble> = states
            .iter()
            .map(|s| {
                let e = DenseState::from_amplitudes(
                    h.basis(),
                    &[(0, s.alpha), (mask_of(&[1]), s.beta)],
                )
                .unwrap();
                Ensemble::pure(evolve(&e, &h, t0).unwrap())
                    .measure(m)
                    .unwrap()
                    .evolve(&h, t - t0)
                    .unwrap()
            })
            .collect();
        let row = q.fidelity_row(t).unwrap();
        for l in 1..=12 {
            let mut avg = 0.0;
            for (s, e) in states.iter().zip(&ens) {
                let (x, y) = e.site_rdm(l).unwrap();
                avg += (s.alpha.norm_sqr() * (1.0 - x)
                    + s.beta.norm_sqr() * x
                    + 2.0 * (s.alpha.conj() * s.beta * y).re)
                    / 6.0;
            }
            oracle.push(Complex64::new(avg, 0.0));
            ours.push(Complex64::new(row[l - 1], 0.0));
        }
    }
    let rec = frozen(
        "projective_open12",
        inputs(&[
            ("n", json!(12)),
            ("boundary", json!("open")),
            ("j", json!(0.5)),
            ("delta", json!(1.0)),
            ("site", json!(m)),
            ("t0", json!(t0)),
            ("times", json!(times)),
        ]),
        &oracle,
        1e-8,
    );
    rec.check(&ours).unwrap();
}
