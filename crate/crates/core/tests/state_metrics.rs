mod common;

use common::{c, charpoly, werner_matrix, werner_tangle, wootters_tangle, M4};
use eacode::qmath::{ComplexMatrix, C64};
use eacode::states::{
    concurrence, fidelity, fidelity_with_pure, phi_plus, phi_plus_ket, purity, tangle, werner,
    DensityMatrix,
};
use proptest::prelude::*;

/// G G† / Tr(G G†) from 32 raw numbers.
fn random_state(raw: &[f64]) -> DensityMatrix {
    let data = raw.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
    let g = ComplexMatrix::from_row_major(data).unwrap();
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let m = m.scale_real(1.0 / tr);
    DensityMatrix::new((&m + &m.adjoint()).scale_real(0.5)).unwrap()
}

fn to_array(m: &ComplexMatrix) -> M4 {
    let mut out = [[c(0.0); 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m.get(i, j);
        }
    }
    out
}

#[test]
fn werner_matches_hand_built_matrix() {
    for p in [0.0, 0.25, 0.5, 0.7, 0.95, 1.0] {
        let rho = werner(p).unwrap();
        let want = werner_matrix(p);
        for i in 0..4 {
            for j in 0..4 {
                assert!((rho.matrix().get(i, j) - want[i][j]).norm() < 1e-15);
            }
        }
    }
    assert!(werner(-0.1).is_err());
    assert!(werner(1.1).is_err());
}

#[test]
fn werner_spectrum_from_characteristic_polynomial() {
    // Spectrum {(1+3p)/4, (1−p)/4 ×3} fixes the coefficients of Π(x − λ).
    for p in [0.0, 0.3, 0.6, 0.95, 1.0] {
        let cp = charpoly(&werner_matrix(p));
        let a = (1.0 + 3.0 * p) / 4.0;
        let b = (1.0 - p) / 4.0;
        let want = [
            1.0,
            -(a + 3.0 * b),
            3.0 * a * b + 3.0 * b * b,
            -(3.0 * a * b * b + b * b * b),
            a * b * b * b,
        ];
        for (got, w) in cp.iter().zip(want) {
            assert!((got.re - w).abs() < 1e-14 && got.im.abs() < 1e-14);
        }
    }
}

#[test]
fn werner_fidelity_tangle_purity() {
    for k in 0..=20 {
        let p = k as f64 / 20.0;
        let rho = werner(p).unwrap();
        let f = fidelity_with_pure(&rho, &phi_plus_ket()).unwrap();
        assert!((f - (1.0 + 3.0 * p) / 4.0).abs() < 1e-12);
        assert!((tangle(&rho) - werner_tangle(p)).abs() < 1e-9, "p = {p}");
        let pur = (1.0 + 3.0 * p * p) / 4.0;
        assert!((purity(&rho) - pur).abs() < 1e-12);
    }
}

#[test]
fn tangle_monotone_in_werner_weight() {
    let mut prev = -1.0;
    for k in 0..=100 {
        let t = tangle(&werner(k as f64 / 100.0).unwrap());
        assert!(t >= prev - 1e-12);
        prev = t;
    }
}

#[test]
fn pure_product_and_bell_states() {
    let hh = DensityMatrix::from_pure(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
    assert!(tangle(&hh).abs() < 1e-12);
    assert!((tangle(&phi_plus()) - 1.0).abs() < 1e-9);
    assert!((concurrence(&phi_plus()) - 1.0).abs() < 1e-9);
    let f = fidelity_with_pure(&DensityMatrix::maximally_mixed(), &phi_plus_ket()).unwrap();
    assert!((f - 0.25).abs() < 1e-15);
    assert!(fidelity_with_pure(&phi_plus(), &[c(1.0), c(1.0), c(0.0), c(0.0)]).is_err());
}

#[test]
fn uhlmann_fidelity_special_cases() {
    let w = werner(0.6).unwrap();
    assert!((fidelity(&w, &w) - 1.0).abs() < 1e-9);
    let want = fidelity_with_pure(&w, &phi_plus_ket()).unwrap();
    assert!((fidelity(&w, &phi_plus()) - want).abs() < 1e-9);
    // Commuting states: (Σ √(aᵢ bᵢ))² over the shared eigenbasis.
    let a = werner(0.2).unwrap();
    let (a1, a2): (f64, f64) = ((1.0 + 3.0 * 0.2) / 4.0, (1.0 - 0.2) / 4.0);
    let (b1, b2): (f64, f64) = ((1.0 + 3.0 * 0.6) / 4.0, (1.0 - 0.6) / 4.0);
    let want = ((a1 * b1).sqrt() + 3.0 * (a2 * b2).sqrt()).powi(2);
    assert!((fidelity(&a, &w) - want).abs() < 1e-9);
}

#[test]
fn density_matrix_validation() {
    let mut m = ComplexMatrix::identity(4).unwrap().scale_real(0.5);
    assert!(DensityMatrix::new(m.clone()).is_err());
    m = ComplexMatrix::diag(&[1.2, -0.2, 0.0, 0.0]).unwrap();
    assert!(DensityMatrix::new(m).is_err());
    m = ComplexMatrix::identity(4).unwrap().scale_real(0.25);
    m.set(0, 1, C64::new(0.0, 0.1));
    assert!(DensityMatrix::new(m).is_err());
    assert!(DensityMatrix::new(ComplexMatrix::identity(2).unwrap()).is_err());
}

#[test]
fn json_round_trip() {
    let rho = werner(0.37).unwrap();
    let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
    assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    let wrapped = format!("{{\"matrix\": {}}}", rho.to_json());
    assert!(DensityMatrix::from_json(&wrapped).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tangle_matches_wootters_oracle(raw in prop::collection::vec(-1.0f64..1.0, 32)) {
        let rho = random_state(&raw);
        let want = wootters_tangle(&to_array(rho.matrix()));
        prop_assert!((tangle(&rho) - want).abs() < 1e-7, "{} vs {}", tangle(&rho), want);
    }

    #[test]
    fn metrics_in_range(raw in prop::collection::vec(-1.0f64..1.0, 32),
                        other in prop::collection::vec(-1.0f64..1.0, 32)) {
        let rho = random_state(&raw);
        let sigma = random_state(&other);
        let f = fidelity_with_pure(&rho, &phi_plus_ket()).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let u = fidelity(&rho, &sigma);
        prop_assert!((0.0..=1.0).contains(&u));
        prop_assert!((u - fidelity(&sigma, &rho)).abs() < 1e-7);
        let t = tangle(&rho);
        prop_assert!((0.0..=1.0).contains(&t));
        let pur = purity(&rho);
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&pur));
    }
}
