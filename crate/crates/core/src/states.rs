//! Two-qubit states and the figures of merit used to characterize them.
//!
//! Basis convention: |H⟩ = |0⟩, |V⟩ = |1⟩, and two-qubit index `2a + b`
//! for Alice's bit `a` and Bob's bit `b`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::qmath::{self, eig_hermitian, kron, tol, ComplexMatrix, C64, ONE, ZERO};

/// Smallest eigenvalue tolerated in a density matrix.
pub const MIN_EIGENVALUE: f64 = -1e-9;

/// A validated two-qubit density matrix ρ_AB.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity (down to `MIN_EIGENVALUE`).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::UnsupportedDimension(matrix.dim()));
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > tol::HERMITIAN {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {deviation:.3e})"
            )));
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > tol::HERMITIAN {
            return Err(Error::InvalidState(format!(
                "trace is {:.12}{:+.3e}i, expected 1",
                trace.re, trace.im
            )));
        }
        let eig = eig_hermitian(&matrix)?;
        let min = eig.values[3];
        if min < MIN_EIGENVALUE {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self(matrix))
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self(matrix)
    }

    /// |ψ⟩⟨ψ| for a normalized two-qubit ket.
    pub fn from_pure(ket: &[C64; 4]) -> Result<Self> {
        check_normalized(ket)?;
        Self::new(ComplexMatrix::outer(ket)?)
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(4).expect("4x4").scale_real(0.25))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Probability Tr[(A ⊗ B) ρ] of a product effect.
    pub fn product_expectation(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        let joint = kron(a, b).expect("single-qubit operators");
        joint.trace_product(&self.0).re
    }

    /// Reduced operator Tr_A[(A ⊗ I) ρ] on Bob's qubit.
    pub fn conditional_bob(&self, alice_effect: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2).expect("2x2");
        for b in 0..2 {
            for bp in 0..2 {
                let mut acc = ZERO;
                for a in 0..2 {
                    for ap in 0..2 {
                        acc += alice_effect.get(ap, a) * self.0.get(2 * a + b, 2 * ap + bp);
                    }
                }
                out.set(b, bp, acc);
            }
        }
        out
    }

    /// Reduced operator Tr_B[(I ⊗ B) ρ] on Alice's qubit.
    pub fn conditional_alice(&self, bob_effect: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2).expect("2x2");
        for a in 0..2 {
            for ap in 0..2 {
                let mut acc = ZERO;
                for b in 0..2 {
                    for bp in 0..2 {
                        acc += bob_effect.get(bp, b) * self.0.get(2 * a + b, 2 * ap + bp);
                    }
                }
                out.set(a, ap, acc);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.0.to_nested()).expect("plain numbers")
    }

    /// Parses either a bare 4×4 array of `[re, im]` pairs or an object with a
    /// `matrix` field holding one.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum StateFile {
            Bare(Vec<Vec<[f64; 2]>>),
            Wrapped { matrix: Vec<Vec<[f64; 2]>> },
        }
        let rows = match serde_json::from_str::<StateFile>(text)? {
            StateFile::Bare(rows) | StateFile::Wrapped { matrix: rows } => rows,
        };
        if rows.len() != 4 {
            return Err(Error::UnsupportedDimension(rows.len()));
        }
        Self::new(ComplexMatrix::from_nested(&rows)?)
    }
}

fn check_normalized(ket: &[C64]) -> Result<()> {
    let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > tol::HERMITIAN {
        return Err(domain(format!("target state has squared norm {norm}, expected 1")));
    }
    Ok(())
}

/// (|00⟩ + |11⟩)/√2.
pub fn phi_plus_ket() -> [C64; 4] {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [h, ZERO, ZERO, h]
}

pub fn phi_plus() -> DensityMatrix {
    DensityMatrix(ComplexMatrix::outer(&phi_plus_ket()).expect("4x4"))
}

/// p·|Φ⁺⟩⟨Φ⁺| + (1−p)·I/4.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("Werner weight {p} outside [0, 1]")));
    }
    let mixed = ComplexMatrix::identity(4)?.scale_real((1.0 - p) / 4.0);
    let pure = phi_plus().0.scale_real(p);
    Ok(DensityMatrix(&pure + &mixed))
}

/// ⟨ψ|ρ|ψ⟩.
pub fn fidelity_with_pure(rho: &DensityMatrix, target: &[C64]) -> Result<f64> {
    if target.len() != 4 {
        return Err(domain(format!("target has {} amplitudes, expected 4", target.len())));
    }
    check_normalized(target)?;
    let value = rho.0.sandwich(target, target);
    Ok(value.re.clamp(0.0, 1.0))
}

/// Uhlmann fidelity (Tr √(√ρ σ √ρ))², equal to ⟨ψ|ρ|ψ⟩ when σ = |ψ⟩⟨ψ|.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let sqrt_rho = psd_sqrt(&rho.0);
    let inner = &(&sqrt_rho * &sigma.0) * &sqrt_rho;
    let eig = eig_hermitian(&hermitize(&inner)).expect("Hermitian by construction");
    let root_trace: f64 = eig.values.iter().map(|&l| l.max(0.0).sqrt()).sum();
    (root_trace * root_trace).clamp(0.0, 1.0)
}

/// Wootters tangle τ = C², with C = max(0, λ₁ − λ₂ − λ₃ − λ₄) and λᵢ the
/// decreasing square roots of the spectrum of ρ (σy⊗σy) ρ* (σy⊗σy).
pub fn tangle(rho: &DensityMatrix) -> f64 {
    concurrence(rho).powi(2)
}

pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let yy = kron(&qmath::pauli_y(), &qmath::pauli_y()).expect("4x4");
    let flipped = &(&yy * &rho.0.conj()) * &yy;
    // √ρ ρ̃ √ρ is Hermitian and shares its spectrum with ρ ρ̃.
    let sqrt_rho = psd_sqrt(&rho.0);
    let m = &(&sqrt_rho * &flipped) * &sqrt_rho;
    let eig = eig_hermitian(&hermitize(&m)).expect("Hermitian by construction");
    let l: Vec<f64> = eig.values.iter().map(|&mu| mu.max(0.0).sqrt()).collect();
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.0.trace_product(&rho.0).re
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateMetrics {
    pub fidelity: f64,
    pub tangle: f64,
    pub purity: f64,
}

impl StateMetrics {
    /// Metrics of `rho`, with fidelity taken against `target`.
    pub fn compute(rho: &DensityMatrix, target: &[C64; 4]) -> Result<Self> {
        Ok(Self {
            fidelity: fidelity_with_pure(rho, target)?,
            tangle: tangle(rho),
            purity: purity(rho),
        })
    }
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &m.adjoint()).scale_real(0.5)
}

/// Square root of a PSD matrix; eigenvalues down to `MIN_EIGENVALUE` are clamped to zero.
fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let eig = eig_hermitian(&hermitize(m)).expect("Hermitian input");
    eig.map_spectrum(|l| l.max(0.0).sqrt())
}
