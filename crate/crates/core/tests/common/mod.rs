//! Reference computations written from first principles with plain arrays.
//! Nothing here calls into the library's numerics.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M4 = [[C; 4]; 4];

pub const QUANTUM: f64 = 0.902_368_927_062_182_5;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn mat_mul(a: &M4, b: &M4) -> M4 {
    let mut out = [[c(0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn trace(a: &M4) -> C {
    (0..4).map(|i| a[i][i]).sum()
}

/// p |Φ⁺⟩⟨Φ⁺| + (1 − p) I/4, entry by entry.
pub fn werner_matrix(p: f64) -> M4 {
    let mut m = [[c(0.0); 4]; 4];
    for i in 0..4 {
        m[i][i] = c((1.0 - p) / 4.0);
    }
    for &i in &[0, 3] {
        for &j in &[0, 3] {
            m[i][j] += c(p / 2.0);
        }
    }
    m
}

/// Characteristic polynomial coefficients [1, c1, c2, c3, c4] of a 4x4 matrix
/// by the Faddeev–LeVerrier recursion.
pub fn charpoly(a: &M4) -> [C; 5] {
    let mut coeffs = [c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)];
    let mut m = [[c(0.0); 4]; 4];
    for k in 1..=4 {
        let am = mat_mul(a, &m);
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = am[i][j];
            }
            m[i][i] += coeffs[k - 1];
        }
        let am = mat_mul(a, &m);
        coeffs[k] = -trace(&am) / c(k as f64);
    }
    coeffs
}

/// All four roots of a monic quartic by Durand–Kerner iteration.
pub fn quartic_roots(coeffs: &[C; 5]) -> [C; 4] {
    let eval = |z: C| coeffs.iter().fold(c(0.0), |acc, &k| acc * z + k);
    let seed = C::new(0.4, 0.9);
    let mut roots = [c(1.0), seed, seed * seed, seed * seed * seed];
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..4 {
            let mut denom = c(1.0);
            for j in 0..4 {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
}

/// Eigenvalues of a matrix with real spectrum, sorted descending.
pub fn real_spectrum(a: &M4) -> [f64; 4] {
    let roots = quartic_roots(&charpoly(a));
    let mut re = roots.map(|z| z.re);
    re.sort_by(|x, y| y.partial_cmp(x).unwrap());
    re
}

/// Wootters tangle from the non-Hermitian product ρ (σy⊗σy) ρ* (σy⊗σy).
pub fn wootters_tangle(rho: &M4) -> f64 {
    // σy⊗σy has entries ±1 on the anti-diagonal: signs (−1, +1, +1, −1).
    let yy = |i: usize, j: usize| -> f64 {
        if i + j != 3 {
            0.0
        } else if i == 0 || i == 3 {
            -1.0
        } else {
            1.0
        }
    };
    let mut flip = [[c(0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            flip[i][j] = c(yy(i, 3 - i) * yy(3 - j, j)) * rho[3 - i][3 - j].conj();
        }
    }
    let r = mat_mul(rho, &flip);
    let mut lambdas = real_spectrum(&r).map(|x| x.max(0.0).sqrt());
    lambdas.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let conc = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
    conc * conc
}

pub fn werner_tangle(p: f64) -> f64 {
    ((3.0 * p - 1.0) / 2.0).max(0.0).powi(2)
}

pub fn werner_success(p: f64) -> f64 {
    (2.0 + p * std::f64::consts::FRAC_1_SQRT_2) / 3.0
}

/// |θ⟩ for outcome 0, |θ + π/2⟩ for outcome 1.
pub fn basis_ket(angle: f64, outcome: u8) -> [f64; 2] {
    let a = angle + outcome as f64 * std::f64::consts::FRAC_PI_2;
    [a.cos(), a.sin()]
}

/// ⟨a ⊗ b| ρ |a ⊗ b⟩ for real single-qubit kets.
pub fn born(rho: &M4, a: [f64; 2], b: [f64; 2]) -> f64 {
    let ket = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
    let mut total = c(0.0);
    for i in 0..4 {
        for j in 0..4 {
            total += rho[i][j] * ket[i] * ket[j];
        }
    }
    total.re
}

/// Butterfly transition matrix from its description: the output reveals
/// b1, b2 or b1 ⊕ b2, each with probability 1/3. Rows are inputs 2·b1 + b2;
/// columns are outputs 2·t + b with t = 0, 1, 2 for "1", "2", "P".
pub fn butterfly_oracle() -> [[f64; 6]; 4] {
    let mut m = [[0.0; 6]; 4];
    for b1 in 0..2usize {
        for b2 in 0..2usize {
            let revealed = [b1, b2, b1 ^ b2];
            for (t, &b) in revealed.iter().enumerate() {
                m[2 * b1 + b2][2 * t + b] += 1.0 / 3.0;
            }
        }
    }
    m
}

/// Success probability of the entanglement-assisted protocol with real
/// measurement angles, computed by walking the protocol tree.
/// Alice sends (b1, b2) = (q, α); Bob measures setting 1 when
/// t = 2 and setting 0 when t = P; he decodes q̂ = b for t = 1 and b ⊕ β
/// otherwise.
pub fn protocol_success(rho: &M4, alice: [f64; 2], bob: [f64; 2]) -> f64 {
    let ch = butterfly_oracle();
    let mut total = 0.0;
    for q in 0..2u8 {
        for alpha in 0..2u8 {
            let input = 2 * q as usize + alpha as usize;
            for t in 0..3usize {
                for b in 0..2u8 {
                    let w = ch[input][2 * t + b as usize];
                    if w == 0.0 {
                        continue;
                    }
                    let v = if t == 1 { 1 } else { 0 };
                    for beta in 0..2u8 {
                        let p = born(
                            rho,
                            basis_ket(alice[q as usize], alpha),
                            basis_ket(bob[v], beta),
                        );
                        let q_hat = if t == 0 { b } else { b ^ beta };
                        if q_hat == q {
                            total += 0.5 * w * p;
                        }
                    }
                }
            }
        }
    }
    total
}

/// Best deterministic code over a row-stochastic matrix by trying every
/// encoding and every decoding, in f64.
pub fn brute_force_best(ch: &[Vec<f64>], m: usize) -> f64 {
    let nx = ch.len();
    let ny = ch[0].len();
    let encodings = nx.pow(m as u32);
    let decodings = m.pow(ny as u32);
    let mut best = 0.0f64;
    for e in 0..encodings {
        let enc: Vec<usize> = (0..m).map(|k| (e / nx.pow(k as u32)) % nx).collect();
        for d in 0..decodings {
            let dec: Vec<usize> = (0..ny).map(|k| (d / m.pow(k as u32)) % m).collect();
            let mut s = 0.0;
            for (msg, &x) in enc.iter().enumerate() {
                for y in 0..ny {
                    if dec[y] == msg {
                        s += ch[x][y];
                    }
                }
            }
            best = best.max(s / m as f64);
        }
    }
    best
}
