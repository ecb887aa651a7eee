//! Two-qubit state tomography from coincidence counts.
//!
//! Each setting projects Alice's and Bob's qubits onto eigenstates of X, Y or
//! Z. Counts are modeled as independent Poisson variables with mean
//! N·Tr[(πa ⊗ πb) ρ], where the flux N is a free parameter fitted together
//! with ρ.
//!
//! Maximum likelihood uses ρ = T†T / Tr(T†T) with T lower triangular (real
//! diagonal, 16 real parameters). For fixed ρ the optimal flux is
//! N = Σc / Σp, so the search runs over T only, on the profile likelihood
//! divided by the total count. It stops once the scale-free gradient norm
//! ‖∇‖·‖T‖ drops below `MleConfig::grad_tol`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::qmath::{eig_hermitian, kron_ket, ComplexMatrix, C64, I, ONE, ZERO};
use crate::rng;
use crate::states::{self, DensityMatrix, StateMetrics};

/// One of the six single-qubit Pauli eigenstates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliEigenstate {
    XPlus,
    XMinus,
    YPlus,
    YMinus,
    ZPlus,
    ZMinus,
}

impl PauliEigenstate {
    /// Canonical order: X+, X−, Y+, Y−, Z+, Z−.
    pub const ALL: [PauliEigenstate; 6] = [
        PauliEigenstate::XPlus,
        PauliEigenstate::XMinus,
        PauliEigenstate::YPlus,
        PauliEigenstate::YMinus,
        PauliEigenstate::ZPlus,
        PauliEigenstate::ZMinus,
    ];

    /// |H⟩ = Z+, |V⟩ = Z−.
    pub fn ket(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = |x: f64| C64::new(x, 0.0);
        match self {
            PauliEigenstate::XPlus => [r(h), r(h)],
            PauliEigenstate::XMinus => [r(h), r(-h)],
            PauliEigenstate::YPlus => [r(h), I * h],
            PauliEigenstate::YMinus => [r(h), -I * h],
            PauliEigenstate::ZPlus => [ONE, ZERO],
            PauliEigenstate::ZMinus => [ZERO, ONE],
        }
    }

    /// (1, nx, ny, nz): Tr[π σᵢ] for σ₀ = I and the three Paulis.
    pub fn bloch(self) -> [f64; 4] {
        match self {
            PauliEigenstate::XPlus => [1.0, 1.0, 0.0, 0.0],
            PauliEigenstate::XMinus => [1.0, -1.0, 0.0, 0.0],
            PauliEigenstate::YPlus => [1.0, 0.0, 1.0, 0.0],
            PauliEigenstate::YMinus => [1.0, 0.0, -1.0, 0.0],
            PauliEigenstate::ZPlus => [1.0, 0.0, 0.0, 1.0],
            PauliEigenstate::ZMinus => [1.0, 0.0, 0.0, -1.0],
        }
    }
}

impl fmt::Display for PauliEigenstate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliEigenstate::XPlus => "X+",
            PauliEigenstate::XMinus => "X-",
            PauliEigenstate::YPlus => "Y+",
            PauliEigenstate::YMinus => "Y-",
            PauliEigenstate::ZPlus => "Z+",
            PauliEigenstate::ZMinus => "Z-",
        })
    }
}

impl FromStr for PauliEigenstate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X+" | "D" => Ok(PauliEigenstate::XPlus),
            "X-" | "A" => Ok(PauliEigenstate::XMinus),
            "Y+" | "R" => Ok(PauliEigenstate::YPlus),
            "Y-" | "L" => Ok(PauliEigenstate::YMinus),
            "Z+" | "H" => Ok(PauliEigenstate::ZPlus),
            "Z-" | "V" => Ok(PauliEigenstate::ZMinus),
            other => Err(domain(format!("unknown tomography state {other:?}"))),
        }
    }
}

/// Ordered list of (Alice, Bob) projection settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TomoSettings {
    pairs: Vec<(PauliEigenstate, PauliEigenstate)>,
}

impl TomoSettings {
    /// All 36 pairs, Alice-major in the order X+, X−, Y+, Y−, Z+, Z−.
    pub fn canonical() -> Self {
        let pairs = PauliEigenstate::ALL
            .iter()
            .flat_map(|&a| PauliEigenstate::ALL.iter().map(move |&b| (a, b)))
            .collect();
        Self { pairs }
    }

    pub fn new(pairs: Vec<(PauliEigenstate, PauliEigenstate)>) -> Result<Self> {
        for (i, p) in pairs.iter().enumerate() {
            if pairs[..i].contains(p) {
                return Err(domain(format!("setting ({}, {}) listed twice", p.0, p.1)));
            }
        }
        if pairs.is_empty() {
            return Err(domain("no tomography settings"));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(PauliEigenstate, PauliEigenstate)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn kets(&self) -> Vec<[C64; 4]> {
        self.pairs.iter().map(|(a, b)| kron_ket(&a.ket(), &b.ket())).collect()
    }
}

/// Coincidence counts, one per setting.
#[derive(Clone, Debug, PartialEq)]
pub struct TomoCounts {
    pub counts: Vec<u64>,
    /// Integration time per setting in seconds, if known.
    pub duration: Option<f64>,
}

impl TomoCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        Self {
            counts,
            duration: None,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `setting_alice,setting_bob,count`, one row per setting.
    pub fn to_csv(&self, settings: &TomoSettings) -> Result<String> {
        check_lengths(self, settings)?;
        let mut out = String::from("setting_alice,setting_bob,count\n");
        for ((a, b), c) in settings.pairs.iter().zip(&self.counts) {
            out.push_str(&format!("{a},{b},{c}\n"));
        }
        Ok(out)
    }

    /// Reads the CSV layout written by `to_csv`; rows may come in any order.
    pub fn from_csv(text: &str) -> Result<(TomoSettings, TomoCounts)> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut pairs = Vec::new();
        let mut counts = Vec::new();
        for record in r.records() {
            let record = record?;
            if record.len() != 3 {
                return Err(domain(format!("expected 3 columns, got {:?}", record)));
            }
            pairs.push((record[0].parse()?, record[1].parse()?));
            counts.push(
                record[2]
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| domain(format!("bad count {:?}", &record[2])))?,
            );
        }
        Ok((TomoSettings::new(pairs)?, TomoCounts::new(counts)))
    }
}

fn check_lengths(counts: &TomoCounts, settings: &TomoSettings) -> Result<()> {
    if counts.counts.len() != settings.len() {
        return Err(domain(format!(
            "{} counts for {} settings",
            counts.counts.len(),
            settings.len()
        )));
    }
    Ok(())
}

/// Tr[(πa ⊗ πb) ρ] for every setting.
pub fn setting_probabilities(rho: &ComplexMatrix, settings: &TomoSettings) -> Vec<f64> {
    settings.kets().iter().map(|k| rho.sandwich(k, k).re).collect()
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Poisson counts with mean `n_scale`·Tr[(πa ⊗ πb) ρ] per setting.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &TomoSettings,
    n_scale: f64,
    seed: u64,
) -> Result<TomoCounts> {
    if !(n_scale > 0.0 && n_scale.is_finite()) {
        return Err(domain(format!("count scale {n_scale} must be positive")));
    }
    let mut r = rng::stream(seed, 0);
    let counts = setting_probabilities(rho.matrix(), settings)
        .into_iter()
        .map(|p| poisson(n_scale * p.max(0.0), &mut r))
        .collect();
    Ok(TomoCounts::new(counts))
}

const PAULI_INDEX: [(usize, usize); 16] = {
    let mut out = [(0, 0); 16];
    let mut k = 0;
    while k < 16 {
        out[k] = (k / 4, k % 4);
        k += 1;
    }
    out
};

fn pauli(i: usize) -> ComplexMatrix {
    match i {
        0 => ComplexMatrix::identity(2).expect("2x2"),
        1 => crate::qmath::pauli_x(),
        2 => crate::qmath::pauli_y(),
        _ => crate::qmath::pauli_z(),
    }
}

/// Least-squares inversion of c_k = Tr[P_k X] over Hermitian X, normalized to
/// unit trace. The result is Hermitian with trace one but may have negative
/// eigenvalues.
pub fn linear_inversion(counts: &TomoCounts, settings: &TomoSettings) -> Result<ComplexMatrix> {
    check_lengths(counts, settings)?;
    if counts.total() == 0 {
        return Err(domain("all counts are zero"));
    }
    let k = settings.len();
    let design = DMatrix::from_fn(k, 16, |row, col| {
        let (a, b) = settings.pairs[row];
        let (i, j) = PAULI_INDEX[col];
        a.bloch()[i] * b.bloch()[j] / 4.0
    });
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.rank(1e-10 * smax) < 16 {
        return Err(domain(
            "tomography settings do not span the two-qubit operator space",
        ));
    }
    let rhs = DVector::from_iterator(k, counts.counts.iter().map(|&c| c as f64));
    let coeffs = svd.solve(&rhs, 1e-12 * smax).map_err(|e| Error::Internal(e.to_string()))?;

    let mut x = ComplexMatrix::zeros(4)?;
    for (col, &(i, j)) in PAULI_INDEX.iter().enumerate() {
        let term = crate::qmath::kron(&pauli(i), &pauli(j))?.scale_real(coeffs[col] / 4.0);
        x = &x + &term;
    }
    let trace = x.trace().re;
    if trace <= 0.0 {
        return Err(domain("linear inversion produced a non-positive trace"));
    }
    Ok(x.scale_real(1.0 / trace))
}

/// Nearest density matrix by clipping negative eigenvalues and renormalizing.
pub fn project_to_state(m: &ComplexMatrix) -> Result<DensityMatrix> {
    let eig = eig_hermitian(m)?;
    let clipped = eig.map_spectrum(|l| l.max(0.0));
    let trace = clipped.trace().re;
    if trace <= 0.0 {
        return Err(domain("matrix has no positive part"));
    }
    DensityMatrix::new(clipped.scale_real(1.0 / trace))
}

/// Poisson log-likelihood of `counts` at ρ, with the flux at its optimum
/// and the ρ-independent log c! terms dropped. −∞ if a setting with counts
/// has zero probability.
pub fn log_likelihood(rho: &ComplexMatrix, counts: &TomoCounts, settings: &TomoSettings) -> f64 {
    let probs = setting_probabilities(rho, settings);
    profile_log_likelihood(&probs, &counts.counts)
}

fn profile_log_likelihood(probs: &[f64], counts: &[u64]) -> f64 {
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let mass: f64 = probs.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    if mass <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let flux = total / mass;
    let mut ll = -total;
    for (&p, &c) in probs.iter().zip(counts) {
        if c == 0 {
            continue;
        }
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += c as f64 * (flux * p).ln();
    }
    ll
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroCounts {
    /// Reject data sets with no counts at all.
    Error,
    /// Return I/4 for data sets with no counts at all.
    MaximallyMixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    pub max_evals: usize,
    /// Threshold on ‖∇f‖·‖T‖, with f the log-likelihood per count.
    pub grad_tol: f64,
    pub zero_counts: ZeroCounts,
    /// Weight of I/4 mixed into the starting point to keep T invertible.
    pub start_mixing: f64,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            max_evals: 100_000,
            grad_tol: 1e-6,
            zero_counts: ZeroCounts::Error,
            start_mixing: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MleOutcome {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    /// Fitted expected counts per unit probability.
    pub flux: f64,
    pub evaluations: usize,
    pub gradient_norm: f64,
}

pub fn mle_reconstruct(
    counts: &TomoCounts,
    settings: &TomoSettings,
    cfg: &MleConfig,
) -> Result<DensityMatrix> {
    Ok(mle_reconstruct_detailed(counts, settings, cfg)?.rho)
}

pub fn mle_reconstruct_detailed(
    counts: &TomoCounts,
    settings: &TomoSettings,
    cfg: &MleConfig,
) -> Result<MleOutcome> {
    check_lengths(counts, settings)?;
    if counts.total() == 0 {
        return match cfg.zero_counts {
            ZeroCounts::Error => Err(domain("all counts are zero")),
            ZeroCounts::MaximallyMixed => Ok(MleOutcome {
                rho: DensityMatrix::maximally_mixed(),
                log_likelihood: 0.0,
                flux: 0.0,
                evaluations: 0,
                gradient_norm: 0.0,
            }),
        };
    }
    let start = project_to_state(&linear_inversion(counts, settings)?)?;
    let mixed = &start.matrix().scale_real(1.0 - cfg.start_mixing)
        + &ComplexMatrix::identity(4)?.scale_real(cfg.start_mixing / 4.0);
    let problem = Likelihood::new(counts, settings);
    let t0 = t_from_state(&mixed)?;
    let (t, report) = lbfgs(&problem, t0, cfg);

    let rho = problem.state(&t);
    let ll = log_likelihood(rho.matrix(), counts, settings);
    let probs = setting_probabilities(rho.matrix(), settings);
    let flux = counts.total() as f64 / probs.iter().sum::<f64>();
    if report.gradient_norm >= cfg.grad_tol {
        return Err(Error::Convergence {
            evaluations: report.evaluations,
            gradient_norm: report.gradient_norm,
            best: Box::new(rho),
        });
    }
    Ok(MleOutcome {
        rho,
        log_likelihood: ll,
        flux,
        evaluations: report.evaluations,
        gradient_norm: report.gradient_norm,
    })
}

/// Parameter layout: T[i][i] real for i = 0..4, then (re, im) of T[i][j] for i > j.
const LOWER: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

fn t_matrix(t: &[f64; 16]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4).expect("4x4");
    for i in 0..4 {
        m.set(i, i, C64::new(t[i], 0.0));
    }
    for (k, &(i, j)) in LOWER.iter().enumerate() {
        m.set(i, j, C64::new(t[4 + 2 * k], t[5 + 2 * k]));
    }
    m
}

/// T lower triangular with T†T = ρ: Cholesky of the index-reversed matrix.
fn t_from_state(rho: &ComplexMatrix) -> Result<[f64; 16]> {
    let rev = |i: usize| 3 - i;
    let m = DMatrix::from_fn(4, 4, |i, j| {
        let z = rho.get(rev(i), rev(j));
        nalgebra::Complex::new(z.re, z.im)
    });
    let chol = m
        .cholesky()
        .ok_or_else(|| domain("starting state is not positive definite"))?;
    let l = chol.l();
    // J L J is upper triangular U with ρ = U U†; T = U†.
    let mut t = [0.0; 16];
    for i in 0..4 {
        t[i] = l[(rev(i), rev(i))].re;
    }
    for (k, &(i, j)) in LOWER.iter().enumerate() {
        // T[i][j] = conj(U[j][i]) = conj(L[rev j][rev i])
        let u = l[(rev(j), rev(i))];
        t[4 + 2 * k] = u.re;
        t[5 + 2 * k] = -u.im;
    }
    let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(t.map(|x| x / norm))
}

struct Likelihood {
    kets: Vec<[C64; 4]>,
    raw: Vec<u64>,
    counts: Vec<f64>,
    total: f64,
}

impl Likelihood {
    fn new(data: &TomoCounts, settings: &TomoSettings) -> Self {
        let counts: Vec<f64> = data.counts.iter().map(|&c| c as f64).collect();
        Self {
            kets: settings.kets(),
            raw: data.counts.clone(),
            total: counts.iter().sum(),
            counts,
        }
    }

    fn state(&self, t: &[f64; 16]) -> DensityMatrix {
        let tm = t_matrix(t);
        let g = &tm.adjoint() * &tm;
        let s = g.trace().re;
        let rho = g.scale_real(1.0 / s);
        DensityMatrix::new_unchecked((&rho + &rho.adjoint()).scale_real(0.5))
    }

    /// Minus the per-count profile log-likelihood and its gradient in t.
    fn eval(&self, t: &[f64; 16]) -> (f64, [f64; 16]) {
        let tm = t_matrix(t);
        let tdag = tm.adjoint();
        let s: f64 = t.iter().map(|x| x * x).sum();
        let rho = (&tdag * &tm).scale_real(1.0 / s);

        let probs: Vec<f64> = self.kets.iter().map(|k| rho.sandwich(k, k).re).collect();
        let ll = profile_log_likelihood(&probs, &self.raw);
        if !ll.is_finite() {
            return (f64::INFINITY, [0.0; 16]);
        }
        let mass: f64 = probs.iter().sum();

        // G = Σ_k (c_k/p_k − C/Σp) P_k; Tr[Gρ] = 0 so no trace correction is needed.
        let mut g = ComplexMatrix::zeros(4).expect("4x4");
        for ((ket, &p), &c) in self.kets.iter().zip(&probs).zip(&self.counts) {
            let w = if c > 0.0 { c / p } else { 0.0 } - self.total / mass;
            for i in 0..4 {
                let ki = ket[i] * w;
                for j in 0..4 {
                    g.set(i, j, g.get(i, j) + ki * ket[j].conj());
                }
            }
        }
        let m = &g * &tdag;
        let scale = -2.0 / (s * self.total);
        let mut grad = [0.0; 16];
        for i in 0..4 {
            grad[i] = scale * m.get(i, i).re;
        }
        for (k, &(i, j)) in LOWER.iter().enumerate() {
            let mji = m.get(j, i);
            grad[4 + 2 * k] = scale * mji.re;
            grad[5 + 2 * k] = -scale * mji.im;
        }
        (-ll / self.total, grad)
    }
}

struct LbfgsReport {
    evaluations: usize,
    gradient_norm: f64,
}

fn dot(a: &[f64; 16], b: &[f64; 16]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64; 16]) -> f64 {
    dot(a, a).sqrt()
}

fn scaled_gradient_norm(t: &[f64; 16], g: &[f64; 16]) -> f64 {
    norm(g) * norm(t)
}

/// Limited-memory BFGS with Armijo backtracking.
fn lbfgs(problem: &Likelihood, mut t: [f64; 16], cfg: &MleConfig) -> ([f64; 16], LbfgsReport) {
    const MEMORY: usize = 8;
    let mut history: VecDeque<([f64; 16], [f64; 16], f64)> = VecDeque::new();
    let (mut f, mut g) = problem.eval(&t);
    let mut evaluations = 1;

    while evaluations < cfg.max_evals {
        if scaled_gradient_norm(&t, &g) < cfg.grad_tol {
            break;
        }
        // two-loop recursion
        let mut d = g.map(|x| -x);
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            for i in 0..16 {
                d[i] -= a * y[i];
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d = d.map(|x| x * gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for i in 0..16 {
                d[i] += (a - b) * s[i];
            }
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.map(|x| -x);
            slope = dot(&g, &d);
        }

        let mut step = if history.is_empty() { 0.1 / norm(&d).max(1e-300) } else { 1.0 };
        let mut accepted = None;
        while evaluations < cfg.max_evals && step > 1e-20 {
            let mut trial = t;
            for i in 0..16 {
                trial[i] += step * d[i];
            }
            let (ft, gt) = problem.eval(&trial);
            evaluations += 1;
            if ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((next, f_next, g_next)) = accepted else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };
        let mut s = [0.0; 16];
        let mut y = [0.0; 16];
        for i in 0..16 {
            s[i] = next[i] - t[i];
            y[i] = g_next[i] - g[i];
        }
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        t = next;
        f = f_next;
        g = g_next;
        // Keep ‖T‖ near one; the objective is scale invariant.
        let n = norm(&t);
        if (n - 1.0).abs() > 0.5 {
            t = t.map(|x| x / n);
            g = g.map(|x| x * n);
            history.clear();
        }
    }
    let gradient_norm = scaled_gradient_norm(&t, &g);
    (t, LbfgsReport { evaluations, gradient_norm })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample mean and (n − 1)-normalized standard deviation.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub runs: usize,
    pub fidelity: MeanStd,
    pub tangle: MeanStd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapConfig {
    pub runs: usize,
    pub seed: u64,
    pub mle: MleConfig,
    /// Fidelity is reported against this pure state.
    pub target: [C64; 4],
    pub exec: Exec,
}

impl BootstrapConfig {
    pub fn new(runs: usize, seed: u64) -> Self {
        Self {
            runs,
            seed,
            mle: MleConfig::default(),
            target: states::phi_plus_ket(),
            exec: Exec::default(),
        }
    }
}

/// Error bars by Poisson resampling: each run replaces every count c by a
/// Poisson(c) draw, reconstructs by maximum likelihood and records fidelity
/// and tangle. Run k draws from `rng::stream(seed, k)`.
pub fn bootstrap_errors(
    counts: &TomoCounts,
    settings: &TomoSettings,
    cfg: &BootstrapConfig,
) -> Result<BootstrapReport> {
    let streams: Vec<(u64, u64)> = (0..cfg.runs as u64).map(|k| (cfg.seed, k)).collect();
    bootstrap_with_streams(counts, settings, &streams, cfg)
}

/// Same as `bootstrap_errors`, with the random stream of every run given
/// explicitly as `(master, index)`. `cfg.runs` and `cfg.seed` are ignored.
pub fn bootstrap_with_streams(
    counts: &TomoCounts,
    settings: &TomoSettings,
    streams: &[(u64, u64)],
    cfg: &BootstrapConfig,
) -> Result<BootstrapReport> {
    check_lengths(counts, settings)?;
    if streams.len() < 2 {
        return Err(domain("bootstrap needs at least two runs"));
    }
    let runs = cfg.exec.map(streams.len(), |k| -> Result<StateMetrics> {
        let (master, index) = streams[k];
        let mut r = rng::stream(master, index);
        let resampled = TomoCounts::new(
            counts.counts.iter().map(|&c| poisson(c as f64, &mut r)).collect(),
        );
        let rho = mle_reconstruct(&resampled, settings, &cfg.mle).map_err(|e| Error::Bootstrap {
            run: k,
            source: Box::new(e),
        })?;
        StateMetrics::compute(&rho, &cfg.target)
    });
    let metrics = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let fid: Vec<f64> = metrics.iter().map(|m| m.fidelity).collect();
    let tan: Vec<f64> = metrics.iter().map(|m| m.tangle).collect();
    Ok(BootstrapReport {
        runs: metrics.len(),
        fidelity: MeanStd::of(&fid),
        tangle: MeanStd::of(&tan),
    })
}

/// Reconstruction summary written by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub metrics: StateMetrics,
    pub log_likelihood: f64,
    pub errors: Option<BootstrapReport>,
}

impl ReconstructionReport {
    pub fn new(outcome: &MleOutcome, target: &[C64; 4], errors: Option<BootstrapReport>) -> Result<Self> {
        Ok(Self {
            matrix: outcome.rho.matrix().to_nested(),
            metrics: StateMetrics::compute(&outcome.rho, target)?,
            log_likelihood: outcome.log_likelihood,
            errors,
        })
    }
}
