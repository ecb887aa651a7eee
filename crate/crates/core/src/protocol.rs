//! The entanglement-assisted protocol for the butterfly channel.
//!
//! Alice measures setting q on her half of ρ_AB, gets α, and sends (q, α).
//! Bob receives (t, b). For t = 1 he outputs b. Otherwise he measures setting
//! v = 1 (t = 2) or v = 0 (t = P), gets β and outputs b ⊕ β. Whenever
//! α ⊕ β = q·v the decoded bit is right; when it is not, Bob is still right if
//! t = 1. With relation probability ω the success is ω + (1 − ω)/3.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{ChannelInput, ChannelOutput, FiniteChannel, Trit};
use crate::error::{domain, Error, Result};
use crate::qmath::{kron, tol, ComplexMatrix, C64};
use crate::states::DensityMatrix;

/// Projective qubit measurement onto (|θ⟩, |θ + π/2⟩), |θ⟩ = cos θ|H⟩ + sin θ|V⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementBasis {
    pub angle: f64,
}

impl MeasurementBasis {
    pub fn new(angle: f64) -> Self {
        Self { angle }
    }

    pub fn ket(&self, outcome: u8) -> [C64; 2] {
        let theta = self.angle + f64::from(outcome) * PI / 2.0;
        [C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)]
    }

    pub fn projector(&self, outcome: u8) -> ComplexMatrix {
        ComplexMatrix::outer(&self.ket(outcome)).expect("2x2")
    }
}

/// A two-outcome projective measurement on one qubit, stored as its
/// outcome-0 projector. The outcome-1 element is the complement.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMeasurement {
    effect0: ComplexMatrix,
}

impl BinaryMeasurement {
    pub fn from_basis(basis: MeasurementBasis) -> Self {
        Self {
            effect0: basis.projector(0),
        }
    }

    pub fn from_angle(angle: f64) -> Self {
        Self::from_basis(MeasurementBasis::new(angle))
    }

    /// Accepts any 2×2 orthogonal projector (rank 0, 1 or 2).
    pub fn from_projector(p: ComplexMatrix) -> Result<Self> {
        if p.dim() != 2 {
            return Err(Error::UnsupportedDimension(p.dim()));
        }
        let idempotency = (&p * &p).max_abs_diff(&p);
        if !p.is_hermitian(tol::HERMITIAN) || idempotency > 1e-9 {
            return Err(domain("measurement element is not an orthogonal projector"));
        }
        Ok(Self { effect0: p })
    }

    pub fn effect(&self, outcome: u8) -> ComplexMatrix {
        match outcome {
            0 => self.effect0.clone(),
            _ => &ComplexMatrix::identity(2).expect("2x2") - &self.effect0,
        }
    }

    pub fn effects(&self) -> [ComplexMatrix; 2] {
        [self.effect(0), self.effect(1)]
    }

    /// The basis angle in [0, π), if the outcome-0 element is a real rank-one projector.
    pub fn angle(&self) -> Option<f64> {
        let p = &self.effect0;
        let rank = p.trace().re;
        let real = (0..2).all(|i| (0..2).all(|j| p.get(i, j).im.abs() < 1e-9));
        if (rank - 1.0).abs() > 1e-9 || !real {
            return None;
        }
        let c2 = p.get(0, 0).re - p.get(1, 1).re;
        let s2 = 2.0 * p.get(0, 1).re;
        Some((s2.atan2(c2) / 2.0).rem_euclid(PI))
    }
}

/// Bob's setting as a function of the trit. For t = 1 the measurement is
/// irrelevant; it is carried out with setting 0 and its outcome discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BobChoice {
    pub two: u8,
    pub parity: u8,
}

impl BobChoice {
    /// v = 1 for t = 2, v = 0 for t = P.
    pub const TABLE: BobChoice = BobChoice { two: 1, parity: 0 };

    /// The setting Bob uses, `None` when his outcome is ignored.
    pub fn setting(&self, t: Trit) -> Option<u8> {
        match t {
            Trit::One => None,
            Trit::Two => Some(self.two),
            Trit::Parity => Some(self.parity),
        }
    }

    /// The setting actually measured (0 for t = 1).
    pub fn measured(&self, t: Trit) -> u8 {
        self.setting(t).unwrap_or(0)
    }
}

impl Default for BobChoice {
    fn default() -> Self {
        Self::TABLE
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementStrategy {
    pub alice: [BinaryMeasurement; 2],
    pub bob: [BinaryMeasurement; 2],
    pub bob_choice: BobChoice,
}

impl MeasurementStrategy {
    pub fn from_angles(alice: [f64; 2], bob: [f64; 2]) -> Self {
        Self {
            alice: alice.map(BinaryMeasurement::from_angle),
            bob: bob.map(BinaryMeasurement::from_angle),
            bob_choice: BobChoice::TABLE,
        }
    }

    pub fn alice_angles(&self) -> Option<[f64; 2]> {
        Some([self.alice[0].angle()?, self.alice[1].angle()?])
    }

    pub fn bob_angles(&self) -> Option<[f64; 2]> {
        Some([self.bob[0].angle()?, self.bob[1].angle()?])
    }

    /// `{alice_angles, bob_angles, bob_choice}`; fails for measurements that
    /// are not real rank-one projectors.
    pub fn to_json(&self) -> Result<String> {
        let (Some(alice_angles), Some(bob_angles)) = (self.alice_angles(), self.bob_angles()) else {
            return Err(domain("strategy has measurements that are not described by an angle"));
        };
        let mut choice = BTreeMap::new();
        choice.insert("1".to_string(), Value::from("irrelevant"));
        choice.insert("2".to_string(), Value::from(self.bob_choice.two));
        choice.insert("P".to_string(), Value::from(self.bob_choice.parity));
        let file = StrategyFile {
            alice_angles,
            bob_angles,
            bob_choice: choice,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StrategyFile = serde_json::from_str(text)?;
        let bit = |key: &str| -> Result<u8> {
            match file.bob_choice.get(key) {
                Some(Value::Number(n)) if n.as_u64() == Some(0) || n.as_u64() == Some(1) => {
                    Ok(n.as_u64().unwrap() as u8)
                }
                Some(other) => Err(domain(format!("bob_choice[{key:?}] must be 0 or 1, got {other}"))),
                None => Err(domain(format!("bob_choice is missing {key:?}"))),
            }
        };
        let mut strat = Self::from_angles(file.alice_angles, file.bob_angles);
        strat.bob_choice = BobChoice {
            two: bit("2")?,
            parity: bit("P")?,
        };
        Ok(strat)
    }
}

#[derive(Serialize, Deserialize)]
struct StrategyFile {
    alice_angles: [f64; 2],
    bob_angles: [f64; 2],
    bob_choice: BTreeMap<String, Value>,
}

/// Alice: (|π/4⟩, |3π/4⟩) and (|0⟩, |π/2⟩). Bob: (|π/8⟩, |5π/8⟩) and (|3π/8⟩, |7π/8⟩).
pub fn chsh_strategy() -> MeasurementStrategy {
    MeasurementStrategy::from_angles([PI / 4.0, 0.0], [PI / 8.0, 3.0 * PI / 8.0])
}

/// Joint outcome table Pr[α, β | q, v], indexed `[q][v][α][β]`.
pub type JointTable = [[[[f64; 2]; 2]; 2]; 2];

const NS_TOL: f64 = 1e-12;

/// A bipartite correlation with binary inputs and outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct NonSignalingBox {
    probs: JointTable,
}

impl NonSignalingBox {
    /// Validates normalization, positivity and both no-signaling conditions.
    pub fn new(probs: JointTable) -> Result<Self> {
        for q in 0..2 {
            for v in 0..2 {
                let d = &probs[q][v];
                if d.iter().flatten().any(|&p| !(-NS_TOL..=1.0 + NS_TOL).contains(&p)) {
                    return Err(domain(format!("Pr[.,.|{q},{v}] has an entry outside [0, 1]")));
                }
                let sum: f64 = d.iter().flatten().sum();
                if (sum - 1.0).abs() > NS_TOL {
                    return Err(domain(format!("Pr[.,.|{q},{v}] sums to {sum}")));
                }
            }
        }
        for q in 0..2 {
            for a in 0..2 {
                let m0 = probs[q][0][a][0] + probs[q][0][a][1];
                let m1 = probs[q][1][a][0] + probs[q][1][a][1];
                if (m0 - m1).abs() > NS_TOL {
                    return Err(domain(format!("Alice's marginal depends on Bob's input (q={q})")));
                }
            }
        }
        for v in 0..2 {
            for b in 0..2 {
                let m0 = probs[0][v][0][b] + probs[0][v][1][b];
                let m1 = probs[1][v][0][b] + probs[1][v][1][b];
                if (m0 - m1).abs() > NS_TOL {
                    return Err(domain(format!("Bob's marginal depends on Alice's input (v={v})")));
                }
            }
        }
        Ok(Self { probs })
    }

    /// Popescu-Rohrlich box: α ⊕ β = q·v always, uniform marginals.
    pub fn pr_box() -> Self {
        let mut probs = [[[[0.0; 2]; 2]; 2]; 2];
        for (q, row) in probs.iter_mut().enumerate() {
            for (v, d) in row.iter_mut().enumerate() {
                for (a, pair) in d.iter_mut().enumerate() {
                    for (b, p) in pair.iter_mut().enumerate() {
                        if a ^ b == q & v {
                            *p = 0.5;
                        }
                    }
                }
            }
        }
        Self { probs }
    }

    /// Independent uniform bits.
    pub fn uniform() -> Self {
        Self {
            probs: [[[[0.25; 2]; 2]; 2]; 2],
        }
    }

    /// The Born-rule correlations of measuring `strat` on `rho`.
    pub fn from_quantum(rho: &DensityMatrix, strat: &MeasurementStrategy) -> Self {
        Self {
            probs: born_table(rho, strat),
        }
    }

    pub fn prob(&self, q: u8, v: u8, alpha: u8, beta: u8) -> f64 {
        self.probs[q as usize][v as usize][alpha as usize][beta as usize]
    }

    pub fn table(&self) -> &JointTable {
        &self.probs
    }

    /// Pr[α | q].
    pub fn alice_marginal(&self, q: u8, alpha: u8) -> f64 {
        self.prob(q, 0, alpha, 0) + self.prob(q, 0, alpha, 1)
    }

    /// `{"probs": [...]}` with 16 entries ordered by (q, v, α, β), β fastest.
    pub fn to_json(&self) -> String {
        let flat: Vec<f64> = self.probs.iter().flatten().flatten().flatten().copied().collect();
        serde_json::to_string_pretty(&BoxFile { probs: flat }).expect("plain numbers")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: BoxFile = serde_json::from_str(text)?;
        if file.probs.len() != 16 {
            return Err(domain(format!("box table has {} entries, expected 16", file.probs.len())));
        }
        let mut probs = [[[[0.0; 2]; 2]; 2]; 2];
        for (i, &p) in file.probs.iter().enumerate() {
            probs[i >> 3][(i >> 2) & 1][(i >> 1) & 1][i & 1] = p;
        }
        Self::new(probs)
    }
}

#[derive(Serialize, Deserialize)]
struct BoxFile {
    probs: Vec<f64>,
}

fn born_table(rho: &DensityMatrix, strat: &MeasurementStrategy) -> JointTable {
    let mut probs = [[[[0.0; 2]; 2]; 2]; 2];
    for q in 0..2 {
        let alice = strat.alice[q].effects();
        for v in 0..2 {
            let bob = strat.bob[v].effects();
            for a in 0..2 {
                for b in 0..2 {
                    probs[q][v][a][b] = rho.product_expectation(&alice[a], &bob[b]);
                }
            }
        }
    }
    probs
}

/// Probability that α ⊕ β = q·v.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationStats {
    /// ω(q, v), indexed `[q][v]`.
    pub per_pair: [[f64; 2]; 2],
    /// Average over the four (q, v) pairs.
    pub mean: f64,
}

impl RelationStats {
    pub fn from_box(nsb: &NonSignalingBox) -> Self {
        let mut per_pair = [[0.0; 2]; 2];
        for (q, row) in per_pair.iter_mut().enumerate() {
            for (v, w) in row.iter_mut().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        if a ^ b == q & v {
                            *w += nsb.probs[q][v][a][b];
                        }
                    }
                }
            }
        }
        let mean = per_pair.iter().flatten().sum::<f64>() / 4.0;
        Self { per_pair, mean }
    }
}

/// ω(q, v) = Σ_{α⊕β = qv} Tr[(A^q_α ⊗ B^v_β) ρ].
pub fn correlation_omega(rho: &DensityMatrix, strat: &MeasurementStrategy) -> RelationStats {
    RelationStats::from_box(&NonSignalingBox::from_quantum(rho, strat))
}

/// Success of the protocol when the relation holds with probability ω for
/// every (q, v): ω + (1 − ω)/3.
pub fn success_from_omega(omega: f64) -> f64 {
    omega + (1.0 - omega) / 3.0
}

pub fn encode_input(q: u8, alpha: u8) -> ChannelInput {
    ChannelInput {
        b1: q & 1,
        b2: alpha & 1,
    }
}

/// Bob's estimate q̂: b for t = 1, b ⊕ β otherwise.
pub fn decode(y: ChannelOutput, beta: Option<u8>) -> Result<u8> {
    match (y.t, beta) {
        (Trit::One, _) => Ok(y.b),
        (_, Some(beta)) => Ok(y.b ^ (beta & 1)),
        (t, None) => Err(domain(format!("decoding output ({t},{}) needs Bob's outcome", y.b))),
    }
}

/// Where each butterfly symbol sits in a particular channel's index order.
#[derive(Clone, Debug, PartialEq)]
pub struct ButterflyLayout {
    /// Channel input index for (q, α), indexed `[q][α]`.
    pub input: [[usize; 2]; 2],
    /// Symbol of each channel output index.
    pub outputs: Vec<ChannelOutput>,
}

impl ButterflyLayout {
    /// Matches channel labels against the butterfly alphabet. Any order is
    /// accepted; the probabilities themselves may be noisy.
    pub fn of(ch: &FiniteChannel) -> Result<Self> {
        let shape_err = || {
            domain(format!(
                "the decoder needs a 4-input, 6-output channel labeled like the butterfly channel \
                 (got {} inputs, {} outputs)",
                ch.num_inputs(),
                ch.num_outputs()
            ))
        };
        if ch.num_inputs() != 4 || ch.num_outputs() != 6 {
            return Err(shape_err());
        }
        let inputs = ch.butterfly_inputs().ok_or_else(shape_err)?;
        let outputs = ch.butterfly_outputs().ok_or_else(shape_err)?;
        let mut input = [[usize::MAX; 2]; 2];
        for (i, x) in inputs.iter().enumerate() {
            input[x.b1 as usize][x.b2 as usize] = i;
        }
        let all_outputs = (0..6).all(|k| outputs.contains(&ChannelOutput::from_index(k)));
        if input.iter().flatten().any(|&i| i == usize::MAX) || !all_outputs {
            return Err(shape_err());
        }
        Ok(Self { input, outputs })
    }
}

/// Exact success probability of the protocol with a quantum resource:
/// (1/2) Σ_q Σ_α Σ_y N(y|q,α) Σ_β [q̂(y,β) = q] Tr[(A^q_α ⊗ B^{v(y)}_β) ρ].
pub fn exact_success(
    rho: &DensityMatrix,
    strat: &MeasurementStrategy,
    ch: &FiniteChannel,
) -> Result<f64> {
    let layout = ButterflyLayout::of(ch)?;
    let mut total = 0.0;
    for q in 0..2u8 {
        let alice = strat.alice[q as usize].effects();
        for alpha in 0..2u8 {
            let x = layout.input[q as usize][alpha as usize];
            for (y, out) in layout.outputs.iter().enumerate() {
                let n = ch.prob(x, y);
                if n == 0.0 {
                    continue;
                }
                let v = strat.bob_choice.measured(out.t);
                let bob = strat.bob[v as usize].effects();
                for beta in 0..2u8 {
                    let beta_seen = strat.bob_choice.setting(out.t).map(|_| beta);
                    if decode(*out, beta_seen)? != q {
                        continue;
                    }
                    let op = kron(&alice[alpha as usize], &bob[beta as usize])?;
                    total += n * op.trace_product(rho.matrix()).re;
                }
            }
        }
    }
    Ok(total / 2.0)
}

/// Success probability with a non-signaling box in place of the measurements,
/// using Bob's settings v = 1 for t = 2 and v = 0 for t = P.
pub fn box_success(nsb: &NonSignalingBox, ch: &FiniteChannel) -> Result<f64> {
    box_success_with(nsb, BobChoice::TABLE, ch)
}

pub fn box_success_with(nsb: &NonSignalingBox, choice: BobChoice, ch: &FiniteChannel) -> Result<f64> {
    // Re-validate: the table may have been built in-crate without checks.
    let nsb = NonSignalingBox::new(nsb.probs)?;
    let layout = ButterflyLayout::of(ch)?;
    let mut total = 0.0;
    for q in 0..2u8 {
        for alpha in 0..2u8 {
            let x = layout.input[q as usize][alpha as usize];
            for (y, out) in layout.outputs.iter().enumerate() {
                let n = ch.prob(x, y);
                let v = choice.measured(out.t);
                for beta in 0..2u8 {
                    let beta_seen = choice.setting(out.t).map(|_| beta);
                    if decode(*out, beta_seen)? == q {
                        total += n * nsb.prob(q, v, alpha, beta);
                    }
                }
            }
        }
    }
    Ok(total / 2.0)
}
