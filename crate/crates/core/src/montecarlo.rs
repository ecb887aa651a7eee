//! Trial-by-trial simulation of the protocol.
//!
//! Each trial draws a uniform message q, Alice's outcome α from her marginal,
//! the channel output y, and then Bob's outcome from the state conditioned on
//! α. Two backends produce Bob's outcome:
//!
//! * `Direct` samples β from Pr[β | α, q, v] and decodes with `decode`.
//! * `Physical` mimics the optical setup: two Pockels cells apply X^x Z^z to
//!   Bob's qubit, which is then analyzed in the fixed (|π/8⟩, |5π/8⟩) basis.
//!   The analyzer outcome is Bob's decoded bit directly.
//!
//! Trials are split into fixed-size shards, each with its own random stream
//! (see `rng`), so counts do not depend on the thread count.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelOutput, FiniteChannel, Trit};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::protocol::{
    chsh_strategy, decode, BinaryMeasurement, BobChoice, ButterflyLayout, MeasurementBasis,
    MeasurementStrategy, NonSignalingBox,
};
use crate::qmath::{pauli_x, pauli_z, tol, ComplexMatrix};
use crate::rng;
use crate::states::DensityMatrix;

/// Trials per random stream.
pub const SHARD_SIZE: u64 = 1 << 16;

/// The fixed analyzer in front of Bob's detectors.
pub const ANALYZER: MeasurementBasis = MeasurementBasis { angle: PI / 8.0 };

/// Pockels cell states; `true` means the cell is on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PockelsSettings {
    pub x_on: bool,
    pub z_on: bool,
}

impl PockelsSettings {
    /// X^x_on · Z^z_on.
    pub fn unitary(&self) -> ComplexMatrix {
        let mut u = ComplexMatrix::identity(2).expect("2x2");
        if self.x_on {
            u = &u * &pauli_x();
        }
        if self.z_on {
            u = &u * &pauli_z();
        }
        u
    }

    /// Effect of seeing analyzer outcome `outcome` after the cells:
    /// U† Π_outcome U.
    pub fn effective_effect(&self, outcome: u8) -> ComplexMatrix {
        let u = self.unitary();
        &(&u.adjoint() * &ANALYZER.projector(outcome)) * &u
    }
}

/// Cell settings for channel output (t, b): t = 2 → (1 ⊕ b, b), t = P → (b, b).
pub fn pockels_settings(t: Trit, b: u8) -> Result<PockelsSettings> {
    let b = b & 1 == 1;
    match t {
        Trit::One => Err(Error::NotApplicable(
            "Bob's measurement is not used when t = 1".into(),
        )),
        Trit::Two => Ok(PockelsSettings { x_on: !b, z_on: b }),
        Trit::Parity => Ok(PockelsSettings { x_on: b, z_on: b }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Physical,
    Direct,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Physical => "physical",
            Backend::Direct => "direct",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(Backend::Physical),
            "direct" => Ok(Backend::Direct),
            other => Err(domain(format!("unknown backend {other:?}"))),
        }
    }
}

/// What Alice and Bob share.
#[derive(Clone, Copy, Debug)]
pub enum Source<'a> {
    Quantum(&'a DensityMatrix),
    Box(&'a NonSignalingBox),
}

/// One protocol round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub q: u8,
    pub alpha: u8,
    pub t: Trit,
    pub b: u8,
    /// Bob's setting; absent when t = 1.
    pub v: Option<u8>,
    /// Bob's outcome; absent when t = 1.
    pub beta: Option<u8>,
    pub q_hat: u8,
    pub success: bool,
}

/// Tally of (sent, decoded) bit pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    /// `counts[q][q_hat]`.
    pub counts: [[u64; 2]; 2],
}

impl CountsTable {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn successes(&self) -> u64 {
        self.counts[0][0] + self.counts[1][1]
    }

    pub fn merge(&mut self, other: &CountsTable) {
        for q in 0..2 {
            for k in 0..2 {
                self.counts[q][k] += other.counts[q][k];
            }
        }
    }

    /// `q,q_hat,count` with rows in (q, q_hat) order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,q_hat,count\n");
        for q in 0..2 {
            for k in 0..2 {
                out.push_str(&format!("{q},{k},{}\n", self.counts[q][k]));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut table = CountsTable::default();
        for record in r.records() {
            let record = record?;
            let field = |i: usize| -> Result<u64> {
                record
                    .get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| domain(format!("bad counts row {:?}", record)))
            };
            let (q, k, c) = (field(0)?, field(1)?, field(2)?);
            if q > 1 || k > 1 {
                return Err(domain(format!("bits out of range in counts row {:?}", record)));
            }
            table.counts[q as usize][k as usize] += c;
        }
        Ok(table)
    }
}

/// Counts plus the empirical frequency of α ⊕ β = q·v.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialSummary {
    pub counts: CountsTable,
    /// `relation[q][v] = (hits, trials)` over rounds where Bob measured.
    pub relation: [[(u64, u64); 2]; 2],
}

impl TrialSummary {
    fn record(&mut self, rec: &TrialRecord) {
        self.counts.counts[rec.q as usize][rec.q_hat as usize] += 1;
        if let (Some(v), Some(beta)) = (rec.v, rec.beta) {
            let cell = &mut self.relation[rec.q as usize][v as usize];
            cell.1 += 1;
            if rec.alpha ^ beta == rec.q & v {
                cell.0 += 1;
            }
        }
    }

    fn merge(&mut self, other: &TrialSummary) {
        self.counts.merge(&other.counts);
        for q in 0..2 {
            for v in 0..2 {
                self.relation[q][v].0 += other.relation[q][v].0;
                self.relation[q][v].1 += other.relation[q][v].1;
            }
        }
    }
}

/// Seed and configuration needed to replay a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub n: u64,
    pub backend: Backend,
    pub strategy_hash: String,
}

/// p̂ = successes / total and its binomial standard error.
pub fn estimate_success(counts: &CountsTable) -> Result<(f64, f64)> {
    let total = counts.total();
    if total == 0 {
        return Err(domain("no trials recorded"));
    }
    let p = counts.successes() as f64 / total as f64;
    Ok((p, (p * (1.0 - p) / total as f64).sqrt()))
}

/// Precomputed sampling tables for one (source, strategy, channel, backend).
struct TrialModel<'a> {
    ch: &'a FiniteChannel,
    layout: ButterflyLayout,
    choice: BobChoice,
    backend: Backend,
    /// Pr[α = 0 | q].
    alpha0: [f64; 2],
    /// Direct: Pr[β = 0 | q, α, v], indexed `[q][α][v]`.
    beta0: [[[f64; 2]; 2]; 2],
    /// Physical: Pr[analyzer = 0 | q, α, y], indexed `[q][α][y]`.
    analyzer0: [[Vec<f64>; 2]; 2],
}

impl<'a> TrialModel<'a> {
    fn new(
        source: Source<'_>,
        strat: &MeasurementStrategy,
        ch: &'a FiniteChannel,
        backend: Backend,
    ) -> Result<Self> {
        let layout = ButterflyLayout::of(ch)?;
        let nsb = match source {
            Source::Quantum(rho) => NonSignalingBox::from_quantum(rho, strat),
            Source::Box(b) => NonSignalingBox::new(*b.table())?,
        };
        let mut alpha0 = [0.0; 2];
        let mut beta0 = [[[0.0; 2]; 2]; 2];
        for q in 0..2u8 {
            alpha0[q as usize] = nsb.alice_marginal(q, 0);
            for a in 0..2u8 {
                let pa = nsb.alice_marginal(q, a);
                for v in 0..2u8 {
                    beta0[q as usize][a as usize][v as usize] = if pa > 0.0 {
                        nsb.prob(q, v, a, 0) / pa
                    } else {
                        0.5
                    };
                }
            }
        }
        let mut analyzer0: [[Vec<f64>; 2]; 2] = Default::default();
        if backend == Backend::Physical {
            let rho = match source {
                Source::Quantum(rho) => rho,
                Source::Box(_) => {
                    return Err(Error::NotApplicable(
                        "the physical backend needs a quantum state, not a box".into(),
                    ))
                }
            };
            check_hardware_realizable(strat)?;
            for q in 0..2 {
                for a in 0..2u8 {
                    let effect = strat.alice[q].effect(a);
                    let bob_state = rho.conditional_bob(&effect);
                    let pa = bob_state.trace().re;
                    analyzer0[q][a as usize] = layout
                        .outputs
                        .iter()
                        .map(|out| match pockels_settings(out.t, out.b) {
                            Ok(cells) if pa > 0.0 => {
                                let u = cells.unitary();
                                let rotated = &(&u * &bob_state) * &u.adjoint();
                                (ANALYZER.projector(0).trace_product(&rotated).re / pa).clamp(0.0, 1.0)
                            }
                            _ => 0.5,
                        })
                        .collect();
                }
            }
        }
        Ok(Self {
            ch,
            layout,
            choice: strat.bob_choice,
            backend,
            alpha0,
            beta0,
            analyzer0,
        })
    }

    fn trial<R: Rng>(&self, rng: &mut R) -> TrialRecord {
        let q = rng.random_bool(0.5) as u8;
        let alpha = (rng.random::<f64>() >= self.alpha0[q as usize]) as u8;
        let x = self.layout.input[q as usize][alpha as usize];
        let y = self.ch.sample_unchecked(x, rng);
        let ChannelOutput { t, b } = self.layout.outputs[y];

        let (v, beta, q_hat) = match self.choice.setting(t) {
            None => (None, None, b),
            Some(v) => match self.backend {
                Backend::Direct => {
                    let p0 = self.beta0[q as usize][alpha as usize][v as usize];
                    let beta = (rng.random::<f64>() >= p0) as u8;
                    let q_hat = decode(ChannelOutput { t, b }, Some(beta)).expect("beta present");
                    (Some(v), Some(beta), q_hat)
                }
                Backend::Physical => {
                    let p0 = self.analyzer0[q as usize][alpha as usize][y];
                    let detector = (rng.random::<f64>() >= p0) as u8;
                    (Some(v), Some(detector ^ b), detector)
                }
            },
        };
        TrialRecord {
            q,
            alpha,
            t,
            b,
            v,
            beta,
            q_hat,
            success: q == q_hat,
        }
    }
}

/// The Pockels hardware only realizes Bob's CHSH settings with the table's choice of v.
fn check_hardware_realizable(strat: &MeasurementStrategy) -> Result<()> {
    let preset = chsh_strategy();
    let same = |a: &BinaryMeasurement, b: &BinaryMeasurement| {
        a.effect(0).max_abs_diff(&b.effect(0)) <= tol::COMPARISON
    };
    if strat.bob_choice != BobChoice::TABLE
        || !same(&strat.bob[0], &preset.bob[0])
        || !same(&strat.bob[1], &preset.bob[1])
    {
        return Err(Error::NotApplicable(
            "the physical backend only implements Bob's CHSH settings".into(),
        ));
    }
    Ok(())
}

/// Runs `n` trials and returns the (q, q̂) tally.
pub fn run_trials(
    source: Source<'_>,
    strat: &MeasurementStrategy,
    ch: &FiniteChannel,
    n: u64,
    seed: u64,
    backend: Backend,
) -> Result<CountsTable> {
    Ok(run_trial_summary(source, strat, ch, n, seed, backend, Exec::default())?.counts)
}

pub fn run_trial_summary(
    source: Source<'_>,
    strat: &MeasurementStrategy,
    ch: &FiniteChannel,
    n: u64,
    seed: u64,
    backend: Backend,
    exec: Exec,
) -> Result<TrialSummary> {
    if n == 0 {
        return Err(domain("at least one trial is required"));
    }
    let model = TrialModel::new(source, strat, ch, backend)?;
    let shards = n.div_ceil(SHARD_SIZE) as usize;
    let parts = exec.map(shards, |k| {
        let start = k as u64 * SHARD_SIZE;
        let len = SHARD_SIZE.min(n - start);
        let mut rng = rng::stream(seed, k as u64);
        let mut summary = TrialSummary::default();
        for _ in 0..len {
            summary.record(&model.trial(&mut rng));
        }
        summary
    });
    let mut total = TrialSummary::default();
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

/// The first `n` trial records of a run with `seed`, serially.
pub fn trace_trials(
    source: Source<'_>,
    strat: &MeasurementStrategy,
    ch: &FiniteChannel,
    n: u64,
    seed: u64,
    backend: Backend,
) -> Result<Vec<TrialRecord>> {
    let model = TrialModel::new(source, strat, ch, backend)?;
    let mut out = Vec::with_capacity(n as usize);
    let mut k = 0;
    while (out.len() as u64) < n {
        let mut rng = rng::stream(seed, k);
        let len = SHARD_SIZE.min(n - out.len() as u64);
        out.extend((0..len).map(|_| model.trial(&mut rng)));
        k += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::butterfly_channel;
    use crate::states::phi_plus;

    #[test]
    fn pockels_table() {
        assert_eq!(
            pockels_settings(Trit::Two, 0).unwrap(),
            PockelsSettings { x_on: true, z_on: false }
        );
        assert_eq!(
            pockels_settings(Trit::Parity, 1).unwrap(),
            PockelsSettings { x_on: true, z_on: true }
        );
        assert_eq!(
            pockels_settings(Trit::Two, 1).unwrap(),
            PockelsSettings { x_on: false, z_on: true }
        );
        assert!(matches!(pockels_settings(Trit::One, 0), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn estimate_examples() {
        let one = CountsTable { counts: [[1, 0], [0, 0]] };
        assert_eq!(estimate_success(&one).unwrap(), (1.0, 0.0));
        let half = CountsTable { counts: [[250, 250], [250, 250]] };
        let (p, s) = estimate_success(&half).unwrap();
        assert_eq!(p, 0.5);
        assert!((s - 0.015_811_388).abs() < 1e-8);
        assert!(estimate_success(&CountsTable::default()).is_err());
    }

    #[test]
    fn reported_experiment_ratio() {
        let c = CountsTable { counts: [[188_845, 23_429], [0, 0]] };
        assert_eq!(c.successes(), 188_845);
        assert_eq!(c.total() - c.successes(), 23_429);
        let (p, _) = estimate_success(&c).unwrap();
        assert!((p - 0.8896).abs() < 5e-5);
    }

    #[test]
    fn trial_records_are_consistent() {
        let rho = phi_plus();
        let ch = butterfly_channel();
        for backend in [Backend::Direct, Backend::Physical] {
            let recs = trace_trials(Source::Quantum(&rho), &chsh_strategy(), &ch, 2000, 3, backend).unwrap();
            for r in recs {
                assert_eq!(r.success, r.q == r.q_hat);
                assert_eq!(r.v.is_none(), r.t == Trit::One);
                assert_eq!(r.beta.is_none(), r.t == Trit::One);
                if let Some(beta) = r.beta {
                    assert_eq!(r.q_hat, r.b ^ beta);
                }
                // channel consistency
                let b = match r.t {
                    Trit::One => r.q,
                    Trit::Two => r.alpha,
                    Trit::Parity => r.q ^ r.alpha,
                };
                assert_eq!(r.b, b);
            }
        }
    }

    #[test]
    fn trace_matches_summary() {
        let rho = phi_plus();
        let ch = butterfly_channel();
        let strat = chsh_strategy();
        let n = SHARD_SIZE + 1000;
        let recs = trace_trials(Source::Quantum(&rho), &strat, &ch, n, 11, Backend::Direct).unwrap();
        let summary = run_trial_summary(Source::Quantum(&rho), &strat, &ch, n, 11, Backend::Direct, Exec::Serial).unwrap();
        let mut by_hand = CountsTable::default();
        for r in &recs {
            by_hand.counts[r.q as usize][r.q_hat as usize] += 1;
        }
        assert_eq!(by_hand, summary.counts);
    }

    #[test]
    fn physical_backend_restrictions() {
        let rho = phi_plus();
        let ch = butterfly_channel();
        let pr = NonSignalingBox::pr_box();
        assert!(matches!(
            run_trials(Source::Box(&pr), &chsh_strategy(), &ch, 10, 0, Backend::Physical),
            Err(Error::NotApplicable(_))
        ));
        let other = MeasurementStrategy::from_angles([0.0, 1.0], [0.2, 0.3]);
        assert!(run_trials(Source::Quantum(&rho), &other, &ch, 10, 0, Backend::Physical).is_err());
        assert!(run_trials(Source::Quantum(&rho), &other, &ch, 10, 0, Backend::Direct).is_ok());
        assert!(run_trials(Source::Quantum(&rho), &other, &ch, 0, 0, Backend::Direct).is_err());
    }

    #[test]
    fn counts_csv() {
        let c = CountsTable { counts: [[5, 1], [2, 7]] };
        let text = c.to_csv();
        assert_eq!(text, "q,q_hat,count\n0,0,5\n0,1,1\n1,0,2\n1,1,7\n");
        assert_eq!(CountsTable::from_csv(&text).unwrap(), c);
    }

    #[test]
    fn backend_names() {
        assert_eq!("physical".parse::<Backend>().unwrap(), Backend::Physical);
        assert_eq!(Backend::Direct.to_string(), "direct");
        assert!("optical".parse::<Backend>().is_err());
    }
}
