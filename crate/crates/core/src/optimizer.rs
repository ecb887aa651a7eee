//! Seesaw search over measurement settings for a fixed state.
//!
//! With one party's measurements frozen, the success probability is linear in
//! the other party's measurement elements: Σ_settings Tr[E₀R₀ + E₁R₁]. Since
//! E₁ = I − E₀, the best E₀ for each setting is the projector onto the
//! positive eigenspace of R₀ − R₁. Alternating the two sides never lowers the
//! objective.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::FiniteChannel;
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::protocol::{decode, exact_success, BinaryMeasurement, ButterflyLayout, MeasurementStrategy};
use crate::qmath::{positive_part_projector, ComplexMatrix};
use crate::rng;
use crate::states::DensityMatrix;

/// Allowed objective decrease per half-step before a run is declared faulty.
pub const MONOTONE_SLACK: f64 = 1e-10;

/// Below this Frobenius norm R₀ − R₁ counts as zero and the measurement is kept.
const FLAT_DIRECTION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

/// Score operators `[setting][outcome]` for one side.
pub type ScoreOperators = [[ComplexMatrix; 2]; 2];

/// Linearization of the success probability in `side`'s measurement elements,
/// with the other side held at `strat`. The objective equals
/// Σ_setting Σ_outcome Tr[E_outcome R_outcome] with no constant term.
pub fn score_operators(
    rho: &DensityMatrix,
    strat: &MeasurementStrategy,
    ch: &FiniteChannel,
    side: Side,
) -> Result<ScoreOperators> {
    let layout = ButterflyLayout::of(ch)?;
    let zero = || ComplexMatrix::zeros(2).expect("2x2");
    let mut scores: ScoreOperators = [[zero(), zero()], [zero(), zero()]];

    for q in 0..2u8 {
        for alpha in 0..2u8 {
            let x = layout.input[q as usize][alpha as usize];
            for (y, out) in layout.outputs.iter().enumerate() {
                let n = ch.prob(x, y);
                if n == 0.0 {
                    continue;
                }
                let v = strat.bob_choice.measured(out.t);
                for beta in 0..2u8 {
                    let beta_seen = strat.bob_choice.setting(out.t).map(|_| beta);
                    if decode(*out, beta_seen)? != q {
                        continue;
                    }
                    let w = 0.5 * n;
                    let (slot, reduced) = match side {
                        Side::Alice => (
                            &mut scores[q as usize][alpha as usize],
                            rho.conditional_alice(&strat.bob[v as usize].effect(beta)),
                        ),
                        Side::Bob => (
                            &mut scores[v as usize][beta as usize],
                            rho.conditional_bob(&strat.alice[q as usize].effect(alpha)),
                        ),
                    };
                    *slot = &*slot + &reduced.scale_real(w);
                }
            }
        }
    }
    Ok(scores)
}

/// Σ_setting Σ_outcome Tr[E_outcome R_outcome].
pub fn objective_from_scores(scores: &ScoreOperators, measurements: &[BinaryMeasurement; 2]) -> f64 {
    let mut total = 0.0;
    for (setting, pair) in scores.iter().enumerate() {
        for (outcome, r) in pair.iter().enumerate() {
            total += measurements[setting].effect(outcome as u8).trace_product(r).re;
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeesawInit {
    Strategy(MeasurementStrategy),
    /// Four angles drawn uniformly from [0, π) with this seed.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeesawConfig {
    /// Maximum number of full sweeps (Alice then Bob).
    pub max_iters: usize,
    /// Stop once a full sweep improves the objective by less than this.
    pub tol: f64,
    pub init: SeesawInit,
}

impl SeesawConfig {
    pub fn new(init: SeesawInit) -> Self {
        Self {
            max_iters: 50,
            tol: 1e-10,
            init,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(domain("seesaw needs at least one iteration"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(domain("seesaw tolerance must be positive"));
        }
        Ok(())
    }
}

/// Random real measurement angles in [0, π) for all four settings.
pub fn random_strategy(seed: u64) -> MeasurementStrategy {
    let mut r = rng::stream(seed, 0);
    let mut angle = || r.random::<f64>() * PI;
    MeasurementStrategy::from_angles([angle(), angle()], [angle(), angle()])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeesawResult {
    pub strategy: MeasurementStrategy,
    pub final_objective: f64,
    /// Full sweeps performed.
    pub iterations: usize,
    /// Objective at the start, then after every half-step.
    pub trace: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ResultFile {
    final_objective: f64,
    iterations: usize,
    angles: AnglesFile,
    trace: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AnglesFile {
    alice: Option<[f64; 2]>,
    bob: Option<[f64; 2]>,
}

impl SeesawResult {
    /// `{final_objective, iterations, angles, trace}`; angles are `null` for
    /// measurements that are not real rank-one projectors.
    pub fn to_json(&self) -> String {
        let file = ResultFile {
            final_objective: self.final_objective,
            iterations: self.iterations,
            angles: AnglesFile {
                alice: self.strategy.alice_angles(),
                bob: self.strategy.bob_angles(),
            },
            trace: self.trace.clone(),
        };
        serde_json::to_string_pretty(&file).expect("plain data")
    }
}

fn improve(
    measurements: &mut [BinaryMeasurement; 2],
    scores: &ScoreOperators,
) -> Result<()> {
    for (m, [r0, r1]) in measurements.iter_mut().zip(scores) {
        let diff = r0 - r1;
        if diff.frobenius_norm() < FLAT_DIRECTION {
            continue;
        }
        *m = BinaryMeasurement::from_projector(positive_part_projector(&diff)?)?;
    }
    Ok(())
}

pub fn seesaw(rho: &DensityMatrix, ch: &FiniteChannel, cfg: &SeesawConfig) -> Result<SeesawResult> {
    cfg.validate()?;
    ButterflyLayout::of(ch)?;
    let mut strat = match &cfg.init {
        SeesawInit::Strategy(s) => s.clone(),
        SeesawInit::Random(seed) => random_strategy(*seed),
    };
    let mut objective = exact_success(rho, &strat, ch)?;
    let mut trace = vec![objective];
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        let sweep_start = objective;
        for side in [Side::Alice, Side::Bob] {
            let scores = score_operators(rho, &strat, ch, side)?;
            match side {
                Side::Alice => improve(&mut strat.alice, &scores)?,
                Side::Bob => improve(&mut strat.bob, &scores)?,
            }
            let next = exact_success(rho, &strat, ch)?;
            if next < objective - MONOTONE_SLACK {
                return Err(Error::Internal(format!(
                    "seesaw objective fell from {objective:.15} to {next:.15} on the {side:?} \
                     half-step of sweep {iterations}"
                )));
            }
            objective = next;
            trace.push(objective);
        }
        if objective - sweep_start < cfg.tol {
            break;
        }
    }
    Ok(SeesawResult {
        strategy: strat,
        final_objective: objective,
        iterations,
        trace,
    })
}

/// Independent seesaw runs from random starts, one per seed.
pub fn multi_start(
    rho: &DensityMatrix,
    ch: &FiniteChannel,
    seeds: &[u64],
    max_iters: usize,
    tol: f64,
    exec: Exec,
) -> Result<Vec<SeesawResult>> {
    exec.map(seeds.len(), |i| {
        let cfg = SeesawConfig {
            max_iters,
            tol,
            init: SeesawInit::Random(seeds[i]),
        };
        seesaw(rho, ch, &cfg)
    })
    .into_iter()
    .collect()
}
