//! Unassisted codes: one channel use, M equiprobable messages, deterministic
//! encoder and decoder.
//!
//! Shared randomness cannot help here: a randomized code is a mixture of
//! deterministic ones and its success is the weighted mean of theirs. So the
//! optimum is found by enumerating encodings, each paired with its MAP
//! decoder. Channels built from rationals are evaluated exactly.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::channel::{ratio_to_f64, FiniteChannel, Rational};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;

/// Upper bound on encodings visited by `best_deterministic_code`.
pub const MAX_ENCODINGS: f64 = 1e7;
/// Upper bound on (encoding, decoding) pairs visited by `exhaustive_search`.
pub const MAX_CODE_PAIRS: f64 = 1e8;

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCode {
    /// Channel input index used for each message.
    pub encoding: Vec<usize>,
    /// Decoded message for each channel output index.
    pub decoding: Vec<usize>,
}

impl ClassicalCode {
    pub fn num_messages(&self) -> usize {
        self.encoding.len()
    }

    pub fn validate(&self, ch: &FiniteChannel) -> Result<()> {
        let m = self.num_messages();
        if m == 0 {
            return Err(domain("a code needs at least one message"));
        }
        if let Some(x) = self.encoding.iter().find(|&&x| x >= ch.num_inputs()) {
            return Err(domain(format!("encoding uses input {x}, channel has {}", ch.num_inputs())));
        }
        if self.decoding.len() != ch.num_outputs() {
            return Err(domain(format!(
                "decoding covers {} outputs, channel has {}",
                self.decoding.len(),
                ch.num_outputs()
            )));
        }
        if let Some(q) = self.decoding.iter().find(|&&q| q >= m) {
            return Err(domain(format!("decoding names message {q}, only {m} exist")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A success probability, exact when the channel allows it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Success {
    Exact(Rational),
    Float(f64),
}

impl Success {
    pub fn value(&self) -> f64 {
        match self {
            Success::Exact(r) => ratio_to_f64(r),
            Success::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        match self {
            Success::Exact(r) => Some(*r),
            Success::Float(_) => None,
        }
    }

    fn cmp_value(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Success::Exact(a), Success::Exact(b)) => a.cmp(b),
            _ => self.value().total_cmp(&other.value()),
        }
    }
}

impl fmt::Display for Success {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Success::Exact(r) => write!(f, "{r} ({:.6})", ratio_to_f64(r)),
            Success::Float(x) => write!(f, "{x:.6}"),
        }
    }
}

/// (1/M) Σ_q Σ_y Pr[y|enc(q)]·[dec(y) = q].
pub fn evaluate_code(ch: &FiniteChannel, code: &ClassicalCode) -> Result<f64> {
    Ok(evaluate_code_checked(ch, code)?.value())
}

/// Like `evaluate_code`, but exact whenever the channel is.
pub fn evaluate_code_checked(ch: &FiniteChannel, code: &ClassicalCode) -> Result<Success> {
    code.validate(ch)?;
    let m = code.num_messages();
    Ok(match ch.exact_probs() {
        Some(exact) => {
            let hits: Rational = code
                .decoding
                .iter()
                .enumerate()
                .map(|(y, &q)| exact[code.encoding[q]][y])
                .sum();
            Success::Exact(hits / Rational::from_integer(m as i128))
        }
        None => {
            let hits: f64 = code
                .decoding
                .iter()
                .enumerate()
                .map(|(y, &q)| ch.prob(code.encoding[q], y))
                .sum();
            Success::Float(hits / m as f64)
        }
    })
}

/// Attaches the MAP decoder (uniform prior) to `encoding`. Ties, including
/// outputs that no codeword can produce, go to the smallest message index.
pub fn map_decoder(ch: &FiniteChannel, encoding: &[usize]) -> Result<ClassicalCode> {
    if encoding.is_empty() {
        return Err(domain("a code needs at least one message"));
    }
    if let Some(x) = encoding.iter().find(|&&x| x >= ch.num_inputs()) {
        return Err(domain(format!("encoding uses input {x}, channel has {}", ch.num_inputs())));
    }
    let decoding = (0..ch.num_outputs())
        .map(|y| map_decision(ch, encoding, y))
        .collect();
    Ok(ClassicalCode {
        encoding: encoding.to_vec(),
        decoding,
    })
}

fn map_decision(ch: &FiniteChannel, encoding: &[usize], y: usize) -> usize {
    let mut best = 0;
    match ch.exact_probs() {
        Some(exact) => {
            for (q, &x) in encoding.iter().enumerate().skip(1) {
                if exact[x][y] > exact[encoding[best]][y] {
                    best = q;
                }
            }
        }
        None => {
            for (q, &x) in encoding.iter().enumerate().skip(1) {
                if ch.prob(x, y) > ch.prob(encoding[best], y) {
                    best = q;
                }
            }
        }
    }
    best
}

fn decode_digits(mut index: usize, base: usize, digits: usize) -> Vec<usize> {
    let mut out = vec![0; digits];
    for d in out.iter_mut() {
        *d = index % base;
        index /= base;
    }
    out
}

fn count_checked(base: usize, digits: usize, limit: f64) -> Result<usize> {
    let size = (base as f64).powi(digits as i32);
    if size > limit {
        return Err(Error::Resource { size, limit });
    }
    Ok(base.pow(digits as u32))
}

/// Best over chunks; ties keep the smallest index so the result does not
/// depend on how the work was scheduled.
fn argmax_chunks(
    total: usize,
    exec: Exec,
    score: impl Fn(usize) -> Success + Sync + Send,
) -> (usize, Success) {
    let chunks = total.div_ceil(CHUNK);
    exec.map(chunks, |c| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(total);
        let mut best = (start, score(start));
        for i in start + 1..end {
            let s = score(i);
            if s.cmp_value(&best.1) == Ordering::Greater {
                best = (i, s);
            }
        }
        best
    })
    .into_iter()
    .reduce(|a, b| if b.1.cmp_value(&a.1) == Ordering::Greater { b } else { a })
    .expect("at least one candidate")
}

/// Globally optimal deterministic code with `m` messages: every encoding is
/// tried with its MAP decoder.
pub fn best_deterministic_code(ch: &FiniteChannel, m: usize) -> Result<(ClassicalCode, Success)> {
    best_deterministic_code_with(ch, m, Exec::default())
}

pub fn best_deterministic_code_with(
    ch: &FiniteChannel,
    m: usize,
    exec: Exec,
) -> Result<(ClassicalCode, Success)> {
    if m == 0 {
        return Err(domain("a code needs at least one message"));
    }
    let total = count_checked(ch.num_inputs(), m, MAX_ENCODINGS)?;
    let score = |e: usize| {
        let enc = decode_digits(e, ch.num_inputs(), m);
        map_success(ch, &enc)
    };
    let (e, success) = argmax_chunks(total, exec, score);
    let code = map_decoder(ch, &decode_digits(e, ch.num_inputs(), m))?;
    Ok((code, success))
}

/// (1/M) Σ_y max_q Pr[y|enc(q)], the success of the MAP decoder.
fn map_success(ch: &FiniteChannel, encoding: &[usize]) -> Success {
    let m = encoding.len();
    match ch.exact_probs() {
        Some(exact) => {
            let mut hits = Rational::zero();
            for y in 0..ch.num_outputs() {
                hits += encoding.iter().map(|&x| exact[x][y]).max().expect("m >= 1");
            }
            Success::Exact(hits / Rational::from_integer(m as i128))
        }
        None => {
            let hits: f64 = (0..ch.num_outputs())
                .map(|y| encoding.iter().map(|&x| ch.prob(x, y)).fold(0.0, f64::max))
                .sum();
            Success::Float(hits / m as f64)
        }
    }
}

/// Result of the brute-force search over every (encoding, decoding) pair.
#[derive(Clone, Debug)]
pub struct ExhaustiveReport {
    pub best_code: ClassicalCode,
    pub best: Success,
    pub codes_examined: usize,
    /// Encodings for which some decoder beat the MAP decoder (always empty).
    pub map_beaten: Vec<Vec<usize>>,
}

/// Enumerates all encodings and all decodings, without the MAP shortcut.
pub fn exhaustive_search(ch: &FiniteChannel, m: usize) -> Result<ExhaustiveReport> {
    if m == 0 {
        return Err(domain("a code needs at least one message"));
    }
    let encodings = count_checked(ch.num_inputs(), m, MAX_ENCODINGS)?;
    let decodings = count_checked(m, ch.num_outputs(), MAX_CODE_PAIRS)?;
    let pairs = encodings as f64 * decodings as f64;
    if pairs > MAX_CODE_PAIRS {
        return Err(Error::Resource {
            size: pairs,
            limit: MAX_CODE_PAIRS,
        });
    }

    let mut best: Option<(ClassicalCode, Success)> = None;
    let mut map_beaten = Vec::new();
    for e in 0..encodings {
        let encoding = decode_digits(e, ch.num_inputs(), m);
        let map_value = map_success(ch, &encoding);
        let mut enc_best: Option<(ClassicalCode, Success)> = None;
        for d in 0..decodings {
            let code = ClassicalCode {
                encoding: encoding.clone(),
                decoding: decode_digits(d, m, ch.num_outputs()),
            };
            let s = evaluate_code_checked(ch, &code)?;
            if enc_best.as_ref().is_none_or(|(_, b)| s.cmp_value(b) == Ordering::Greater) {
                enc_best = Some((code, s));
            }
        }
        let (code, s) = enc_best.expect("at least one decoding");
        if s.cmp_value(&map_value) == Ordering::Greater && s.value() - map_value.value() > 1e-12 {
            map_beaten.push(encoding);
        }
        if best.as_ref().is_none_or(|(_, b)| s.cmp_value(b) == Ordering::Greater) {
            best = Some((code, s));
        }
    }
    let (best_code, best) = best.expect("at least one encoding");
    Ok(ExhaustiveReport {
        best_code,
        best,
        codes_examined: encodings * decodings,
        map_beaten,
    })
}

/// Success of a code chosen at random with the given weights (shared randomness).
pub fn mixture_success(ch: &FiniteChannel, codes: &[(ClassicalCode, f64)]) -> Result<f64> {
    if codes.is_empty() {
        return Err(domain("empty mixture"));
    }
    if codes.iter().any(|(_, w)| w.is_nan() || *w < 0.0) {
        return Err(domain("mixture weights must be nonnegative"));
    }
    let total: f64 = codes.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(domain(format!("mixture weights sum to {total}, expected 1")));
    }
    codes
        .iter()
        .map(|(code, w)| Ok(w * evaluate_code(ch, code)?))
        .sum()
}
