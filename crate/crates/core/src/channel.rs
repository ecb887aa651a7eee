//! Finite classical channels given by their conditional probability matrix
//! Pr[y | x], plus truth tables and the inquisition overlap.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Exact channel entries.
pub type Rational = Ratio<i128>;

const ROW_SUM_TOL: f64 = 1e-12;

/// Which bit of the input the butterfly channel reveals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trit {
    One,
    Two,
    Parity,
}

impl Trit {
    pub const ALL: [Trit; 3] = [Trit::One, Trit::Two, Trit::Parity];

    pub fn index(self) -> usize {
        match self {
            Trit::One => 0,
            Trit::Two => 1,
            Trit::Parity => 2,
        }
    }
}

impl fmt::Display for Trit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trit::One => "1",
            Trit::Two => "2",
            Trit::Parity => "P",
        })
    }
}

impl FromStr for Trit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Trit::One),
            "2" => Ok(Trit::Two),
            "P" | "p" => Ok(Trit::Parity),
            other => Err(domain(format!("unknown trit {other:?}"))),
        }
    }
}

fn parse_bit(s: &str) -> Result<u8> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(domain(format!("expected a bit, found {other:?}"))),
    }
}

fn parse_pair(label: &str) -> Result<(&str, &str)> {
    let inner = label
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| domain(format!("label {label:?} is not of the form (a,b)")))?;
    inner
        .split_once(',')
        .ok_or_else(|| domain(format!("label {label:?} is not of the form (a,b)")))
}

/// Butterfly channel input (b1, b2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChannelInput {
    pub b1: u8,
    pub b2: u8,
}

impl ChannelInput {
    pub fn new(b1: u8, b2: u8) -> Result<Self> {
        if b1 > 1 || b2 > 1 {
            return Err(domain(format!("input bits ({b1},{b2}) must be 0 or 1")));
        }
        Ok(Self { b1, b2 })
    }

    /// Position in the canonical ordering (0,0), (0,1), (1,0), (1,1).
    pub fn index(self) -> usize {
        2 * self.b1 as usize + self.b2 as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self {
            b1: (i >> 1) as u8 & 1,
            b2: i as u8 & 1,
        }
    }

    pub fn label(self) -> String {
        format!("({},{})", self.b1, self.b2)
    }

    pub fn parse(label: &str) -> Result<Self> {
        let (a, b) = parse_pair(label)?;
        Self::new(parse_bit(a)?, parse_bit(b)?)
    }
}

/// Butterfly channel output (t, b).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChannelOutput {
    pub t: Trit,
    pub b: u8,
}

impl ChannelOutput {
    pub fn new(t: Trit, b: u8) -> Result<Self> {
        if b > 1 {
            return Err(domain(format!("output bit {b} must be 0 or 1")));
        }
        Ok(Self { t, b })
    }

    /// Position in the canonical ordering (1,0), (1,1), (2,0), (2,1), (P,0), (P,1).
    pub fn index(self) -> usize {
        2 * self.t.index() + self.b as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self {
            t: Trit::ALL[i / 2],
            b: (i % 2) as u8,
        }
    }

    pub fn label(self) -> String {
        format!("({},{})", self.t, self.b)
    }

    pub fn parse(label: &str) -> Result<Self> {
        let (t, b) = parse_pair(label)?;
        Self::new(t.parse()?, parse_bit(b)?)
    }
}

/// A stochastic matrix Pr[y|x] with display labels for inputs and outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteChannel {
    input_labels: Vec<String>,
    output_labels: Vec<String>,
    probs: Vec<Vec<f64>>,
    exact: Option<Vec<Vec<Rational>>>,
    cdf: Vec<Vec<f64>>,
}

impl FiniteChannel {
    pub fn new(
        input_labels: Vec<String>,
        output_labels: Vec<String>,
        probs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if input_labels.is_empty() || output_labels.is_empty() {
            return Err(domain("a channel needs at least one input and one output"));
        }
        if probs.len() != input_labels.len() {
            return Err(domain(format!(
                "{} probability rows for {} inputs",
                probs.len(),
                input_labels.len()
            )));
        }
        check_unique(&input_labels, "input")?;
        check_unique(&output_labels, "output")?;
        for (x, row) in probs.iter().enumerate() {
            if row.len() != output_labels.len() {
                return Err(domain(format!(
                    "row {x} has {} entries for {} outputs",
                    row.len(),
                    output_labels.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(domain(format!("row {x} has entry {p} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(domain(format!("row {x} sums to {sum}, expected 1")));
            }
        }
        let cdf = probs
            .iter()
            .map(|row| {
                row.iter()
                    .scan(0.0, |acc, p| {
                        *acc += p;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            input_labels,
            output_labels,
            probs,
            exact: None,
            cdf,
        })
    }

    /// A channel whose entries are known exactly; rows must sum to exactly one.
    pub fn new_exact(
        input_labels: Vec<String>,
        output_labels: Vec<String>,
        probs: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        for (x, row) in probs.iter().enumerate() {
            let sum: Rational = row.iter().sum();
            if sum != Rational::from_integer(1) {
                return Err(domain(format!("row {x} sums to {sum}, expected 1")));
            }
        }
        let floats = probs
            .iter()
            .map(|row| row.iter().map(ratio_to_f64).collect())
            .collect();
        let mut ch = Self::new(input_labels, output_labels, floats)?;
        ch.exact = Some(probs);
        Ok(ch)
    }

    pub fn num_inputs(&self) -> usize {
        self.input_labels.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_labels.len()
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x][y]
    }

    /// Exact entries, when the channel was built from rationals.
    pub fn exact_probs(&self) -> Option<&[Vec<Rational>]> {
        self.exact.as_deref()
    }

    pub fn sample_output<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Result<usize> {
        if x >= self.num_inputs() {
            return Err(domain(format!(
                "input index {x} out of range for {} inputs",
                self.num_inputs()
            )));
        }
        Ok(self.sample_unchecked(x, rng))
    }

    pub(crate) fn sample_unchecked<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let cdf = &self.cdf[x];
        match cdf.iter().position(|&c| u < c) {
            Some(y) => y,
            // u landed in the rounding gap above the last partial sum
            None => self.probs[x].iter().rposition(|&p| p > 0.0).unwrap_or(0),
        }
    }

    /// The inputs as butterfly symbols, if every label parses as one.
    pub fn butterfly_inputs(&self) -> Option<Vec<ChannelInput>> {
        self.input_labels.iter().map(|l| ChannelInput::parse(l).ok()).collect()
    }

    /// The outputs as butterfly symbols, if every label parses as one.
    pub fn butterfly_outputs(&self) -> Option<Vec<ChannelOutput>> {
        self.output_labels.iter().map(|l| ChannelOutput::parse(l).ok()).collect()
    }

    pub fn to_json(&self) -> String {
        let probs = match &self.exact {
            Some(exact) => exact
                .iter()
                .map(|row| row.iter().map(|r| ProbEntry::Text(r.to_string())).collect())
                .collect(),
            None => self
                .probs
                .iter()
                .map(|row| row.iter().map(|&p| ProbEntry::Number(p)).collect())
                .collect(),
        };
        let file = ChannelFile {
            input_labels: self.input_labels.clone(),
            output_labels: self.output_labels.clone(),
            probs,
        };
        serde_json::to_string_pretty(&file).expect("plain data")
    }

    /// Parses `{input_labels, output_labels, probs}`. Entries may be numbers or
    /// rational strings such as `"1/3"`; if every entry is a string or an
    /// integer the channel is kept exact.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        let all_exact = file.probs.iter().flatten().all(|e| match e {
            ProbEntry::Text(_) => true,
            ProbEntry::Number(p) => *p == 0.0 || *p == 1.0,
        });
        if all_exact {
            let exact = file
                .probs
                .iter()
                .map(|row| row.iter().map(ProbEntry::to_rational).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Self::new_exact(file.input_labels, file.output_labels, exact)
        } else {
            let probs = file
                .probs
                .iter()
                .map(|row| row.iter().map(ProbEntry::to_f64).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Self::new(file.input_labels, file.output_labels, probs)
        }
    }
}

fn check_unique(labels: &[String], kind: &str) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(domain(format!("duplicate {kind} label {l:?}")));
        }
    }
    Ok(())
}

pub(crate) fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    input_labels: Vec<String>,
    output_labels: Vec<String>,
    probs: Vec<Vec<ProbEntry>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProbEntry {
    Number(f64),
    Text(String),
}

impl ProbEntry {
    fn to_rational(&self) -> Result<Rational> {
        match self {
            ProbEntry::Number(p) => Ok(Rational::from_integer(*p as i128)),
            ProbEntry::Text(s) => s
                .trim()
                .parse::<Rational>()
                .map_err(|_| domain(format!("cannot parse probability {s:?}"))),
        }
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            ProbEntry::Number(p) => Ok(*p),
            ProbEntry::Text(_) => Ok(ratio_to_f64(&self.to_rational()?)),
        }
    }
}

/// The butterfly channel: output trit t uniform on {1, 2, P}; b = x1, x2 or x1⊕x2.
pub fn butterfly_channel() -> FiniteChannel {
    let third = Rational::new(1, 3);
    let probs = (0..4)
        .map(|x| {
            let input = ChannelInput::from_index(x);
            let mut row = vec![Rational::from_integer(0); 6];
            for t in Trit::ALL {
                let b = match t {
                    Trit::One => input.b1,
                    Trit::Two => input.b2,
                    Trit::Parity => input.b1 ^ input.b2,
                };
                row[ChannelOutput { t, b }.index()] = third;
            }
            row
        })
        .collect();
    FiniteChannel::new_exact(
        (0..4).map(|i| ChannelInput::from_index(i).label()).collect(),
        (0..6).map(|i| ChannelOutput::from_index(i).label()).collect(),
        probs,
    )
    .expect("butterfly rows are stochastic")
}

/// The noiseless channel on `n` symbols.
pub fn identity_channel(n: usize) -> FiniteChannel {
    let probs = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| Rational::from_integer((x == y) as i128))
                .collect()
        })
        .collect();
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    FiniteChannel::new_exact(labels.clone(), labels, probs).expect("identity is stochastic")
}

/// Input/output co-occurrence table, as counts or frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable {
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TruthTable {
    /// The channel's own conditional probabilities as a table.
    pub fn ideal(ch: &FiniteChannel) -> Self {
        Self {
            input_labels: ch.input_labels.clone(),
            output_labels: ch.output_labels.clone(),
            rows: ch.probs.clone(),
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_labels.len()
    }

    /// Each row divided by its sum; all-zero rows stay zero.
    pub fn row_normalized(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let sum: f64 = row.iter().sum();
                if sum > 0.0 {
                    row.iter().map(|v| v / sum).collect()
                } else {
                    row.clone()
                }
            })
            .collect();
        Self {
            rows,
            ..self.clone()
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["input".to_string()];
        header.extend(self.output_labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.input_labels.iter().zip(&self.rows) {
            let mut record = vec![label.clone()];
            record.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        let output_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut input_labels = Vec::new();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            input_labels.push(record.get(0).unwrap_or_default().to_string());
            let row = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| domain(format!("bad table entry {v:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != output_labels.len() {
                return Err(domain("truth table row length does not match header"));
            }
            if row.iter().any(|&v| v < 0.0) {
                return Err(domain("truth table entries must be nonnegative"));
            }
            rows.push(row);
        }
        Ok(Self {
            input_labels,
            output_labels,
            rows,
        })
    }
}

/// Raw counts of observed (input, output) index pairs.
pub fn empirical_table(ch: &FiniteChannel, samples: &[(usize, usize)]) -> Result<TruthTable> {
    if samples.is_empty() {
        return Err(domain("cannot build a truth table from zero samples"));
    }
    let mut rows = vec![vec![0.0; ch.num_outputs()]; ch.num_inputs()];
    for &(x, y) in samples {
        if x >= ch.num_inputs() || y >= ch.num_outputs() {
            return Err(domain(format!("sample ({x}, {y}) out of range")));
        }
        rows[x][y] += 1.0;
    }
    Ok(TruthTable {
        input_labels: ch.input_labels.clone(),
        output_labels: ch.output_labels.clone(),
        rows,
    })
}

/// I = Tr(N_exp N_thᵀ) / Tr(N_th N_thᵀ), computed on row-normalized tables.
pub fn inquisition(n_exp: &TruthTable, n_th: &TruthTable) -> Result<f64> {
    if n_exp.num_inputs() != n_th.num_inputs()
        || n_exp.rows.iter().zip(&n_th.rows).any(|(a, b)| a.len() != b.len())
    {
        return Err(domain("truth tables have different dimensions"));
    }
    let exp = n_exp.row_normalized();
    let th = n_th.row_normalized();
    let overlap = |a: &TruthTable, b: &TruthTable| -> f64 {
        a.rows
            .iter()
            .zip(&b.rows)
            .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x * y))
            .sum()
    };
    let norm = overlap(&th, &th);
    if norm == 0.0 {
        return Err(domain("ideal truth table is identically zero"));
    }
    Ok(overlap(&exp, &th) / norm)
}
