//! Asymptotic weight conditions checked over a finite budget.
//!
//! Every quantity is formed in log-space from a table of `log a_n(i)`; its
//! dyadic block statistics are fed to a fixed trend rule. Verdicts are numerical
//! evidence, never proofs.

use std::fmt;
use std::str::FromStr;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::weightlang::EvalError;
use crate::weights::{Expect, LogSumExp, LogTable, TableError, WeightFamily};

/// Relative growth per block treated as significant.
pub const EPS: f64 = 0.05;
/// Block maxima below this are treated as zero.
pub const TAU_ZERO: f64 = 1e-8;
/// Required contraction of block spreads for convergence to a limit.
pub const SPREAD_RATIO: f64 = 0.6;
pub const MIN_BLOCKS: usize = 5;

pub const CAVEAT: &str = "numerical evidence at finite budget";

fn delta() -> f64 {
    (1.0 + EPS).ln()
}

// ---------------------------------------------------------------- conditions

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditionId {
    K1,
    Ginf1,
    Ginf2,
    G1axioms,
    SchwartzI,
    SchwartzS,
    GPC,
    SV,
    N,
    SN(f64),
    U,
    L,
    DN,
    CesContinuity,
    CesCompactness,
    DContinuity,
    PointEigen(u64),
    DragilevTau(f64),
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConditionId::*;
        match self {
            K1 => f.write_str("K1"),
            Ginf1 => f.write_str("Ginf1"),
            Ginf2 => f.write_str("Ginf2"),
            G1axioms => f.write_str("G1axioms"),
            SchwartzI => f.write_str("SchwartzI"),
            SchwartzS => f.write_str("SchwartzS"),
            GPC => f.write_str("GPC"),
            SV => f.write_str("SV"),
            N => f.write_str("N"),
            SN(a) => write!(f, "SN({a})"),
            U => f.write_str("U"),
            L => f.write_str("L"),
            DN => f.write_str("DN"),
            CesContinuity => f.write_str("CesContinuity"),
            CesCompactness => f.write_str("CesCompactness"),
            DContinuity => f.write_str("DContinuity"),
            PointEigen(s) => write!(f, "PointEigen({s})"),
            DragilevTau(r) => write!(f, "DragilevTau({r})"),
        }
    }
}

impl FromStr for ConditionId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        use ConditionId::*;
        let s = s.trim();
        let simple = match s {
            "K1" => Some(K1),
            "Ginf1" => Some(Ginf1),
            "Ginf2" => Some(Ginf2),
            "G1axioms" => Some(G1axioms),
            "SchwartzI" => Some(SchwartzI),
            "SchwartzS" => Some(SchwartzS),
            "GPC" => Some(GPC),
            "SV" => Some(SV),
            "N" => Some(N),
            "U" => Some(U),
            "L" => Some(L),
            "DN" => Some(DN),
            "CesContinuity" => Some(CesContinuity),
            "CesCompactness" => Some(CesCompactness),
            "DContinuity" => Some(DContinuity),
            _ => None,
        };
        if let Some(c) = simple {
            return Ok(c);
        }
        let bad = || format!("unknown condition `{s}`");
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let arg = rest.strip_suffix(')').ok_or_else(bad)?.trim();
        match head.trim() {
            "SN" => arg.parse::<f64>().ok().filter(|a| a.is_finite()).map(SN).ok_or_else(bad),
            "PointEigen" => arg.parse::<u64>().ok().filter(|&k| k >= 1).map(PointEigen).ok_or_else(bad),
            "DragilevTau" => arg
                .parse::<f64>()
                .ok()
                .filter(|r| *r > 1.0 && r.is_finite())
                .map(DragilevTau)
                .ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

impl Serialize for ConditionId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    HoldsNumerically,
    FailsNumerically,
    Inconclusive,
}

impl Status {
    pub fn is_decisive(self) -> bool {
        self != Status::Inconclusive
    }

    pub fn holds(self) -> bool {
        self == Status::HoldsNumerically
    }

    pub fn fails(self) -> bool {
        self == Status::FailsNumerically
    }

    /// Whether the status contradicts an expectation (inconclusive never does).
    pub fn contradicts(self, e: Expect) -> bool {
        matches!(
            (self, e),
            (Status::HoldsNumerically, Expect::Fails) | (Status::FailsNumerically, Expect::Holds)
        )
    }

    pub fn matches(self, e: Expect) -> bool {
        matches!(
            (self, e),
            (Status::HoldsNumerically, Expect::Holds)
                | (Status::FailsNumerically, Expect::Fails)
                | (Status::Inconclusive, Expect::Unknown)
        )
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::HoldsNumerically => "holds numerically",
            Status::FailsNumerically => "fails numerically",
            Status::Inconclusive => "inconclusive numerically",
        })
    }
}

// ---------------------------------------------------------------- trend detection

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Trend {
    ConvergesToZero,
    ConvergesTo(f64),
    BoundedAbove(f64),
    Diverges,
    Inconclusive,
}

impl Trend {
    /// Zero, convergent, or bounded.
    pub fn is_bounded(&self) -> bool {
        matches!(
            self,
            Trend::ConvergesToZero | Trend::ConvergesTo(_) | Trend::BoundedAbove(_)
        )
    }
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trend::ConvergesToZero => f.write_str("converges to 0"),
            Trend::ConvergesTo(l) => write!(f, "converges to {l:.6e}"),
            Trend::BoundedAbove(b) => write!(f, "bounded above by {b:.6e}"),
            Trend::Diverges => f.write_str("diverges"),
            Trend::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

/// Statistics of one block of samples, in natural log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStat {
    pub lo: u64,
    pub hi: u64,
    pub log_max: f64,
    pub log_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub blocks: Vec<BlockStat>,
    pub classification: Trend,
    /// First index whose value could not be resolved (`inf - inf`); blocks stop before it.
    pub horizon: Option<u64>,
}

impl TrendReport {
    /// `(block upper index, block maximum)`, exponentiated for display.
    pub fn block_maxima(&self) -> Vec<(u64, f64)> {
        self.blocks.iter().map(|b| (b.hi, b.log_max.exp())).collect()
    }

    pub fn log_block_maxima(&self) -> Vec<(u64, f64)> {
        self.blocks.iter().map(|b| (b.hi, b.log_max)).collect()
    }

    /// Largest sampled value (log).
    pub fn log_sup(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.log_max)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Error)]
pub enum TrendError<E: std::error::Error + 'static> {
    #[error("I_max must be a power of two >= 64, got {0}")]
    Budget(u64),
    #[error("sampler failed at i = {i}: {source}")]
    Sampler { i: u64, source: E },
}

fn step(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        b - a
    }
}

/// Apply the fixed trend rule to block statistics.
pub fn classify_blocks(blocks: &[BlockStat]) -> Trend {
    let k = blocks.len();
    if k < MIN_BLOCKS {
        return Trend::Inconclusive;
    }
    let d = delta();
    let l: Vec<f64> = blocks.iter().map(|b| b.log_max).collect();
    let s: Vec<f64> = (1..k).map(|j| step(l[j - 1], l[j])).collect();
    let last = l[k - 1];
    let last3 = &s[s.len() - 3..];
    let half = k / 2;
    let first_max = l[..half].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last_max = l[half..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last_min = l[half..].iter().copied().fold(f64::INFINITY, f64::min);

    if last == f64::INFINITY || last3.iter().all(|&x| x > d) {
        return Trend::Diverges;
    }
    let tail_nonincreasing = s[half - 1..].iter().all(|&x| x <= 1e-12);
    if last == f64::NEG_INFINITY
        || (last < TAU_ZERO.ln() && tail_nonincreasing)
        || last3.iter().all(|&x| x < -d)
    {
        return Trend::ConvergesToZero;
    }
    let spread = |j: usize| -> f64 {
        let b = &blocks[j];
        let inner = step(b.log_min, b.log_max);
        let jump = if j == 0 { 0.0 } else { s[j - 1].abs() };
        inner.max(jump)
    };
    let (r1, r2, r3) = (spread(k - 1), spread(k - 2), spread(k - 3));
    if last.is_finite()
        && r1 <= d
        && r1 <= SPREAD_RATIO * r2
        && r2 <= SPREAD_RATIO * r3
        && s[k - 2].abs() <= d
    {
        let b = &blocks[k - 1];
        return Trend::ConvergesTo((0.5 * (b.log_max + b.log_min)).exp());
    }
    let turning_up = last3[1..].iter().all(|&x| x > 0.0);
    if last_max <= first_max + d && !turning_up {
        return Trend::BoundedAbove(first_max.max(last_max).exp());
    }
    if last3.iter().all(|&x| x > 0.0) && last - last_min > d {
        return Trend::Diverges;
    }
    Trend::Inconclusive
}

/// Dyadic block boundaries `[2^k, 2^{k+1})`, the last block closed at `i_max`.
fn dyadic_blocks(i_max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut lo = 1u64;
    while lo < i_max {
        let hi = (2 * lo - 1).min(i_max);
        out.push((lo, hi));
        lo *= 2;
    }
    if let Some(last) = out.last_mut() {
        last.1 = i_max;
    }
    out
}

/// Trend of a quantity given in log-space; NaN marks the horizon.
pub fn log_trend(i_max: u64, mut f: impl FnMut(u64) -> f64) -> TrendReport {
    let mut blocks = Vec::new();
    let mut horizon = None;
    'outer: for (lo, hi) in dyadic_blocks(i_max) {
        let mut mx = f64::NEG_INFINITY;
        let mut mn = f64::INFINITY;
        for i in lo..=hi {
            let v = f(i);
            if v.is_nan() {
                horizon = Some(i);
                break 'outer;
            }
            mx = mx.max(v);
            mn = mn.min(v);
        }
        blocks.push(BlockStat {
            lo,
            hi,
            log_max: mx,
            log_min: mn,
        });
    }
    let classification = classify_blocks(&blocks);
    TrendReport {
        blocks,
        classification,
        horizon,
    }
}

/// Trend of partial sums `sum_{j<=i} exp(term_j)`.
pub fn log_sum_trend(i_max: u64, mut term: impl FnMut(u64) -> f64) -> TrendReport {
    let mut acc = LogSumExp::new();
    let mut dead = false;
    log_trend(i_max, move |i| {
        if dead {
            return f64::NAN;
        }
        let t = term(i);
        if t.is_nan() {
            dead = true;
            return f64::NAN;
        }
        acc.push(t);
        acc.value()
    })
}

fn check_i_max(i_max: u64) -> bool {
    i_max >= 64 && i_max.is_power_of_two()
}

/// Classify a real sequence; the rule sees `ln|sampler(i)|`.
pub fn detect_trend<E, F>(mut sampler: F, i_max: u64) -> Result<TrendReport, TrendError<E>>
where
    E: std::error::Error + 'static,
    F: FnMut(u64) -> Result<f64, E>,
{
    if !check_i_max(i_max) {
        return Err(TrendError::Budget(i_max));
    }
    let mut err = None;
    let rep = log_trend(i_max, |i| {
        if err.is_some() {
            return f64::NAN;
        }
        match sampler(i) {
            Ok(v) => v.abs().ln(),
            Err(e) => {
                err = Some((i, e));
                f64::NAN
            }
        }
    });
    match err {
        Some((i, source)) => Err(TrendError::Sampler { i, source }),
        None => Ok(rep),
    }
}

// ---------------------------------------------------------------- verdicts

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub i_max: u64,
    pub n_max: u64,
    pub m_max: u64,
}

pub const I_MAX_CAP: u64 = 1 << 20;
pub const N_MAX_CAP: u64 = 32;
pub const M_MAX_CAP: u64 = 32;

impl Default for Budget {
    fn default() -> Self {
        Budget {
            i_max: 1 << 14,
            n_max: 4,
            m_max: 8,
        }
    }
}

impl Budget {
    pub fn new(i_max: u64, n_max: u64, m_max: u64) -> Self {
        Budget { i_max, n_max, m_max }
    }

    pub fn validate(&self) -> Result<(), CriteriaError> {
        if !check_i_max(self.i_max) || self.n_max < 2 || self.m_max < 8 {
            return Err(CriteriaError::Budget(format!(
                "need I_max a power of two >= 64, N_max >= 2, M_max >= 8; got ({}, {}, {})",
                self.i_max, self.n_max, self.m_max
            )));
        }
        if self.i_max > I_MAX_CAP || self.n_max > N_MAX_CAP || self.m_max > M_MAX_CAP {
            return Err(CriteriaError::Budget(format!(
                "caps are I_max <= {I_MAX_CAP}, N_max <= {N_MAX_CAP}, M_max <= {M_MAX_CAP}"
            )));
        }
        Ok(())
    }

    /// Largest weight index touched.
    pub fn n_hi(&self) -> u64 {
        self.n_max + self.m_max
    }
}

impl Serialize for Budget {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("I_max", &self.i_max)?;
        m.serialize_entry("N_max", &self.n_max)?;
        m.serialize_entry("M_max", &self.m_max)?;
        m.end()
    }
}

#[derive(Debug, Error)]
pub enum CriteriaError {
    #[error("budget: {0}")]
    Budget(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("evaluating log a_{n}({i}): {source}")]
    Eval { n: u64, i: u64, source: EvalError },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub n: u64,
    pub m: Option<u64>,
    /// Estimated sup of the criterion quantity (or of the partial sums).
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub n: u64,
    pub m: Option<u64>,
    pub trend: TrendReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub condition: ConditionId,
    pub status: Status,
    pub witnesses: Vec<Witness>,
    pub evidence: Vec<Evidence>,
    /// Index into `evidence` of the trace that decided the status.
    pub decisive: Option<usize>,
    pub note: Option<String>,
}

impl Verdict {
    pub fn witness(&self) -> Option<&Witness> {
        self.witnesses.first()
    }

    pub fn decisive_evidence(&self) -> Option<&Evidence> {
        self.decisive.and_then(|k| self.evidence.get(k))
    }

    pub fn summary_line(&self) -> String {
        let mut s = format!("{:<16} {}", self.condition.to_string(), self.status);
        if let Some(w) = self.witness() {
            match w.m {
                Some(m) => s.push_str(&format!("  (n={}, m={}, M~{:.3e})", w.n, m, w.bound)),
                None => s.push_str(&format!("  (n={}, M~{:.3e})", w.n, w.bound)),
            }
        }
        if let Some(note) = &self.note {
            s.push_str(&format!("  [{note}]"));
        }
        s
    }
}

fn finite_or_none(v: f64) -> Option<f64> {
    if v.is_finite() {
        Some(v)
    } else {
        None
    }
}

#[derive(Serialize)]
struct EvidenceJson {
    n: u64,
    m: Option<u64>,
    trend: String,
    horizon: Option<u64>,
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("condition", &self.condition)?;
        m.serialize_entry("status", &self.status)?;
        let w = self.witness().map(|w| {
            serde_json::json!({"n": w.n, "m": w.m, "bound": finite_or_none(w.bound)})
        });
        m.serialize_entry("witness", &w)?;
        let ws: Vec<_> = self
            .witnesses
            .iter()
            .map(|w| serde_json::json!({"n": w.n, "m": w.m, "bound": finite_or_none(w.bound)}))
            .collect();
        m.serialize_entry("witnesses", &ws)?;
        let (blocks, log_blocks): (Vec<_>, Vec<_>) = match self.decisive_evidence() {
            Some(e) => e
                .trend
                .blocks
                .iter()
                .map(|b| {
                    (
                        (b.hi, finite_or_none(b.log_max.exp())),
                        (b.hi, finite_or_none(b.log_max)),
                    )
                })
                .unzip(),
            None => (Vec::new(), Vec::new()),
        };
        m.serialize_entry("blocks", &blocks)?;
        m.serialize_entry("log_blocks", &log_blocks)?;
        let ev: Vec<EvidenceJson> = self
            .evidence
            .iter()
            .map(|e| EvidenceJson {
                n: e.n,
                m: e.m,
                trend: e.trend.classification.to_string(),
                horizon: e.trend.horizon,
            })
            .collect();
        m.serialize_entry("evidence", &ev)?;
        m.serialize_entry("note", &self.note)?;
        m.end()
    }
}

// ---------------------------------------------------------------- engine

/// How a trend is read for a given condition.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// `sup < inf`
    Sup,
    /// `lim = 0`
    Lim0,
    /// `sum < inf`, fed partial sums
    Sum,
    /// `lim = inf`
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Reading {
    Accept,
    Refute,
    Open,
}

fn read(kind: Kind, t: &Trend) -> Reading {
    use Reading::*;
    match kind {
        Kind::Sup | Kind::Sum => match t {
            Trend::Diverges => Refute,
            Trend::Inconclusive => Open,
            _ => Accept,
        },
        Kind::Lim0 => match t {
            Trend::ConvergesToZero => Accept,
            Trend::Diverges => Refute,
            Trend::ConvergesTo(l) if *l > TAU_ZERO => Refute,
            _ => Open,
        },
        Kind::Infinite => match t {
            Trend::Diverges => Accept,
            Trend::Inconclusive => Open,
            _ => Refute,
        },
    }
}

/// Tabulated weights plus lazily built prefix sums.
pub struct Engine<'a> {
    family: &'a WeightFamily,
    budget: Budget,
    table: LogTable,
    prefix: Vec<Option<Vec<f64>>>,
}

impl<'a> Engine<'a> {
    pub fn new(family: &'a WeightFamily, budget: Budget) -> Result<Self, CriteriaError> {
        budget.validate()?;
        let table = family.table(budget.n_hi(), budget.i_max + 1)?;
        let prefix = vec![None; budget.n_hi() as usize];
        Ok(Engine {
            family,
            budget,
            table,
            prefix,
        })
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn family(&self) -> &WeightFamily {
        self.family
    }

    #[inline]
    fn a(&self, n: u64, i: u64) -> f64 {
        self.table.get(n, i)
    }

    fn prefix(&mut self, n: u64) -> &[f64] {
        let k = n as usize - 1;
        if self.prefix[k].is_none() {
            let mut acc = LogSumExp::new();
            let row: Vec<f64> = self
                .table
                .row(n)
                .iter()
                .map(|&x| {
                    acc.push(x);
                    acc.value()
                })
                .collect();
            self.prefix[k] = Some(row);
        }
        self.prefix[k].as_deref().unwrap()
    }

    /// Log of the criterion quantity at user index `i`; `m` is ignored by
    /// single-index conditions. Sum conditions return the summand.
    pub fn log_quantity(&mut self, cond: ConditionId, n: u64, m: u64, i: u64) -> f64 {
        use ConditionId::*;
        let li = (i as f64).ln();
        match cond {
            Ginf2 => 2.0 * self.a(n, i) - self.a(m, i),
            G1axioms => self.a(n, i) - 2.0 * self.a(m, i),
            SchwartzS | GPC => self.a(n, i) - self.a(m, i),
            N => li + self.a(n, i) - self.a(m, i),
            SN(alpha) => alpha * li + self.a(n, i) - self.a(m, i),
            DN => 2.0 * self.a(n, i) - self.a(m, i) - self.a(1, i),
            CesContinuity | CesCompactness => {
                let p = self.prefix(n)[i as usize - 1];
                p - li - self.a(m, i)
            }
            DContinuity => li - self.a(m, i) + self.a(n, i + 1),
            SV => -self.a(n, i),
            U => (i as f64) * li - self.a(n, i),
            L => li.ln() - self.a(n, i),
            PointEigen(s) => (s as f64) * li - self.a(n, i),
            SchwartzI => self.a(n, i),
            K1 | Ginf1 | DragilevTau(_) => f64::NAN,
        }
    }

    /// Criterion value exponentiated, for spot checks.
    pub fn criterion_value(&mut self, cond: ConditionId, n: u64, m: u64, i: u64) -> f64 {
        self.log_quantity(cond, n, m, i).exp()
    }

    fn trend(&mut self, cond: ConditionId, kind: Kind, n: u64, m: u64) -> TrendReport {
        let i_max = self.budget.i_max;
        if kind == Kind::Sum {
            log_sum_trend(i_max, |i| self.log_quantity(cond, n, m, i))
        } else {
            log_trend(i_max, |i| self.log_quantity(cond, n, m, i))
        }
    }

    fn witness_of(kind: Kind, n: u64, m: Option<u64>, t: &TrendReport) -> Witness {
        let bound = match kind {
            Kind::Sum => t.blocks.last().map(|b| b.log_max).unwrap_or(f64::NEG_INFINITY),
            _ => t.log_sup(),
        };
        Witness {
            n,
            m,
            bound: bound.exp(),
        }
    }

    /// For every n some m: first accepted m (ascending) is the witness.
    fn forall_exists(&mut self, cond: ConditionId, kind: Kind) -> Verdict {
        let b = self.budget;
        let mut witnesses = Vec::new();
        let mut evidence = Vec::new();
        let mut failed_at = None;
        let mut open = false;
        let mut decisive = None;
        for n in 1..=b.n_max {
            let mut found = false;
            let mut all_refuted = true;
            for m in n + 1..=n + b.m_max {
                let t = self.trend(cond, kind, n, m);
                let r = read(kind, &t.classification);
                evidence.push(Evidence {
                    n,
                    m: Some(m),
                    trend: t,
                });
                match r {
                    Reading::Accept => {
                        let t = &evidence.last().unwrap().trend;
                        witnesses.push(Self::witness_of(kind, n, Some(m), t));
                        decisive = Some(evidence.len() - 1);
                        found = true;
                        break;
                    }
                    Reading::Open => all_refuted = false,
                    Reading::Refute => {}
                }
            }
            if !found {
                if all_refuted {
                    failed_at = Some(n);
                    decisive = Some(evidence.len() - 1);
                    break;
                }
                open = true;
            }
        }
        let status = if let Some(n) = failed_at {
            return Verdict {
                condition: cond,
                status: Status::FailsNumerically,
                witnesses: Vec::new(),
                evidence,
                decisive,
                note: Some(format!(
                    "n={n}: every m in {}..={} diverges",
                    n + 1,
                    n + b.m_max
                )),
            };
        } else if open {
            Status::Inconclusive
        } else {
            Status::HoldsNumerically
        };
        if status == Status::Inconclusive {
            witnesses.clear();
            decisive = Some(evidence.len() - 1);
        }
        Verdict {
            condition: cond,
            status,
            witnesses,
            evidence,
            decisive,
            note: None,
        }
    }

    /// Some n: first accepted n is the witness; fails when every n is refuted.
    fn exists(&mut self, cond: ConditionId, kind: Kind) -> Verdict {
        let b = self.budget;
        let mut evidence = Vec::new();
        let mut all_refuted = true;
        for n in 1..=b.n_max {
            let t = self.trend(cond, kind, n, 0);
            let r = read(kind, &t.classification);
            evidence.push(Evidence { n, m: None, trend: t });
            match r {
                Reading::Accept => {
                    let w = Self::witness_of(kind, n, None, &evidence.last().unwrap().trend);
                    let k = evidence.len() - 1;
                    return Verdict {
                        condition: cond,
                        status: Status::HoldsNumerically,
                        witnesses: vec![w],
                        evidence,
                        decisive: Some(k),
                        note: None,
                    };
                }
                Reading::Open => all_refuted = false,
                Reading::Refute => {}
            }
        }
        let k = evidence.len() - 1;
        Verdict {
            condition: cond,
            status: if all_refuted {
                Status::FailsNumerically
            } else {
                Status::Inconclusive
            },
            witnesses: Vec::new(),
            evidence,
            decisive: Some(k),
            note: None,
        }
    }

    /// Some target m such that every source n gives limit 0.
    fn compactness(&mut self) -> Verdict {
        let cond = ConditionId::CesCompactness;
        let b = self.budget;
        let mut evidence = Vec::new();
        let mut every_m_refuted = true;
        for m in 1..=b.n_max {
            let mut all_ok = true;
            let mut refuted = false;
            let mut bound = f64::NEG_INFINITY;
            for n in 1..=b.n_hi() {
                let t = self.trend(cond, Kind::Lim0, n, m);
                let r = read(Kind::Lim0, &t.classification);
                bound = bound.max(t.log_sup());
                evidence.push(Evidence {
                    n,
                    m: Some(m),
                    trend: t,
                });
                match r {
                    Reading::Accept => {}
                    Reading::Open => all_ok = false,
                    Reading::Refute => {
                        all_ok = false;
                        refuted = true;
                        break;
                    }
                }
            }
            if all_ok {
                let k = evidence.len() - 1;
                return Verdict {
                    condition: cond,
                    status: Status::HoldsNumerically,
                    witnesses: vec![Witness {
                        n: b.n_hi(),
                        m: Some(m),
                        bound: bound.exp(),
                    }],
                    evidence,
                    decisive: Some(k),
                    note: Some(format!("target m={m} absorbs every source n <= {}", b.n_hi())),
                };
            }
            if !refuted {
                every_m_refuted = false;
            }
        }
        let k = evidence.len() - 1;
        Verdict {
            condition: cond,
            status: if every_m_refuted {
                Status::FailsNumerically
            } else {
                Status::Inconclusive
            },
            witnesses: Vec::new(),
            evidence,
            decisive: Some(k),
            note: Some(format!(
                "targets m <= {} tested against sources n <= {}",
                b.n_max,
                b.n_hi()
            )),
        }
    }

    fn tol(x: f64) -> f64 {
        1e-12 * (1.0 + x.abs())
    }

    fn pointwise(&mut self, cond: ConditionId) -> Verdict {
        let b = self.budget;
        let mut violation = None;
        'scan: for n in 1..=b.n_hi() {
            for i in 1..=b.i_max {
                let a = self.a(n, i);
                let bad = match cond {
                    ConditionId::K1 => n < b.n_hi() && a > self.a(n + 1, i) + Self::tol(a),
                    ConditionId::Ginf1 => a < -Self::tol(0.0) || a > self.a(n, i + 1) + Self::tol(a),
                    _ => self.a(n, i + 1) > a + Self::tol(a),
                };
                if bad {
                    violation = Some((n, i));
                    break 'scan;
                }
            }
        }
        let note = format!("checked n <= {}, i <= {}", b.n_hi(), b.i_max);
        match violation {
            Some((n, i)) => Verdict {
                condition: cond,
                status: Status::FailsNumerically,
                witnesses: Vec::new(),
                evidence: Vec::new(),
                decisive: None,
                note: Some(format!("violated at n={n}, i={i}")),
            },
            None => Verdict {
                condition: cond,
                status: Status::HoldsNumerically,
                witnesses: Vec::new(),
                evidence: Vec::new(),
                decisive: None,
                note: Some(note),
            },
        }
    }

    fn dragilev(&mut self, rho: f64) -> Result<Verdict, CriteriaError> {
        let cond = ConditionId::DragilevTau(rho);
        let mut blocks = Vec::new();
        let mut horizon = None;
        for k in 4..=20u32 {
            let x = 1u64 << k;
            let y = (rho * x as f64).round() as u64;
            let f = |i: u64| {
                self.family
                    .log_a(1, i)
                    .map_err(|source| CriteriaError::Eval { n: 1, i, source })
            };
            let (fx, fy) = (f(x)?, f(y)?);
            if fx <= 0.0 || fy <= 0.0 {
                return Ok(Verdict {
                    condition: cond,
                    status: Status::Inconclusive,
                    witnesses: Vec::new(),
                    evidence: Vec::new(),
                    decisive: None,
                    note: Some(format!("f = log a_1 is not positive at x = {x}")),
                });
            }
            let l = fy.ln() - fx.ln();
            if l.is_nan() {
                horizon = Some(x);
                break;
            }
            blocks.push(BlockStat {
                lo: x,
                hi: x,
                log_max: l,
                log_min: l,
            });
        }
        let classification = classify_blocks(&blocks);
        let status = match classification {
            Trend::Diverges => Status::HoldsNumerically,
            Trend::Inconclusive => Status::Inconclusive,
            _ => Status::FailsNumerically,
        };
        let trend = TrendReport {
            blocks,
            classification,
            horizon,
        };
        Ok(Verdict {
            condition: cond,
            status,
            witnesses: Vec::new(),
            evidence: vec![Evidence {
                n: 1,
                m: None,
                trend,
            }],
            decisive: Some(0),
            note: Some("ratio f(rho x)/f(x), f = log a_1, x = 2^4..2^20".into()),
        })
    }

    pub fn check(&mut self, cond: ConditionId) -> Result<Verdict, CriteriaError> {
        use ConditionId::*;
        Ok(match cond {
            K1 | Ginf1 => self.pointwise(cond),
            G1axioms => {
                let p = self.pointwise(cond);
                if p.status.fails() {
                    p
                } else {
                    let mut v = self.forall_exists(cond, Kind::Sup);
                    v.note = Some("pointwise a_n(i+1) <= a_n(i) holds; squares bound checked".into());
                    v
                }
            }
            Ginf2 | N | SN(_) | CesContinuity | DContinuity => self.forall_exists(cond, Kind::Sup),
            DN => {
                let mut v = self.forall_exists(cond, Kind::Sup);
                if v.status.fails() {
                    v.status = Status::Inconclusive;
                    v.note = Some("pointwise form with s = 1 fails; seminorm form not decided".into());
                } else {
                    v.note = Some("pointwise sufficient form, s = 1".into());
                }
                v
            }
            SchwartzS => self.forall_exists(cond, Kind::Lim0),
            GPC => self.forall_exists(cond, Kind::Sum),
            SV => self.exists(cond, Kind::Sum),
            U | L => self.exists(cond, Kind::Sup),
            PointEigen(_) => self.exists(cond, Kind::Lim0),
            SchwartzI => self.exists(cond, Kind::Infinite),
            CesCompactness => self.compactness(),
            DragilevTau(rho) => self.dragilev(rho)?,
        })
    }
}

/// Check one condition.
pub fn check(
    family: &WeightFamily,
    cond: ConditionId,
    budget: Budget,
) -> Result<Verdict, CriteriaError> {
    Engine::new(family, budget)?.check(cond)
}

/// Spot value of a criterion quantity (exponentiated).
pub fn criterion_value(
    family: &WeightFamily,
    cond: ConditionId,
    n: u64,
    m: u64,
    i: u64,
) -> Result<f64, CriteriaError> {
    let need = n.max(m).max(1);
    let budget = Budget::new(64.max((i + 1).next_power_of_two()), 2.max(need), 8);
    let mut e = Engine::new(family, budget)?;
    Ok(e.criterion_value(cond, n, m, i))
}

// ---------------------------------------------------------------- classification

/// Conditions evaluated by `classify`, in report order.
pub fn default_conditions() -> Vec<ConditionId> {
    use ConditionId::*;
    let mut v = vec![
        K1,
        Ginf1,
        Ginf2,
        G1axioms,
        SchwartzI,
        SchwartzS,
        GPC,
        SV,
        N,
        SN(2.0),
        U,
        L,
        DN,
        CesContinuity,
        CesCompactness,
        DContinuity,
    ];
    v.extend((1..=6).map(PointEigen));
    v.push(DragilevTau(1.5));
    v.push(DragilevTau(2.0));
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckOutcome {
    Consistent,
    Violated,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyCheck {
    pub name: String,
    pub outcome: CheckOutcome,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeclaredComparison {
    pub condition: ConditionId,
    pub declared: Expect,
    pub observed: Status,
    pub agrees: bool,
    pub contradicts: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    #[serde(rename = "Ginf")]
    pub ginf: Status,
    #[serde(rename = "Schwartz")]
    pub schwartz: Status,
    pub nuclear: Status,
    #[serde(rename = "L")]
    pub l: Status,
    #[serde(rename = "DN")]
    pub dn: Status,
    #[serde(rename = "U")]
    pub u: Status,
    #[serde(rename = "CesContinuity")]
    pub ces_continuity: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceClassification {
    pub family: String,
    pub formula: String,
    pub offset: u64,
    pub budget: Budget,
    pub verdicts: Vec<Verdict>,
    pub summary: Summary,
    pub consistency: Vec<ConsistencyCheck>,
    pub declared: Vec<DeclaredComparison>,
}

impl SpaceClassification {
    pub fn get(&self, c: ConditionId) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.condition == c)
    }

    pub fn status(&self, c: ConditionId) -> Status {
        self.get(c).map(|v| v.status).unwrap_or(Status::Inconclusive)
    }

    pub fn violations(&self) -> Vec<&ConsistencyCheck> {
        self.consistency
            .iter()
            .filter(|c| c.outcome == CheckOutcome::Violated)
            .collect()
    }

    pub fn declared_contradictions(&self) -> Vec<&DeclaredComparison> {
        self.declared.iter().filter(|d| d.contradicts).collect()
    }

    /// No equivalence violated and no declared verdict contradicted.
    pub fn is_consistent(&self) -> bool {
        self.violations().is_empty() && self.declared_contradictions().is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "formula": self.formula,
            "offset": self.offset,
            "budget": self.budget,
            "caveat": CAVEAT,
            "summary": self.summary,
            "verdicts": self.verdicts,
            "consistency": self.consistency,
            "declared": self.declared,
            "consistent": self.is_consistent(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "family {}: log a_n(i) = {} (offset {})\nbudget I_max={}, N_max={}, M_max={}; {}\n\n",
            self.family,
            self.formula,
            self.offset,
            self.budget.i_max,
            self.budget.n_max,
            self.budget.m_max,
            CAVEAT
        );
        let sm = &self.summary;
        s.push_str(&format!(
            "summary: Ginf {}, Schwartz {}, nuclear {}, L {}\n\n",
            sm.ginf, sm.schwartz, sm.nuclear, sm.l
        ));
        for v in &self.verdicts {
            s.push_str(&v.summary_line());
            s.push('\n');
        }
        s.push_str("\nconsistency:\n");
        for c in &self.consistency {
            let tag = match c.outcome {
                CheckOutcome::Consistent => "ok",
                CheckOutcome::Violated => "VIOLATED",
                CheckOutcome::NotApplicable => "n/a",
            };
            s.push_str(&format!("  {:<40} {:<8} {}\n", c.name, tag, c.detail));
        }
        if !self.declared.is_empty() {
            s.push_str("\ndeclared:\n");
            for d in &self.declared {
                let tag = if d.agrees {
                    "agrees"
                } else if d.contradicts {
                    "CONTRADICTS"
                } else {
                    "unresolved"
                };
                s.push_str(&format!(
                    "  {:<16} declared {:?}, observed {}: {}\n",
                    d.condition.to_string(),
                    d.declared,
                    d.observed,
                    tag
                ));
            }
        }
        s
    }
}

fn both(a: Status, b: Status) -> Status {
    if a.fails() || b.fails() {
        Status::FailsNumerically
    } else if a.holds() && b.holds() {
        Status::HoldsNumerically
    } else {
        Status::Inconclusive
    }
}

struct Ledger<'a> {
    cls: &'a SpaceClassification,
    out: Vec<ConsistencyCheck>,
}

impl Ledger<'_> {
    fn st(&self, c: ConditionId) -> Status {
        self.cls.status(c)
    }

    fn push(&mut self, name: &str, outcome: CheckOutcome, detail: String) {
        self.out.push(ConsistencyCheck {
            name: name.into(),
            outcome,
            detail,
        });
    }

    /// `a <=> b` under `gate`.
    fn equiv(&mut self, name: &str, gate: bool, a: ConditionId, b: ConditionId) {
        let (sa, sb) = (self.st(a), self.st(b));
        let detail = format!("{a}: {sa}; {b}: {sb}");
        if !gate || !sa.is_decisive() || !sb.is_decisive() {
            self.push(name, CheckOutcome::NotApplicable, detail);
        } else if sa == sb {
            self.push(name, CheckOutcome::Consistent, detail);
        } else {
            self.push(name, CheckOutcome::Violated, detail);
        }
    }

    /// `premise => conclusion holds` (or `fails` when `negated`).
    fn implies(&mut self, name: &str, premise: Status, conclusion: ConditionId, negated: bool, what: String) {
        let sc = self.st(conclusion);
        let detail = format!("{what}; {conclusion}: {sc}");
        if !premise.holds() || !sc.is_decisive() {
            self.push(name, CheckOutcome::NotApplicable, detail);
        } else if sc.holds() != negated {
            self.push(name, CheckOutcome::Consistent, detail);
        } else {
            self.push(name, CheckOutcome::Violated, detail);
        }
    }
}

fn consistency(cls: &SpaceClassification) -> Vec<ConsistencyCheck> {
    use ConditionId::*;
    let mut l = Ledger {
        cls,
        out: Vec::new(),
    };
    let ginf = cls.summary.ginf.holds();
    let schwartz = l.st(SchwartzS).holds();
    l.equiv("GPC <=> SV (G-infinity)", ginf, GPC, SV);
    l.equiv("GPC <=> N (G-infinity)", ginf, GPC, N);
    l.equiv("N <=> SN(2) (G-infinity)", ginf, N, SN(2.0));
    l.equiv("SchwartzI <=> SchwartzS (G-infinity)", ginf, SchwartzI, SchwartzS);
    l.equiv("PointEigen(1) <=> N (G-infinity, Schwartz)", ginf && schwartz, PointEigen(1), N);
    l.implies("U => N (G-infinity)", if ginf { l.st(U) } else { Status::Inconclusive }, N, false, format!("U: {}", l.st(U)));
    l.implies("N => L (G-infinity)", if ginf { l.st(N) } else { Status::Inconclusive }, L, false, format!("N: {}", l.st(N)));
    let p = both(l.st(Ginf1), l.st(SchwartzS));
    l.implies("Ginf1 and Schwartz => CesContinuity", p, CesContinuity, false, format!("Ginf1 and SchwartzS: {p}"));
    let p = both(l.st(G1axioms), l.st(GPC));
    l.implies("G1 and GPC => not CesContinuity", p, CesContinuity, true, format!("G1axioms and GPC: {p}"));
    let p = both(cls.summary.ginf, l.st(GPC));
    l.implies("G-infinity and GPC => not CesCompactness", p, CesCompactness, true, format!("G-infinity and GPC: {p}"));
    l.out
}

fn nuclear_status(get: impl Fn(ConditionId) -> Status, ginf: Status) -> Status {
    let g = get(ConditionId::GPC);
    if g.is_decisive() || !ginf.holds() {
        return g;
    }
    for c in [ConditionId::SV, ConditionId::N] {
        let s = get(c);
        if s.is_decisive() {
            return s;
        }
    }
    g
}

/// Run the standard conditions plus any declared ones and cross-check them.
pub fn classify(family: &WeightFamily, budget: Budget) -> Result<SpaceClassification, CriteriaError> {
    let mut engine = Engine::new(family, budget)?;
    let mut conds = default_conditions();
    for (c, _) in family.declared.iter() {
        if !conds.contains(c) {
            conds.push(*c);
        }
    }
    let mut verdicts = Vec::with_capacity(conds.len());
    for c in conds {
        verdicts.push(engine.check(c)?);
    }
    let get = |c: ConditionId| {
        verdicts
            .iter()
            .find(|v| v.condition == c)
            .map(|v| v.status)
            .unwrap_or(Status::Inconclusive)
    };
    let ginf = both(get(ConditionId::Ginf1), get(ConditionId::Ginf2));
    let summary = Summary {
        ginf,
        schwartz: get(ConditionId::SchwartzS),
        nuclear: nuclear_status(get, ginf),
        l: get(ConditionId::L),
        dn: get(ConditionId::DN),
        u: get(ConditionId::U),
        ces_continuity: get(ConditionId::CesContinuity),
    };
    let declared = family
        .declared
        .iter()
        .map(|(c, e)| {
            let observed = get(*c);
            DeclaredComparison {
                condition: *c,
                declared: *e,
                observed,
                agrees: observed.matches(*e),
                contradicts: observed.contradicts(*e),
            }
        })
        .collect();
    let mut cls = SpaceClassification {
        family: family.name.clone(),
        formula: family.formula.clone(),
        offset: family.offset,
        budget,
        verdicts,
        summary,
        consistency: Vec::new(),
        declared,
    };
    cls.consistency = consistency(&cls);
    Ok(cls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{gallery, params, GalleryParams};
    use proptest::prelude::*;

    fn fam(key: &str) -> WeightFamily {
        gallery(key, &GalleryParams::new()).unwrap()
    }

    fn trend_of(f: impl Fn(f64) -> f64, i_max: u64) -> Trend {
        detect_trend::<std::convert::Infallible, _>(|i| Ok(f(i as f64)), i_max)
            .unwrap()
            .classification
    }

    #[test]
    fn trend_examples() {
        assert_eq!(trend_of(|i| 1.0 / i, 1024), Trend::ConvergesToZero);
        assert_eq!(trend_of(|i| i.ln(), 1024), Trend::Diverges);
        match trend_of(|i| 1.0 + (-1f64).powf(i) / i, 1024) {
            Trend::ConvergesTo(l) => assert!((l - 1.0).abs() < 1e-3),
            t => panic!("{t:?}"),
        }
    }

    #[test]
    fn trend_more_shapes() {
        assert_eq!(trend_of(|i| i, 1024), Trend::Diverges);
        assert_eq!(trend_of(|i| (-i).exp(), 1024), Trend::ConvergesToZero);
        assert_eq!(trend_of(|_| 0.0, 1024), Trend::ConvergesToZero);
        match trend_of(|_| 3.0, 1024) {
            Trend::ConvergesTo(l) => assert!((l - 3.0).abs() < 1e-12),
            t => panic!("{t:?}"),
        }
        // bounded but oscillating without settling
        assert!(matches!(
            trend_of(|i| 2.0 + (i.ln()).sin(), 1 << 14),
            Trend::BoundedAbove(_)
        ));
        assert!(matches!(trend_of(|i| 1.0 / i.ln().max(0.5), 1 << 12), Trend::BoundedAbove(_) | Trend::ConvergesToZero));
    }

    #[test]
    fn trend_budget_and_errors() {
        let r = detect_trend::<std::convert::Infallible, _>(|_| Ok(1.0), 100);
        assert!(matches!(r, Err(TrendError::Budget(100))));
        let r = detect_trend(
            |i| if i == 77 { Err(EvalError::DivisionByZero { expr: "x".into() }) } else { Ok(1.0) },
            128,
        );
        assert!(matches!(r, Err(TrendError::Sampler { i: 77, .. })));
    }

    #[test]
    fn blocks_are_dyadic() {
        let r = detect_trend::<std::convert::Infallible, _>(|i| Ok(i as f64), 64).unwrap();
        let his: Vec<u64> = r.block_maxima().iter().map(|b| b.0).collect();
        assert_eq!(his, vec![1, 3, 7, 15, 31, 64]);
        assert!((r.block_maxima()[5].1 - 64.0).abs() < 1e-12);
    }

    #[test]
    fn horizon_truncates() {
        let r = log_trend(1024, |i| if i >= 300 { f64::NAN } else { -(i as f64) });
        assert_eq!(r.horizon, Some(300));
        assert_eq!(r.blocks.len(), 8);
        assert_eq!(r.classification, Trend::ConvergesToZero);
        let short = log_trend(1024, |i| if i >= 20 { f64::NAN } else { 0.0 });
        assert_eq!(short.classification, Trend::Inconclusive);
    }

    #[test]
    fn criterion_spot_value() {
        // e^{-6}/3 * (e + e^2 + e^3)
        let f = fam("remark-3.9");
        let v = criterion_value(&f, ConditionId::CesContinuity, 1, 2, 3).unwrap();
        let want = (-6f64).exp() / 3.0 * (1f64.exp() + 2f64.exp() + 3f64.exp());
        assert!((v - want).abs() < 1e-15);
        assert!((v - 0.0249).abs() < 1e-4);
    }

    #[test]
    fn condition_names_round_trip() {
        for c in default_conditions().into_iter().chain([ConditionId::SN(0.5)]) {
            let back: ConditionId = c.to_string().parse().unwrap();
            assert_eq!(back, c);
        }
        assert!("Bogus".parse::<ConditionId>().is_err());
        assert!("PointEigen(0)".parse::<ConditionId>().is_err());
        assert!("DragilevTau(1)".parse::<ConditionId>().is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(Budget::new(63, 4, 8).validate().is_err());
        assert!(Budget::new(64, 1, 8).validate().is_err());
        assert!(Budget::new(64, 2, 7).validate().is_err());
        assert!(Budget::new(1 << 21, 2, 8).validate().is_err());
        assert!(Budget::new(64, 2, 8).validate().is_ok());
    }

    #[test]
    fn gpc_holds_for_example_1_5() {
        let v = check(&fam("example-1.5"), ConditionId::GPC, Budget::new(1 << 10, 2, 8)).unwrap();
        assert_eq!(v.status, Status::HoldsNumerically);
        assert_eq!(v.witnesses.len(), 2);
    }

    #[test]
    fn u_fails_for_remark_3_9() {
        let v = check(&fam("remark-3.9"), ConditionId::U, Budget::new(1 << 10, 4, 8)).unwrap();
        assert_eq!(v.status, Status::FailsNumerically);
        assert_eq!(v.evidence.len(), 4);
        assert!(v.evidence.iter().all(|e| e.trend.classification == Trend::Diverges));
    }

    #[test]
    fn g1_continuity_fails_at_n1() {
        let v = check(&fam("g1-nuclear"), ConditionId::CesContinuity, Budget::new(1 << 12, 2, 8)).unwrap();
        assert_eq!(v.status, Status::FailsNumerically);
        let n1: Vec<_> = v.evidence.iter().filter(|e| e.n == 1).collect();
        assert_eq!(n1.len(), 8);
        assert_eq!(n1.last().unwrap().m, Some(9));
    }

    #[test]
    fn dragilev_examples() {
        let b = Budget::new(64, 2, 8);
        let v = check(&fam("example-1.5"), ConditionId::DragilevTau(2.0), b).unwrap();
        assert_eq!(v.status, Status::HoldsNumerically);
        let v = check(&fam("remark-3.9"), ConditionId::DragilevTau(2.0), b).unwrap();
        assert_eq!(v.status, Status::FailsNumerically);
        let v = check(&fam("g1-nuclear"), ConditionId::DragilevTau(2.0), b).unwrap();
        assert_eq!(v.status, Status::Inconclusive);
    }

    #[test]
    fn point_eigen_example_3_4ii() {
        let f = gallery("example-3.4ii", &params([("s", 2.0.into())])).unwrap();
        let b = Budget::new(1 << 12, 3, 8);
        assert_eq!(check(&f, ConditionId::PointEigen(1), b).unwrap().status, Status::HoldsNumerically);
        assert_eq!(check(&f, ConditionId::PointEigen(2), b).unwrap().status, Status::FailsNumerically);
    }

    #[test]
    fn verdict_json_shape() {
        let v = check(&fam("remark-3.9"), ConditionId::Ginf2, Budget::new(256, 2, 8)).unwrap();
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j["condition"], "Ginf2");
        assert_eq!(j["status"], "HoldsNumerically");
        assert_eq!(j["witness"]["n"], 1);
        assert!(j["blocks"].as_array().unwrap().len() >= 5);
        assert!(v.summary_line().contains("numerically"));
    }

    proptest! {
        #[test]
        fn positive_scaling_keeps_trend(c in 0.5f64..2.0, p in -2.0f64..2.0) {
            // ln-shift by a constant cannot change the block steps or spreads
            let a = log_trend(1024, |i| p * (i as f64).ln());
            let b = log_trend(1024, |i| p * (i as f64).ln() + c.ln());
            let same = match (a.classification, b.classification) {
                (Trend::ConvergesTo(_), Trend::ConvergesTo(_)) => true,
                (Trend::BoundedAbove(_), Trend::BoundedAbove(_)) => true,
                (x, y) => x == y,
            };
            prop_assert!(same);
        }

        #[test]
        fn powers_classify_by_sign(p in 0.2f64..3.0) {
            prop_assert_eq!(log_trend(1 << 12, |i| p * (i as f64).ln()).classification, Trend::Diverges);
            prop_assert_eq!(log_trend(1 << 12, |i| -p * (i as f64).ln()).classification, Trend::ConvergesToZero);
        }
    }
}
