//! Köthe matrices in log-space, the built-in gallery, weighted sup-norms.
//!
//! A family stores `log a_n(i)`; the dual weights are `log v_n(i) = -log a_n(i)`.
//! Indices seen by callers always start at 1; `offset` only shifts evaluation.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criteria::ConditionId;
use crate::weightlang::{self, Builtin, Env, EvalError, Expr, ParseError, Sequence};

#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("unknown gallery key `{key}`; known keys: {known}", known = GALLERY_KEYS.join(", "))]
    UnknownKey { key: String },
    #[error("parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("definition file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("declared verdicts: {0}")]
    Declared(String),
}

/// Expected verdict for a condition, as stated for a gallery entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Holds,
    Fails,
    Unknown,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeclaredVerdicts {
    entries: Vec<(ConditionId, Expect)>,
}

impl DeclaredVerdicts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, c: ConditionId, e: Expect) {
        if let Some(slot) = self.entries.iter_mut().find(|(k, _)| *k == c) {
            slot.1 = e;
        } else {
            self.entries.push((c, e));
        }
    }

    fn with(mut self, c: ConditionId, e: Expect) -> Self {
        self.set(c, e);
        self
    }

    pub fn get(&self, c: &ConditionId) -> Option<Expect> {
        self.entries.iter().find(|(k, _)| k == c).map(|(_, e)| *e)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(ConditionId, Expect)> {
        self.entries.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Accepts condition names plus the aliases `Ginf`, `Schwartz`, `nuclear`.
    pub fn insert_named(&mut self, key: &str, e: Expect) -> Result<(), WeightsError> {
        match key {
            "Ginf" => {
                self.set(ConditionId::Ginf1, e);
                self.set(ConditionId::Ginf2, e);
            }
            "Schwartz" => self.set(ConditionId::SchwartzS, e),
            "nuclear" => self.set(ConditionId::GPC, e),
            _ => {
                let c: ConditionId = key.parse().map_err(WeightsError::Declared)?;
                self.set(c, e);
            }
        }
        Ok(())
    }
}

/// A Köthe matrix given by a formula for `log a_n(i)`.
#[derive(Debug, Clone)]
pub struct WeightFamily {
    pub name: String,
    pub formula: String,
    expr: Expr,
    pub env: Env,
    pub offset: u64,
    pub declared: DeclaredVerdicts,
}

impl WeightFamily {
    pub fn new(name: &str, formula: &str, env: Env, offset: u64) -> Result<Self, WeightsError> {
        let expr = weightlang::parse_in(formula, &env)?;
        Ok(WeightFamily {
            name: name.to_string(),
            formula: formula.to_string(),
            expr,
            env,
            offset,
            declared: DeclaredVerdicts::new(),
        })
    }

    pub fn with_declared(mut self, d: DeclaredVerdicts) -> Self {
        self.declared = d;
        self
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// `log a_n(i)`; may be `+inf` when the weight overflows.
    pub fn log_a(&self, n: u64, i: u64) -> Result<f64, EvalError> {
        weightlang::eval(&self.expr, i + self.offset, n, &self.env)
    }

    pub fn log_v(&self, n: u64, i: u64) -> Result<f64, EvalError> {
        self.log_a(n, i).map(|v| -v)
    }

    /// Tabulate `log a_n(i)` for `n <= n_max`, `i <= i_max`.
    pub fn table(&self, n_max: u64, i_max: u64) -> Result<LogTable, TableError> {
        let mut rows = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            let mut row = Vec::with_capacity(i_max as usize);
            for i in 1..=i_max {
                row.push(self.log_a(n, i).map_err(|source| TableError { n, i, source })?);
            }
            rows.push(row);
        }
        Ok(LogTable { rows, i_max })
    }

    pub fn from_json(text: &str) -> Result<Self, WeightsError> {
        let def: Definition = serde_json::from_str(text)?;
        Self::from_definition(&def)
    }

    pub fn from_definition(def: &Definition) -> Result<Self, WeightsError> {
        let mut env = Env::new();
        for (k, v) in &def.params {
            env.params.insert(k.clone(), *v);
        }
        for (k, v) in &def.sequences {
            let s = match v {
                SequenceDef::Table(t) => Sequence::Table(t.clone()),
                SequenceDef::Named(name) => {
                    Sequence::Builtin(Builtin::from_name(name).ok_or_else(|| {
                        WeightsError::Parameter {
                            name: k.clone(),
                            reason: format!("unknown built-in sequence `{name}`"),
                        }
                    })?)
                }
            };
            env.sequences.insert(k.clone(), s);
        }
        let mut declared = DeclaredVerdicts::new();
        for (k, e) in &def.declared {
            declared.insert_named(k, *e)?;
        }
        Ok(Self::new(&def.name, &def.log_a, env, def.offset)?.with_declared(declared))
    }

    pub fn to_definition(&self) -> Definition {
        let sequences = self
            .env
            .sequences
            .iter()
            .map(|(k, s)| {
                let d = match s {
                    Sequence::Builtin(b) => SequenceDef::Named(b.name().to_string()),
                    Sequence::Table(t) => SequenceDef::Table(t.clone()),
                };
                (k.clone(), d)
            })
            .collect();
        let declared = self
            .declared
            .iter()
            .map(|(c, e)| (c.to_string(), *e))
            .collect();
        Definition {
            name: self.name.clone(),
            log_a: self.formula.clone(),
            offset: self.offset,
            params: self.env.params.clone(),
            sequences,
            declared,
        }
    }
}

#[derive(Debug, Error)]
#[error("evaluating log a_{n}({i}): {source}")]
pub struct TableError {
    pub n: u64,
    pub i: u64,
    pub source: EvalError,
}

/// Precomputed `log a_n(i)`, 1-based in both indices.
#[derive(Debug, Clone)]
pub struct LogTable {
    rows: Vec<Vec<f64>>,
    i_max: u64,
}

impl LogTable {
    #[inline]
    pub fn get(&self, n: u64, i: u64) -> f64 {
        self.rows[n as usize - 1][i as usize - 1]
    }

    pub fn row(&self, n: u64) -> &[f64] {
        &self.rows[n as usize - 1]
    }

    pub fn n_max(&self) -> u64 {
        self.rows.len() as u64
    }

    pub fn i_max(&self) -> u64 {
        self.i_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceDef {
    Table(Vec<f64>),
    Named(String),
}

/// JSON weight definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Definition {
    pub name: String,
    #[serde(rename = "logA")]
    pub log_a: String,
    #[serde(default)]
    pub offset: u64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub sequences: BTreeMap<String, SequenceDef>,
    #[serde(default)]
    pub declared: BTreeMap<String, Expect>,
}

// ---------------------------------------------------------------- gallery

pub const GALLERY_KEYS: [&str; 8] = [
    "example-1.5",
    "remark-3.9",
    "example-3.4i",
    "example-3.4ii",
    "remark-4.4",
    "power-series",
    "loglog-weights",
    "g1-nuclear",
];

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Num(f64),
    Name(String),
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Num(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Name(v.to_string())
    }
}

impl std::str::FromStr for ParamValue {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<f64>() {
            Ok(v) => ParamValue::Num(v),
            Err(_) => ParamValue::Name(s.to_string()),
        })
    }
}

pub type GalleryParams = BTreeMap<String, ParamValue>;

/// Convenience for building parameter maps.
pub fn params<const K: usize>(kv: [(&str, ParamValue); K]) -> GalleryParams {
    kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn num_param(p: &GalleryParams, name: &str) -> Result<Option<f64>, WeightsError> {
    match p.get(name) {
        None => Ok(None),
        Some(ParamValue::Num(v)) => Ok(Some(*v)),
        Some(ParamValue::Name(s)) => Err(WeightsError::Parameter {
            name: name.into(),
            reason: format!("expected a number, got `{s}`"),
        }),
    }
}

fn reject_extra(p: &GalleryParams, allowed: &[&str]) -> Result<(), WeightsError> {
    for k in p.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(WeightsError::Parameter {
                name: k.clone(),
                reason: format!("not a parameter of this family (allowed: {})", allowed.join(", ")),
            });
        }
    }
    Ok(())
}

/// Short description of a gallery entry.
pub fn gallery_summary(key: &str) -> Option<&'static str> {
    Some(match key {
        "example-1.5" => "log a_n(i) = i*n*exp(i*n); nuclear G-infinity space with (DN)",
        "remark-3.9" => "log a_n(i) = i*n; nuclear, fails (U)",
        "example-3.4i" => "log a_n(i) = alpha*n/(n+1)*log(i) + i (alpha in (0,1), default 0.5); not G-infinity",
        "example-3.4ii" => "log a_n(i) = (s - 1/(1+n))*log(i), integer s >= 1; 1/(s+1) not an eigenvalue",
        "remark-4.4" => "log a_n(i) = n*loglog(i), offset 26; non-nuclear Schwartz, satisfies (L)",
        "power-series" => "log a_n(i) = n*alpha(i), alpha in {identity, log, loglog}",
        "loglog-weights" => "log a_n(i) = 2^(n-7)*log(loglog(i)), offset 26; non-nuclear Schwartz, fails (L)",
        "g1-nuclear" => "log a_n(i) = -i/n; finite type (G1), nuclear",
        _ => return None,
    })
}

/// Build a gallery family.
pub fn gallery(key: &str, p: &GalleryParams) -> Result<WeightFamily, WeightsError> {
    use ConditionId as C;
    use Expect::{Fails as F, Holds as H};
    let d = DeclaredVerdicts::new;
    let fam = match key {
        "example-1.5" => {
            reject_extra(p, &[])?;
            WeightFamily::new(key, "i*n*exp(i*n)", Env::new(), 0)?.with_declared(
                d().with(C::Ginf1, H)
                    .with(C::Ginf2, H)
                    .with(C::SchwartzS, H)
                    .with(C::GPC, H)
                    .with(C::SV, H)
                    .with(C::N, H)
                    .with(C::DN, H)
                    .with(C::U, H)
                    .with(C::L, H)
                    .with(C::CesContinuity, H)
                    .with(C::CesCompactness, F)
                    .with(C::DContinuity, H)
                    .with(C::PointEigen(1), H)
                    .with(C::DragilevTau(2.0), H),
            )
        }
        "remark-3.9" => {
            reject_extra(p, &[])?;
            WeightFamily::new(key, "i*n", Env::new(), 0)?.with_declared(
                d().with(C::Ginf1, H)
                    .with(C::Ginf2, H)
                    .with(C::GPC, H)
                    .with(C::U, F),
            )
        }
        "example-3.4i" => {
            reject_extra(p, &["alpha"])?;
            let alpha = num_param(p, "alpha")?.unwrap_or(0.5);
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(WeightsError::Parameter {
                    name: "alpha".into(),
                    reason: format!("must lie in (0,1), got {alpha}"),
                });
            }
            let env = Env::new().with_param("alpha", alpha);
            let mut dv = d().with(C::Ginf2, F).with(C::N, F);
            for s in 1..=6 {
                dv.set(C::PointEigen(s), H);
            }
            WeightFamily::new(key, "alpha*n/(n+1)*log(i) + i", env, 0)?.with_declared(dv)
        }
        "example-3.4ii" => {
            reject_extra(p, &["s"])?;
            let s = num_param(p, "s")?.ok_or_else(|| WeightsError::Parameter {
                name: "s".into(),
                reason: "required (integer s >= 1)".into(),
            })?;
            if !(s >= 1.0 && s.fract() == 0.0 && s < 1e6) {
                return Err(WeightsError::Parameter {
                    name: "s".into(),
                    reason: format!("must be an integer >= 1, got {s}"),
                });
            }
            let env = Env::new().with_param("s", s);
            let si = s as u64;
            let mut dv = d().with(C::Ginf2, F).with(C::PointEigen(si), F);
            for k in 1..si {
                dv.set(C::PointEigen(k), H);
            }
            WeightFamily::new(key, "(s - 1/(1+n))*log(i)", env, 0)?.with_declared(dv)
        }
        "remark-4.4" => {
            reject_extra(p, &[])?;
            WeightFamily::new(key, "n*loglog(i)", Env::new(), 26)?.with_declared(
                d().with(C::Ginf1, H)
                    .with(C::Ginf2, H)
                    .with(C::SchwartzS, H)
                    .with(C::GPC, F)
                    .with(C::L, H),
            )
        }
        "power-series" => {
            reject_extra(p, &["alpha"])?;
            let which = match p.get("alpha") {
                Some(ParamValue::Name(s)) => Builtin::from_name(s),
                _ => None,
            }
            .ok_or_else(|| WeightsError::Parameter {
                name: "alpha".into(),
                reason: "required, one of identity | log | loglog".into(),
            })?;
            let env = Env::new().with_sequence("alpha", Sequence::Builtin(which));
            let (offset, dv) = match which {
                Builtin::Identity => (0, d().with(C::Ginf1, H).with(C::GPC, H).with(C::L, H)),
                Builtin::Log => (0, d().with(C::Ginf1, H).with(C::GPC, H).with(C::U, F)),
                Builtin::LogLog => (
                    26,
                    d().with(C::Ginf1, H)
                        .with(C::Ginf2, H)
                        .with(C::GPC, F)
                        .with(C::L, H),
                ),
            };
            let mut fam = WeightFamily::new(key, "n*alpha(i)", env, offset)?.with_declared(dv);
            fam.name = format!("power-series({})", which.name());
            fam
        }
        "loglog-weights" => {
            reject_extra(p, &[])?;
            WeightFamily::new(key, "2^(n-7)*log(loglog(i))", Env::new(), 26)?.with_declared(
                d().with(C::Ginf1, H)
                    .with(C::Ginf2, H)
                    .with(C::SchwartzS, H)
                    .with(C::GPC, F)
                    .with(C::L, F),
            )
        }
        "g1-nuclear" => {
            reject_extra(p, &[])?;
            WeightFamily::new(key, "-i/n", Env::new(), 0)?.with_declared(
                d().with(C::G1axioms, H)
                    .with(C::Ginf1, F)
                    .with(C::GPC, H)
                    .with(C::CesContinuity, F),
            )
        }
        other => return Err(WeightsError::UnknownKey { key: other.to_string() }),
    };
    Ok(fam)
}

/// Every gallery family with its default parameters (s = 3 for example-3.4ii,
/// one entry per power-series alpha).
pub fn gallery_defaults() -> Vec<WeightFamily> {
    let mut out = Vec::new();
    for key in GALLERY_KEYS {
        match key {
            "example-3.4ii" => out.push(gallery(key, &params([("s", 3.0.into())])).unwrap()),
            "power-series" => {
                for a in ["identity", "log", "loglog"] {
                    out.push(gallery(key, &params([("alpha", a.into())])).unwrap());
                }
            }
            _ => out.push(gallery(key, &GalleryParams::new()).unwrap()),
        }
    }
    out
}

// ---------------------------------------------------------------- log-space helpers

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        return f64::NAN;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY || hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        if x.is_nan() || self.max.is_nan() {
            self.max = f64::NAN;
            return;
        }
        if x == f64::NEG_INFINITY {
            return;
        }
        if x == f64::INFINITY || self.max == f64::INFINITY {
            self.max = f64::INFINITY;
            self.scaled = 1.0;
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    /// ln of the running sum; `-inf` when empty.
    pub fn value(&self) -> f64 {
        if self.max.is_nan() {
            return f64::NAN;
        }
        if !self.max.is_finite() {
            return self.max;
        }
        self.max + self.scaled.ln()
    }
}

pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = LogSumExp::new();
    for x in xs {
        acc.push(x);
    }
    acc.value()
}

// ---------------------------------------------------------------- vectors and norms

/// Finite complex vector `x_1..x_N`, indices 1-based in the API.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector {
    entries: Vec<Complex64>,
}

impl WeightedVector {
    pub fn new(entries: Vec<Complex64>) -> Option<Self> {
        if entries.is_empty() {
            None
        } else {
            Some(WeightedVector { entries })
        }
    }

    pub fn from_real(xs: &[f64]) -> Option<Self> {
        Self::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn unit(k: usize, len: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); len];
        v[k - 1] = Complex64::new(1.0, 0.0);
        WeightedVector { entries: v }
    }

    pub fn ones(len: usize) -> Self {
        WeightedVector {
            entries: vec![Complex64::new(1.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }
}

/// `ln q_n(x)` with `q_n(x) = max_i v_n(i)|x_i|`; `-inf` for the zero vector.
pub fn log_q_norm(family: &WeightFamily, n: u64, x: &[Complex64]) -> Result<f64, EvalError> {
    let mut best = f64::NEG_INFINITY;
    for (k, z) in x.iter().enumerate() {
        let m = z.norm();
        if m == 0.0 {
            continue;
        }
        let t = family.log_v(n, k as u64 + 1)? + m.ln();
        if t > best {
            best = t;
        }
    }
    Ok(best)
}

pub fn q_norm(family: &WeightFamily, n: u64, x: &WeightedVector) -> Result<f64, EvalError> {
    log_q_norm(family, n, x.entries()).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fam(key: &str) -> WeightFamily {
        gallery(key, &GalleryParams::new()).unwrap()
    }

    #[test]
    fn gallery_formulas() {
        let f = fam("example-1.5");
        assert!((f.log_a(1, 1).unwrap() - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(f.log_a(3, 3).unwrap(), 9.0 * 9f64.exp());
        let r = fam("remark-3.9");
        assert_eq!(r.log_a(2, 5).unwrap(), 10.0);
        let e = gallery("example-3.4ii", &params([("s", 3.0.into())])).unwrap();
        assert!((e.log_a(1, 7).unwrap() - 2.5 * 7f64.ln()).abs() < 1e-14);
        let q = fam("remark-4.4");
        assert!((q.log_a(2, 1).unwrap() - 2.0 * 27f64.ln().ln()).abs() < 1e-15);
        assert!(q.log_a(1, 1).unwrap() > 1.19);
    }

    #[test]
    fn gallery_parameter_errors() {
        assert!(matches!(gallery("nope", &GalleryParams::new()), Err(WeightsError::UnknownKey { .. })));
        assert!(gallery("example-3.4ii", &GalleryParams::new()).is_err());
        assert!(gallery("example-3.4ii", &params([("s", 2.5.into())])).is_err());
        assert!(gallery("example-3.4ii", &params([("s", 0.0.into())])).is_err());
        assert!(gallery("example-3.4i", &params([("alpha", 1.5.into())])).is_err());
        assert!(gallery("remark-3.9", &params([("s", 1.0.into())])).is_err());
        assert!(gallery("power-series", &params([("alpha", "sqrt".into())])).is_err());
    }

    #[test]
    fn declared_flags_present() {
        let f = fam("example-1.5");
        assert_eq!(f.declared.get(&ConditionId::GPC), Some(Expect::Holds));
        assert_eq!(f.declared.get(&ConditionId::DN), Some(Expect::Holds));
        let e = gallery("example-3.4ii", &params([("s", 3.0.into())])).unwrap();
        assert_eq!(e.declared.get(&ConditionId::PointEigen(3)), Some(Expect::Fails));
        assert_eq!(e.declared.get(&ConditionId::Ginf2), Some(Expect::Fails));
        assert_eq!(fam("remark-3.9").declared.get(&ConditionId::U), Some(Expect::Fails));
    }

    #[test]
    fn sampled_axioms_hold() {
        for f in gallery_defaults() {
            let g1 = f.name == "g1-nuclear";
            let ginf = f.declared.get(&ConditionId::Ginf1) == Some(Expect::Holds);
            for n in 1..=64u64 {
                for i in 1..=64u64 {
                    let a = f.log_a(n, i).unwrap();
                    assert!(a <= f.log_a(n + 1, i).unwrap(), "K1 {} n={n} i={i}", f.name);
                    if ginf {
                        assert!(a >= 0.0, "{} n={n} i={i}", f.name);
                        assert!(a <= f.log_a(n, i + 1).unwrap(), "{} n={n} i={i}", f.name);
                    }
                    if g1 {
                        assert!(f.log_a(n, i + 1).unwrap() <= a);
                    }
                }
            }
        }
    }

    #[test]
    fn g1_squares_bound() {
        // a_n(i) <= a_{2n}(i)^2 with C = 1, i.e. -i/n <= -2i/(2n)
        let f = fam("g1-nuclear");
        for n in 1..=16u64 {
            for i in 1..=256u64 {
                assert!(f.log_a(n, i).unwrap() <= 2.0 * f.log_a(2 * n, i).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn q_norm_examples() {
        let r = fam("remark-3.9");
        let x = WeightedVector::from_real(&[1.0, 1.0, 1.0]).unwrap();
        assert!((q_norm(&r, 1, &x).unwrap() - (-1f64).exp()).abs() < 1e-16);
        let e1 = WeightedVector::unit(1, 5);
        for f in gallery_defaults() {
            if f.declared.get(&ConditionId::Ginf1) == Some(Expect::Holds) {
                let q = q_norm(&f, 2, &e1).unwrap();
                assert!(q <= 1.0);
                assert_eq!(q, f.log_v(2, 1).unwrap().exp());
            }
        }
        let z = WeightedVector::from_real(&[0.0, 0.0]).unwrap();
        assert_eq!(q_norm(&r, 1, &z).unwrap(), 0.0);
    }

    #[test]
    fn q_norm_monotone_in_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for key in ["remark-3.9", "remark-4.4", "example-1.5"] {
            let f = fam(key);
            for _ in 0..100 {
                let x: Vec<Complex64> = (0..40)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let x = WeightedVector::new(x).unwrap();
                let q1 = q_norm(&f, 1, &x).unwrap();
                let q3 = q_norm(&f, 3, &x).unwrap();
                assert!(q3 <= q1);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"name":"t","logA":"c*n*tab(i)","offset":2,
            "params":{"c":1.5},"sequences":{"tab":[1,2,3,4,5,6,7,8]},
            "declared":{"nuclear":"holds","Ginf":"fails","SN(2)":"holds"}}"#;
        let f = WeightFamily::from_json(text).unwrap();
        assert_eq!(f.log_a(2, 1).unwrap(), 1.5 * 2.0 * 3.0);
        assert_eq!(f.declared.get(&ConditionId::GPC), Some(Expect::Holds));
        assert_eq!(f.declared.get(&ConditionId::Ginf2), Some(Expect::Fails));
        assert_eq!(f.declared.get(&ConditionId::SN(2.0)), Some(Expect::Holds));
        let back = WeightFamily::from_definition(&f.to_definition()).unwrap();
        assert_eq!(back.log_a(2, 3).unwrap(), f.log_a(2, 3).unwrap());
        assert!(WeightFamily::from_json(r#"{"name":"x","logA":"beta*i"}"#).is_err());
        assert!(WeightFamily::from_json(r#"{"name":"x","logA":"i","declared":{"Bogus":"holds"}}"#).is_err());
    }

    #[test]
    fn lse_basics() {
        assert_eq!(log_sum_exp([]), f64::NEG_INFINITY);
        assert!((log_sum_exp([0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp([1000.0, 1000.0]), 1000.0 + 2f64.ln());
        assert_eq!(log_sum_exp([f64::INFINITY, 3.0]), f64::INFINITY);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 2.0), 2.0);
        // e + e^2 + e^3
        let direct = (1f64.exp() + 2f64.exp() + 3f64.exp()).ln();
        assert!((log_sum_exp([1.0, 2.0, 3.0]) - direct).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn lse_matches_direct_sum(xs in proptest::collection::vec(-30.0f64..30.0, 1..50), shift in -600.0f64..600.0) {
            let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
            let shifted = log_sum_exp(xs.iter().map(|x| x + shift));
            prop_assert!((shifted - shift - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        }

        #[test]
        fn lse_order_independent(xs in proptest::collection::vec(-50.0f64..50.0, 1..40)) {
            let a = log_sum_exp(xs.iter().copied());
            let b = log_sum_exp(xs.iter().rev().copied());
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn q_norm_is_a_norm(seed in 0u64..1000, c in -3.0f64..3.0) {
            let f = gallery("remark-4.4", &GalleryParams::new()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || WeightedVector::new((0..12).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap();
            let x = draw();
            let y = draw();
            let sum = WeightedVector::new(x.entries().iter().zip(y.entries()).map(|(a, b)| a + b).collect()).unwrap();
            let qx = q_norm(&f, 2, &x).unwrap();
            let qy = q_norm(&f, 2, &y).unwrap();
            prop_assert!(q_norm(&f, 2, &sum).unwrap() <= (qx + qy) * (1.0 + 1e-12));
            let scaled = WeightedVector::new(x.entries().iter().map(|a| a * c).collect()).unwrap();
            prop_assert!((q_norm(&f, 2, &scaled).unwrap() - c.abs() * qx).abs() <= 1e-12 * qx.max(1e-300));
        }
    }
}
