//! Spectrum of the Cesaro operator predicted from a classification, set
//! membership, and row-sum evidence for the resolvent near the boundary.
//!
//! Notation: `Sigma = {1/m : m >= 1}`, `Sigma_0 = Sigma u {0}`,
//! `D(1) = {z : |z - 1/2| < 1/2} = {z : Re(1/z) > 1}`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::criteria::{log_trend, SpaceClassification, Status, TrendReport};
use crate::sections::{check_shift, rational_to_f64, SectionsError};
use crate::weightlang::EvalError;
use crate::weights::{LogSumExp, WeightFamily};

/// Relative band around `Re(1/lambda) = 1` reported as boundary for double input.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shape {
    /// `sigma = sigma_pt = Sigma`, `sigma* = Sigma_0`.
    NuclearSigma,
    /// `{0, 1} u D(1)`.
    DiskOpenPlusEndpoints,
    /// Closure of `D(1)`.
    DiskClosed,
}

impl Shape {
    pub fn describe(self) -> &'static str {
        match self {
            Shape::NuclearSigma => "Sigma = {1/m : m >= 1}",
            Shape::DiskOpenPlusEndpoints => "{0, 1} u D(1)",
            Shape::DiskClosed => "closure of D(1)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointSpectrum {
    /// `Sigma`
    Sigma,
    /// `{1}`
    One,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumDescription {
    pub shape: Shape,
    pub sigma_pt: PointSpectrum,
    /// Only set in the nuclear case.
    pub sigma_star: Option<String>,
    pub notes: Vec<String>,
}

impl SpectrumDescription {
    pub fn of_shape(shape: Shape) -> Self {
        match shape {
            Shape::NuclearSigma => SpectrumDescription {
                shape,
                sigma_pt: PointSpectrum::Sigma,
                sigma_star: Some("Sigma_0 = Sigma u {0}".into()),
                notes: vec!["0 is not in sigma; it is the only point of sigma* outside sigma".into()],
            },
            _ => SpectrumDescription {
                shape,
                sigma_pt: PointSpectrum::One,
                sigma_star: None,
                notes: vec![
                    "sigma* not specified".into(),
                    "0 lies in sigma (non-nuclear)".into(),
                ],
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "shape": self.shape,
            "set": self.shape.describe(),
            "sigma_pt": match self.sigma_pt {
                PointSpectrum::Sigma => "Sigma",
                PointSpectrum::One => "{1}",
            },
            "notes": self.notes,
        });
        if let Some(s) = &self.sigma_star {
            v["sigma_star"] = json!(s);
        }
        v
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("classification insufficient: {condition} is inconclusive")]
    Insufficient { condition: &'static str },
    #[error("prediction needs {condition} to hold, observed {status}")]
    OutOfScope {
        condition: &'static str,
        status: Status,
    },
    #[error("invalid lambda {text:?}: {reason}")]
    Lambda { text: String, reason: String },
    #[error(transparent)]
    Shift(#[from] SectionsError),
    #[error("need n < m, got n = {n}, m = {m}")]
    Indices { n: u64, m: u64 },
    #[error("N must be a power of two >= 256, got {0}")]
    Dimension(u64),
    #[error("weight evaluation failed at i = {i}: {source}")]
    Eval { i: u64, source: EvalError },
}

/// Applies the trichotomy. `L` is consulted only when the space is not nuclear.
pub fn predict(c: &SpaceClassification) -> Result<SpectrumDescription, SpectraError> {
    let s = &c.summary;
    for (name, st) in [("Ginf", s.ginf), ("Schwartz", s.schwartz)] {
        if st.fails() {
            return Err(SpectraError::OutOfScope {
                condition: name,
                status: st,
            });
        }
    }
    for (name, st) in [("Ginf", s.ginf), ("Schwartz", s.schwartz), ("nuclear", s.nuclear)] {
        if st == Status::Inconclusive {
            return Err(SpectraError::Insufficient { condition: name });
        }
    }
    if s.nuclear.holds() {
        return Ok(SpectrumDescription::of_shape(Shape::NuclearSigma));
    }
    match s.l {
        Status::HoldsNumerically => Ok(SpectrumDescription::of_shape(
            Shape::DiskOpenPlusEndpoints,
        )),
        Status::FailsNumerically => Ok(SpectrumDescription::of_shape(Shape::DiskClosed)),
        Status::Inconclusive => Err(SpectraError::Insufficient { condition: "L" }),
    }
}

// ---------------------------------------------------------------- lambda

/// A point of the plane, exact when it came from decimal or `p/q` text.
#[derive(Debug, Clone, PartialEq)]
pub enum Lambda {
    Exact { re: BigRational, im: BigRational },
    Double(Complex64),
}

impl Lambda {
    pub fn exact(re: BigRational, im: BigRational) -> Self {
        Lambda::Exact { re, im }
    }

    pub fn rational(p: i64, q: i64) -> Self {
        Lambda::Exact {
            re: BigRational::new(p.into(), q.into()),
            im: BigRational::zero(),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Lambda::Exact { re, im } => Complex64::new(rational_to_f64(re), rational_to_f64(im)),
            Lambda::Double(z) => *z,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Lambda::Exact { re, im } => Lambda::Exact {
                re: re.clone(),
                im: -im.clone(),
            },
            Lambda::Double(z) => Lambda::Double(z.conj()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Lambda::Exact { re, im } => re.is_zero() && im.is_zero(),
            Lambda::Double(z) => z.is_zero(),
        }
    }

    fn is_one(&self) -> bool {
        match self {
            Lambda::Exact { re, im } => re.is_one() && im.is_zero(),
            Lambda::Double(z) => (*z - 1.0).norm() <= BOUNDARY_TOL,
        }
    }

    /// `1/lambda` as an exact pair; `None` for zero or double input.
    fn exact_recip(&self) -> Option<(BigRational, BigRational)> {
        match self {
            Lambda::Exact { re, im } => {
                let d = re * re + im * im;
                if d.is_zero() {
                    None
                } else {
                    Some((re / &d, -im / &d))
                }
            }
            Lambda::Double(_) => None,
        }
    }

    /// `lambda` in Sigma: `1/lambda` is a positive integer.
    pub fn in_sigma(&self) -> bool {
        match self {
            Lambda::Exact { .. } => match self.exact_recip() {
                Some((a, b)) => b.is_zero() && a.is_integer() && a.is_positive(),
                None => false,
            },
            Lambda::Double(z) => {
                if z.is_zero() {
                    return false;
                }
                let w = z.inv();
                let k = w.re.round();
                k >= 1.0 && (w - k).norm() <= BOUNDARY_TOL * k
            }
        }
    }

    /// Sign of `Re(1/lambda) - 1`; `None` at 0.
    fn a_cmp_one(&self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering;
        match self {
            Lambda::Exact { .. } => self.exact_recip().map(|(a, _)| a.cmp(&BigRational::one())),
            Lambda::Double(z) => {
                if z.is_zero() {
                    return None;
                }
                let a = z.inv().re;
                Some(if (a - 1.0).abs() <= BOUNDARY_TOL * a.abs().max(1.0) {
                    Ordering::Equal
                } else if a > 1.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                })
            }
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Exact { re, im } => write!(f, "{re},{im}"),
            Lambda::Double(z) => write!(f, "{},{}", z.re, z.im),
        }
    }
}

/// Decimal (`-0.25`, `1e-3`) or `p/q` text as an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac}").parse().ok()?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if shift >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Some(if neg { -r } else { r })
}

impl FromStr for Lambda {
    type Err = SpectraError;

    /// `re`, `re,im`; each part decimal or `p/q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| SpectraError::Lambda {
            text: s.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = s.split(',');
        let re = parts.next().ok_or_else(|| bad("empty"))?;
        let im = parts.next();
        if parts.next().is_some() {
            return Err(bad("expected re,im"));
        }
        let re = parse_rational(re).ok_or_else(|| bad("real part is not a number"))?;
        let im = match im {
            Some(t) => parse_rational(t).ok_or_else(|| bad("imaginary part is not a number"))?,
            None => BigRational::zero(),
        };
        Ok(Lambda::Exact { re, im })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Inside,
    BoundaryIn,
    BoundaryOut,
    Outside,
}

impl Membership {
    pub fn contained(self) -> bool {
        matches!(self, Membership::Inside | Membership::BoundaryIn)
    }

    pub fn name(self) -> &'static str {
        match self {
            Membership::Inside => "inside",
            Membership::BoundaryIn => "boundary-in",
            Membership::BoundaryOut => "boundary-out",
            Membership::Outside => "outside",
        }
    }
}

/// Membership of `lambda` in the predicted spectrum.
pub fn member(desc: &SpectrumDescription, lambda: &Lambda) -> Membership {
    member_shape(desc.shape, lambda)
}

pub fn member_shape(shape: Shape, lambda: &Lambda) -> Membership {
    use std::cmp::Ordering::*;
    match shape {
        Shape::NuclearSigma => {
            if lambda.in_sigma() {
                Membership::Inside
            } else {
                Membership::Outside
            }
        }
        Shape::DiskOpenPlusEndpoints => match lambda.a_cmp_one() {
            None => Membership::BoundaryIn,
            Some(Greater) => Membership::Inside,
            Some(Equal) if lambda.is_one() => Membership::BoundaryIn,
            Some(Equal) => Membership::BoundaryOut,
            Some(Less) => Membership::Outside,
        },
        Shape::DiskClosed => match lambda.a_cmp_one() {
            None | Some(Equal) => Membership::BoundaryIn,
            Some(Greater) => Membership::Inside,
            Some(Less) => Membership::Outside,
        },
    }
}

// ---------------------------------------------------------------- evidence

/// Trend of `sum_{j<i} (v_m(i)/v_n(j)) |e_ij(lambda)|` over `i <= N`.
///
/// With `P_t = sum_{k<=t} ln|1 - 1/(k lambda)|`,
/// `ln|e_ij| = -ln i - P_i + P_(j-1)`, so each row is one streaming
/// log-sum-exp away from the previous one.
pub fn row_sum_evidence(
    family: &WeightFamily,
    lambda: Complex64,
    n: u64,
    m: u64,
    big_n: u64,
) -> Result<TrendReport, SpectraError> {
    let tables = EvidenceTables::new(family, n, m, big_n)?;
    tables.evidence(lambda)
}

/// `log v_n`, `log v_m` on `1..=N`, shared by many `lambda`.
#[derive(Debug, Clone)]
pub struct EvidenceTables {
    big_n: u64,
    log_vn: Vec<f64>,
    log_vm: Vec<f64>,
}

impl EvidenceTables {
    /// Evaluation errors past the first index become a NaN horizon.
    pub fn new(family: &WeightFamily, n: u64, m: u64, big_n: u64) -> Result<Self, SpectraError> {
        if n >= m {
            return Err(SpectraError::Indices { n, m });
        }
        if big_n < 256 || !big_n.is_power_of_two() {
            return Err(SpectraError::Dimension(big_n));
        }
        let row = |k: u64| -> Result<Vec<f64>, SpectraError> {
            let mut out = Vec::with_capacity(big_n as usize);
            for i in 1..=big_n {
                match family.log_v(k, i) {
                    Ok(x) => out.push(x),
                    Err(source) if i == 1 => return Err(SpectraError::Eval { i, source }),
                    Err(_) => out.push(f64::NAN),
                }
            }
            Ok(out)
        };
        Ok(EvidenceTables {
            big_n,
            log_vn: row(n)?,
            log_vm: row(m)?,
        })
    }

    pub fn evidence(&self, lambda: Complex64) -> Result<TrendReport, SpectraError> {
        check_shift(lambda)?;
        let inv = lambda.inv();
        let log_f = |k: u64| (Complex64::new(1.0, 0.0) - inv / k as f64).norm().ln();
        let mut prefix = 0.0f64;
        let mut last_f = 0.0f64;
        let mut acc = LogSumExp::new();
        Ok(log_trend(self.big_n, |i| {
            // before the update `prefix` is P_(i-1); column j = i - 1 needs P_(i-2)
            let j = i - 1;
            if j >= 1 {
                acc.push(prefix - last_f - self.log_vn[j as usize - 1]);
            }
            last_f = log_f(i);
            prefix += last_f;
            if j == 0 {
                return f64::NEG_INFINITY;
            }
            self.log_vm[i as usize - 1] - (i as f64).ln() - prefix + acc.value()
        }))
    }
}

/// `sum_{j<i} 1/j` for `i >= 1`.
pub fn harmonic(i: u64) -> f64 {
    (1..i).map(|j| 1.0 / j as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{Budget, Trend};
    use crate::weights::{gallery, GalleryParams};
    use proptest::prelude::*;

    fn shapes() -> [Shape; 3] {
        [
            Shape::NuclearSigma,
            Shape::DiskOpenPlusEndpoints,
            Shape::DiskClosed,
        ]
    }

    fn lam(s: &str) -> Lambda {
        s.parse().unwrap()
    }

    #[test]
    fn parse_lambda() {
        assert_eq!(lam("1/3"), Lambda::rational(1, 3));
        assert_eq!(lam("0.6"), Lambda::rational(3, 5));
        assert_eq!(lam("-2.5e-1,1/2"), Lambda::exact(
            BigRational::new((-1).into(), 4.into()),
            BigRational::new(1.into(), 2.into()),
        ));
        assert!("1/0".parse::<Lambda>().is_err());
        assert!("x".parse::<Lambda>().is_err());
        assert!("1,2,3".parse::<Lambda>().is_err());
    }

    #[test]
    fn membership_examples() {
        let nuc = SpectrumDescription::of_shape(Shape::NuclearSigma);
        assert_eq!(member(&nuc, &lam("1/3")), Membership::Inside);
        assert_eq!(member(&nuc, &lam("0.3")), Membership::Outside);
        assert_eq!(
            member(&nuc, &Lambda::Double(Complex64::new(1.0 / 3.0, 0.0))),
            Membership::Inside
        );
        let open = SpectrumDescription::of_shape(Shape::DiskOpenPlusEndpoints);
        assert_eq!(member(&open, &lam("0.5,0.5")), Membership::BoundaryOut);
        assert_eq!(member(&open, &lam("1")), Membership::BoundaryIn);
        assert_eq!(member(&open, &lam("0")), Membership::BoundaryIn);
        let closed = SpectrumDescription::of_shape(Shape::DiskClosed);
        assert_eq!(member(&closed, &lam("0.6")), Membership::Inside);
        assert_eq!(member(&closed, &lam("0.5,0.5")), Membership::BoundaryIn);
        assert_eq!(member(&closed, &lam("1.2")), Membership::Outside);
        assert_eq!(
            member(&closed, &Lambda::Double(Complex64::new(0.5, 0.5))),
            Membership::BoundaryIn
        );
    }

    #[test]
    fn zero_only_for_non_nuclear() {
        for s in shapes() {
            let c = member_shape(s, &lam("0")).contained();
            assert_eq!(c, s != Shape::NuclearSigma);
        }
    }

    #[test]
    fn harmonic_bounds() {
        let mut h = 0.0f64;
        for i in 2u64..=(1 << 16) {
            h += 1.0 / (i - 1) as f64;
            let li = (i as f64).ln();
            assert!(li <= h && h <= 1.0 + ((i - 1) as f64).ln(), "i = {i}");
        }
        assert_eq!(harmonic(4), 1.0 + 0.5 + 1.0 / 3.0);
    }

    #[test]
    fn predictions_for_gallery() {
        let b = Budget::default();
        let p = GalleryParams::new();
        let cls = |k: &str| crate::criteria::classify(&gallery(k, &p).unwrap(), b).unwrap();
        assert_eq!(predict(&cls("example-1.5")).unwrap().shape, Shape::NuclearSigma);
        let r = predict(&cls("remark-4.4")).unwrap();
        assert_eq!(r.shape, Shape::DiskOpenPlusEndpoints);
        assert!(r.sigma_star.is_none());
        assert_eq!(predict(&cls("loglog-weights")).unwrap().shape, Shape::DiskClosed);
        assert!(matches!(
            predict(&cls("example-3.4i")),
            Err(SpectraError::OutOfScope { condition: "Ginf", .. })
        ));
    }

    #[test]
    fn evidence_dichotomy() {
        let p = GalleryParams::new();
        let lam = Complex64::new(0.5, 0.5);
        let r44 = gallery("remark-4.4", &p).unwrap();
        let rep = row_sum_evidence(&r44, lam, 1, 2, 1 << 13).unwrap();
        assert!(matches!(rep.classification, Trend::BoundedAbove(_)), "{:?}", rep.classification);
        let ll = gallery("loglog-weights", &p).unwrap();
        for n in 1..=3 {
            for m in n + 1..=7 {
                let rep = row_sum_evidence(&ll, lam, n, m, 1 << 13).unwrap();
                assert_eq!(rep.classification, Trend::Diverges, "n = {n}, m = {m}");
            }
        }
    }

    #[test]
    fn evidence_nuclear_interior() {
        let f = gallery("example-1.5", &GalleryParams::new()).unwrap();
        let rep = row_sum_evidence(&f, Complex64::new(0.25, 0.1), 1, 2, 1 << 10).unwrap();
        assert!(rep.classification.is_bounded(), "{:?}", rep.classification);
    }

    #[test]
    fn evidence_matches_direct_sum() {
        // oracle: explicit e_ij from the split
        let f = gallery("remark-4.4", &GalleryParams::new()).unwrap();
        let lam = Complex64::new(0.3, 0.2);
        let n = 256;
        let (_, e) = crate::sections::split(lam, n as usize).unwrap();
        let rep = row_sum_evidence(&f, lam, 1, 3, n).unwrap();
        let top = rep.blocks.last().unwrap();
        let direct = (top.lo..=top.hi)
            .map(|i| {
                (1..i)
                    .map(|j| {
                        let w = (f.log_v(3, i).unwrap() - f.log_v(1, j).unwrap()).exp();
                        w * e.get(i as usize, j as usize).norm()
                    })
                    .sum::<f64>()
                    .ln()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((direct - top.log_max).abs() < 1e-9, "{direct} {}", top.log_max);
    }

    #[test]
    fn evidence_argument_errors() {
        let f = gallery("remark-4.4", &GalleryParams::new()).unwrap();
        let z = Complex64::new(0.5, 0.5);
        assert!(matches!(row_sum_evidence(&f, z, 2, 2, 256), Err(SpectraError::Indices { .. })));
        assert!(matches!(row_sum_evidence(&f, z, 1, 2, 300), Err(SpectraError::Dimension(300))));
        assert!(matches!(
            row_sum_evidence(&f, Complex64::new(0.25, 0.0), 1, 2, 256),
            Err(SpectraError::Shift(SectionsError::Singular { k: 4 }))
        ));
    }

    fn small_rational() -> impl Strategy<Value = BigRational> {
        (-40i64..=40, 1i64..=12).prop_map(|(p, q)| BigRational::new(p.into(), q.into()))
    }

    proptest! {
        #[test]
        fn sandwich(re in small_rational(), im in small_rational()) {
            let l = Lambda::exact(re, im);
            let closed = member_shape(Shape::DiskClosed, &l).contained();
            for s in shapes() {
                let m = member_shape(s, &l).contained();
                if l.in_sigma() {
                    prop_assert!(m);
                }
                if m {
                    prop_assert!(closed);
                }
            }
        }

        #[test]
        fn conjugation_invariant(re in small_rational(), im in small_rational()) {
            let l = Lambda::exact(re, im);
            for s in shapes() {
                prop_assert_eq!(member_shape(s, &l), member_shape(s, &l.conj()));
            }
        }

        #[test]
        fn boundary_walk(re in small_rational(), im in small_rational(), t in small_rational()) {
            // 1/lambda -> 1/lambda + i t keeps Re(1/lambda)
            let l = Lambda::exact(re, im);
            prop_assume!(!l.is_zero() && !l.is_one() && !t.is_zero());
            let (a, b) = l.exact_recip().unwrap();
            let b2 = &b + &t;
            prop_assume!(!(a.is_zero() && b2.is_zero()));
            let d = &a * &a + &b2 * &b2;
            let walked = Lambda::exact(&a / &d, -&b2 / &d);
            prop_assume!(!walked.is_one());
            for s in [Shape::DiskOpenPlusEndpoints, Shape::DiskClosed] {
                prop_assert_eq!(member_shape(s, &l), member_shape(s, &walked));
            }
            if !b2.is_zero() && !b.is_zero() {
                prop_assert_eq!(
                    member_shape(Shape::NuclearSigma, &l),
                    member_shape(Shape::NuclearSigma, &walked)
                );
            }
        }
    }
}
