//! Power boundedness and mean ergodicity of `C` on truncated vectors, and the
//! exact inverse of `I - C` on the hyperplane `x_1 = 0`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::criteria::{log_trend, Trend};
use crate::sections::{cesaro, Kind, TriMatrix};
use crate::weightlang::EvalError;
use crate::weights::{WeightFamily, WeightedVector};

/// Relative slack allowed in `q_n(C^k x) <= q_n(x)`.
pub const POWER_SLACK: f64 = 1e-12;
/// Tail mass `v_n(N) max|x|` must stay below this fraction of `q_n(x)`.
pub const GUARD_RATIO: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(
        "truncation too short: v_n(N) max|x| = {tail:.3e} is not below {GUARD_RATIO:e} q_n(x) = {allowed:.3e} (N = {len}, n = {n})"
    )]
    Guard {
        len: usize,
        n: u64,
        tail: f64,
        allowed: f64,
    },
    #[error("zero vector")]
    ZeroVector,
    #[error("k schedule must be non-empty and strictly increasing from 1")]
    Schedule,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicReport {
    pub n: u64,
    #[serde(rename = "N")]
    pub len: usize,
    pub k_schedule: Vec<u64>,
    /// `q_n(T_[k] x - x_1 1)`; empty for a pure power-bound run.
    pub distances: Vec<f64>,
    /// `q_n(C^k x) / q_n(x)` at each scheduled `k`.
    pub norm_ratios: Vec<f64>,
    pub bound_violations: usize,
}

impl ErgodicReport {
    /// Nonincreasing from the middle of the schedule on.
    pub fn eventually_decreasing(&self) -> bool {
        let d = &self.distances;
        d.len() >= 2 && d[d.len() / 2..].windows(2).all(|w| w[1] <= w[0])
    }

    /// Last distance at most half the first.
    pub fn halved(&self) -> bool {
        match (self.distances.first(), self.distances.last()) {
            (Some(&a), Some(&b)) => b <= a / 2.0,
            _ => false,
        }
    }

    pub fn converged(&self) -> bool {
        self.eventually_decreasing() && self.halved()
    }

    /// `k,distance,norm_ratio` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,distance,norm_ratio\n");
        for (idx, k) in self.k_schedule.iter().enumerate() {
            let d = self
                .distances
                .get(idx)
                .map(|d| d.to_string())
                .unwrap_or_default();
            s.push_str(&format!("{k},{d},{}\n", self.norm_ratios[idx]));
        }
        s
    }
}

/// `log v_n(i)` for `i = 1..=len`.
fn log_weights(family: &WeightFamily, n: u64, len: usize) -> Result<Vec<f64>, EvalError> {
    (1..=len as u64).map(|i| family.log_v(n, i)).collect()
}

fn log_q(lv: &[f64], x: &[Complex64]) -> f64 {
    x.iter()
        .zip(lv)
        .filter(|(z, _)| !z.is_zero())
        .map(|(z, w)| w + z.norm().ln())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Enforces `v_n(N) max|x| < 1e-15 q_n(x)`.
pub fn check_guard(family: &WeightFamily, n: u64, x: &[Complex64]) -> Result<(), DynamicsError> {
    let lv = log_weights(family, n, x.len())?;
    guard(&lv, n, x)
}

fn guard(lv: &[f64], n: u64, x: &[Complex64]) -> Result<(), DynamicsError> {
    let lq = log_q(lv, x);
    if lq == f64::NEG_INFINITY {
        return Err(DynamicsError::ZeroVector);
    }
    let max = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let log_tail = lv[lv.len() - 1] + max.ln();
    let log_allowed = GUARD_RATIO.ln() + lq;
    if log_tail < log_allowed {
        Ok(())
    } else {
        Err(DynamicsError::Guard {
            len: x.len(),
            n,
            tail: log_tail.exp(),
            allowed: log_allowed.exp(),
        })
    }
}

/// One application of `C` by running sums.
pub fn cesaro_step(x: &[Complex64]) -> Vec<Complex64> {
    let mut s = Complex64::zero();
    x.iter()
        .enumerate()
        .map(|(k, z)| {
            s += z;
            s / (k + 1) as f64
        })
        .collect()
}

/// `q_n(C^k x) <= q_n(x)(1 + 1e-12)` for `k = 1..=k_max`.
pub fn power_bound_check(
    family: &WeightFamily,
    n: u64,
    x: &WeightedVector,
    k_max: u64,
) -> Result<ErgodicReport, DynamicsError> {
    let lv = log_weights(family, n, x.len())?;
    guard(&lv, n, x.entries())?;
    let lq0 = log_q(&lv, x.entries());
    let limit = lq0 + POWER_SLACK.ln_1p();
    let mut y = x.entries().to_vec();
    let mut ratios = Vec::with_capacity(k_max as usize);
    let mut violations = 0;
    for _ in 0..k_max {
        y = cesaro_step(&y);
        let lq = log_q(&lv, &y);
        if lq > limit {
            violations += 1;
        }
        ratios.push((lq - lq0).exp());
    }
    Ok(ErgodicReport {
        n,
        len: x.len(),
        k_schedule: (1..=k_max).collect(),
        distances: Vec::new(),
        norm_ratios: ratios,
        bound_violations: violations,
    })
}

/// Distances `q_n(T_[k] x - x_1 1)` of the Cesaro means
/// `T_[k] x = (1/k) sum_{j=1..k} C^j x` along `k_schedule`.
pub fn cesaro_means(
    family: &WeightFamily,
    n: u64,
    x: &WeightedVector,
    k_schedule: &[u64],
) -> Result<ErgodicReport, DynamicsError> {
    if k_schedule.is_empty()
        || k_schedule[0] == 0
        || k_schedule.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(DynamicsError::Schedule);
    }
    let lv = log_weights(family, n, x.len())?;
    guard(&lv, n, x.entries())?;
    let lq0 = log_q(&lv, x.entries());
    let limit = lq0 + POWER_SLACK.ln_1p();
    let x1 = x.entries()[0];
    let mut y = x.entries().to_vec();
    let mut sum = vec![Complex64::zero(); x.len()];
    let mut distances = Vec::with_capacity(k_schedule.len());
    let mut ratios = Vec::with_capacity(k_schedule.len());
    let mut violations = 0;
    let mut next = 0;
    for k in 1..=*k_schedule.last().unwrap() {
        y = cesaro_step(&y);
        for (s, v) in sum.iter_mut().zip(&y) {
            *s += v;
        }
        let lq = log_q(&lv, &y);
        if lq > limit {
            violations += 1;
        }
        if k == k_schedule[next] {
            let diff: Vec<Complex64> = sum.iter().map(|s| s / k as f64 - x1).collect();
            distances.push(log_q(&lv, &diff).exp());
            ratios.push((lq - lq0).exp());
            next += 1;
        }
    }
    Ok(ErgodicReport {
        n,
        len: x.len(),
        k_schedule: k_schedule.to_vec(),
        distances,
        norm_ratios: ratios,
        bound_violations: violations,
    })
}

/// `2^lo, ..., 2^hi`.
pub fn dyadic_schedule(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

/// `x = x_1 1 + (x - x_1 1)`; the second part has first coordinate 0.
pub fn decompose(x: &[BigRational]) -> (BigRational, Vec<BigRational>) {
    let x1 = x.first().cloned().unwrap_or_else(BigRational::zero);
    let rest = x.iter().map(|v| v - &x1).collect();
    (x1, rest)
}

pub fn reassemble(x1: &BigRational, rest: &[BigRational]) -> Vec<BigRational> {
    rest.iter().map(|v| v + x1).collect()
}

// ---------------------------------------------------------------- range inverse

/// `T = S (I - C) S^-1` on `{x_1 = 0}` in shifted coordinates `y_i = x_(i+1)`:
/// `T_ii = i/(i+1)`, `T_ij = -1/(i+1)` for `j < i`.
pub fn shifted_difference(n: usize) -> TriMatrix {
    let c = cesaro(n + 1, Kind::Exact);
    TriMatrix::from_exact_fn(n, "S(I-C)S^-1", |i, j| {
        let cij = c.get_exact(i + 1, j + 1).unwrap();
        if i == j {
            BigRational::one() - cij
        } else {
            -cij
        }
    })
}

/// `b_ij = 1/j` for `j < i`, `(i+1)/i` on the diagonal.
pub fn range_inverse(n: usize) -> TriMatrix {
    TriMatrix::from_exact_fn(n, "B", |i, j| {
        let (p, q) = if i == j { (i + 1, i) } else { (1, j) };
        BigRational::new((p as i64).into(), (q as i64).into())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeInverseReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub tb_identity: bool,
    pub bt_identity: bool,
}

impl RangeInverseReport {
    pub fn passed(&self) -> bool {
        self.tb_identity && self.bt_identity
    }
}

/// `T B = B T = I_N` in exact arithmetic.
pub fn range_inverse_check(n: usize) -> RangeInverseReport {
    let t = shifted_difference(n);
    let b = range_inverse(n);
    RangeInverseReport {
        n,
        tb_identity: t.mul(&b).map(|p| p.is_identity()).unwrap_or(false),
        bt_identity: b.mul(&t).map(|p| p.is_identity()).unwrap_or(false),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSumBound {
    pub n: u64,
    pub m: u64,
    #[serde(rename = "N")]
    pub len: usize,
    /// `max_i` of the scaled row sum over its bound (at most 1 when the bound holds).
    pub worst_ratio: f64,
    pub within_bound: bool,
    /// Trend of the bound `(v_m(i+1)/v_n(i+1)) (3 + ln i)` itself.
    pub bound_trend: Trend,
}

/// Scaled rows of `B`: `sum_j |b_ij| v_m(i+1)/v_n(j+1)` against
/// `(v_m(i+1)/v_n(i+1)) (3 + ln i)`.
pub fn range_inverse_row_sums(
    family: &WeightFamily,
    n: u64,
    m: u64,
    len: usize,
) -> Result<RowSumBound, DynamicsError> {
    let lvn = log_weights(family, n, len + 1)?;
    let lvm = log_weights(family, m, len + 1)?;
    let mut worst = f64::NEG_INFINITY;
    let mut acc = crate::weights::LogSumExp::new();
    let mut log_bounds = Vec::with_capacity(len);
    for i in 1..=len {
        // columns j < i carry 1/j; the diagonal carries (i+1)/i
        let row = {
            let mut r = acc;
            r.push(((i + 1) as f64 / i as f64).ln() - lvn[i]);
            r.value()
        };
        let log_sum = lvm[i] + row;
        let log_bound = lvm[i] - lvn[i] + (3.0 + (i as f64).ln()).ln();
        worst = worst.max(log_sum - log_bound);
        log_bounds.push(log_bound);
        acc.push(-(i as f64).ln() - lvn[i]);
    }
    let i_max = (len as u64).next_power_of_two().max(64);
    let bound_trend = if len as u64 == i_max {
        log_trend(i_max, |i| log_bounds[i as usize - 1]).classification
    } else {
        Trend::Inconclusive
    };
    Ok(RowSumBound {
        n,
        m,
        len,
        worst_ratio: worst.exp(),
        within_bound: worst <= 1e-12,
        bound_trend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sections::rational_to_f64;
    use crate::weights::{gallery, GalleryParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fam(k: &str) -> WeightFamily {
        gallery(k, &GalleryParams::new()).unwrap()
    }

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn ones_fixed() {
        let f = fam("remark-3.9");
        let x = WeightedVector::ones(64);
        let r = power_bound_check(&f, 1, &x, 16).unwrap();
        assert_eq!(r.bound_violations, 0);
        assert!(r.norm_ratios.iter().all(|&t| t == 1.0));
        assert_eq!(cesaro_step(x.entries()), x.entries().to_vec());
        let m = cesaro_means(&f, 1, &x, &[1, 2, 4]).unwrap();
        assert!(m.distances.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn unit_vector_iterates() {
        let f = fam("remark-3.9");
        let x = WeightedVector::unit(1, 64);
        let y = cesaro_step(x.entries());
        for (k, z) in y.iter().enumerate() {
            assert_eq!(*z, Complex64::new(1.0 / (k + 1) as f64, 0.0));
        }
        let r = power_bound_check(&f, 1, &x, 32).unwrap();
        assert_eq!(r.bound_violations, 0);
        assert!(r.norm_ratios.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn guard_rejects_short_truncation() {
        let f = fam("remark-4.4");
        let x = WeightedVector::unit(1, 1 << 10);
        assert!(matches!(
            power_bound_check(&f, 1, &x, 4),
            Err(DynamicsError::Guard { .. })
        ));
        assert!(power_bound_check(&f, 40, &WeightedVector::unit(1, 1 << 14), 4).is_ok());
    }

    #[test]
    fn random_vectors_remark_39() {
        let f = fam("remark-3.9");
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: Vec<Complex64> = (0..64)
                .map(|_| Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * std::f64::consts::TAU))
                .collect();
            let r = power_bound_check(&f, 1, &WeightedVector::new(x).unwrap(), 64).unwrap();
            assert_eq!(r.bound_violations, 0);
        }
    }

    #[test]
    fn means_unit_vector() {
        let f = fam("remark-3.9");
        let r = cesaro_means(&f, 1, &WeightedVector::unit(1, 64), &dyadic_schedule(4, 11)).unwrap();
        assert!(r.converged(), "{:?}", r.distances);
        assert_eq!(r.bound_violations, 0);
        assert_eq!(r.to_csv().lines().count(), 9);
    }

    #[test]
    fn means_on_range_component() {
        // x_1 = 0: the means tend to the zero vector
        let f = fam("remark-3.9");
        let x = WeightedVector::unit(2, 64);
        let r = cesaro_means(&f, 1, &x, &dyadic_schedule(2, 10)).unwrap();
        assert!(r.converged());
    }

    #[test]
    fn bad_schedule() {
        let f = fam("remark-3.9");
        let x = WeightedVector::ones(64);
        assert_eq!(cesaro_means(&f, 1, &x, &[]), Err(DynamicsError::Schedule));
        assert_eq!(cesaro_means(&f, 1, &x, &[4, 2]), Err(DynamicsError::Schedule));
    }

    #[test]
    fn range_inverse_small() {
        let t = shifted_difference(2);
        assert_eq!(t.get_exact(1, 1).unwrap(), q(1, 2));
        assert_eq!(t.get_exact(2, 1).unwrap(), q(-1, 3));
        assert_eq!(t.get_exact(2, 2).unwrap(), q(2, 3));
        assert!(range_inverse_check(2).passed());
        assert!(range_inverse_check(50).passed());
    }

    #[test]
    fn row_sum_bound_remark_44() {
        let r = range_inverse_row_sums(&fam("remark-4.4"), 1, 2, 1 << 12).unwrap();
        assert!(r.within_bound, "{}", r.worst_ratio);
        assert!(r.bound_trend.is_bounded(), "{:?}", r.bound_trend);
    }

    #[test]
    fn row_sum_matches_direct() {
        // oracle: dense rational B with explicit weights
        let f = fam("remark-3.9");
        let len = 12;
        let b = range_inverse(len);
        let r = range_inverse_row_sums(&f, 1, 2, len).unwrap();
        let mut worst = 0.0f64;
        for i in 1..=len {
            let vm = f.log_v(2, i as u64 + 1).unwrap().exp();
            let s: f64 = (1..=i)
                .map(|j| {
                    rational_to_f64(&b.get_exact(i, j).unwrap())
                        * vm
                        / f.log_v(1, j as u64 + 1).unwrap().exp()
                })
                .sum();
            let bound = vm / f.log_v(1, i as u64 + 1).unwrap().exp() * (3.0 + (i as f64).ln());
            worst = worst.max(s / bound);
        }
        assert!((worst - r.worst_ratio).abs() < 1e-12 * worst);
    }

    proptest! {
        #[test]
        fn decomposition_exact(xs in prop::collection::vec((-50i64..50, 1i64..9), 1..20)) {
            let x: Vec<BigRational> = xs.iter().map(|&(p, d)| q(p, d)).collect();
            let (x1, rest) = decompose(&x);
            prop_assert!(rest[0].is_zero());
            prop_assert_eq!(reassemble(&x1, &rest), x);
        }

        #[test]
        fn power_bound_random(seed in any::<u64>()) {
            let f = fam("remark-3.9");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<Complex64> = (0..64)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let r = power_bound_check(&f, 2, &WeightedVector::new(x).unwrap(), 16).unwrap();
            prop_assert_eq!(r.bound_violations, 0);
        }
    }
}
