//! Finite N-sections of lower-triangular matrices.
//!
//! For lower-triangular infinite matrices the N-section of a product is the
//! product of the N-sections, so every identity below is checked exactly in the
//! rational kind. Indices in the public API are 1-based.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;
use twofloat::TwoFloat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Exact,
    Double,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Exact => "exact",
            Kind::Double => "double",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SectionsError {
    #[error("mu must be finite, got {0}")]
    NonFinite(Complex64),
    #[error("mu = 0 is a spectral point of every section's limit")]
    ZeroShift,
    #[error("singular mu: 1 - 1/(k mu) = 0 at k = {k}")]
    Singular { k: u64 },
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("scalar kinds differ ({left} vs {right})")]
    KindMismatch { left: &'static str, right: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
enum Store {
    Exact(Vec<BigRational>),
    Double(Vec<Complex64>),
}

/// N x N lower-triangular matrix, packed by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMatrix {
    n: usize,
    recipe: String,
    store: Store,
}

fn packed(n: usize) -> usize {
    n * (n + 1) / 2
}

fn idx(i: usize, j: usize) -> usize {
    (i - 1) * i / 2 + (j - 1)
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn int(p: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl TriMatrix {
    /// Exact matrix from `f(i, j)` for `j <= i`.
    pub fn from_exact_fn(
        n: usize,
        recipe: &str,
        mut f: impl FnMut(usize, usize) -> BigRational,
    ) -> Self {
        let mut v = Vec::with_capacity(packed(n));
        for i in 1..=n {
            for j in 1..=i {
                v.push(f(i, j));
            }
        }
        TriMatrix {
            n,
            recipe: recipe.to_string(),
            store: Store::Exact(v),
        }
    }

    pub fn from_double_fn(
        n: usize,
        recipe: &str,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut v = Vec::with_capacity(packed(n));
        for i in 1..=n {
            for j in 1..=i {
                v.push(f(i, j));
            }
        }
        TriMatrix {
            n,
            recipe: recipe.to_string(),
            store: Store::Double(v),
        }
    }

    fn from_rule(
        n: usize,
        kind: Kind,
        recipe: &str,
        f: impl Fn(usize, usize) -> BigRational,
    ) -> Self {
        let m = Self::from_exact_fn(n, recipe, f);
        match kind {
            Kind::Exact => m,
            Kind::Double => m.to_double(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> Kind {
        match self.store {
            Store::Exact(_) => Kind::Exact,
            Store::Double(_) => Kind::Double,
        }
    }

    pub fn recipe(&self) -> &str {
        &self.recipe
    }

    pub fn with_recipe(mut self, recipe: &str) -> Self {
        self.recipe = recipe.to_string();
        self
    }

    /// Entry `(i, j)`, zero above the diagonal. Exact entries are rounded.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i >= 1 && j >= 1 && i <= self.n && j <= self.n, "index out of range");
        if j > i {
            return Complex64::zero();
        }
        match &self.store {
            Store::Exact(v) => c64(rational_to_f64(&v[idx(i, j)])),
            Store::Double(v) => v[idx(i, j)],
        }
    }

    /// Exact entry; `None` for the double kind.
    pub fn get_exact(&self, i: usize, j: usize) -> Option<BigRational> {
        assert!(i >= 1 && j >= 1 && i <= self.n && j <= self.n, "index out of range");
        match &self.store {
            Store::Exact(v) if j <= i => Some(v[idx(i, j)].clone()),
            Store::Exact(_) => Some(BigRational::zero()),
            Store::Double(_) => None,
        }
    }

    pub fn to_double(&self) -> TriMatrix {
        match &self.store {
            Store::Double(_) => self.clone(),
            Store::Exact(v) => TriMatrix {
                n: self.n,
                recipe: self.recipe.clone(),
                store: Store::Double(v.iter().map(|x| c64(rational_to_f64(x))).collect()),
            },
        }
    }

    fn check_compatible(&self, rhs: &TriMatrix) -> Result<(), SectionsError> {
        if self.n != rhs.n {
            return Err(SectionsError::Dimension {
                left: self.n,
                right: rhs.n,
            });
        }
        if self.kind() != rhs.kind() {
            return Err(SectionsError::KindMismatch {
                left: self.kind().name(),
                right: rhs.kind().name(),
            });
        }
        Ok(())
    }

    /// Product of sections; zero entries of either factor are skipped.
    pub fn mul(&self, rhs: &TriMatrix) -> Result<TriMatrix, SectionsError> {
        self.check_compatible(rhs)?;
        let n = self.n;
        let recipe = format!("{}*{}", self.recipe, rhs.recipe);
        let store = match (&self.store, &rhs.store) {
            (Store::Exact(a), Store::Exact(b)) => {
                let rows = nonzero_cols(n, |k| b[k].is_zero());
                let mut out = vec![BigRational::zero(); packed(n)];
                for i in 1..=n {
                    for k in 1..=i {
                        let aik = &a[idx(i, k)];
                        if aik.is_zero() {
                            continue;
                        }
                        for &j in &rows[k - 1] {
                            out[idx(i, j)] += aik * &b[idx(k, j)];
                        }
                    }
                }
                Store::Exact(out)
            }
            (Store::Double(a), Store::Double(b)) => {
                let rows = nonzero_cols(n, |k| b[k].is_zero());
                let mut out = vec![Complex64::zero(); packed(n)];
                for i in 1..=n {
                    for k in 1..=i {
                        let aik = a[idx(i, k)];
                        if aik.is_zero() {
                            continue;
                        }
                        for &j in &rows[k - 1] {
                            out[idx(i, j)] += aik * b[idx(k, j)];
                        }
                    }
                }
                Store::Double(out)
            }
            _ => unreachable!(),
        };
        Ok(TriMatrix { n, recipe, store })
    }

    /// `self - c I`.
    pub fn shift(&self, c: Complex64) -> TriMatrix {
        let mut out = self.to_double();
        if let Store::Double(v) = &mut out.store {
            for i in 1..=self.n {
                v[idx(i, i)] -= c;
            }
        }
        out.recipe = format!("({} - mu I)", self.recipe);
        out
    }

    /// Same entries, ignoring recipe. Exact kinds compare exactly.
    pub fn same_entries(&self, other: &TriMatrix) -> bool {
        self.n == other.n && self.store == other.store
    }

    /// `max |self_ij - other_ij|`.
    pub fn max_abs_diff(&self, other: &TriMatrix) -> Result<f64, SectionsError> {
        if self.n != other.n {
            return Err(SectionsError::Dimension {
                left: self.n,
                right: other.n,
            });
        }
        let mut worst = 0.0f64;
        match (&self.store, &other.store) {
            (Store::Exact(a), Store::Exact(b)) => {
                for (x, y) in a.iter().zip(b) {
                    if x != y {
                        worst = worst.max(rational_to_f64(&(x - y)).abs());
                    }
                }
            }
            _ => {
                for i in 1..=self.n {
                    for j in 1..=i {
                        worst = worst.max((self.get(i, j) - other.get(i, j)).norm());
                    }
                }
            }
        }
        Ok(worst)
    }

    pub fn is_identity(&self) -> bool {
        match &self.store {
            Store::Exact(v) => (1..=self.n).all(|i| {
                (1..=i).all(|j| {
                    let x = &v[idx(i, j)];
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            }),
            Store::Double(_) => self.identity_error() == 0.0,
        }
    }

    /// `max |self - I|`.
    pub fn identity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..=self.n {
            for j in 1..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - target).norm());
            }
        }
        worst
    }

    /// `A x` over the rationals; `None` for the double kind or a length mismatch.
    pub fn apply_exact(&self, x: &[BigRational]) -> Option<Vec<BigRational>> {
        let Store::Exact(v) = &self.store else {
            return None;
        };
        if x.len() != self.n {
            return None;
        }
        let mut out = Vec::with_capacity(self.n);
        for i in 1..=self.n {
            let mut s = BigRational::zero();
            for j in 1..=i {
                let a = &v[idx(i, j)];
                if !a.is_zero() && !x[j - 1].is_zero() {
                    s += a * &x[j - 1];
                }
            }
            out.push(s);
        }
        Some(out)
    }

    pub fn apply(&self, x: &[Complex64]) -> Option<Vec<Complex64>> {
        if x.len() != self.n {
            return None;
        }
        let d = self.to_double();
        let Store::Double(v) = &d.store else {
            unreachable!()
        };
        Some(
            (1..=self.n)
                .map(|i| (1..=i).map(|j| v[idx(i, j)] * x[j - 1]).sum())
                .collect(),
        )
    }

    /// Dense row-major CSV. Exact entries print as `p/q`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 1..=self.n {
            for j in 1..=self.n {
                if j > 1 {
                    s.push(',');
                }
                match &self.store {
                    Store::Exact(v) => {
                        if j <= i {
                            let _ = write!(s, "{}", v[idx(i, j)]);
                        } else {
                            s.push('0');
                        }
                    }
                    Store::Double(_) => s.push_str(&format_complex(self.get(i, j))),
                }
            }
            s.push('\n');
        }
        s
    }

    /// `{N, kind, recipe, entries: [[i, j, re, im], ...]}` over nonzero entries.
    pub fn to_json(&self) -> serde_json::Value {
        let mut entries = Vec::new();
        for i in 1..=self.n {
            for j in 1..=i {
                let z = self.get(i, j);
                let nonzero = match &self.store {
                    Store::Exact(v) => !v[idx(i, j)].is_zero(),
                    Store::Double(_) => !z.is_zero(),
                };
                if nonzero {
                    entries.push(json!([i, j, z.re, z.im]));
                }
            }
        }
        json!({
            "N": self.n,
            "kind": self.kind().name(),
            "recipe": self.recipe,
            "entries": entries,
        })
    }
}

/// Per row `k`, the columns `j <= k` whose entry is nonzero.
fn nonzero_cols(n: usize, is_zero: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    (1..=n)
        .map(|k| (1..=k).filter(|&j| !is_zero(idx(k, j))).collect())
        .collect()
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

// ---------------------------------------------------------------- builders

pub fn identity(n: usize, kind: Kind) -> TriMatrix {
    TriMatrix::from_rule(n, kind, "I", |i, j| if i == j { int(1) } else { int(0) })
}

/// Row averages: `1/i` for `j <= i`.
pub fn cesaro(n: usize, kind: Kind) -> TriMatrix {
    TriMatrix::from_rule(n, kind, "C", |i, _| rat(1, i as i64))
}

/// Bidiagonal: `i` on the diagonal, `-(i-1)` below it.
pub fn inverse(n: usize, kind: Kind) -> TriMatrix {
    TriMatrix::from_rule(n, kind, "C^-1", |i, j| {
        if i == j {
            int(i as i64)
        } else if j + 1 == i {
            int(-(j as i64))
        } else {
            int(0)
        }
    })
}

pub fn right_shift(n: usize, kind: Kind) -> TriMatrix {
    TriMatrix::from_rule(n, kind, "S_r", |i, j| if j + 1 == i { int(1) } else { int(0) })
}

pub fn diag_recip(n: usize, kind: Kind) -> TriMatrix {
    TriMatrix::from_rule(n, kind, "diag(1/i)", |i, j| {
        if i == j {
            rat(1, i as i64)
        } else {
            int(0)
        }
    })
}

/// Signed binomials `(-1)^(j-1) binom(i-1, j-1)`; an involution.
pub fn delta(n: usize, kind: Kind) -> TriMatrix {
    let mut pascal: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for r in 0..n {
        let mut row = vec![BigInt::one(); r + 1];
        for c in 1..r {
            row[c] = &pascal[r - 1][c - 1] + &pascal[r - 1][c];
        }
        pascal.push(row);
    }
    TriMatrix::from_rule(n, kind, "Delta", |i, j| {
        let b = pascal[i - 1][j - 1].clone();
        let b = if (j - 1) % 2 == 1 { -b } else { b };
        BigRational::from_integer(b)
    })
}

/// `(S_r x)`: prepend a zero; the result is one longer.
pub fn shift_apply(x: &[BigRational]) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(BigRational::zero());
    out.extend(x.iter().cloned());
    out
}

/// Formal differentiation `D(x)_i = i x_(i+1)`; the result is one shorter.
pub fn diff_apply(x: &[BigRational]) -> Vec<BigRational> {
    (1..x.len()).map(|i| &x[i] * int(i as i64)).collect()
}

/// `(I - S_r) y` truncated to the length of `y`.
pub fn backward_difference(y: &[BigRational]) -> Vec<BigRational> {
    (0..y.len())
        .map(|k| {
            if k == 0 {
                y[0].clone()
            } else {
                &y[k] - &y[k - 1]
            }
        })
        .collect()
}

/// `(I - S_r) D S_r x` on untruncated intermediates (one buffer coordinate).
pub fn composed_apply(x: &[BigRational]) -> Vec<BigRational> {
    backward_difference(&diff_apply(&shift_apply(x)))
}

/// The N-section of `(I - S_r) D S_r`, column by column on `e_1..e_N`.
pub fn composed_inverse(n: usize) -> TriMatrix {
    let cols: Vec<Vec<BigRational>> = (1..=n).map(|j| composed_apply(&unit(j, n))).collect();
    TriMatrix::from_exact_fn(n, "(I-S_r)DS_r", |i, j| cols[j - 1][i - 1].clone())
}

pub fn unit(k: usize, n: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); n];
    v[k - 1] = BigRational::one();
    v
}

// ---------------------------------------------------------------- resolvent

type Cdd = Complex<TwoFloat>;

fn cdd(z: Complex64) -> Cdd {
    Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

fn dd_int(k: u64) -> Cdd {
    Complex::new(TwoFloat::from(k as f64), TwoFloat::from(0.0))
}

/// `a / b` by long division; the crate's own quotient drops the low word.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

fn cdiv(a: Cdd, b: Cdd) -> Cdd {
    let den = b.re * b.re + b.im * b.im;
    let re = a.re * b.re + a.im * b.im;
    let im = a.im * b.re - a.re * b.im;
    Complex::new(dd_div(re, den), dd_div(im, den))
}

fn round(z: Cdd) -> Complex64 {
    Complex64::new(f64::from(z.re), f64::from(z.im))
}

fn scale_dd(z: Cdd, s: f64) -> Cdd {
    Complex::new(z.re * s, z.im * s)
}

/// `x * 2^e` for any `e`.
fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

const SINGULAR_TOL: f64 = 1e-12;

/// Rejects non-finite `mu`, `mu = 0` and `mu = 1/k`.
pub fn check_shift(mu: Complex64) -> Result<(), SectionsError> {
    if !mu.re.is_finite() || !mu.im.is_finite() {
        return Err(SectionsError::NonFinite(mu));
    }
    if mu.is_zero() {
        return Err(SectionsError::ZeroShift);
    }
    if mu.im == 0.0 && mu.re > 0.0 {
        let k = (1.0 / mu.re).round();
        if k >= 1.0 && (k * mu.re - 1.0).abs() <= SINGULAR_TOL {
            return Err(SectionsError::Singular { k: k as u64 });
        }
    }
    Ok(())
}

/// Factors `1 - 1/(k mu)` for `k = 1..=n`, double-double.
fn factors(mu: Complex64, n: usize) -> Vec<Cdd> {
    let one = dd_int(1);
    let m = cdd(mu);
    (1..=n as u64).map(|k| one - cdiv(one, dd_int(k) * m)).collect()
}

/// Product kept as `z * 2^e`, renormalised when `|z|` leaves `[1e-300, 1e300]`.
#[derive(Clone, Copy)]
struct ScaledProduct {
    z: Cdd,
    e: i32,
}

impl ScaledProduct {
    fn new(z: Cdd) -> Self {
        let mut p = ScaledProduct { z, e: 0 };
        p.renorm();
        p
    }

    fn mul(&mut self, f: Cdd) {
        self.z *= f;
        self.renorm();
    }

    fn renorm(&mut self) {
        let m = self.z.re.hi().abs().max(self.z.im.hi().abs());
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            let k = m.log2().round() as i32;
            self.z = scale_dd(self.z, 2f64.powi(-k));
            self.e += k;
        }
    }

    /// `1 / (i * product)` rounded to double.
    fn recip_times(&self, i: u64) -> Complex64 {
        let r = round(cdiv(dd_int(1), dd_int(i) * self.z));
        Complex64::new(ldexp(r.re, -self.e), ldexp(r.im, -self.e))
    }
}

/// `mu^-2`, correctly rounded.
pub fn inv_mu_squared(mu: Complex64) -> Complex64 {
    let m = cdd(mu);
    round(cdiv(dd_int(1), m * m))
}

/// `(D_mu, E_mu)`: `d_ii = 1/(1/i - mu)`,
/// `e_ij = 1/(i prod_{k=j..i} (1 - 1/(k mu)))` for `1 <= j < i`.
pub fn split(mu: Complex64, n: usize) -> Result<(TriMatrix, TriMatrix), SectionsError> {
    check_shift(mu)?;
    let f = factors(mu, n);
    let m = cdd(mu);
    let diag: Vec<Complex64> = (1..=n as u64)
        .map(|i| round(cdiv(dd_int(1), cdiv(dd_int(1), dd_int(i)) - m)))
        .collect();
    let mut e = vec![Complex64::zero(); packed(n)];
    for i in 2..=n {
        let mut p = ScaledProduct::new(f[i - 1]);
        for j in (1..i).rev() {
            p.mul(f[j - 1]);
            e[idx(i, j)] = p.recip_times(i as u64);
        }
    }
    let d = TriMatrix::from_double_fn(n, "D_mu", |i, j| {
        if i == j {
            diag[i - 1]
        } else {
            Complex64::zero()
        }
    });
    let e = TriMatrix {
        n,
        recipe: "E_mu".into(),
        store: Store::Double(e),
    };
    Ok((d, e))
}

/// `D_mu - mu^-2 E_mu`, with `mu^-2` rounded once.
pub fn reconstruct(mu: Complex64, d: &TriMatrix, e: &TriMatrix) -> Result<TriMatrix, SectionsError> {
    d.check_compatible(e)?;
    let m2 = inv_mu_squared(mu);
    Ok(TriMatrix::from_double_fn(d.n, "(C - mu I)^-1", |i, j| {
        if i == j {
            d.get(i, i)
        } else {
            -(m2 * e.get(i, j))
        }
    }))
}

/// `(C - mu I)^-1` on the N-section.
pub fn resolvent(mu: Complex64, n: usize) -> Result<TriMatrix, SectionsError> {
    let (d, e) = split(mu, n)?;
    reconstruct(mu, &d, &e)
}

/// `max |(C - mu I) R - I|` with the double section of `C`, every product
/// formed exactly and the sums in double-double.
pub fn resolvent_residual(mu: Complex64, r: &TriMatrix) -> f64 {
    let n = r.dim();
    let zero = TwoFloat::from(0.0);
    let mut worst = 0.0f64;
    for j in 1..=n {
        let mut col_re = zero;
        let mut col_im = zero;
        for i in j..=n {
            let rij = r.get(i, j);
            col_re += TwoFloat::from(rij.re);
            col_im += TwoFloat::from(rij.im);
            let c = 1.0 / i as f64;
            // c * sum_k r_kj, split into exact products of the two words
            let mut re = TwoFloat::new_mul(c, col_re.hi()) + TwoFloat::new_mul(c, col_re.lo());
            let mut im = TwoFloat::new_mul(c, col_im.hi()) + TwoFloat::new_mul(c, col_im.lo());
            re -= TwoFloat::new_mul(mu.re, rij.re) - TwoFloat::new_mul(mu.im, rij.im);
            im -= TwoFloat::new_mul(mu.re, rij.im) + TwoFloat::new_mul(mu.im, rij.re);
            if i == j {
                re -= 1.0;
            }
            worst = worst.max(Complex64::new(f64::from(re), f64::from(im)).norm());
        }
    }
    worst
}

// ---------------------------------------------------------------- eigenvectors

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Direct,
    Dual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigVec {
    pub entries: Vec<BigRational>,
    pub eigenvalue: BigRational,
    pub side: Side,
}

impl EigVec {
    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rational_to_f64).collect()
    }

    /// Applies `C` (direct) or `C'` (dual) and compares with `eigenvalue * x` exactly.
    pub fn verify(&self) -> bool {
        let image = match self.side {
            Side::Direct => cesaro(self.entries.len(), Kind::Exact)
                .apply_exact(&self.entries)
                .expect("exact kind"),
            Side::Dual => dual_apply(&self.entries),
        };
        image
            .iter()
            .zip(&self.entries)
            .all(|(y, x)| *y == x * &self.eigenvalue)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "side": self.side,
            "eigenvalue": self.eigenvalue.to_string(),
            "entries": self.entries.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "approx": self.to_f64(),
        })
    }
}

/// `C x = x/m` on the N-section: `x_i = 0` for `i < m`, `x_m = 1`,
/// then `x_i = m S_(i-1) / (i - m)`.
pub fn eig_direct(m: u64, n: usize) -> EigVec {
    assert!(m >= 1, "m must be positive");
    let m_usize = m as usize;
    let mut x = vec![BigRational::zero(); n];
    let mut partial = BigRational::zero();
    for i in 1..=n {
        if i == m_usize {
            x[i - 1] = BigRational::one();
        } else if i > m_usize {
            x[i - 1] = &partial * rat(m as i64, (i - m_usize) as i64);
        }
        partial += &x[i - 1];
    }
    EigVec {
        entries: x,
        eigenvalue: rat(1, m as i64),
        side: Side::Direct,
    }
}

/// `u^(s)` with `u_i = prod_{j<i} (1 - s/j)` for `i <= s`; support `1..=s`.
pub fn eig_dual(s: u64) -> EigVec {
    assert!(s >= 1, "s must be positive");
    let mut u = Vec::with_capacity(s as usize);
    let mut p = BigRational::one();
    for i in 1..=s {
        u.push(p.clone());
        p *= BigRational::one() - rat(s as i64, i as i64);
    }
    EigVec {
        entries: u,
        eigenvalue: rat(1, s as i64),
        side: Side::Dual,
    }
}

/// `(C' y)_i = sum_{j >= i} y_j / j` for `y` supported on `1..=y.len()`.
pub fn dual_apply(y: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); y.len()];
    let mut tail = BigRational::zero();
    for j in (1..=y.len()).rev() {
        if !y[j - 1].is_zero() {
            tail += &y[j - 1] / int(j as i64);
        }
        out[j - 1] = tail.clone();
    }
    out
}

// ---------------------------------------------------------------- identity suite

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub kind: Kind,
    pub passed: bool,
    pub max_error: f64,
}

impl IdentityCheck {
    fn exact(name: &str, n: usize, passed: bool) -> Self {
        IdentityCheck {
            name: name.to_string(),
            n,
            kind: Kind::Exact,
            passed,
            max_error: if passed { 0.0 } else { f64::NAN },
        }
    }
}

/// Largest N for which the binomial identities are checked.
pub const DELTA_EXACT_MAX: usize = 25;

/// Exact identity checks at dimension `n` (binomial ones capped at 25).
pub fn exact_identities(n: usize) -> Vec<IdentityCheck> {
    let k = Kind::Exact;
    let mut out = Vec::new();
    let c = cesaro(n, k);
    let inv = inverse(n, k);
    out.push(IdentityCheck::exact(
        "inverse*cesaro = I",
        n,
        inv.mul(&c).map(|p| p.is_identity()).unwrap_or(false),
    ));
    out.push(IdentityCheck::exact(
        "cesaro*inverse = I",
        n,
        c.mul(&inv).map(|p| p.is_identity()).unwrap_or(false),
    ));
    out.push(IdentityCheck::exact(
        "(I-S_r)DS_r = inverse",
        n,
        composed_inverse(n).same_entries(&inv),
    ));
    let ones = vec![BigRational::one(); n];
    out.push(IdentityCheck::exact(
        "cesaro*1 = 1",
        n,
        c.apply_exact(&ones).as_deref() == Some(&ones[..]),
    ));
    let nd = n.min(DELTA_EXACT_MAX);
    let d = delta(nd, k);
    out.push(IdentityCheck::exact(
        "delta^2 = I",
        nd,
        d.mul(&d).map(|p| p.is_identity()).unwrap_or(false),
    ));
    let ddd = d
        .mul(&diag_recip(nd, k))
        .and_then(|p| p.mul(&d))
        .map(|p| p.same_entries(&cesaro(nd, k)))
        .unwrap_or(false);
    out.push(IdentityCheck::exact("delta*diag(1/i)*delta = cesaro", nd, ddd));
    for m in 1..=(n.min(8) as u64) {
        out.push(IdentityCheck::exact(
            &format!("cesaro*eig_direct({m}) = eig_direct({m})/{m}"),
            n,
            eig_direct(m, n).verify(),
        ));
    }
    for s in 1..=12 {
        out.push(IdentityCheck::exact(
            &format!("dual_apply(u^({s})) = u^({s})/{s}"),
            s as usize,
            eig_dual(s).verify(),
        ));
    }
    out
}

pub const RESOLVENT_TOL: f64 = 1e-10;
pub const SPLIT_TOL: f64 = 1e-12;

/// `(C - mu I) R(mu) = I` within 1e-10 and the split reconstruction within 1e-12.
pub fn resolvent_checks(mu: Complex64, n: usize) -> Result<Vec<IdentityCheck>, SectionsError> {
    let (d, e) = split(mu, n)?;
    let r = reconstruct(mu, &d, &e)?;
    let res = resolvent_residual(mu, &r);
    let direct = resolvent(mu, n)?;
    let rec = direct.max_abs_diff(&r)?;
    let mu_s = format_complex(mu);
    Ok(vec![
        IdentityCheck {
            name: format!("(cesaro - mu I)*resolvent = I at mu = {mu_s}"),
            n,
            kind: Kind::Double,
            passed: res <= RESOLVENT_TOL,
            max_error: res,
        },
        IdentityCheck {
            name: format!("D_mu - mu^-2 E_mu = resolvent at mu = {mu_s}"),
            n,
            kind: Kind::Double,
            passed: rec <= SPLIT_TOL,
            max_error: rec,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> BigRational {
        rat(p, d)
    }

    fn rows(m: &TriMatrix) -> Vec<Vec<BigRational>> {
        (1..=m.dim())
            .map(|i| (1..=m.dim()).map(|j| m.get_exact(i, j).unwrap()).collect())
            .collect()
    }

    #[test]
    fn cesaro_two() {
        let c = cesaro(2, Kind::Exact);
        assert_eq!(rows(&c), vec![vec![q(1, 1), q(0, 1)], vec![q(1, 2), q(1, 2)]]);
    }

    #[test]
    fn delta_small() {
        assert_eq!(
            rows(&delta(2, Kind::Exact)),
            vec![vec![q(1, 1), q(0, 1)], vec![q(1, 1), q(-1, 1)]]
        );
        let d3 = delta(3, Kind::Exact);
        assert_eq!(rows(&d3)[2], vec![q(1, 1), q(-2, 1), q(1, 1)]);
        assert!(d3.mul(&d3).unwrap().is_identity());
    }

    #[test]
    fn delta_binomials_exceed_i64() {
        let d = delta(70, Kind::Exact);
        let mid = d.get_exact(70, 35).unwrap();
        assert!(mid.to_integer().to_i64().is_none());
    }

    #[test]
    fn inverse_times_cesaro() {
        let n = 3;
        let p = inverse(n, Kind::Exact).mul(&cesaro(n, Kind::Exact)).unwrap();
        assert!(p.is_identity());
    }

    #[test]
    fn composed_identity_on_basis_vectors() {
        // oracle: i y_i - (i-1) y_(i-1) evaluated directly
        let n = 10;
        for k in 1..=n {
            let x = unit(k, n);
            let got = composed_apply(&x);
            let want: Vec<BigRational> = (1..=n)
                .map(|i| {
                    let prev = if i > 1 { x[i - 2].clone() } else { q(0, 1) };
                    &x[i - 1] * int(i as i64) - prev * int(i as i64 - 1)
                })
                .collect();
            assert_eq!(got, want);
        }
        assert!(composed_inverse(n).same_entries(&inverse(n, Kind::Exact)));
    }

    #[test]
    fn diag_sandwich() {
        let n = 20;
        let d = delta(n, Kind::Exact);
        let p = d.mul(&diag_recip(n, Kind::Exact)).unwrap().mul(&d).unwrap();
        assert!(p.same_entries(&cesaro(n, Kind::Exact)));
    }

    #[test]
    fn resolvent_at_two() {
        let r = resolvent(Complex64::new(2.0, 0.0), 2).unwrap();
        assert_eq!(r.get(1, 1), c64(-1.0));
        assert!((r.get(2, 1) - c64(-1.0 / 3.0)).norm() < 1e-16);
        assert!((r.get(2, 2) - c64(-2.0 / 3.0)).norm() < 1e-16);
        let (d, e) = split(Complex64::new(2.0, 0.0), 2).unwrap();
        assert!((d.get(2, 2) - c64(-2.0 / 3.0)).norm() < 1e-16);
        assert!((e.get(2, 1) - c64(4.0 / 3.0)).norm() < 1e-15);
        let prod = cesaro(2, Kind::Double).shift(c64(2.0)).mul(&r).unwrap();
        assert!(prod.identity_error() < 1e-15);
    }

    #[test]
    fn singular_shift_names_k() {
        assert_eq!(
            resolvent(c64(1.0 / 3.0), 5).unwrap_err(),
            SectionsError::Singular { k: 3 }
        );
        assert_eq!(resolvent(c64(0.0), 5).unwrap_err(), SectionsError::ZeroShift);
        assert!(resolvent(c64(0.3), 5).is_ok());
    }

    #[test]
    fn resolvent_small_mu_uses_scaling() {
        // |prod| passes 1e300 for mu = 1e-3 near N = 250
        let mu = Complex64::new(1e-3, 2e-4);
        let r = resolvent(mu, 300).unwrap();
        assert!((1..=300).all(|i| (1..=i).all(|j| r.get(i, j).is_finite())));
        assert!(resolvent_residual(mu, &r) <= RESOLVENT_TOL);
    }

    #[test]
    fn split_reconstruction_is_exact() {
        let mu = Complex64::new(0.4, 0.3);
        let (d, e) = split(mu, 40).unwrap();
        let r = resolvent(mu, 40).unwrap();
        assert_eq!(reconstruct(mu, &d, &e).unwrap().max_abs_diff(&r).unwrap(), 0.0);
    }

    #[test]
    fn boundary_e_bounds() {
        // a(lambda) = 1: j |e_ij| stays between two positive constants
        let lam = Complex64::new(0.5, 0.5);
        let (_, e) = split(lam, 512).unwrap();
        let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
        for i in 3..=512 {
            for j in 2..i {
                let v = j as f64 * e.get(i, j).norm();
                hi = hi.max(v);
                lo = lo.min(v);
            }
        }
        assert!(hi.is_finite() && hi < 10.0, "{hi}");
        assert!(lo > 0.1, "{lo}");
    }

    #[test]
    fn eigen_examples() {
        assert_eq!(
            eig_direct(2, 6).entries,
            (0..6).map(|k| q(k, 1)).collect::<Vec<_>>()
        );
        assert_eq!(eig_direct(1, 4).entries, vec![q(1, 1); 4]);
        let u = eig_dual(2);
        assert_eq!(u.entries, vec![q(1, 1), q(-1, 1)]);
        assert_eq!(dual_apply(&u.entries), vec![q(1, 2), q(-1, 2)]);
        assert!(u.verify());
    }

    #[test]
    fn dual_apply_units() {
        assert_eq!(dual_apply(&unit(1, 1)), vec![q(1, 1)]);
        assert_eq!(dual_apply(&unit(3, 3)), vec![q(1, 3); 3]);
    }

    #[test]
    fn exports() {
        let c = cesaro(2, Kind::Exact);
        assert_eq!(c.to_csv(), "1,0\n1/2,1/2\n");
        let j = c.to_json();
        assert_eq!(j["N"], 2);
        assert_eq!(j["kind"], "exact");
        assert_eq!(j["entries"].as_array().unwrap().len(), 3);
        assert_eq!(j["entries"][1], json!([2, 1, 0.5, 0.0]));
        assert_eq!(format_complex(Complex64::new(1.0, -2.0)), "1-2i");
    }

    #[test]
    fn suite_passes_at_twenty() {
        for c in exact_identities(20) {
            assert!(c.passed, "{}", c.name);
        }
    }

    proptest! {
        #[test]
        fn products_stay_lower_triangular(n in 1usize..12) {
            let p = cesaro(n, Kind::Exact).mul(&delta(n, Kind::Exact)).unwrap();
            for i in 1..=n {
                for j in (i + 1)..=n {
                    prop_assert_eq!(p.get_exact(i, j).unwrap(), BigRational::zero());
                }
            }
        }

        #[test]
        fn direct_eigvecs_verify(m in 1u64..8, n in 1usize..40) {
            let v = eig_direct(m, n);
            prop_assert!(v.verify());
            if let Some(first) = v.entries.iter().find(|x| !x.is_zero()) {
                prop_assert!(first.is_one());
            }
        }

        #[test]
        fn dual_eigvecs_have_finite_support(s in 1u64..16) {
            let v = eig_dual(s);
            prop_assert_eq!(v.entries.len() as u64, s);
            prop_assert!(v.verify());
        }

        #[test]
        fn resolvent_residual_small(re in -2.0f64..2.0, im in 0.05f64..2.0) {
            let mu = Complex64::new(re, im);
            let r = resolvent(mu, 60).unwrap();
            prop_assert!(resolvent_residual(mu, &r) <= RESOLVENT_TOL);
        }
    }
}
