//! Exact certification of the coefficient-nonnegativity argument behind the
//! two-point inequality, for any requested integer `q ≥ 2`.
//!
//! The reduction in [`crate::onedim`] bottoms out in a single master
//! polynomial inequality in `x ≥ 0`:
//!
//! ```text
//! (q-2)x(x+2)((1+x)^{2q-1} + 1) - (2-2x)(1+x)^{2q-1}
//!     + (4x+2)(1+x) + x(x^2-2x-2)(1+x)^{q-1}  >=  0
//! ```
//!
//! For integer `q` the left side is a polynomial of degree `2q+1` whose
//! coefficients of `x^0, x^1, x^2` vanish and whose remaining coefficients
//! are nonnegative; that is the certificate. Everything in this module is
//! arbitrary-precision integer or rational arithmetic — floating point is
//! forbidden here, since the point is certification rather than estimation.
//! Any assertion failure is reported with its full operands, never swallowed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CertError {
    #[error("q = {0} is below 2")]
    QTooSmall(u32),
    #[error("k = {k} outside [{lo}, {hi}]")]
    KOutOfRange { k: u32, lo: u32, hi: u32 },
    #[error("sample point y = {0} outside (0, 1)")]
    YOutOfRange(String),
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

fn bigu(v: u32) -> BigInt {
    BigInt::from(v)
}

/// `C(a, b)` with the zero convention `C(a, b) = 0` for `b < 0` or `b > a`.
/// That convention is what makes the tail coefficients collapse for integer
/// `q`.
pub fn binomial(a: u64, b: i64) -> BigInt {
    if b < 0 || b as u64 > a {
        return BigInt::zero();
    }
    let b = (b as u64).min(a - b as u64);
    let mut c = BigInt::one();
    for i in 1..=b {
        c = c * BigInt::from(a - b + i) / BigInt::from(i);
    }
    c
}

fn factorial(k: u32) -> BigInt {
    (1..=k as u64)
        .map(BigInt::from)
        .fold(BigInt::one(), |acc, i| acc * i)
}

/// `a (a-1) ... (a-m+1)`, `m` factors.
fn falling(a: i64, m: u32) -> BigInt {
    (0..m as i64)
        .map(|i| big(a - i))
        .fold(BigInt::one(), |acc, f| acc * f)
}

/// Integer-coefficient polynomial with an explicitly declared degree
/// (trailing zero coefficients are retained).
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPolynomial {
    coeffs: Vec<BigInt>,
}

impl ExactPolynomial {
    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty());
        ExactPolynomial { coeffs }
    }

    pub fn declared_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Evaluation by integer Horner on `x = num/den`:
    /// `P(x) = (Σ c_k num^k den^{d-k}) / den^d`, one reduction at the end.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let num = x.numer();
        let den = x.denom();
        let d = self.coeffs.len() - 1;
        let mut acc = self.coeffs[d].clone();
        let mut den_power = BigInt::one();
        for k in (0..d).rev() {
            den_power *= den;
            acc = acc * num + &self.coeffs[k] * &den_power;
        }
        BigRational::new(acc, den_power)
    }
}

fn poly_add(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    out
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    out
}

fn poly_scale(a: &[BigInt], s: &BigInt) -> Vec<BigInt> {
    a.iter().map(|c| c * s).collect()
}

/// Coefficient row of `(1+x)^e`.
fn one_plus_x_pow(e: u32) -> Vec<BigInt> {
    (0..=e as i64).map(|k| binomial(e as u64, k)).collect()
}

/// Expands the master polynomial for integer `q ≥ 2` with declared degree
/// `2q+1` (the top coefficients may be zero, e.g. at `q = 2`).
pub fn master_polynomial(q: u32) -> Result<ExactPolynomial, CertError> {
    if q < 2 {
        return Err(CertError::QTooSmall(q));
    }
    let pow_2q1 = one_plus_x_pow(2 * q - 1);
    let pow_q1 = one_plus_x_pow(q - 1);

    // (q-2) x (x+2) ((1+x)^{2q-1} + 1)
    let mut shifted = pow_2q1.clone();
    shifted[0] += BigInt::one();
    let t1 = poly_scale(
        &poly_mul(&[big(0), big(2), big(1)], &shifted),
        &big(q as i64 - 2),
    );
    // -(2-2x)(1+x)^{2q-1}
    let t2 = poly_mul(&[big(-2), big(2)], &pow_2q1);
    // (4x+2)(1+x)
    let t3 = poly_mul(&[big(2), big(4)], &[big(1), big(1)]);
    // x (x^2 - 2x - 2) (1+x)^{q-1}
    let t4 = poly_mul(&[big(0), big(-2), big(-2), big(1)], &pow_q1);

    let mut coeffs = poly_add(&poly_add(&t1, &t2), &poly_add(&t3, &t4));
    coeffs.resize(2 * q as usize + 2, BigInt::zero());
    Ok(ExactPolynomial::from_coeffs(coeffs))
}

/// The coefficient of `x^k` (for `3 ≤ k ≤ 2q+1`) in its raw six-binomial
/// form:
/// `-2 C(2q-1,k) + (2q-2) C(2q-1,k-1) + (q-2) C(2q-1,k-2)
///  - 2 C(q-1,k-1) - 2 C(q-1,k-2) + C(q-1,k-3)`.
pub fn coefficient_formula(q: u32, k: u32) -> Result<BigInt, CertError> {
    if q < 2 {
        return Err(CertError::QTooSmall(q));
    }
    if !(3..=2 * q + 1).contains(&k) {
        return Err(CertError::KOutOfRange {
            k,
            lo: 3,
            hi: 2 * q + 1,
        });
    }
    let a = (2 * q - 1) as u64;
    let b = (q - 1) as u64;
    let k = k as i64;
    Ok(big(-2) * binomial(a, k)
        + big(2 * q as i64 - 2) * binomial(a, k - 1)
        + big(q as i64 - 2) * binomial(a, k - 2)
        - big(2) * binomial(b, k - 1)
        - big(2) * binomial(b, k - 2)
        + binomial(b, k - 3))
}

/// The auxiliary quadratic `Q(k) = (q+2)k² - (4q²+5q+2)k + 4q(2q+1)`;
/// `-Q(k)` is the bracket multiplying the leading binomial prefactor of
/// the coefficient of `x^k`.
pub fn coef_quadratic(q: u32, k: u32) -> BigInt {
    let (q, k) = (big(q as i64), big(k as i64));
    (&q + 2) * &k * &k - (4 * &q * &q + 5 * &q + 2) * &k + 4 * &q * (2 * &q + 1)
}

/// The remainder quadratic `R(k) = k² + (2q-3)k - (2q²+4q-2)` multiplying
/// the second binomial prefactor.
pub fn remainder_quadratic(q: u32, k: u32) -> BigInt {
    let (q, k) = (big(q as i64), big(k as i64));
    &k * &k + (2 * &q - 3) * &k - (2 * &q * &q + 4 * &q - 2)
}

/// The dominance cubic
/// `P(k) = (q+3)k³ - 3(2q²+3q+3)k² + 2(4q³+12q²+7q+3)k - 8q(q+1)(2q+1)`,
/// equal to `(2q-k+2)(-Q(k)) + k R(k)`; its nonnegativity on `[3, q+2]`
/// settles the head range of coefficients.
pub fn dominance_cubic(q: u32, k: u32) -> BigInt {
    let (q, k) = (big(q as i64), big(k as i64));
    (&q + 3) * &k * &k * &k - 3 * (2 * &q * &q + 3 * &q + 3) * &k * &k
        + 2 * (4 * &q * &q * &q + 12 * &q * &q + 7 * &q + 3) * &k
        - 8 * &q * (&q + 1) * (2 * &q + 1)
}

/// `P'(k) = 3(q+3)k² - 6(2q²+3q+3)k + 2(4q³+12q²+7q+3)`.
pub fn dominance_cubic_derivative(q: u32, k: u32) -> BigInt {
    let (q, k) = (big(q as i64), big(k as i64));
    3 * (&q + 3) * &k * &k - 6 * (2 * &q * &q + 3 * &q + 3) * &k
        + 2 * (4 * &q * &q * &q + 12 * &q * &q + 7 * &q + 3)
}

/// Head/zero/nonnegativity checks of the expanded coefficients, plus the
/// formula-vs-expansion identity for every `k`.
#[derive(Debug, Clone)]
pub struct CoefficientReport {
    pub q: u32,
    pub zero_prefix_ok: bool,
    pub all_nonneg: bool,
    pub formula_ok: bool,
    pub failures: Vec<String>,
}

impl CoefficientReport {
    pub fn ok(&self) -> bool {
        self.zero_prefix_ok && self.all_nonneg && self.formula_ok
    }
}

pub fn verify_coefficients(q: u32) -> Result<CoefficientReport, CertError> {
    let poly = master_polynomial(q)?;
    let mut failures = Vec::new();

    let mut zero_prefix_ok = true;
    for k in 0..=2usize {
        let c = poly.coeff(k);
        if !c.is_zero() {
            zero_prefix_ok = false;
            failures.push(format!("q={q}: coef[{k}] = {c}, expected 0"));
        }
    }
    let mut all_nonneg = true;
    for (k, c) in poly.coeffs().iter().enumerate() {
        if c.is_negative() {
            all_nonneg = false;
            failures.push(format!("q={q}: coef[{k}] = {c} is negative"));
        }
    }
    let mut formula_ok = true;
    for k in 3..=2 * q + 1 {
        let direct = coefficient_formula(q, k)?;
        let expanded = poly.coeff(k as usize);
        if direct != expanded {
            formula_ok = false;
            failures.push(format!(
                "q={q} k={k}: binomial formula gives {direct}, expansion gives {expanded}"
            ));
        }
    }
    Ok(CoefficientReport {
        q,
        zero_prefix_ok,
        all_nonneg,
        formula_ok,
        failures,
    })
}

/// Checks that `Q ≤ 0` on `[3, 2q+1]` together with the exact root-bound
/// inequalities and the discriminant sign that prove it.
#[derive(Debug, Clone)]
pub struct QuadraticLemmaReport {
    pub q: u32,
    pub nonpositive_on_range: bool,
    /// `9A + C ≤ 3B`, placing the lower root at or below 3.
    pub lower_root_bound_ok: bool,
    /// `(2q+1)²A + C ≤ (2q+1)B`, placing the upper root at or above `2q+1`.
    pub upper_root_bound_ok: bool,
    /// `B² - 4AC` agrees with the expanded quartic `16q⁴+8q³-39q²-12q+4`.
    pub discriminant_formula_ok: bool,
    pub discriminant_positive: bool,
    pub failures: Vec<String>,
}

impl QuadraticLemmaReport {
    pub fn ok(&self) -> bool {
        self.nonpositive_on_range
            && self.lower_root_bound_ok
            && self.upper_root_bound_ok
            && self.discriminant_formula_ok
            && self.discriminant_positive
    }
}

pub fn verify_quadratic_lemma(q: u32) -> Result<QuadraticLemmaReport, CertError> {
    if q < 2 {
        return Err(CertError::QTooSmall(q));
    }
    let mut failures = Vec::new();

    let mut nonpositive_on_range = true;
    for k in 3..=2 * q + 1 {
        let v = coef_quadratic(q, k);
        if v.is_positive() {
            nonpositive_on_range = false;
            failures.push(format!("q={q} k={k}: Q(k) = {v} > 0"));
        }
    }

    let qb = bigu(q);
    let a = &qb + 2;
    let b = 4 * &qb * &qb + 5 * &qb + 2;
    let c = 4 * &qb * (2 * &qb + 1);
    let lower = 9 * &a + &c <= 3 * &b;
    if !lower {
        failures.push(format!("q={q}: 9A + C = {} > 3B = {}", 9 * &a + &c, 3 * &b));
    }
    let edge = 2 * &qb + 1;
    let upper = &edge * &edge * &a + &c <= &edge * &b;
    if !upper {
        failures.push(format!(
            "q={q}: (2q+1)^2 A + C = {} > (2q+1) B = {}",
            &edge * &edge * &a + &c,
            &edge * &b
        ));
    }
    let disc: BigInt = &b * &b - 4 * &a * &c;
    let quartic: BigInt =
        16 * &qb * &qb * &qb * &qb + 8 * &qb * &qb * &qb - 39 * &qb * &qb - 12 * &qb + 4;
    let discriminant_formula_ok = disc == quartic;
    if !discriminant_formula_ok {
        failures.push(format!("q={q}: B^2-4AC = {disc} != quartic form {quartic}"));
    }
    let discriminant_positive = disc.is_positive();
    if !discriminant_positive {
        failures.push(format!("q={q}: discriminant {disc} not positive"));
    }
    Ok(QuadraticLemmaReport {
        q,
        nonpositive_on_range,
        lower_root_bound_ok: lower,
        upper_root_bound_ok: upper,
        discriminant_formula_ok,
        discriminant_positive,
        failures,
    })
}

/// Endpoint identities, derivative sign, discriminant branch, and direct
/// nonnegativity of the dominance cubic on `[3, q+2]`.
#[derive(Debug, Clone)]
pub struct CubicClaimsReport {
    pub q: u32,
    /// `P(3) = 2(4q³-3q²-10q+9)` and `P(3) ≥ 18`.
    pub endpoint3_ok: bool,
    /// `P(q+2) = q(3q³-q-2)` and `P(q+2) > 0`.
    pub endpoint_q2_ok: bool,
    /// `P'(3) = 8q³-12q²-13q+33` and `P'(3) > 0`.
    pub derivative3_ok: bool,
    /// `P(k) = (2q-k+2)(-Q(k)) + k R(k)` at `2q+4` points (degree-3
    /// agreement at more than 3 points is a polynomial identity).
    pub structure_ok: bool,
    /// Either the derivative discriminant is negative, or the larger root
    /// of `P'` lies beyond `q+2` via `2q²+3q+3 > (q+2)(q+3)`.
    pub branch: DerivativeBranch,
    pub branch_ok: bool,
    /// Ground truth: `P(k) ≥ 0` for every integer `k ∈ [3, q+2]`.
    pub nonneg_on_interval: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeBranch {
    /// `D(q) < 0`: the derivative never vanishes, `P` increases throughout.
    NegativeDiscriminant,
    /// `D(q) ≥ 0`: the second critical point lies beyond `q+2`, so `P`
    /// increases then decreases on the interval.
    RootBeyondInterval,
}

impl CubicClaimsReport {
    pub fn ok(&self) -> bool {
        self.endpoint3_ok
            && self.endpoint_q2_ok
            && self.derivative3_ok
            && self.structure_ok
            && self.branch_ok
            && self.nonneg_on_interval
    }
}

pub fn verify_cubic_claims(q: u32) -> Result<CubicClaimsReport, CertError> {
    if q < 2 {
        return Err(CertError::QTooSmall(q));
    }
    let mut failures = Vec::new();
    let qb = bigu(q);

    let p3 = dominance_cubic(q, 3);
    let p3_identity = 2 * (4 * &qb * &qb * &qb - 3 * &qb * &qb - 10 * &qb + 9);
    let endpoint3_ok = p3 == p3_identity && p3 >= big(18);
    if !endpoint3_ok {
        failures.push(format!(
            "q={q}: P(3) = {p3}, identity form {p3_identity}, needs >= 18"
        ));
    }

    let pq2 = dominance_cubic(q, q + 2);
    let pq2_identity = &qb * (3 * &qb * &qb * &qb - &qb - 2);
    let endpoint_q2_ok = pq2 == pq2_identity && pq2.is_positive();
    if !endpoint_q2_ok {
        failures.push(format!(
            "q={q}: P(q+2) = {pq2}, identity form {pq2_identity}, needs > 0"
        ));
    }

    let dp3 = dominance_cubic_derivative(q, 3);
    let dp3_identity = 8 * &qb * &qb * &qb - 12 * &qb * &qb - 13 * &qb + 33;
    let derivative3_ok = dp3 == dp3_identity && dp3.is_positive();
    if !derivative3_ok {
        failures.push(format!(
            "q={q}: P'(3) = {dp3}, identity form {dp3_identity}, needs > 0"
        ));
    }

    let mut structure_ok = true;
    for k in 0..=2 * q + 3 {
        let direct = dominance_cubic(q, k);
        let composed = (2 * &qb - big(k as i64) + 2) * (-coef_quadratic(q, k))
            + big(k as i64) * remainder_quadratic(q, k);
        if direct != composed {
            structure_ok = false;
            failures.push(format!(
                "q={q} k={k}: P(k) = {direct} != (2q-k+2)(-Q(k)) + kR(k) = {composed}"
            ));
        }
    }

    // discriminant of P': 36(2q²+3q+3)² - 24(q+3)(4q³+12q²+7q+3)
    let s: BigInt = 2 * &qb * &qb + 3 * &qb + 3;
    let disc: BigInt =
        36 * &s * &s - 24 * (&qb + 3) * (4 * &qb * &qb * &qb + 12 * &qb * &qb + 7 * &qb + 3);
    let (branch, branch_ok) = if disc.is_negative() {
        (DerivativeBranch::NegativeDiscriminant, (2..=4).contains(&q))
    } else {
        // larger root of P' beyond q+2 via 2q²+3q+3 > (q+2)(q+3), strict for q >= 4
        let strict = s > (&qb + 2) * (&qb + 3);
        (DerivativeBranch::RootBeyondInterval, q >= 5 && strict)
    };
    if !branch_ok {
        failures.push(format!("q={q}: discriminant {disc} gives branch {branch:?}, which does not match the expected q split"));
    }

    let mut nonneg_on_interval = true;
    for k in 3..=q + 2 {
        let v = dominance_cubic(q, k);
        if v.is_negative() {
            nonneg_on_interval = false;
            failures.push(format!("q={q} k={k}: P(k) = {v} < 0"));
        }
    }

    Ok(CubicClaimsReport {
        q,
        endpoint3_ok,
        endpoint_q2_ok,
        derivative3_ok,
        structure_ok,
        branch,
        branch_ok,
        nonneg_on_interval,
        failures,
    })
}

/// Tail range `q+3 ≤ k ≤ 2q+1`: the three short binomials vanish for
/// integer `q` and the coefficient reduces to
/// `falling(2q-1, k-2)/k! · (-Q(k)) ≥ 0`.
#[derive(Debug, Clone)]
pub struct TailReport {
    pub q: u32,
    pub binomials_vanish_ok: bool,
    pub factored_matches_expansion: bool,
    pub nonneg_ok: bool,
    pub failures: Vec<String>,
}

impl TailReport {
    pub fn ok(&self) -> bool {
        self.binomials_vanish_ok && self.factored_matches_expansion && self.nonneg_ok
    }
}

pub fn verify_tail_coefficients(q: u32) -> Result<TailReport, CertError> {
    let poly = master_polynomial(q)?;
    let mut failures = Vec::new();
    let mut binomials_vanish_ok = true;
    let mut factored_matches_expansion = true;
    let mut nonneg_ok = true;

    for k in q + 3..=2 * q + 1 {
        let b = (q - 1) as u64;
        for offset in 1..=3i64 {
            let v = binomial(b, k as i64 - offset);
            if !v.is_zero() {
                binomials_vanish_ok = false;
                failures.push(format!("q={q} k={k}: C(q-1, k-{offset}) = {v}, expected 0"));
            }
        }
        // falling(2q-1, k-2) / k! * (-Q(k)) as an exact rational
        let prefactor = BigRational::new(falling(2 * q as i64 - 1, k - 2), factorial(k));
        let value = prefactor * BigRational::from_integer(-coef_quadratic(q, k));
        let expansion = BigRational::from_integer(poly.coeff(k as usize));
        if value != expansion {
            factored_matches_expansion = false;
            failures.push(format!(
                "q={q} k={k}: factored form {value} != expansion coefficient {expansion}"
            ));
        }
        if value.is_negative() {
            nonneg_ok = false;
            failures.push(format!("q={q} k={k}: tail coefficient {value} < 0"));
        }
    }
    Ok(TailReport {
        q,
        binomials_vanish_ok,
        factored_matches_expansion,
        nonneg_ok,
        failures,
    })
}

/// Exact substitution point: `t = (1+y)/(1-y)` and `x = t-1` for a rational
/// `y ∈ (0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionPoint {
    pub y: BigRational,
    pub t: BigRational,
    pub x: BigRational,
}

impl SubstitutionPoint {
    pub fn from_y(y: BigRational) -> Result<Self, CertError> {
        if y <= BigRational::zero() || y >= BigRational::one() {
            return Err(CertError::YOutOfRange(y.to_string()));
        }
        let one = BigRational::one();
        let t = (&one + &y) / (&one - &y);
        let x = &t - &one;
        debug_assert!(t >= one && !x.is_negative());
        Ok(SubstitutionPoint { y, t, x })
    }
}

fn ipow(base: &BigInt, mut e: u32) -> BigInt {
    let mut acc = BigInt::one();
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

/// Rational power without intermediate reductions: powers of a reduced
/// fraction stay reduced.
fn rpow(base: &BigRational, exp: i32) -> BigRational {
    let e = exp.unsigned_abs();
    let n = ipow(base.numer(), e);
    let d = ipow(base.denom(), e);
    if exp >= 0 {
        BigRational::new_raw(n, d)
    } else {
        // `new` normalizes the sign into the numerator
        BigRational::new(d, n)
    }
}

/// Exact verification of one sample point of the reduction chain:
/// the product-rule identity for the moment polynomial `H`, the
/// sign-equivalence of the `y`, `t`, and `x` forms of the final inequality,
/// and the nonnegativity of each form at the point.
#[derive(Debug, Clone)]
pub struct ChainReport {
    pub q: u32,
    pub y: String,
    /// `yH''H - y(H')² + H'H = q(q-1)y(1-y²)^{q-2} + (q/4)((1+y)^{2q-2} - (1-y)^{2q-2})`.
    pub moment_identity_ok: bool,
    /// `Y(y)·(t+1)³ = 4·T(t)·(1-y²)^{q-1}` — the y-form and t-form differ by
    /// a positive factor.
    pub y_to_t_ok: bool,
    /// `M(t-1) = T(t)·t^{q-1}` — the t-form and the master polynomial differ
    /// by a positive factor.
    pub t_to_x_ok: bool,
    pub y_form_nonneg: bool,
    pub t_form_nonneg: bool,
    pub x_form_nonneg: bool,
    pub failures: Vec<String>,
}

impl ChainReport {
    pub fn ok(&self) -> bool {
        self.moment_identity_ok
            && self.y_to_t_ok
            && self.t_to_x_ok
            && self.y_form_nonneg
            && self.t_form_nonneg
            && self.x_form_nonneg
    }
}

pub fn check_reduction_chain(q: u32, y: &BigRational) -> Result<ChainReport, CertError> {
    if q < 2 {
        return Err(CertError::QTooSmall(q));
    }
    let point = SubstitutionPoint::from_y(y.clone())?;
    let mut failures = Vec::new();
    let qi = q as i32;
    let one = BigRational::one();
    let y = &point.y;
    let qr = BigRational::from_integer(bigu(q));

    let up = &one + y; // 1+y
    let dn = &one - y; // 1-y
    let h = (rpow(&dn, qi) + rpow(&up, qi)) / BigRational::from_integer(big(2));
    let hp = &qr * (rpow(&up, qi - 1) - rpow(&dn, qi - 1)) / BigRational::from_integer(big(2));
    let hpp = &qr * (&qr - &one) * (rpow(&up, qi - 2) + rpow(&dn, qi - 2))
        / BigRational::from_integer(big(2));

    let lhs = y * &hpp * &h - y * &hp * &hp + &hp * &h;
    let one_minus_y2 = &one - y * y;
    let rhs = &qr * (&qr - &one) * y * rpow(&one_minus_y2, qi - 2)
        + &qr / BigRational::from_integer(big(4)) * (rpow(&up, 2 * qi - 2) - rpow(&dn, 2 * qi - 2));
    let moment_identity_ok = lhs == rhs;
    if !moment_identity_ok {
        failures.push(format!(
            "q={q} y={y}: moment identity lhs {lhs} != rhs {rhs}"
        ));
    }

    // y-form of the final inequality
    let two = BigRational::from_integer(big(2));
    let three = BigRational::from_integer(big(3));
    let y_form = (&two * &qr - BigRational::from_integer(big(4)))
        * y
        * (rpow(&up, 2 * qi - 1) + rpow(&dn, 2 * qi - 1))
        - (&one_minus_y2
            * ((&one - &three * y) * rpow(&up, 2 * qi - 2)
                - (&one + &three * y) * rpow(&dn, 2 * qi - 2))
            + &two * y * (&one - &three * y * y) * rpow(&one_minus_y2, qi - 1));

    // t-form
    let t = &point.t;
    let four = BigRational::from_integer(big(4));
    let t_form = (&qr - &two) * (t * t - &one) * (rpow(t, qi) + rpow(t, 1 - qi))
        - ((&four - &two * t) * rpow(t, qi)
            - (&four * t - &two) * rpow(t, 2 - qi)
            - (t - &one) * (t * t - &four * t + &one));

    // x-form: the master polynomial at x = t-1
    let x_form = master_polynomial(q)?.eval(&point.x);

    let y_to_t = &y_form * rpow(&(t + &one), 3) == &four * &t_form * rpow(&one_minus_y2, qi - 1);
    if !y_to_t {
        failures.push(format!(
            "q={q} y={y}: y-form/t-form positive-factor identity failed"
        ));
    }
    let t_to_x = x_form == &t_form * rpow(t, qi - 1);
    if !t_to_x {
        failures.push(format!(
            "q={q} y={y}: t-form/x-form positive-factor identity failed"
        ));
    }
    let y_nonneg = !y_form.is_negative();
    let t_nonneg = !t_form.is_negative();
    let x_nonneg = !x_form.is_negative();
    if !(y_nonneg && t_nonneg && x_nonneg) {
        failures.push(format!(
            "q={q} y={y}: form values y={y_form} t={t_form} x={x_form}, all must be >= 0"
        ));
    }

    Ok(ChainReport {
        q,
        y: y.to_string(),
        moment_identity_ok,
        y_to_t_ok: y_to_t,
        t_to_x_ok: t_to_x,
        y_form_nonneg: y_nonneg,
        t_form_nonneg: t_nonneg,
        x_form_nonneg: x_nonneg,
        failures,
    })
}

/// Machine-readable certificate for one `q`. Every flag is an exact
/// arithmetic fact; `pass` is their conjunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub q: u32,
    pub degree: usize,
    pub coeffs: Vec<String>,
    pub zero_prefix_ok: bool,
    pub all_nonneg: bool,
    pub formula_ok: bool,
    pub q_lemma_ok: bool,
    pub p_claims_ok: bool,
    pub case2_ok: bool,
    pub chain_ok: bool,
    pub spot_check_ok: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub failures: Vec<String>,
}

/// Default sample points for the reduction chain.
fn chain_sample_points() -> Vec<BigRational> {
    [(1, 2), (1, 3), (3, 7)]
        .iter()
        .map(|&(n, d)| BigRational::new(big(n), big(d)))
        .collect()
}

/// Runs the complete certificate for one `q`: coefficient checks, both
/// auxiliary-polynomial lemmas, the tail range, the reduction chain at
/// rational sample points, and 20 redundant nonnegativity spot evaluations
/// on `x ≥ 0`.
pub fn certify(q: u32) -> Result<Certificate, CertError> {
    let poly = master_polynomial(q)?;
    let coefficients = verify_coefficients(q)?;
    let quadratic = verify_quadratic_lemma(q)?;
    let cubic = verify_cubic_claims(q)?;
    let tail = verify_tail_coefficients(q)?;

    let mut failures = Vec::new();
    failures.extend(coefficients.failures.iter().cloned());
    failures.extend(quadratic.failures.iter().cloned());
    failures.extend(cubic.failures.iter().cloned());
    failures.extend(tail.failures.iter().cloned());

    let mut chain_ok = true;
    for y in chain_sample_points() {
        let report = check_reduction_chain(q, &y)?;
        if !report.ok() {
            chain_ok = false;
            failures.extend(report.failures);
        }
    }

    let mut spot_check_ok = true;
    for j in 0..20 {
        let x = BigRational::new(big(j), big(4));
        let v = poly.eval(&x);
        if v.is_negative() {
            spot_check_ok = false;
            failures.push(format!("q={q}: master polynomial at x={x} is {v} < 0"));
        }
    }

    let pass =
        coefficients.ok() && quadratic.ok() && cubic.ok() && tail.ok() && chain_ok && spot_check_ok;
    Ok(Certificate {
        q,
        degree: poly.declared_degree(),
        coeffs: poly.coeffs().iter().map(|c| c.to_string()).collect(),
        zero_prefix_ok: coefficients.zero_prefix_ok,
        all_nonneg: coefficients.all_nonneg,
        formula_ok: coefficients.formula_ok,
        q_lemma_ok: quadratic.ok(),
        p_claims_ok: cubic.ok(),
        case2_ok: tail.ok(),
        chain_ok,
        spot_check_ok,
        pass,
        failures,
    })
}
