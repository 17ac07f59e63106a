//! Both sides of the margin inequality
//! `log ‖T_ε f‖_q ≤ E_{T∼λ} log ‖E(f|T)‖_q`, the `λ(q,ε)` parameter
//! formulas, and verification drivers.
//!
//! Both sides use the natural log (the inequality is base-invariant since a
//! log appears on each side); the `λ` formulas use `log₂` exactly as defined.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cube::{CubeError, CubeFunction, Exponent, NoiseVector, SubsetMask};

/// Largest dimension for which the exact all-subsets right-hand side is
/// evaluated; beyond it callers switch to the sampled estimator.
pub const EXACT_RHS_MAX_DIMENSION: usize = 14;

/// Default inequality slack for pass/fail.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default |margin| threshold for flagging an equality case.
pub const DEFAULT_EQUALITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MarginError {
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error("input function is identically zero: both sides are -inf; the inequality is trivially satisfied")]
    ZeroFunction,
    #[error("negative value {value} at index {index}: the inequality is stated for nonnegative functions")]
    NegativeInput { index: usize, value: f64 },
    #[error(
        "dimension {n} exceeds the exact-evaluation cap {cap}: use the sampled right-hand side"
    )]
    DimensionTooLargeForExact { n: usize, cap: usize },
    #[error("exponent {0} is not admissible here (need finite q > 1, integer q >= 2, or inf)")]
    BadExponent(String),
    #[error("q = {0} is below 2 (integer exponents start at 2)")]
    QTooSmall(u32),
    #[error("noise rate {0} outside [0, 1/2]")]
    BadNoiseRate(f64),
    #[error("lambda value {0} outside [0, 1]")]
    BadLambda(f64),
    #[error("subset weights summed to {0}, expected 1")]
    WeightNormalization(f64),
    #[error("trial count must be at least 1")]
    NoTrials,
}

/// `λ(q,ε) = 1 + log₂(ε^q + (1-ε)^q) / (q-1)` for integer `q ≥ 2`.
pub fn lambda_q(q: u32, eps: f64) -> Result<f64, MarginError> {
    if q < 2 {
        return Err(MarginError::QTooSmall(q));
    }
    check_eps(eps)?;
    Ok(1.0 + (eps.powi(q as i32) + (1.0 - eps).powi(q as i32)).log2() / (q as f64 - 1.0))
}

/// `λ(∞,ε) = 1 + log₂(1-ε)`.
pub fn lambda_inf(eps: f64) -> Result<f64, MarginError> {
    check_eps(eps)?;
    Ok(1.0 + (1.0 - eps).log2())
}

/// The earlier, larger parameter `(1-2ε)^{q/((2 ln 2)(q-1))}`, kept for
/// comparison reports only.
pub fn lambda_old(q: u32, eps: f64) -> Result<f64, MarginError> {
    if q < 2 {
        return Err(MarginError::QTooSmall(q));
    }
    check_eps(eps)?;
    let exponent = q as f64 / (2.0 * std::f64::consts::LN_2 * (q as f64 - 1.0));
    Ok((1.0 - 2.0 * eps).powf(exponent))
}

/// `λ` for a general exponent. Finite non-integer `q > 1` is accepted for
/// exploration; assertions elsewhere restrict themselves to integer `q`.
pub fn lambda_for(q: Exponent, eps: f64) -> Result<f64, MarginError> {
    check_eps(eps)?;
    match q {
        Exponent::Infinity => lambda_inf(eps),
        Exponent::Finite(qf) if qf > 1.0 => {
            Ok(1.0 + (eps.powf(qf) + (1.0 - eps).powf(qf)).log2() / (qf - 1.0))
        }
        Exponent::Finite(qf) => Err(MarginError::BadExponent(qf.to_string())),
    }
}

fn check_eps(eps: f64) -> Result<(), MarginError> {
    if (0.0..=0.5).contains(&eps) {
        Ok(())
    } else {
        Err(MarginError::BadNoiseRate(eps))
    }
}

/// Per-coordinate subset-inclusion probabilities `λ_i ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginProfile(Vec<f64>);

impl MarginProfile {
    pub fn new(lambda: Vec<f64>) -> Result<Self, MarginError> {
        let mut clamped = lambda;
        for l in &mut clamped {
            // Tolerate one-ulp drift from the log2 formulas, nothing more.
            if !l.is_finite() || *l < -1e-12 || *l > 1.0 + 1e-12 {
                return Err(MarginError::BadLambda(*l));
            }
            *l = l.clamp(0.0, 1.0);
        }
        Ok(MarginProfile(clamped))
    }

    /// Computes `λ_i` coordinate-wise from a noise vector.
    pub fn from_noise(q: Exponent, eps: &NoiseVector) -> Result<Self, MarginError> {
        let lambda = eps
            .rates()
            .iter()
            .map(|&e| lambda_for(q, e))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(lambda)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inclusion weight of the subset `t`:
    /// `Π_{i∈t} λ_i · Π_{j∉t} (1-λ_j)`.
    pub fn subset_weight(&self, t: SubsetMask) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &l)| if t.contains(i) { l } else { 1.0 - l })
            .product()
    }

    /// Samples `T ∼ λ` with one Bernoulli draw per coordinate.
    pub fn sample_subset<R: Rng>(&self, rng: &mut R) -> SubsetMask {
        let mut bits = 0u32;
        for (i, &l) in self.0.iter().enumerate() {
            if rng.gen::<f64>() < l {
                bits |= 1 << i;
            }
        }
        SubsetMask::from_bits(bits, self.0.len()).expect("mask within dimension")
    }
}

/// One evaluated instance of the inequality.
///
/// `margin = rhs - lhs`; `pass` means the margin clears `-tol` and `equality`
/// flags `|margin|` below the equality tolerance. For the degenerate
/// identically-zero input both sides are `-inf` and `lhs`/`rhs` are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCase {
    pub description: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
    pub margin: f64,
    pub pass: bool,
    pub equality: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl VerificationCase {
    pub fn evaluated(
        description: String,
        lhs: f64,
        rhs: f64,
        stderr: Option<f64>,
        tol: f64,
        equality_tol: f64,
    ) -> Self {
        let margin = rhs - lhs;
        // Sampled estimates get the weakened rule margin >= -(tol + 3 stderr).
        let slack = tol + stderr.map_or(0.0, |s| 3.0 * s);
        VerificationCase {
            description,
            lhs: Some(lhs),
            rhs: Some(rhs),
            stderr,
            margin,
            pass: margin >= -slack,
            equality: margin.abs() <= equality_tol,
            note: None,
        }
    }

    /// The distinguished trivial outcome for an identically-zero input.
    pub fn trivial_zero(description: String) -> Self {
        VerificationCase {
            description,
            lhs: None,
            rhs: None,
            stderr: None,
            margin: 0.0,
            pass: true,
            equality: true,
            note: Some("identically zero input: both sides -inf, trivially satisfied".into()),
        }
    }
}

/// `ln ‖T_ε f‖_q`. Signals the identically-zero degenerate case.
pub fn theorem_lhs(f: &CubeFunction, eps: &NoiseVector, q: Exponent) -> Result<f64, MarginError> {
    require_nonnegative(f)?;
    if f.is_identically_zero() {
        return Err(MarginError::ZeroFunction);
    }
    let noisy = f.apply_noise(eps)?;
    Ok(noisy.norm(q).ln())
}

/// `ln ‖E(f|T)‖_q` for every subset `T ⊆ {0..n-1}`, indexed by mask.
///
/// Computed by a split recursion on the top coordinate in `O(3^n)` total
/// work; tests cross-check it against the direct conditional-expectation
/// route.
pub fn log_conditional_norms(f: &CubeFunction, q: Exponent) -> Vec<f64> {
    match q {
        Exponent::Finite(qf) => {
            let mut moments = conditional_moments(f.values(), f.n(), qf);
            for m in &mut moments {
                *m = m.ln() / qf;
            }
            moments
        }
        Exponent::Infinity => {
            let mut maxima = conditional_maxima(f.values(), f.n());
            for m in &mut maxima {
                *m = m.ln();
            }
            maxima
        }
    }
}

fn pow_q(v: f64, q: f64) -> f64 {
    if q.fract() == 0.0 && (1.0..=64.0).contains(&q) {
        v.powi(q as i32)
    } else {
        v.powf(q)
    }
}

/// `E_x (E(f|T)(x))^q` for all `T`, by splitting on the top coordinate:
/// dropping it averages the two halves, keeping it averages the two halves'
/// moment tables.
fn conditional_moments(values: &[f64], n: usize, q: f64) -> Vec<f64> {
    if n == 0 {
        return vec![pow_q(values[0], q)];
    }
    let half = values.len() / 2;
    let (lo, hi) = values.split_at(half);
    let avg: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let m_avg = conditional_moments(&avg, n - 1, q);
    let m_lo = conditional_moments(lo, n - 1, q);
    let m_hi = conditional_moments(hi, n - 1, q);
    let mut out = vec![0.0; values.len()];
    out[..half].copy_from_slice(&m_avg);
    for t in 0..half {
        out[half + t] = 0.5 * (m_lo[t] + m_hi[t]);
    }
    out
}

fn conditional_maxima(values: &[f64], n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![values[0]];
    }
    let half = values.len() / 2;
    let (lo, hi) = values.split_at(half);
    let avg: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let m_avg = conditional_maxima(&avg, n - 1);
    let m_lo = conditional_maxima(lo, n - 1);
    let m_hi = conditional_maxima(hi, n - 1);
    let mut out = vec![0.0; values.len()];
    out[..half].copy_from_slice(&m_avg);
    for t in 0..half {
        out[half + t] = m_lo[t].max(m_hi[t]);
    }
    out
}

/// Exact `E_{T∼λ} ln ‖E(f|T)‖_q` as a weighted sum over all `2^n` subsets.
pub fn theorem_rhs_exact(
    f: &CubeFunction,
    lam: &MarginProfile,
    q: Exponent,
) -> Result<f64, MarginError> {
    require_nonnegative(f)?;
    if f.is_identically_zero() {
        return Err(MarginError::ZeroFunction);
    }
    let n = f.n();
    if n > EXACT_RHS_MAX_DIMENSION {
        return Err(MarginError::DimensionTooLargeForExact {
            n,
            cap: EXACT_RHS_MAX_DIMENSION,
        });
    }
    assert_eq!(lam.len(), n, "profile length must match dimension");

    let log_norms = log_conditional_norms(f, q);
    let mut weights = vec![1.0f64];
    for &l in lam.values() {
        let mut next = Vec::with_capacity(weights.len() * 2);
        next.extend(weights.iter().map(|w| w * (1.0 - l)));
        next.extend(weights.iter().map(|w| w * l));
        weights = next;
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(MarginError::WeightNormalization(total));
    }
    // Zero-weight subsets are skipped so a lambda of exactly 1 or 0 drops
    // coordinates out without touching their (finite) log norms.
    Ok(weights
        .iter()
        .zip(&log_norms)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, &ln_norm)| w * ln_norm)
        .sum())
}

/// Monte Carlo estimate of the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Unbiased sample mean of `ln ‖E(f|T)‖_q` over `T ∼ λ`.
///
/// Each trial draws from its own counter-indexed stream of the seeded
/// generator, so the result does not depend on evaluation order.
pub fn theorem_rhs_sampled(
    f: &CubeFunction,
    lam: &MarginProfile,
    q: Exponent,
    trials: u64,
    seed: u64,
) -> Result<SampledEstimate, MarginError> {
    require_nonnegative(f)?;
    if f.is_identically_zero() {
        return Err(MarginError::ZeroFunction);
    }
    if trials == 0 {
        return Err(MarginError::NoTrials);
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..trials)
        .map(|trial| {
            let mut rng = base.clone();
            rng.set_stream(trial);
            let t = lam.sample_subset(&mut rng);
            f.conditional_expectation(t).norm(q).ln()
        })
        .collect();
    Ok(summarize(&samples))
}

fn summarize(samples: &[f64]) -> SampledEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let stderr = if samples.len() < 2 {
        0.0
    } else {
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    SampledEstimate {
        mean,
        stderr,
        trials: samples.len() as u64,
    }
}

/// How the right-hand side is evaluated by [`verify_theorem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhsMode {
    /// Exact for `n` within the cap, sampled beyond it.
    #[default]
    Auto,
    Exact,
    Sampled,
}

/// Options for [`verify_theorem`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyOpts {
    pub tol: f64,
    pub equality_tol: f64,
    pub rhs_mode: RhsMode,
    /// Trials for the sampled right-hand side.
    pub rhs_trials: u64,
    pub seed: u64,
}

impl Default for VerifyOpts {
    fn default() -> Self {
        VerifyOpts {
            tol: DEFAULT_TOL,
            equality_tol: DEFAULT_EQUALITY_TOL,
            rhs_mode: RhsMode::Auto,
            rhs_trials: 100_000,
            seed: 0,
        }
    }
}

/// Evaluates both sides with `λ_i` computed from `ε_i` and reports the
/// margin. Propagates the degenerate identically-zero signal as
/// [`MarginError::ZeroFunction`]; drivers map it to
/// [`VerificationCase::trivial_zero`].
pub fn verify_theorem(
    f: &CubeFunction,
    eps: &NoiseVector,
    q: Exponent,
    opts: VerifyOpts,
) -> Result<VerificationCase, MarginError> {
    let lam = MarginProfile::from_noise(q, eps)?;
    let lhs = theorem_lhs(f, eps, q)?;
    let exact = match opts.rhs_mode {
        RhsMode::Exact => true,
        RhsMode::Sampled => false,
        RhsMode::Auto => f.n() <= EXACT_RHS_MAX_DIMENSION,
    };
    let (rhs, stderr) = if exact {
        (theorem_rhs_exact(f, &lam, q)?, None)
    } else {
        let est = theorem_rhs_sampled(f, &lam, q, opts.rhs_trials, opts.seed)?;
        (est.mean, Some(est.stderr))
    };
    let description = format!("n={} q={} eps={:?}", f.n(), q, eps.rates());
    let mut case =
        VerificationCase::evaluated(description, lhs, rhs, stderr, opts.tol, opts.equality_tol);
    if let Some(qi) = q.as_integer() {
        if q != Exponent::Infinity && qi % 2 == 1 {
            case.note = Some("odd integer exponent".into());
        }
    }
    if !q.is_integer() {
        case.note = Some("non-integer exponent: exploratory only, excluded from assertions".into());
    }
    Ok(case)
}

fn require_nonnegative(f: &CubeFunction) -> Result<(), MarginError> {
    for (index, &value) in f.values().iter().enumerate() {
        if value < 0.0 {
            return Err(MarginError::NegativeInput { index, value });
        }
    }
    Ok(())
}

/// Shape of the test inputs produced by [`random_nonneg_function`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// Strictly positive values, uniform on (0, 1].
    Dense,
    /// Roughly half the entries exactly zero, at least one positive.
    Sparse,
    /// A normalized subcube indicator plus small uniform noise.
    Spiky,
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dense" => Ok(Profile::Dense),
            "sparse" => Ok(Profile::Sparse),
            "spiky" => Ok(Profile::Spiky),
            other => Err(format!("unknown profile {other:?} (dense|sparse|spiky)")),
        }
    }
}

/// Reproducible nonnegative, not-identically-zero test input.
pub fn random_nonneg_function(
    n: usize,
    profile: Profile,
    seed: u64,
) -> Result<CubeFunction, CubeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = 1usize
        .checked_shl(n as u32)
        .filter(|_| n <= crate::cube::MAX_DIMENSION)
        .ok_or(CubeError::DimensionTooLarge(n))?;
    let values = match profile {
        Profile::Dense => (0..size)
            .map(|_| 1.0 - rng.gen::<f64>())
            .collect::<Vec<_>>(),
        Profile::Sparse => {
            let mut v: Vec<f64> = (0..size)
                .map(|_| {
                    if rng.gen::<bool>() {
                        0.0
                    } else {
                        1.0 - rng.gen::<f64>()
                    }
                })
                .collect();
            if v.iter().all(|&x| x == 0.0) {
                let idx = rng.gen_range(0..size);
                v[idx] = 1.0 - rng.gen::<f64>();
            }
            v
        }
        Profile::Spiky => {
            let mut fixed = Vec::new();
            for i in 0..n {
                if rng.gen::<bool>() {
                    fixed.push((i, rng.gen::<bool>()));
                }
            }
            let base = CubeFunction::subcube_indicator(n, &fixed, true)?;
            base.values()
                .iter()
                .map(|&v| v + 0.05 * rng.gen::<f64>())
                .collect()
        }
    };
    CubeFunction::new_nonnegative(n, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LAMBDA_2_QUARTER: f64 = 0.321_928_094_887_362_35;

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_q(2, 0.0).unwrap(), 1.0);
        assert_eq!(lambda_q(2, 0.5).unwrap(), 0.0);
        assert!((lambda_q(2, 0.25).unwrap() - LAMBDA_2_QUARTER).abs() < 1e-15);
        assert!((lambda_inf(0.25).unwrap() - 0.584_962_500_721_156_2).abs() < 1e-15);
        assert_eq!(lambda_inf(0.0).unwrap(), 1.0);
        assert_eq!(lambda_inf(0.5).unwrap(), 0.0);
        // exponent 2/(2 ln 2) = 1/ln 2, so lambda_old(2, 1/4) = e^{-1}
        assert!((lambda_old(2, 0.25).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(lambda_old(2, 0.0).unwrap(), 1.0);
        assert_eq!(lambda_old(2, 0.5).unwrap(), 0.0);
        assert!(matches!(lambda_q(1, 0.1), Err(MarginError::QTooSmall(1))));
        assert!(matches!(
            lambda_q(2, 0.6),
            Err(MarginError::BadNoiseRate(_))
        ));
    }

    #[test]
    fn lambda_q_approaches_lambda_inf() {
        // gap is log2(1-eps)/(q-1), about 2e-4 at q = 2000
        let eps = 0.25;
        let large = lambda_for(Exponent::integer(2000), eps).unwrap();
        assert!((large - lambda_inf(eps).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn lambda_ordering_and_monotonicity() {
        for q in 2..=10 {
            let mut prev = f64::INFINITY;
            for step in 1..50 {
                let eps = step as f64 / 100.0;
                let new = lambda_q(q, eps).unwrap();
                let old = lambda_old(q, eps).unwrap();
                assert!(new < old, "q={q} eps={eps}: {new} !< {old}");
                assert!((0.0..=1.0).contains(&new));
                assert!(new < prev, "not strictly decreasing at q={q} eps={eps}");
                prev = new;
            }
        }
    }

    #[test]
    fn lhs_examples() {
        let f = CubeFunction::new(1, vec![2.0, 0.0]).unwrap();
        let lhs = theorem_lhs(
            &f,
            &NoiseVector::uniform(1, 0.25).unwrap(),
            Exponent::integer(2),
        )
        .unwrap();
        assert!((lhs - 0.111_571_775_657_104_88).abs() < 1e-15);

        let c = CubeFunction::constant(3, 1.0).unwrap();
        let lhs_c = theorem_lhs(
            &c,
            &NoiseVector::uniform(3, 0.3).unwrap(),
            Exponent::integer(5),
        )
        .unwrap();
        assert!(lhs_c.abs() < 1e-15);

        let lhs0 = theorem_lhs(
            &f,
            &NoiseVector::uniform(1, 0.0).unwrap(),
            Exponent::integer(2),
        )
        .unwrap();
        assert!((lhs0 - 2.0f64.sqrt().ln()).abs() < 1e-15);

        let zero = CubeFunction::constant(2, 0.0).unwrap();
        assert!(matches!(
            theorem_lhs(
                &zero,
                &NoiseVector::uniform(2, 0.1).unwrap(),
                Exponent::integer(2)
            ),
            Err(MarginError::ZeroFunction)
        ));
    }

    #[test]
    fn rhs_exact_examples() {
        let f = CubeFunction::new(1, vec![2.0, 0.0]).unwrap();
        let lam = MarginProfile::new(vec![LAMBDA_2_QUARTER]).unwrap();
        let rhs = theorem_rhs_exact(&f, &lam, Exponent::integer(2)).unwrap();
        assert!((rhs - LAMBDA_2_QUARTER * 2.0f64.sqrt().ln()).abs() < 1e-15);

        let g = random_nonneg_function(3, Profile::Dense, 11).unwrap();
        let all = MarginProfile::new(vec![1.0; 3]).unwrap();
        let rhs_all = theorem_rhs_exact(&g, &all, Exponent::integer(3)).unwrap();
        assert!((rhs_all - g.norm(Exponent::integer(3)).ln()).abs() < 1e-13);

        let none = MarginProfile::new(vec![0.0; 3]).unwrap();
        let rhs_none = theorem_rhs_exact(&g, &none, Exponent::integer(3)).unwrap();
        assert!((rhs_none - g.mean().ln()).abs() < 1e-13);
    }

    #[test]
    fn rhs_exact_rejects_large_dimension() {
        let f = CubeFunction::constant(15, 1.0).unwrap();
        let lam = MarginProfile::new(vec![0.5; 15]).unwrap();
        assert!(matches!(
            theorem_rhs_exact(&f, &lam, Exponent::integer(2)),
            Err(MarginError::DimensionTooLargeForExact { n: 15, .. })
        ));
    }

    #[test]
    fn conditional_norm_recursion_matches_direct_route() {
        for seed in 0..20 {
            let f = random_nonneg_function(5, Profile::Dense, seed).unwrap();
            for q in [
                Exponent::integer(2),
                Exponent::integer(3),
                Exponent::Infinity,
            ] {
                let fast = log_conditional_norms(&f, q);
                for bits in 0..32u32 {
                    let t = SubsetMask::from_bits(bits, 5).unwrap();
                    let direct = f.conditional_expectation(t).norm(q).ln();
                    assert!(
                        (fast[bits as usize] - direct).abs() < 1e-12,
                        "seed={seed} q={q} T={bits:b}: {} vs {direct}",
                        fast[bits as usize]
                    );
                }
            }
        }
    }

    #[test]
    fn rhs_sampled_deterministic_subset() {
        let f = CubeFunction::new(1, vec![2.0, 0.0]).unwrap();
        let lam = MarginProfile::new(vec![1.0]).unwrap();
        let est = theorem_rhs_sampled(&f, &lam, Exponent::integer(2), 100, 7).unwrap();
        assert!((est.mean - 2.0f64.sqrt().ln()).abs() < 1e-15);
        assert!(est.stderr < 1e-15);

        let c = CubeFunction::constant(2, 3.0).unwrap();
        let lam2 = MarginProfile::new(vec![0.5, 0.5]).unwrap();
        let est2 = theorem_rhs_sampled(&c, &lam2, Exponent::integer(2), 50, 1).unwrap();
        assert!((est2.mean - 3.0f64.ln()).abs() < 1e-14);
        assert!(est2.stderr < 1e-14);
    }

    #[test]
    fn rhs_sampled_converges_to_exact() {
        let f = CubeFunction::new(1, vec![2.0, 0.0]).unwrap();
        let lam = MarginProfile::new(vec![LAMBDA_2_QUARTER]).unwrap();
        let exact = theorem_rhs_exact(&f, &lam, Exponent::integer(2)).unwrap();
        let est = theorem_rhs_sampled(&f, &lam, Exponent::integer(2), 200_000, 3).unwrap();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.stderr,
            "mean {} vs exact {exact}, stderr {}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn rhs_sampled_is_schedule_independent() {
        // Same seed must reproduce regardless of how trials are evaluated;
        // per-trial streams make each sample a pure function of (seed, index).
        let f = random_nonneg_function(4, Profile::Sparse, 5).unwrap();
        let lam = MarginProfile::new(vec![0.3, 0.9, 0.1, 0.7]).unwrap();
        let a = theorem_rhs_sampled(&f, &lam, Exponent::integer(2), 500, 42).unwrap();
        let b = theorem_rhs_sampled(&f, &lam, Exponent::integer(2), 500, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn verify_subcube_equality_n1() {
        let f = CubeFunction::subcube_indicator(1, &[(0, false)], true).unwrap();
        let case = verify_theorem(
            &f,
            &NoiseVector::uniform(1, 0.25).unwrap(),
            Exponent::integer(2),
            VerifyOpts::default(),
        )
        .unwrap();
        assert!(case.pass);
        assert!(case.equality, "margin {}", case.margin);
        assert!(case.margin.abs() <= 1e-10);
        assert!((case.lhs.unwrap() - 0.111_571_775_657_104_88).abs() < 1e-12);
    }

    #[test]
    fn verify_constant_function() {
        let c = CubeFunction::constant(3, 2.5).unwrap();
        let case = verify_theorem(
            &c,
            &NoiseVector::uniform(3, 0.4).unwrap(),
            Exponent::Infinity,
            VerifyOpts::default(),
        )
        .unwrap();
        assert!(case.pass && case.equality);
    }

    #[test]
    fn verify_random_case_passes() {
        for seed in 0..20 {
            let f = random_nonneg_function(4, Profile::Dense, seed).unwrap();
            let case = verify_theorem(
                &f,
                &NoiseVector::uniform(4, 0.3).unwrap(),
                Exponent::integer(3),
                VerifyOpts::default(),
            )
            .unwrap();
            assert!(case.pass, "seed {seed}: margin {}", case.margin);
            assert!(case.margin >= 0.0, "seed {seed}: margin {}", case.margin);
            assert_eq!(case.note.as_deref(), Some("odd integer exponent"));
        }
    }

    #[test]
    fn zero_noise_coordinate_drops_out() {
        let f = random_nonneg_function(3, Profile::Dense, 9).unwrap();
        let eps = NoiseVector::new(vec![0.0, 0.3, 0.0]).unwrap();
        let lam = MarginProfile::from_noise(Exponent::integer(2), &eps).unwrap();
        assert_eq!(lam.values()[0], 1.0);
        assert_eq!(lam.values()[2], 1.0);
        let case = verify_theorem(&f, &eps, Exponent::integer(2), VerifyOpts::default()).unwrap();
        assert!(case.pass);
    }

    #[test]
    fn generator_profiles() {
        let dense = random_nonneg_function(3, Profile::Dense, 7).unwrap();
        assert!(dense.values().iter().all(|&v| v > 0.0));
        assert_eq!(dense, random_nonneg_function(3, Profile::Dense, 7).unwrap());

        let sparse = random_nonneg_function(3, Profile::Sparse, 7).unwrap();
        assert!(sparse.values().contains(&0.0));
        assert!(sparse.values().iter().any(|&v| v > 0.0));

        let spiky = random_nonneg_function(2, Profile::Spiky, 1).unwrap();
        let mut best = f64::INFINITY;
        for mask in 0..4u32 {
            for pattern in 0..4u32 {
                if pattern & !mask != 0 {
                    continue;
                }
                let fixed: Vec<(usize, bool)> = (0..2)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| (i, pattern >> i & 1 == 1))
                    .collect();
                let ind = CubeFunction::subcube_indicator(2, &fixed, true).unwrap();
                best = best.min(spiky.max_abs_diff(&ind));
            }
        }
        assert!(
            best <= 0.1,
            "spiky profile {best} away from every normalized indicator"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weights_sum_to_one(lams in proptest::collection::vec(0.0f64..=1.0, 1..=6)) {
            let n = lams.len();
            let lam = MarginProfile::new(lams).unwrap();
            let total: f64 = (0..1u32 << n)
                .map(|bits| lam.subset_weight(SubsetMask::from_bits(bits, n).unwrap()))
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn main_inequality_random_small(
            seed in 0u64..500,
            eps in 0.0f64..=0.5,
            q in 2u32..=4,
        ) {
            let f = random_nonneg_function(3, Profile::Dense, seed).unwrap();
            let case = verify_theorem(
                &f,
                &NoiseVector::uniform(3, eps).unwrap(),
                Exponent::integer(q),
                VerifyOpts::default(),
            ).unwrap();
            prop_assert!(case.margin >= -1e-9, "margin {}", case.margin);
        }
    }
}
