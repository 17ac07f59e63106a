//! Reed-Muller codes `RM(r, m)`: generator matrices from monomial
//! evaluations, exact weight distributions, the BSC rate threshold
//! `R < 1 - log₂(1 + √(4p(1-p)))`, and Monte Carlo maximum-likelihood
//! decoding on `BSC(p)`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cert::binomial;
use crate::stats::{wilson_interval, WilsonInterval, Z_95, Z_99};

/// Generator construction cap (`n = 2^m` bits per row).
pub const MAX_M: u32 = 20;
/// Exhaustive codeword enumeration cap for weight distributions.
pub const WEIGHT_ENUM_MAX_DIM: usize = 24;
/// Exhaustive nearest-codeword search cap.
pub const ML_DECODE_MAX_DIM: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum RmError {
    #[error("invalid parameters r={r}, m={m} (need 0 <= r <= m <= {MAX_M})")]
    BadParams { r: u32, m: u32 },
    #[error("dimension {dim} exceeds the {what} cap of {cap}")]
    DimTooLarge {
        dim: usize,
        cap: usize,
        what: &'static str,
    },
    #[error("received word has {got} words, expected {expected}")]
    ReceivedLength { got: usize, expected: usize },
    #[error("p = {0} outside [0, 1/2]")]
    BadP(f64),
    #[error("trial count must be at least 1")]
    NoTrials,
}

/// `RM(r, m)`: evaluations of all degree-`<= r` monomials on `{0,1}^m`.
///
/// Generator rows are ordered by (degree, variable-mask value); a message
/// bit `j` toggles row `j`, so "codeword index" means the message value
/// under this fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RmCode {
    r: u32,
    m: u32,
    n: usize,
    dim: usize,
    words: usize,
    rows: Vec<u64>,
}

pub fn rm_code(r: u32, m: u32) -> Result<RmCode, RmError> {
    if r > m || m > MAX_M {
        return Err(RmError::BadParams { r, m });
    }
    let n = 1usize << m;
    let words = n.div_ceil(64);
    let mut monomials: Vec<u32> = (0..1u32 << m).filter(|a| a.count_ones() <= r).collect();
    monomials.sort_by_key(|a| (a.count_ones(), *a));
    let dim = monomials.len();
    let mut rows = vec![0u64; dim * words];
    for (row_idx, &a) in monomials.iter().enumerate() {
        for x in 0..n {
            // monomial Π_{i in a} x_i evaluates to 1 iff a ⊆ x
            if x as u32 & a == a {
                rows[row_idx * words + x / 64] |= 1 << (x % 64);
            }
        }
    }
    let code = RmCode {
        r,
        m,
        n,
        dim,
        words,
        rows,
    };
    debug_assert_eq!(
        code.dim,
        (0..=r).map(|i| binomial_usize(m, i)).sum::<usize>()
    );
    Ok(code)
}

fn binomial_usize(n: u32, k: u32) -> usize {
    binomial(n as u64, k as i64)
        .to_usize()
        .expect("small binomial")
}

impl RmCode {
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Block length `n = 2^m`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rate(&self) -> f64 {
        self.dim as f64 / self.n as f64
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    pub fn codeword(&self, message: u64) -> Vec<u64> {
        assert!(
            self.dim >= 64 || message < 1u64 << self.dim,
            "message out of range"
        );
        let mut word = vec![0u64; self.words];
        for j in 0..self.dim {
            if message >> j & 1 == 1 {
                for (w, r) in word.iter_mut().zip(self.row(j)) {
                    *w ^= r;
                }
            }
        }
        word
    }

    /// Nearest codeword by Hamming distance; ties break to the lowest
    /// message index (deterministic).
    pub fn ml_decode(&self, received: &[u64]) -> Result<Decoded, RmError> {
        if self.dim > ML_DECODE_MAX_DIM {
            return Err(RmError::DimTooLarge {
                dim: self.dim,
                cap: ML_DECODE_MAX_DIM,
                what: "nearest-codeword search",
            });
        }
        if received.len() != self.words {
            return Err(RmError::ReceivedLength {
                got: received.len(),
                expected: self.words,
            });
        }
        let mut current = vec![0u64; self.words];
        let mut best_dist = hamming_distance(&current, received);
        let mut best_msg = 0u64;
        // Gray-code walk: step i toggles generator row tz(i), giving the
        // codeword of message gray(i) = i ^ (i >> 1).
        for i in 1u64..1 << self.dim {
            let j = i.trailing_zeros() as usize;
            for (w, r) in current.iter_mut().zip(self.row(j)) {
                *w ^= r;
            }
            let message = i ^ (i >> 1);
            let dist = hamming_distance(&current, received);
            if dist < best_dist || (dist == best_dist && message < best_msg) {
                best_dist = dist;
                best_msg = message;
            }
        }
        Ok(Decoded {
            message: best_msg,
            codeword: self.codeword(best_msg),
            distance: best_dist,
        })
    }

    /// Exact codeword counts by Hamming weight.
    pub fn weight_distribution(&self) -> Result<WeightDistribution, RmError> {
        if self.dim > WEIGHT_ENUM_MAX_DIM {
            return Err(RmError::DimTooLarge {
                dim: self.dim,
                cap: WEIGHT_ENUM_MAX_DIM,
                what: "codeword enumeration",
            });
        }
        let mut counts = vec![0u64; self.n + 1];
        let mut current = vec![0u64; self.words];
        counts[0] = 1;
        for i in 1u64..1 << self.dim {
            let j = i.trailing_zeros() as usize;
            for (w, r) in current.iter_mut().zip(self.row(j)) {
                *w ^= r;
            }
            let weight: u32 = current.iter().map(|w| w.count_ones()).sum();
            counts[weight as usize] += 1;
        }
        Ok(WeightDistribution {
            counts: counts.into_iter().map(BigUint::from).collect(),
        })
    }
}

fn hamming_distance(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub message: u64,
    pub codeword: Vec<u64>,
    pub distance: u32,
}

/// Codeword counts `a_0 ... a_n` as exact integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDistribution {
    counts: Vec<BigUint>,
}

impl WeightDistribution {
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn count(&self, i: usize) -> &BigUint {
        &self.counts[i]
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Smallest positive weight with a codeword: the minimum distance.
    pub fn min_distance(&self) -> Option<usize> {
        (1..self.counts.len()).find(|&i| !self.counts[i].is_zero())
    }
}

/// `i* = min(i, n-i)`.
pub fn i_star(i: usize, n: usize) -> usize {
    i.min(n - i)
}

/// The decoding rate threshold `1 - log₂(1 + √(4p(1-p)))` on `BSC(p)`.
/// Equals 1 at `p = 0`, 0 at `p = 1/2`, strictly decreasing between.
pub fn rate_threshold(p: f64) -> Result<f64, RmError> {
    if !(0.0..=0.5).contains(&p) {
        return Err(RmError::BadP(p));
    }
    Ok(1.0 - (1.0 + (4.0 * p * (1.0 - p)).sqrt()).log2())
}

/// Binary entropy `h₂(p)`, for the Shannon-capacity column in reports.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x == 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// One row of the weight-bound report (report-only; no pass/fail because
/// the bounds carry an unquantified subexponential factor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightBoundRow {
    pub i: usize,
    pub i_star: usize,
    /// Exact count, decimal.
    pub count: String,
    /// `log₂ a_i`; `None` when `a_i = 0`.
    pub log2_count: Option<f64>,
    /// `i* · log₂(1/(2^{1-R}-1))`; `None` when `R = 1` (vacuous).
    pub bound1_log2: Option<f64>,
    pub bound2_log2: f64,
    /// Which branch of the second bound applies: `low` (`i*` below the
    /// cutoff), `high`, or `boundary` for integers adjacent to a fractional
    /// cutoff, where the larger (safe) of the two expressions is reported.
    pub regime: String,
    /// Bound minus actual, in bits; `None` when `a_i = 0`.
    pub gap1: Option<f64>,
    pub gap2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightBoundReport {
    pub r: u32,
    pub m: u32,
    pub n: usize,
    pub dim: usize,
    pub rate: f64,
    /// Regime cutoff `(1 - 2^{R-1}) n` for the second bound.
    pub cutoff: f64,
    /// The bounds assume a doubly transitive automorphism group; RM codes
    /// qualify by construction.
    pub doubly_transitive: bool,
    pub rows: Vec<WeightBoundRow>,
}

/// Tabulates `log₂ a_i` against both weight bounds (subexponential factor
/// dropped) for every `i`, including zero rows.
pub fn weight_bound_report(code: &RmCode) -> Result<WeightBoundReport, RmError> {
    let dist = code.weight_distribution()?;
    let n = code.n();
    let rate = code.rate();
    let dim = code.dim();
    let cutoff = (1.0 - (rate - 1.0).exp2()) * n as f64;
    let bound1_per_unit = {
        let base = (1.0 - rate).exp2() - 1.0;
        if base <= 0.0 {
            None
        } else {
            Some(-base.log2())
        }
    };
    let rows = (0..=n)
        .map(|i| {
            let istar = i_star(i, n);
            let count = dist.count(i);
            let log2_count = if count.is_zero() {
                None
            } else {
                Some(count.to_f64().expect("finite count").log2())
            };
            let bound1_log2 = bound1_per_unit.map(|b| istar as f64 * b);
            let low =
                dim as f64 - istar as f64 * (2.0 - rate.exp2()).log2() - (n - istar) as f64 * rate;
            let high = binomial(n as u64, istar as i64)
                .to_f64()
                .expect("finite binomial")
                .log2()
                + dim as f64
                - n as f64;
            let boundary_adjacent = cutoff.fract() != 0.0 && (istar as f64 - cutoff).abs() < 1.0;
            let (bound2_log2, regime) = if boundary_adjacent {
                (low.max(high), "boundary".to_string())
            } else if istar as f64 <= cutoff {
                (low, "low".to_string())
            } else {
                (high, "high".to_string())
            };
            WeightBoundRow {
                i,
                i_star: istar,
                count: count.to_string(),
                log2_count,
                bound1_log2,
                bound2_log2,
                regime,
                gap1: log2_count.and_then(|l| bound1_log2.map(|b| b - l)),
                gap2: log2_count.map(|l| bound2_log2 - l),
            }
        })
        .collect();
    Ok(WeightBoundReport {
        r: code.r(),
        m: code.m(),
        n,
        dim,
        rate,
        cutoff,
        doubly_transitive: true,
        rows,
    })
}

/// Monte Carlo block-error result under exhaustive ML decoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BscResult {
    pub p: f64,
    pub trials: u64,
    pub errors: u64,
    pub rate: f64,
    pub wilson95: WilsonInterval,
    pub wilson99: WilsonInterval,
}

/// Simulates ML decoding of random transmissions through `BSC(p)`.
///
/// By linearity the transmitted word is fixed to zero: the error-pattern
/// distribution does not depend on the codeword, and the deterministic
/// lowest-index tie rule favors message 0, so a decode error is exactly
/// `decoded message != 0`. Trials use counter-indexed streams, so the
/// result is reproducible per seed regardless of scheduling.
pub fn bsc_block_error(
    code: &RmCode,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<BscResult, RmError> {
    if !(0.0..=0.5).contains(&p) {
        return Err(RmError::BadP(p));
    }
    if trials == 0 {
        return Err(RmError::NoTrials);
    }
    if code.dim() > ML_DECODE_MAX_DIM {
        return Err(RmError::DimTooLarge {
            dim: code.dim(),
            cap: ML_DECODE_MAX_DIM,
            what: "nearest-codeword search",
        });
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let errors: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = base.clone();
            rng.set_stream(trial);
            let mut word = vec![0u64; code.words()];
            for i in 0..code.n() {
                if rng.gen::<f64>() < p {
                    word[i / 64] |= 1 << (i % 64);
                }
            }
            let decoded = code.ml_decode(&word).expect("dimension pre-checked");
            u64::from(decoded.message != 0)
        })
        .sum();
    let rate = errors as f64 / trials as f64;
    Ok(BscResult {
        p,
        trials,
        errors,
        rate,
        wilson95: wilson_interval(errors, trials, Z_95),
        wilson99: wilson_interval(errors, trials, Z_99),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub r: u32,
    pub m: u32,
    pub n: usize,
    pub dim: usize,
    pub rate: f64,
    pub below_threshold: bool,
    pub sim: BscResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub p: f64,
    pub threshold: f64,
    /// `1 - h₂(p)`, for comparison only (no relation asserted).
    pub shannon_limit: f64,
    pub members: Vec<FamilyMember>,
    /// Whether the empirical block-error rates are non-increasing across
    /// members, allowing one-sided 95% sampling noise (pooled two-proportion
    /// test per consecutive pair).
    pub nonincreasing_at_95: bool,
}

/// Per-member rate/threshold/error-rate table for a code family at one `p`.
pub fn family_threshold_report(
    members: &[(u32, u32)],
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<FamilyReport, RmError> {
    let threshold = rate_threshold(p)?;
    let mut rows = Vec::with_capacity(members.len());
    for (idx, &(r, m)) in members.iter().enumerate() {
        let code = rm_code(r, m)?;
        let member_seed = seed
            .wrapping_add(idx as u64)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let sim = bsc_block_error(&code, p, trials, member_seed)?;
        rows.push(FamilyMember {
            r,
            m,
            n: code.n(),
            dim: code.dim(),
            rate: code.rate(),
            below_threshold: code.rate() < threshold,
            sim,
        });
    }
    let nonincreasing_at_95 = rows
        .windows(2)
        .all(|pair| nonincrease_plausible(&pair[0].sim, &pair[1].sim));
    Ok(FamilyReport {
        p,
        threshold,
        shannon_limit: 1.0 - binary_entropy(p),
        members: rows,
        nonincreasing_at_95,
    })
}

/// One-sided test that `next <= prev` is consistent with the observations:
/// any observed increase must stay within 1.645 pooled standard errors.
fn nonincrease_plausible(prev: &BscResult, next: &BscResult) -> bool {
    let increase = next.rate - prev.rate;
    if increase <= 0.0 {
        return true;
    }
    let pooled = (prev.errors + next.errors) as f64 / (prev.trials + next.trials) as f64;
    let se =
        (pooled * (1.0 - pooled) * (1.0 / prev.trials as f64 + 1.0 / next.trials as f64)).sqrt();
    increase <= 1.645 * se
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn generator_construction() {
        let code = rm_code(1, 3).unwrap();
        assert_eq!(code.n(), 8);
        assert_eq!(code.dim(), 4);
        assert_eq!(code.rate(), 0.5);
        // rows: constant, x0, x1, x2 under the coordinate-bit convention
        assert_eq!(code.row(0), &[0xFF]);
        assert_eq!(code.row(1), &[0xAA]);
        assert_eq!(code.row(2), &[0xCC]);
        assert_eq!(code.row(3), &[0xF0]);

        assert_eq!(rm_code(0, 5).unwrap().dim(), 1);
        let full = rm_code(3, 3).unwrap();
        assert_eq!(full.dim(), 8);
        assert_eq!(full.rate(), 1.0);
        assert_eq!(rm_code(4, 3), Err(RmError::BadParams { r: 4, m: 3 }));
    }

    #[test]
    fn dimension_identity() {
        for m in 0..=12u32 {
            for r in 0..=m {
                let expected: usize = (0..=r).map(|i| binomial_usize(m, i)).sum();
                assert_eq!(rm_code(r, m).unwrap().dim(), expected, "r={r} m={m}");
            }
        }
    }

    #[test]
    fn generator_rows_independent() {
        // row rank over GF(2) equals dim
        for m in 1..=8u32 {
            for r in 0..=m {
                let code = rm_code(r, m).unwrap();
                let mut basis: Vec<Vec<u64>> = Vec::new();
                let mut rank = 0;
                for i in 0..code.dim() {
                    let mut v = code.row(i).to_vec();
                    for b in &basis {
                        let lead = b.iter().rposition(|&w| w != 0).unwrap();
                        let lead_bit = 63 - b[lead].leading_zeros();
                        if v[lead] >> lead_bit & 1 == 1 {
                            for (x, y) in v.iter_mut().zip(b) {
                                *x ^= y;
                            }
                        }
                    }
                    if v.iter().any(|&w| w != 0) {
                        basis.push(v);
                        rank += 1;
                    }
                }
                assert_eq!(rank, code.dim(), "r={r} m={m}");
            }
        }
    }

    #[test]
    fn weight_distribution_examples() {
        let d13 = rm_code(1, 3).unwrap().weight_distribution().unwrap();
        let expected: Vec<u64> = vec![1, 0, 0, 0, 14, 0, 0, 0, 1];
        assert_eq!(
            d13.counts(),
            expected
                .iter()
                .map(|&c| BigUint::from(c))
                .collect::<Vec<_>>()
                .as_slice()
        );

        let rep = rm_code(0, 3).unwrap().weight_distribution().unwrap();
        assert_eq!(rep.count(0), &BigUint::one());
        assert_eq!(rep.count(8), &BigUint::one());
        assert_eq!(rep.total(), BigUint::from(2u32));

        let full = rm_code(3, 3).unwrap().weight_distribution().unwrap();
        for i in 0..=8 {
            assert_eq!(full.count(i), &binomial(8, i as i64).to_biguint().unwrap());
        }
    }

    #[test]
    fn weight_distribution_sanity() {
        for m in 1..=6u32 {
            for r in 0..=m {
                let code = rm_code(r, m).unwrap();
                if code.dim() <= WEIGHT_ENUM_MAX_DIM {
                    let dist = code.weight_distribution().unwrap();
                    assert_eq!(dist.total(), BigUint::from(1u64) << code.dim());
                    // all-ones word is always present, so counts are symmetric
                    for i in 0..=code.n() {
                        assert_eq!(dist.count(i), dist.count(code.n() - i), "r={r} m={m} i={i}");
                    }
                    assert_eq!(dist.min_distance(), Some(1usize << (m - r)), "r={r} m={m}");
                } else {
                    // beyond the enumeration cap, at least exhibit a codeword
                    // of the expected minimum weight: any top-degree row
                    let weight: u32 = code
                        .row(code.dim() - 1)
                        .iter()
                        .map(|w| w.count_ones())
                        .sum();
                    assert_eq!(weight, 1 << (m - r), "r={r} m={m}");
                }
            }
        }
    }

    #[test]
    fn threshold_values() {
        assert_eq!(rate_threshold(0.0).unwrap(), 1.0);
        assert_eq!(rate_threshold(0.5).unwrap(), 0.0);
        assert!((rate_threshold(0.1).unwrap() - 0.321_928_094_887_362_35).abs() < 1e-12);
        assert!(rate_threshold(0.6).is_err());
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.005).collect();
        let vals: Vec<f64> = grid.iter().map(|&p| rate_threshold(p).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(vals.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn ml_decode_examples() {
        let code = rm_code(1, 3).unwrap();
        let c = code.codeword(9);
        let decoded = code.ml_decode(&c).unwrap();
        assert_eq!(decoded.message, 9);
        assert_eq!(decoded.distance, 0);

        // single bit flip stays within half the minimum distance 4
        let mut flipped = c.clone();
        flipped[0] ^= 1 << 5;
        let decoded = code.ml_decode(&flipped).unwrap();
        assert_eq!(decoded.message, 9);
        assert_eq!(decoded.distance, 1);
    }

    #[test]
    fn ml_decode_matches_brute_force_with_ties() {
        let code = rm_code(1, 3).unwrap();
        // exhaustive check on all 256 words, including many exact ties
        for w in 0..256u64 {
            let received = vec![w];
            let decoded = code.ml_decode(&received).unwrap();
            let mut best = (u32::MAX, u64::MAX);
            for msg in 0..16u64 {
                let d = hamming_distance(&code.codeword(msg), &received);
                if d < best.0 || (d == best.0 && msg < best.1) {
                    best = (d, msg);
                }
            }
            assert_eq!((decoded.distance, decoded.message), best, "word {w:#010b}");
        }
    }

    #[test]
    fn bsc_noiseless_and_reproducible() {
        let code = rm_code(1, 4).unwrap();
        let clean = bsc_block_error(&code, 0.0, 1000, 1).unwrap();
        assert_eq!(clean.errors, 0);
        let a = bsc_block_error(&code, 0.05, 2000, 42).unwrap();
        let b = bsc_block_error(&code, 0.05, 2000, 42).unwrap();
        assert_eq!(a, b);
    }

    /// Exact oracle for the repetition code: with the lowest-index tie rule,
    /// a decode error needs more than n/2 flips, so the block error rate is
    /// the binomial tail `P[wt > 16]` at n = 32.
    #[test]
    fn repetition_code_matches_binomial_tail() {
        let code = rm_code(0, 5).unwrap();
        let p: f64 = 0.3;
        let tail: f64 = (17..=32)
            .map(|j| {
                binomial(32, j).to_f64().unwrap() * p.powi(j as i32) * (1.0 - p).powi(32 - j as i32)
            })
            .sum();
        assert!((tail - 5.241_001_980_621_193e-3).abs() < 1e-15);
        let sim = bsc_block_error(&code, p, 50_000, 7).unwrap();
        assert!(
            sim.wilson99.contains(tail),
            "tail {tail} not in {:?}",
            sim.wilson99
        );
    }

    /// Exhaustive error-pattern oracle for RM(1,3): sum the probabilities of
    /// the 256 patterns on which some nonzero codeword is strictly closer.
    #[test]
    fn rm13_matches_exhaustive_error_pattern_sum() {
        let code = rm_code(1, 3).unwrap();
        let codewords: Vec<u64> = (0..16).map(|msg| code.codeword(msg)[0]).collect();
        for p in [0.05f64, 0.1] {
            let exact: f64 = (0..256u64)
                .map(|e| {
                    let werr = e.count_ones();
                    let beaten = codewords[1..].iter().any(|&c| (c ^ e).count_ones() < werr);
                    if beaten {
                        p.powi(werr as i32) * (1.0 - p).powi(8 - werr as i32)
                    } else {
                        0.0
                    }
                })
                .sum();
            let sim = bsc_block_error(&code, p, 50_000, 11).unwrap();
            assert!(
                sim.wilson99.contains(exact),
                "p={p}: exact {exact} not in {:?}",
                sim.wilson99
            );
        }
    }

    #[test]
    fn weight_bound_report_rm13() {
        let report = weight_bound_report(&rm_code(1, 3).unwrap()).unwrap();
        assert!(report.doubly_transitive);
        assert_eq!(report.rows.len(), 9);
        let row4 = &report.rows[4];
        assert_eq!(row4.count, "14");
        assert!((row4.log2_count.unwrap() - 14f64.log2()).abs() < 1e-12);
        // R = 1/2: bound1 per unit is -log2(sqrt(2)-1), so 4 units is ~5.086
        assert!((row4.bound1_log2.unwrap() - 5.086_213_2).abs() < 1e-6);
        assert!(row4.gap1.unwrap() > 0.0);
        // zero rows are included with empty log2
        assert_eq!(report.rows[1].count, "0");
        assert!(report.rows[1].log2_count.is_none());
    }

    #[test]
    fn weight_bound_report_full_rate() {
        // R = 1 makes the first bound vacuous
        let report = weight_bound_report(&rm_code(3, 3).unwrap()).unwrap();
        assert!(report.rows.iter().all(|row| row.bound1_log2.is_none()));
    }

    #[test]
    fn family_report_members() {
        let report = family_threshold_report(&[(1, 3), (1, 4)], 0.05, 5_000, 123).unwrap();
        assert!((report.threshold - 0.478_054_874_069_926_95).abs() < 1e-12);
        assert_eq!(report.members[0].rate, 0.5);
        assert_eq!(report.members[1].rate, 0.3125);
        // rate 1/2 sits above the p=0.05 threshold 0.478; the flag reports it
        assert!(!report.members[0].below_threshold);
        assert!(report.members[1].below_threshold);
        assert!(report.nonincreasing_at_95);
    }

    #[test]
    fn family_report_rate_one_code() {
        let report = family_threshold_report(&[(2, 2)], 0.1, 500, 5).unwrap();
        assert_eq!(report.members[0].rate, 1.0);
        assert!(!report.members[0].below_threshold);
    }
}
