//! Binary matroids presented by GF(2) generator matrices, with the
//! rank-deficit bound `log₂ E_{S∼p} 2^{|S|-r(S)} ≤ E_{T∼t} (|T| - r(T))`
//! at `t = log₂(1+p)`, which holds with equality for coordinate subspaces.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cube::SubsetMask;

/// Exact enumeration walks all `2^n` subsets; beyond this use sampling.
pub const EXACT_MAX_COLUMNS: usize = 22;
/// Columns are packed into `u32` words (and subsets into [`SubsetMask`]).
pub const MAX_COLUMNS: usize = 32;
pub const MAX_ROWS: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum MatroidError {
    #[error("{0} columns exceed the representation cap of {MAX_COLUMNS}")]
    TooManyColumns(usize),
    #[error("{0} rows exceed the representation cap of {MAX_ROWS}")]
    TooManyRows(usize),
    #[error("row {row} has bits outside the {n} columns")]
    RowOutOfRange { row: usize, n: usize },
    #[error("{n} columns exceed the exact-enumeration cap {cap}: use sampled mode")]
    TooLargeForExact { n: usize, cap: usize },
    #[error("p = {0} outside [0, 1]")]
    BadP(f64),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("text format: {0}")]
    TextFormat(String),
}

/// Column matroid of a GF(2) generator matrix: `n` ground-set elements
/// (columns) and `k` generator rows, each packed into a `u32`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatroid {
    n: usize,
    rows: Vec<u32>,
    /// Column vectors: bit `i` of `cols[j]` is row `i`'s entry in column `j`.
    cols: Vec<u32>,
}

impl BinaryMatroid {
    pub fn new(n: usize, rows: Vec<u32>) -> Result<Self, MatroidError> {
        if n > MAX_COLUMNS {
            return Err(MatroidError::TooManyColumns(n));
        }
        if rows.len() > MAX_ROWS {
            return Err(MatroidError::TooManyRows(rows.len()));
        }
        let col_mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        for (row, &bits) in rows.iter().enumerate() {
            if bits & !col_mask != 0 {
                return Err(MatroidError::RowOutOfRange { row, n });
            }
        }
        let cols = (0..n)
            .map(|j| {
                rows.iter()
                    .enumerate()
                    .fold(0u32, |acc, (i, &r)| acc | ((r >> j & 1) << i))
            })
            .collect();
        Ok(BinaryMatroid { n, rows, cols })
    }

    /// The zero code: no generator rows, rank identically zero.
    pub fn zero_code(n: usize) -> Result<Self, MatroidError> {
        Self::new(n, Vec::new())
    }

    pub fn identity(n: usize) -> Result<Self, MatroidError> {
        Self::new(n, (0..n).map(|i| 1u32 << i).collect())
    }

    /// Coordinate subspace spanned by the standard basis vectors on
    /// `support`; the code whose normalized indicator is a subcube
    /// indicator. `support = full` gives the identity, `support = ∅` the
    /// zero code.
    pub fn coordinate_subspace(n: usize, support: SubsetMask) -> Result<Self, MatroidError> {
        let rows = (0..n)
            .filter(|&i| support.contains(i))
            .map(|i| 1u32 << i)
            .collect();
        Self::new(n, rows)
    }

    /// Uniformly random `k x n` generator, reproducible per seed.
    pub fn random(k: usize, n: usize, seed: u64) -> Result<Self, MatroidError> {
        if k > MAX_ROWS {
            return Err(MatroidError::TooManyRows(k));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let col_mask = if n == 32 {
            u32::MAX
        } else {
            (1u32 << n.min(32)) - 1
        };
        let rows = (0..k).map(|_| rng.gen::<u32>() & col_mask).collect();
        Self::new(n, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    /// GF(2) rank of the column submatrix indexed by `s`.
    pub fn rank(&self, s: SubsetMask) -> u32 {
        let mut basis = [0u32; MAX_ROWS];
        let mut rank = 0;
        for j in 0..self.n {
            if s.contains(j) && insert_into_basis(&mut basis, self.cols[j]) {
                rank += 1;
            }
        }
        rank
    }

    /// `|S| - r(S)`.
    pub fn nullity(&self, s: SubsetMask) -> u32 {
        s.card() - self.rank(s)
    }

    /// Nullities `|S| - r(S)` for every subset, indexed by mask.
    ///
    /// Walks the subsets in Gray-code order: adding a column updates the
    /// elimination state incrementally; removing one rebuilds the basis from
    /// the remaining columns (correctness, not speed, is what tests assert).
    pub fn nullities_all(&self) -> Result<Vec<u8>, MatroidError> {
        if self.n > EXACT_MAX_COLUMNS {
            return Err(MatroidError::TooLargeForExact {
                n: self.n,
                cap: EXACT_MAX_COLUMNS,
            });
        }
        let size = 1usize << self.n;
        let mut out = vec![0u8; size];
        let mut basis = [0u32; MAX_ROWS];
        let mut rank = 0u32;
        let mut subset = 0usize;
        for step in 1..size {
            let coord = step.trailing_zeros() as usize;
            if subset >> coord & 1 == 0 {
                subset |= 1 << coord;
                if insert_into_basis(&mut basis, self.cols[coord]) {
                    rank += 1;
                }
            } else {
                subset &= !(1 << coord);
                basis = [0u32; MAX_ROWS];
                rank = 0;
                for j in 0..self.n {
                    if subset >> j & 1 == 1 && insert_into_basis(&mut basis, self.cols[j]) {
                        rank += 1;
                    }
                }
            }
            out[subset] = (subset.count_ones() - rank) as u8;
        }
        Ok(out)
    }

    /// Text format: `k n` header, then `k` rows of `n` characters in `{0,1}`
    /// (leftmost character is column 0).
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows.len(), self.n);
        for &row in &self.rows {
            for j in 0..self.n {
                out.push(if row >> j & 1 == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, MatroidError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| MatroidError::TextFormat("empty input".into()))?;
        let mut parts = header.split_whitespace();
        let parse = |part: Option<&str>, what: &str| {
            part.ok_or_else(|| MatroidError::TextFormat(format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| MatroidError::TextFormat(format!("bad {what}: {e}")))
        };
        let k = parse(parts.next(), "row count")?;
        let n = parse(parts.next(), "column count")?;
        let mut rows = Vec::with_capacity(k);
        for _ in 0..k {
            let line = lines
                .next()
                .ok_or_else(|| MatroidError::TextFormat(format!("expected {k} rows")))?
                .trim();
            if line.len() != n {
                return Err(MatroidError::TextFormat(format!(
                    "row {:?} has {} characters, expected {n}",
                    line,
                    line.len()
                )));
            }
            let mut bits = 0u32;
            for (j, ch) in line.chars().enumerate() {
                match ch {
                    '1' => bits |= 1 << j,
                    '0' => {}
                    other => {
                        return Err(MatroidError::TextFormat(format!("bad character {other:?}")))
                    }
                }
            }
            rows.push(bits);
        }
        Self::new(n, rows)
    }
}

/// Reduce `v` against the basis; insert and report true if independent.
fn insert_into_basis(basis: &mut [u32; MAX_ROWS], mut v: u32) -> bool {
    while v != 0 {
        let lead = 31 - v.leading_zeros() as usize;
        if basis[lead] == 0 {
            basis[lead] = v;
            return true;
        }
        v ^= basis[lead];
    }
    false
}

/// How an expectation is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EvalMode {
    Exact,
    Sampled { trials: u64, seed: u64 },
}

/// Monte Carlo side information for a sampled estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleInfo {
    /// Sample mean of the underlying expectation (pre-log for the
    /// left-hand side, whose reported value is log₂ of this mean and
    /// therefore carries the usual log-of-mean bias).
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

fn check_p(p: f64) -> Result<(), MatroidError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(MatroidError::BadP(p))
    }
}

/// Inclusion-probability weights `w_j = p^j (1-p)^{n-j}` by subset size.
fn size_weights(n: usize, p: f64) -> Vec<f64> {
    (0..=n)
        .map(|j| p.powi(j as i32) * (1.0 - p).powi((n - j) as i32))
        .collect()
}

/// `log₂ E_{S∼p} 2^{|S| - r(S)}`.
pub fn matroid_lhs(
    m: &BinaryMatroid,
    p: f64,
    mode: EvalMode,
) -> Result<(f64, Option<SampleInfo>), MatroidError> {
    check_p(p)?;
    match mode {
        EvalMode::Exact => {
            let nullities = m.nullities_all()?;
            let by_size = size_weights(m.n(), p);
            let sum: f64 = nullities
                .iter()
                .enumerate()
                .map(|(s, &nu)| by_size[s.count_ones() as usize] * (nu as f64).exp2())
                .sum();
            Ok((sum.log2(), None))
        }
        EvalMode::Sampled { trials, seed } => {
            let samples = sample_subsets(m, p, trials, seed)?
                .into_iter()
                .map(|s| (m.nullity(s) as f64).exp2())
                .collect::<Vec<_>>();
            let (mean, stderr) = mean_stderr(&samples);
            Ok((
                mean.log2(),
                Some(SampleInfo {
                    mean,
                    stderr,
                    trials,
                }),
            ))
        }
    }
}

/// `E_{T∼t} (|T| - r(T))`.
pub fn matroid_rhs(
    m: &BinaryMatroid,
    t: f64,
    mode: EvalMode,
) -> Result<(f64, Option<SampleInfo>), MatroidError> {
    check_p(t)?;
    match mode {
        EvalMode::Exact => {
            let nullities = m.nullities_all()?;
            let by_size = size_weights(m.n(), t);
            let sum: f64 = nullities
                .iter()
                .enumerate()
                .map(|(s, &nu)| by_size[s.count_ones() as usize] * nu as f64)
                .sum();
            Ok((sum, None))
        }
        EvalMode::Sampled { trials, seed } => {
            let samples = sample_subsets(m, t, trials, seed)?
                .into_iter()
                .map(|s| m.nullity(s) as f64)
                .collect::<Vec<_>>();
            let (mean, stderr) = mean_stderr(&samples);
            Ok((
                mean,
                Some(SampleInfo {
                    mean,
                    stderr,
                    trials,
                }),
            ))
        }
    }
}

fn sample_subsets(
    m: &BinaryMatroid,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<SubsetMask>, MatroidError> {
    if trials == 0 {
        return Err(MatroidError::NoTrials);
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..trials)
        .map(|trial| {
            let mut rng = base.clone();
            rng.set_stream(trial);
            let mut bits = 0u32;
            for i in 0..m.n() {
                if rng.gen::<f64>() < p {
                    bits |= 1 << i;
                }
            }
            SubsetMask::from_bits(bits, m.n()).expect("mask within dimension")
        })
        .collect())
}

fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One evaluated instance of the rank-deficit bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatroidCase {
    pub description: String,
    pub p: f64,
    /// `t = log₂(1+p)`.
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lhs_sample: Option<SampleInfo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rhs_sample: Option<SampleInfo>,
    pub margin: f64,
    pub pass: bool,
    pub equality: bool,
}

/// Evaluates both sides exactly and reports the margin; equality is flagged
/// below `equality_tol` (coordinate subspaces sit at machine precision).
pub fn verify_matroid(
    m: &BinaryMatroid,
    p: f64,
    tol: f64,
    equality_tol: f64,
) -> Result<MatroidCase, MatroidError> {
    let t = (1.0 + p).log2();
    let (lhs, _) = matroid_lhs(m, p, EvalMode::Exact)?;
    let (rhs, _) = matroid_rhs(m, t, EvalMode::Exact)?;
    let margin = rhs - lhs;
    Ok(MatroidCase {
        description: format!("k={} n={} p={p}", m.k(), m.n()),
        p,
        t,
        lhs,
        rhs,
        lhs_sample: None,
        rhs_sample: None,
        margin,
        pass: margin >= -tol,
        equality: margin.abs() <= equality_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn mask(bits: u32, n: usize) -> SubsetMask {
        SubsetMask::from_bits(bits, n).unwrap()
    }

    #[test]
    fn rank_examples() {
        let id3 = BinaryMatroid::identity(3).unwrap();
        assert_eq!(id3.rank(mask(0b101, 3)), 2);
        assert_eq!(id3.rank(SubsetMask::EMPTY), 0);
        assert_eq!(id3.rank(SubsetMask::full(3)), 3);
        // duplicated column: parallel elements
        let dup = BinaryMatroid::new(2, vec![0b11]).unwrap();
        assert_eq!(dup.rank(SubsetMask::full(2)), 1);
        let zero = BinaryMatroid::zero_code(4).unwrap();
        assert_eq!(zero.rank(SubsetMask::full(4)), 0);
    }

    #[test]
    fn constructor_validation() {
        assert_eq!(
            BinaryMatroid::new(2, vec![0b100]),
            Err(MatroidError::RowOutOfRange { row: 0, n: 2 })
        );
        assert_eq!(
            BinaryMatroid::new(33, vec![]),
            Err(MatroidError::TooManyColumns(33))
        );
    }

    #[test]
    fn random_full_rank_instance() {
        // about 30% of 5x5 generators are full rank; elimination confirms one
        let seed = (0..50u64)
            .find(|&s| {
                BinaryMatroid::random(5, 5, s)
                    .unwrap()
                    .rank(SubsetMask::full(5))
                    == 5
            })
            .expect("a full-rank seed among the first 50");
        let m = BinaryMatroid::random(5, 5, seed).unwrap();
        assert_eq!(m.rank(SubsetMask::full(5)), 5);
        assert_eq!(m, BinaryMatroid::random(5, 5, seed).unwrap());
    }

    #[test]
    fn gray_code_sweep_matches_direct_rank() {
        for seed in 0..10 {
            let m = BinaryMatroid::random(4, 9, seed).unwrap();
            let nullities = m.nullities_all().unwrap();
            for bits in 0..1u32 << 9 {
                let s = mask(bits, 9);
                assert_eq!(
                    nullities[bits as usize] as u32,
                    m.nullity(s),
                    "seed={seed} S={bits:b}"
                );
            }
        }
    }

    /// Independent oracle: `2^{|S|-r(S)}` counts the dual-kernel vectors
    /// supported inside `S`. The kernel is enumerated from scratch here.
    #[test]
    fn nullity_counts_kernel_vectors() {
        for seed in 0..8 {
            let m = BinaryMatroid::random(3, 7, seed).unwrap();
            let kernel: Vec<u32> = (0..1u32 << 7)
                .filter(|&v| m.rows().iter().all(|&row| (row & v).count_ones() % 2 == 0))
                .collect();
            for bits in 0..1u32 << 7 {
                let inside = kernel.iter().filter(|&&v| v & !bits == 0).count();
                assert_eq!(
                    inside,
                    1usize << m.nullity(mask(bits, 7)),
                    "seed={seed} S={bits:b}"
                );
            }
        }
    }

    #[test]
    fn closed_form_cases() {
        let p = 0.3;
        let t = 1.3f64.log2();
        let id = BinaryMatroid::identity(5).unwrap();
        let (lhs, _) = matroid_lhs(&id, p, EvalMode::Exact).unwrap();
        let (rhs, _) = matroid_rhs(&id, t, EvalMode::Exact).unwrap();
        assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-12);

        let zero = BinaryMatroid::zero_code(5).unwrap();
        let (lhs_z, _) = matroid_lhs(&zero, p, EvalMode::Exact).unwrap();
        let (rhs_z, _) = matroid_rhs(&zero, t, EvalMode::Exact).unwrap();
        assert!((lhs_z - 5.0 * t).abs() < 1e-12);
        assert!((rhs_z - 5.0 * t).abs() < 1e-12);

        let sub = BinaryMatroid::coordinate_subspace(6, mask(0b001011, 6)).unwrap();
        let (lhs_s, _) = matroid_lhs(&sub, p, EvalMode::Exact).unwrap();
        let (rhs_s, _) = matroid_rhs(&sub, t, EvalMode::Exact).unwrap();
        assert!((lhs_s - 3.0 * t).abs() < 1e-12);
        assert!((rhs_s - 3.0 * t).abs() < 1e-12);
    }

    #[test]
    fn verify_examples() {
        // coordinate subspace: equality
        let sub = BinaryMatroid::coordinate_subspace(5, mask(0b00110, 5)).unwrap();
        let case = verify_matroid(&sub, 0.3, 1e-9, 1e-12).unwrap();
        assert!(case.pass && case.equality, "margin {}", case.margin);

        // p = 0: both sides 0
        let m = BinaryMatroid::random(3, 6, 1).unwrap();
        let case0 = verify_matroid(&m, 0.0, 1e-9, 1e-12).unwrap();
        assert_eq!(case0.lhs, 0.0);
        assert_eq!(case0.rhs, 0.0);

        // p = 1 degenerates to the full set on both sides
        let case1 = verify_matroid(&m, 1.0, 1e-9, 1e-12).unwrap();
        assert!((case1.t - 1.0).abs() < 1e-15);
        assert!(case1.pass);

        // random instances: the bound itself
        for seed in 0..30 {
            let m = BinaryMatroid::random(4, 8, seed).unwrap();
            for p in [0.1, 0.5, 0.9] {
                let case = verify_matroid(&m, p, 1e-9, 1e-12).unwrap();
                assert!(case.pass, "seed={seed} p={p} margin={}", case.margin);
            }
        }
    }

    #[test]
    fn sampled_agrees_with_exact() {
        let m = BinaryMatroid::random(5, 10, 12).unwrap();
        let p = 0.4;
        let t = 1.4f64.log2();
        let (lhs_exact, _) = matroid_lhs(&m, p, EvalMode::Exact).unwrap();
        let (_, info) = matroid_lhs(
            &m,
            p,
            EvalMode::Sampled {
                trials: 20_000,
                seed: 5,
            },
        )
        .unwrap();
        let info = info.unwrap();
        // compare pre-log means: the exact mean is 2^lhs
        assert!(
            (info.mean - lhs_exact.exp2()).abs() <= 4.0 * info.stderr,
            "mean {} vs {}",
            info.mean,
            lhs_exact.exp2()
        );
        let (rhs_exact, _) = matroid_rhs(&m, t, EvalMode::Exact).unwrap();
        let (rhs_sampled, rhs_info) = matroid_rhs(
            &m,
            t,
            EvalMode::Sampled {
                trials: 20_000,
                seed: 6,
            },
        )
        .unwrap();
        assert!((rhs_sampled - rhs_exact).abs() <= 4.0 * rhs_info.unwrap().stderr);
    }

    #[test]
    fn text_round_trip() {
        let m = BinaryMatroid::random(3, 7, 9).unwrap();
        let parsed = BinaryMatroid::from_text(&m.to_text()).unwrap();
        assert_eq!(parsed, m);
        assert!(BinaryMatroid::from_text("2 3\n010\n").is_err());
        assert!(BinaryMatroid::from_text("1 3\n01x\n").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn rank_axioms(seed in 0u64..1000, k in 0usize..=6, n in 1usize..=12) {
            let m = BinaryMatroid::random(k, n, seed).unwrap();
            prop_assert_eq!(m.rank(SubsetMask::EMPTY), 0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b9);
            for _ in 0..16 {
                let s = mask(rng.gen::<u32>() & ((1 << n) - 1), n);
                let t = mask(rng.gen::<u32>() & ((1 << n) - 1), n);
                let e = rng.gen_range(0..n);
                let rs = m.rank(s);
                // unit increase and monotonicity
                let rse = m.rank(s.with(e));
                prop_assert!(rse == rs || rse == rs + 1);
                // submodularity
                let union = mask(s.bits() | t.bits(), n);
                let inter = mask(s.bits() & t.bits(), n);
                prop_assert!(m.rank(union) + m.rank(inter) <= rs + m.rank(t));
                // bounds
                prop_assert!(rs <= s.card().min(m.k() as u32));
            }
        }
    }
}
