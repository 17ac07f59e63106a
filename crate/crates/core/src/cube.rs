//! Functions on the boolean cube `{0,1}^n` stored as dense `2^n` tables.
//!
//! Conventions shared by every module in this crate:
//!
//! - Coordinates are 0-indexed; coordinate `i` is bit `i` of the point index
//!   (coordinate 0 is the least significant bit).
//! - Norms are expectation-normalized: `‖f‖_q = (2^{-n} Σ_x f(x)^q)^{1/q}`
//!   under the uniform measure, with `q = ∞` giving the maximum. Counting
//!   measure norms are deliberately not offered.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on the cube dimension (a table of `2^24` doubles).
pub const MAX_DIMENSION: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum CubeError {
    #[error("dimension {0} exceeds the cap of {MAX_DIMENSION}")]
    DimensionTooLarge(usize),
    #[error("value table has length {got}, expected 2^{n} = {expected}")]
    LengthMismatch {
        n: usize,
        got: usize,
        expected: usize,
    },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("negative value {value} at index {index} (nonnegative table required)")]
    Negative { index: usize, value: f64 },
    #[error("coordinate {coord} out of range for dimension {n}")]
    CoordinateOutOfRange { coord: usize, n: usize },
    #[error("noise vector has length {got}, expected {expected}")]
    NoiseLengthMismatch { got: usize, expected: usize },
    #[error("noise rate {0} outside [0, 1/2]")]
    NoiseOutOfRange(f64),
    #[error("subset mask {mask:#x} has bits outside dimension {n}")]
    MaskOutOfRange { mask: u32, n: usize },
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("text format: {0}")]
    TextFormat(String),
}

/// Norm exponent: a finite `q ≥ 1` or `∞`.
///
/// Integer `q` is the proven regime; non-integer finite values are accepted
/// for exploration only and are flagged by [`Exponent::is_integer`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn integer(q: u32) -> Self {
        Exponent::Finite(q as f64)
    }

    pub fn is_integer(self) -> bool {
        match self {
            Exponent::Finite(q) => q.fract() == 0.0,
            Exponent::Infinity => true,
        }
    }

    /// The integer value when this is an exact integer exponent.
    pub fn as_integer(self) -> Option<u32> {
        match self {
            Exponent::Finite(q) if q.fract() == 0.0 && q >= 0.0 && q <= u32::MAX as f64 => {
                Some(q as u32)
            }
            _ => None,
        }
    }

    pub fn validate(self) -> Result<Self, CubeError> {
        match self {
            Exponent::Finite(q) if q.is_finite() && q >= 1.0 => Ok(self),
            Exponent::Infinity => Ok(self),
            Exponent::Finite(q) => Err(CubeError::InvalidExponent(format!("{q}"))),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = CubeError;

    fn from_str(s: &str) -> Result<Self, CubeError> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => t
                .parse::<f64>()
                .map_err(|_| CubeError::InvalidExponent(t.to_string()))
                .and_then(|q| Exponent::Finite(q).validate()),
        }
    }
}

/// A subset of the coordinate set `{0, ..., n-1}` as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsetMask(u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 32);
        SubsetMask(if n == 32 { u32::MAX } else { (1u32 << n) - 1 })
    }

    /// Validates that only bits `0..n` are set.
    pub fn from_bits(bits: u32, n: usize) -> Result<Self, CubeError> {
        if n < 32 && bits >> n != 0 {
            return Err(CubeError::MaskOutOfRange { mask: bits, n });
        }
        Ok(SubsetMask(bits))
    }

    pub fn from_coords(coords: &[usize], n: usize) -> Result<Self, CubeError> {
        let mut bits = 0u32;
        for &c in coords {
            if c >= n {
                return Err(CubeError::CoordinateOutOfRange { coord: c, n });
            }
            bits |= 1 << c;
        }
        Ok(SubsetMask(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, coord: usize) -> bool {
        coord < 32 && self.0 >> coord & 1 == 1
    }

    pub fn card(self) -> u32 {
        self.0.count_ones()
    }

    pub fn with(self, coord: usize) -> Self {
        SubsetMask(self.0 | 1 << coord)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Per-coordinate noise rates `ε_i ∈ [0, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVector(Vec<f64>);

impl NoiseVector {
    pub fn new(eps: Vec<f64>) -> Result<Self, CubeError> {
        for &e in &eps {
            if !(0.0..=0.5).contains(&e) {
                return Err(CubeError::NoiseOutOfRange(e));
            }
        }
        Ok(NoiseVector(eps))
    }

    /// The same rate on every coordinate.
    pub fn uniform(n: usize, eps: f64) -> Result<Self, CubeError> {
        Self::new(vec![eps; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }
}

/// A real-valued function on `{0,1}^n` as a dense table of `2^n` values.
///
/// Immutable after construction; all operations return new tables.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFunction {
    n: usize,
    values: Vec<f64>,
}

fn validate_table(n: usize, values: &[f64], strict_nonneg: bool) -> Result<(), CubeError> {
    if n > MAX_DIMENSION {
        return Err(CubeError::DimensionTooLarge(n));
    }
    let expected = 1usize << n;
    if values.len() != expected {
        return Err(CubeError::LengthMismatch {
            n,
            got: values.len(),
            expected,
        });
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(CubeError::NonFinite { index, value });
        }
        if strict_nonneg && value < 0.0 {
            return Err(CubeError::Negative { index, value });
        }
    }
    Ok(())
}

impl CubeFunction {
    /// Builds a function from its value table. Rejects length mismatches and
    /// non-finite entries; negative entries are allowed.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self, CubeError> {
        validate_table(n, &values, false)?;
        Ok(CubeFunction { n, values })
    }

    /// Strict constructor for theorem drivers: additionally rejects negative
    /// entries.
    pub fn new_nonnegative(n: usize, values: Vec<f64>) -> Result<Self, CubeError> {
        validate_table(n, &values, true)?;
        Ok(CubeFunction { n, values })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self, CubeError> {
        Self::new(n, vec![c; 1usize << n.min(MAX_DIMENSION)])
    }

    /// Product function `f(x) = Π_i factors[i][x_i]` from per-coordinate
    /// factors `(value at 0, value at 1)`.
    pub fn from_factors(factors: &[(f64, f64)]) -> Result<Self, CubeError> {
        let n = factors.len();
        if n > MAX_DIMENSION {
            return Err(CubeError::DimensionTooLarge(n));
        }
        let mut table = vec![0.0; 1usize << n];
        for (x, slot) in table.iter_mut().enumerate() {
            let mut prod = 1.0;
            for (i, &(v0, v1)) in factors.iter().enumerate() {
                prod *= if x >> i & 1 == 0 { v0 } else { v1 };
            }
            *slot = prod;
        }
        Self::new(n, table)
    }

    /// Indicator of the subcube `{x : x_i = b_i for (i, b_i) in fixed}`.
    /// With `normalize`, scaled so the mean is 1.
    pub fn subcube_indicator(
        n: usize,
        fixed: &[(usize, bool)],
        normalize: bool,
    ) -> Result<Self, CubeError> {
        if n > MAX_DIMENSION {
            return Err(CubeError::DimensionTooLarge(n));
        }
        let mut mask = 0usize;
        let mut pattern = 0usize;
        for &(coord, bit) in fixed {
            if coord >= n {
                return Err(CubeError::CoordinateOutOfRange { coord, n });
            }
            mask |= 1 << coord;
            if bit {
                pattern |= 1 << coord;
            } else {
                pattern &= !(1 << coord);
            }
        }
        let hit = if normalize {
            (1u64 << mask.count_ones()) as f64
        } else {
            1.0
        };
        let values = (0..1usize << n)
            .map(|x| if x & mask == pattern { hit } else { 0.0 })
            .collect();
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs_diff(&self, other: &CubeFunction) -> f64 {
        assert_eq!(self.n, other.n);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Expectation-normalized `ℓ_q` norm under the uniform measure.
    ///
    /// `norm(f, 1)` is the mean for nonnegative `f`; `q = ∞` is the maximum.
    pub fn norm(&self, q: Exponent) -> f64 {
        match q {
            Exponent::Infinity => self
                .values
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max),
            Exponent::Finite(q) => {
                let mean_pow = self.mean_power(q);
                mean_pow.powf(1.0 / q)
            }
        }
    }

    /// `E_x f(x)^q` for finite `q` (integer exponents use exact powers).
    pub fn mean_power(&self, q: f64) -> f64 {
        let sum: f64 = if q.fract() == 0.0 && (1.0..=64.0).contains(&q) {
            let qi = q as i32;
            self.values.iter().map(|v| v.powi(qi)).sum()
        } else {
            self.values.iter().map(|v| v.powf(q)).sum()
        };
        sum / self.values.len() as f64
    }

    /// Conditional expectation given the coordinates in `t`: averages over
    /// every coordinate outside `t`. The result depends only on coordinates
    /// in `t` and has the same mean.
    pub fn conditional_expectation(&self, t: SubsetMask) -> CubeFunction {
        let mut values = self.values.clone();
        for coord in 0..self.n {
            if !t.contains(coord) {
                average_coordinate(&mut values, coord);
            }
        }
        CubeFunction { n: self.n, values }
    }

    /// Applies noise `ε_i` on coordinate `i` only:
    /// `g(x) = (1-ε_i) f(x) + ε_i f(x ⊕ e_i)`.
    pub fn noise_coordinate(&self, coord: usize, eps: f64) -> Result<CubeFunction, CubeError> {
        if coord >= self.n {
            return Err(CubeError::CoordinateOutOfRange { coord, n: self.n });
        }
        if !(0.0..=0.5).contains(&eps) {
            return Err(CubeError::NoiseOutOfRange(eps));
        }
        let mut values = self.values.clone();
        mix_coordinate(&mut values, coord, eps);
        Ok(CubeFunction { n: self.n, values })
    }

    /// Noise operator in its defining convolution form: one pairwise-mixing
    /// pass per coordinate. Preserves the mean and nonnegativity.
    pub fn apply_noise(&self, eps: &NoiseVector) -> Result<CubeFunction, CubeError> {
        if eps.len() != self.n {
            return Err(CubeError::NoiseLengthMismatch {
                got: eps.len(),
                expected: self.n,
            });
        }
        let mut values = self.values.clone();
        for (coord, &e) in eps.rates().iter().enumerate() {
            mix_coordinate(&mut values, coord, e);
        }
        Ok(CubeFunction { n: self.n, values })
    }

    /// Noise operator in spectral form: Walsh-Hadamard transform, scale the
    /// coefficient of `S` by `Π_{i∈S} (1-2ε_i)`, transform back. Serves as an
    /// independent cross-check of [`CubeFunction::apply_noise`].
    pub fn apply_noise_spectral(&self, eps: &NoiseVector) -> Result<CubeFunction, CubeError> {
        if eps.len() != self.n {
            return Err(CubeError::NoiseLengthMismatch {
                got: eps.len(),
                expected: self.n,
            });
        }
        let mut coeffs = self.fourier_coefficients();
        for (s, c) in coeffs.iter_mut().enumerate() {
            let mut multiplier = 1.0;
            for (coord, &e) in eps.rates().iter().enumerate() {
                if s >> coord & 1 == 1 {
                    multiplier *= 1.0 - 2.0 * e;
                }
            }
            *c *= multiplier;
        }
        walsh_hadamard(&mut coeffs);
        Ok(CubeFunction {
            n: self.n,
            values: coeffs,
        })
    }

    /// Fourier coefficients over the characters `χ_S(x) = (-1)^{|S∩x|}` with
    /// the expectation inner product: `f̂(S) = 2^{-n} Σ_x f(x) χ_S(x)`.
    pub fn fourier_coefficients(&self) -> Vec<f64> {
        let mut coeffs = self.values.clone();
        walsh_hadamard(&mut coeffs);
        let scale = 1.0 / self.values.len() as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        coeffs
    }

    /// Text format: first line `n`, then `2^n` whitespace-separated values in
    /// index order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CubeError> {
        let mut tokens = text.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| CubeError::TextFormat("empty input".into()))?
            .parse()
            .map_err(|e| CubeError::TextFormat(format!("bad dimension: {e}")))?;
        let values: Vec<f64> = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| CubeError::TextFormat(format!("bad value {t:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        Self::new(n, values)
    }
}

/// In-place pairwise mix along one coordinate:
/// `v[x] <- (1-eps) v[x] + eps v[x ^ e_coord]`.
fn mix_coordinate(values: &mut [f64], coord: usize, eps: f64) {
    let stride = 1usize << coord;
    let mut base = 0;
    while base < values.len() {
        for offset in base..base + stride {
            let lo = values[offset];
            let hi = values[offset + stride];
            values[offset] = (1.0 - eps) * lo + eps * hi;
            values[offset + stride] = (1.0 - eps) * hi + eps * lo;
        }
        base += stride << 1;
    }
}

/// In-place averaging along one coordinate: both fiber endpoints receive the
/// fiber mean.
fn average_coordinate(values: &mut [f64], coord: usize) {
    let stride = 1usize << coord;
    let mut base = 0;
    while base < values.len() {
        for offset in base..base + stride {
            let avg = 0.5 * (values[offset] + values[offset + stride]);
            values[offset] = avg;
            values[offset + stride] = avg;
        }
        base += stride << 1;
    }
}

/// In-place unnormalized Walsh-Hadamard transform (self-inverse up to `2^n`).
pub fn walsh_hadamard(values: &mut [f64]) {
    debug_assert!(values.len().is_power_of_two());
    let mut half = 1;
    while half < values.len() {
        let step = half << 1;
        let mut base = 0;
        while base < values.len() {
            for offset in base..base + half {
                let a = values[offset];
                let b = values[offset + half];
                values[offset] = a + b;
                values[offset + half] = a - b;
            }
            base += step;
        }
        half = step;
    }
}
