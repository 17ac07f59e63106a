//! Verification toolkit for noise-operator norm inequalities on the boolean cube.
//!
//! The toolkit evaluates both sides of the margin inequality
//! `log ‖T_ε f‖_q ≤ E_{T∼λ} log ‖E(f|T)‖_q` by brute force at desk scale,
//! certifies the combinatorial identities behind the one-dimensional case with
//! exact big-integer arithmetic, and exercises the two coding-theoretic
//! applications (a binary matroid rank bound and the Reed-Muller rate
//! threshold on the binary symmetric channel) numerically.
//!
//! Module map:
//!
//! - [`cube`] — functions on `{0,1}^n`: norms, conditional expectations, and
//!   the noise operator in convolution and spectral form.
//! - [`margin`] — both sides of the margin inequality, the `λ(q,ε)` parameter
//!   formulas, and randomized/exhaustive verification drivers.
//! - [`onedim`] — the two-point inequality and its concavity reduction.
//! - [`cert`] — exact arbitrary-precision certification of the coefficient
//!   nonnegativity argument for any integer `q ≥ 2`.
//! - [`matroid`] — binary matroids over GF(2) and the rank-deficit bound.
//! - [`rm`] — Reed-Muller codes, weight distributions, the BSC rate
//!   threshold, and maximum-likelihood decoding simulations.
//! - [`report`] / [`runner`] — machine-readable reports and the command
//!   dispatch used by the CLI.

pub mod cert;
pub mod cube;
pub mod margin;
pub mod matroid;
pub mod onedim;
pub mod report;
pub mod rm;
pub mod runner;
pub mod stats;

pub use cube::{CubeFunction, Exponent, NoiseVector, SubsetMask};
pub use margin::{MarginProfile, VerificationCase};
