//! The two-point inequality `‖f_ε‖_q ≤ ‖f‖₁^{1-λ} ‖f‖_q^λ` on `{0,1}` and
//! its analytic reduction.
//!
//! With `‖f‖₁ = 1` the function is `(1-x, 1+x)` for some `x ∈ [0,1]` and the
//! inequality becomes `L((1-2ε)x) ≤ λ(q,ε) · L(x)` where
//! `L(y) = ln(((1-y)^q + (1+y)^q)/2)` is the log q-th moment. Writing
//! `L` in log coordinates, `z ↦ ln L(e^z)`, turns the statement into
//! concavity of that curve, which this module checks by finite differences
//! (the exact certificate lives in [`crate::cert`]).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cube::Exponent;
use crate::margin::{lambda_for, MarginError, VerificationCase, DEFAULT_EQUALITY_TOL};

/// Default lower bound for the log coordinate; far above f64 underflow but
/// deep enough that the asymptotic direction is covered by monotonicity.
pub const DEFAULT_Z_FLOOR: f64 = -30.0;
/// Default finite-difference step for the concavity check.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Default ceiling for the central second difference (truncation plus
/// cancellation at step 1e-3 stays well below this).
pub const DEFAULT_CONCAVITY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OneDimError {
    #[error("x = {0} outside [0, 1]")]
    BadX(f64),
    #[error("eps = {0} outside [0, 1/2]")]
    BadEps(f64),
    #[error("q = {0} is below 2")]
    QTooSmall(u32),
    #[error("exponent {0} must be an integer >= 2 or inf")]
    BadExponent(String),
    #[error("z = {z} below the underflow floor {floor}")]
    BelowFloor { z: f64, floor: f64 },
    #[error(transparent)]
    Margin(#[from] MarginError),
}

/// `ln(((1-y)^q + (1+y)^q)/2)` for integer `q ≥ 2`, evaluated through the
/// even-power binomial series `ln1p(Σ_{j≥2 even} C(q,j) y^j)`.
///
/// The series has only positive terms, so the value keeps full relative
/// precision even for tiny `y` where the direct form would collapse to
/// `ln(1 + tiny)`. Zero at `y = 0`, increasing on `[0, 1]`.
pub fn log_moment(q: u32, y: f64) -> f64 {
    assert!(q >= 2, "log_moment needs q >= 2, got {q}");
    assert!(
        (0.0..=1.0 + 1e-9).contains(&y) || y.is_finite(),
        "y out of range: {y}"
    );
    let y2 = y * y;
    // Descending Horner over c_j = C(q, j) for even j.
    let top = q - (q % 2);
    let mut acc = 0.0;
    let mut j = top;
    while j >= 2 {
        acc = binomial_f64(q, j) + y2 * acc;
        j -= 2;
    }
    (y2 * acc).ln_1p()
}

fn binomial_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 1..=k {
        c = c * (n - k + i) as f64 / i as f64;
    }
    c
}

/// The log-coordinate curve `z ↦ ln(log_moment(q, e^z))` on `[floor, 0]`,
/// whose concavity is equivalent to the two-point inequality.
pub fn log_moment_logscale(q: u32, z: f64, floor: f64) -> Result<f64, OneDimError> {
    if z < floor {
        return Err(OneDimError::BelowFloor { z, floor });
    }
    Ok(log_moment(q, z.exp()).ln())
}

/// Central second difference of the log-coordinate curve, computed from
/// moment ratios so that cancellation stays at the `1e-16` level:
/// `(ln(L₊/L₀) + ln(L₋/L₀)) / step²`.
///
/// At `z = 0` the stencil peeks past the boundary; the series extends the
/// curve smoothly there.
pub fn second_difference(q: u32, z: f64, step: f64) -> f64 {
    let l0 = log_moment(q, z.exp());
    let lp = log_moment(q, (z + step).exp());
    let lm = log_moment(q, (z - step).exp());
    ((lp / l0).ln() + (lm / l0).ln()) / (step * step)
}

fn check_x(x: f64) -> Result<(), OneDimError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(OneDimError::BadX(x))
    }
}

fn check_eps(eps: f64) -> Result<(), OneDimError> {
    if (0.0..=0.5).contains(&eps) {
        Ok(())
    } else {
        Err(OneDimError::BadEps(eps))
    }
}

/// Checks the two-point inequality at one `(q, ε, x)`.
///
/// For finite `q` both sides are in log-moment units, `L((1-2ε)x) ≤ λ L(x)`
/// (a factor `q` above log-norm units, which cancels from the ratio). For
/// `q = ∞` the max norm is used directly: `ln(1+(1-2ε)x) ≤ λ ln(1+x)`.
pub fn check_onedim_inequality(
    q: Exponent,
    eps: f64,
    x: f64,
    tol: f64,
) -> Result<VerificationCase, OneDimError> {
    check_x(x)?;
    check_eps(eps)?;
    let (lhs, rhs) = match q {
        Exponent::Infinity => {
            let lambda = lambda_for(Exponent::Infinity, eps)?;
            (((1.0 - 2.0 * eps) * x).ln_1p(), lambda * x.ln_1p())
        }
        Exponent::Finite(_) => {
            let qi = q
                .as_integer()
                .filter(|&qi| qi >= 2)
                .ok_or_else(|| OneDimError::BadExponent(q.to_string()))?;
            let lambda = lambda_for(q, eps)?;
            (
                log_moment(qi, (1.0 - 2.0 * eps) * x),
                lambda * log_moment(qi, x),
            )
        }
    };
    let mut case = VerificationCase::evaluated(
        format!("one-dim q={q} eps={eps} x={x}"),
        lhs,
        rhs,
        None,
        tol,
        DEFAULT_EQUALITY_TOL,
    );
    if let Some(qi) = q.as_integer() {
        if q != Exponent::Infinity && qi % 2 == 1 {
            case.note = Some("odd integer exponent".into());
        }
    }
    Ok(case)
}

/// Checks the ratio form `L((1-2ε)x)/L(x) ≤ L(1-2ε)/L(1)` on a grid in
/// `(0, 1]`; equivalent to the inequality at `‖f‖₁ = 1`.
pub fn check_ratio_monotone(
    q: u32,
    eps: f64,
    x_grid: &[f64],
    tol: f64,
) -> Result<Vec<VerificationCase>, OneDimError> {
    if q < 2 {
        return Err(OneDimError::QTooSmall(q));
    }
    check_eps(eps)?;
    let bound = if eps == 0.0 {
        1.0
    } else {
        log_moment(q, 1.0 - 2.0 * eps) / log_moment(q, 1.0)
    };
    x_grid
        .iter()
        .map(|&x| {
            if !(x > 0.0 && x <= 1.0) {
                return Err(OneDimError::BadX(x));
            }
            let ratio = log_moment(q, (1.0 - 2.0 * eps) * x) / log_moment(q, x);
            Ok(VerificationCase::evaluated(
                format!("ratio q={q} eps={eps} x={x}"),
                ratio,
                bound,
                None,
                tol,
                DEFAULT_EQUALITY_TOL,
            ))
        })
        .collect()
}

/// One sampled point of the concavity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityPoint {
    pub z: f64,
    pub g: f64,
    pub second_difference: f64,
    pub pass: bool,
}

/// Result of [`check_concavity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub q: u32,
    pub points: Vec<ConcavityPoint>,
    pub max_second_difference: f64,
    /// `ln(1+u) - u ≤ 0` at `u = e^{2z}` over the grid; only for `q = 2`,
    /// where the second derivative has this closed-form sign.
    pub closed_form_ok: Option<bool>,
    /// `G(0) + G(a+b) ≤ G(a) + G(b)` on random `(ε, x)` pairs with
    /// `a = ln(1-2ε)`, `b = ln x`.
    pub superadditivity_ok: bool,
    pub all_ok: bool,
}

/// Concavity evidence for the log-coordinate curve: central second
/// differences below `tol` on the grid, the q=2 closed-form sign, and the
/// two-point superadditivity form on seeded random pairs.
pub fn check_concavity(
    q: u32,
    z_grid: &[f64],
    step: f64,
    tol: f64,
    seed: u64,
) -> Result<ConcavityReport, OneDimError> {
    if q < 2 {
        return Err(OneDimError::QTooSmall(q));
    }
    let mut max_d2 = f64::NEG_INFINITY;
    let mut points = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        if z - step < DEFAULT_Z_FLOOR {
            return Err(OneDimError::BelowFloor {
                z: z - step,
                floor: DEFAULT_Z_FLOOR,
            });
        }
        let d2 = second_difference(q, z, step);
        let g = log_moment(q, z.exp()).ln();
        max_d2 = max_d2.max(d2);
        points.push(ConcavityPoint {
            z,
            g,
            second_difference: d2,
            pass: d2 <= tol,
        });
    }

    let closed_form_ok = (q == 2).then(|| {
        z_grid.iter().all(|&z| {
            let u = (2.0 * z).exp();
            u.ln_1p() - u <= 0.0
        })
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut superadditivity_ok = true;
    for _ in 0..200 {
        let eps: f64 = rng.gen_range(0.001..0.499);
        let x: f64 = rng.gen_range(0.001..1.0);
        let a = (1.0 - 2.0 * eps).ln();
        let b = x.ln();
        if a + b < DEFAULT_Z_FLOOR {
            continue;
        }
        let g = |z: f64| log_moment(q, z.exp()).ln();
        if g(0.0) + g(a + b) > g(a) + g(b) + 1e-10 {
            superadditivity_ok = false;
        }
    }

    let all_ok =
        points.iter().all(|p| p.pass) && closed_form_ok.unwrap_or(true) && superadditivity_ok;
    Ok(ConcavityReport {
        q,
        points,
        max_second_difference: max_d2,
        closed_form_ok,
        superadditivity_ok,
        all_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{CubeFunction, NoiseVector};
    use crate::margin;
    use crate::stats::linspace;

    #[test]
    fn log_moment_values() {
        assert_eq!(log_moment(2, 0.0), 0.0);
        assert!((log_moment(2, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((log_moment(2, 0.5) - 1.25f64.ln()).abs() < 1e-15);
        // q = 3: ((1-y)^3 + (1+y)^3)/2 = 1 + 3y^2
        assert!((log_moment(3, 0.5) - 1.75f64.ln()).abs() < 1e-15);
        // tiny y keeps relative precision: L(y) ~ q(q-1)/2 y^2
        let y = 1e-12;
        assert!((log_moment(2, y) / (y * y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_moment_increasing() {
        for q in 2..=12 {
            let mut prev = -1.0;
            for y in linspace(0.0, 1.0, 101) {
                let v = log_moment(q, y);
                assert!(v >= prev, "q={q} y={y}");
                prev = v;
            }
        }
    }

    #[test]
    fn logscale_values() {
        let g0 = log_moment_logscale(2, 0.0, DEFAULT_Z_FLOOR).unwrap();
        assert!((g0 - (-0.366_512_920_581_664_35)).abs() < 1e-14);
        let gh = log_moment_logscale(2, 0.5f64.ln(), DEFAULT_Z_FLOOR).unwrap();
        assert!((gh - (-1.499_939_986_759_515_6)).abs() < 1e-14);
        assert!(matches!(
            log_moment_logscale(2, -31.0, DEFAULT_Z_FLOOR),
            Err(OneDimError::BelowFloor { .. })
        ));
        // increasing in z, unbounded below
        let grid = linspace(-28.0, 0.0, 57);
        let vals: Vec<f64> = grid
            .iter()
            .map(|&z| log_moment_logscale(2, z, DEFAULT_Z_FLOOR).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
        assert!(vals[0] < -50.0);
    }

    #[test]
    fn inequality_tight_at_endpoints() {
        // x = 1: L(1-2e) = lambda(q,e) L(1) exactly
        let case = check_onedim_inequality(Exponent::integer(2), 0.25, 1.0, 1e-10).unwrap();
        assert!(case.pass && case.equality, "margin {}", case.margin);
        assert!((case.lhs.unwrap() - 1.25f64.ln()).abs() < 1e-15);
        assert!((case.rhs.unwrap() - 0.223_143_551_314_209_76).abs() < 1e-14);
        // x = 0: 0 <= 0
        let zero = check_onedim_inequality(Exponent::integer(2), 0.3, 0.0, 1e-10).unwrap();
        assert_eq!(zero.lhs, Some(0.0));
        assert_eq!(zero.rhs, Some(0.0));
        assert!(zero.equality);
    }

    #[test]
    fn inequality_interior_point() {
        let case = check_onedim_inequality(Exponent::integer(3), 0.3, 0.7, 1e-10).unwrap();
        assert!(case.pass && !case.equality);
        assert!((case.margin - 0.044_478_715_890_650_17).abs() < 1e-12);
    }

    #[test]
    fn inequality_infinity_norm() {
        let case = check_onedim_inequality(Exponent::Infinity, 0.25, 1.0, 1e-10).unwrap();
        assert!(case.pass && case.equality, "margin {}", case.margin);
        let interior = check_onedim_inequality(Exponent::Infinity, 0.2, 0.6, 1e-10).unwrap();
        assert!(interior.pass);
        assert!(interior.margin > 0.0);
    }

    #[test]
    fn inequality_rejects_bad_input() {
        assert!(matches!(
            check_onedim_inequality(Exponent::integer(2), 0.25, 1.5, 1e-10),
            Err(OneDimError::BadX(_))
        ));
        assert!(matches!(
            check_onedim_inequality(Exponent::Finite(2.5), 0.25, 0.5, 1e-10),
            Err(OneDimError::BadExponent(_))
        ));
    }

    #[test]
    fn ratio_monotone_grid() {
        let grid: Vec<f64> = linspace(0.1, 1.0, 10);
        for &(q, eps) in &[(2u32, 0.25), (3, 0.0), (4, 0.5)] {
            let cases = check_ratio_monotone(q, eps, &grid, 1e-10).unwrap();
            assert!(cases.iter().all(|c| c.pass), "q={q} eps={eps}");
        }
    }

    #[test]
    fn concavity_q2_closed_form_and_grid() {
        let grid = linspace(-10.0, 0.0, 200);
        let report = check_concavity(2, &grid, DEFAULT_STEP, DEFAULT_CONCAVITY_TOL, 17).unwrap();
        assert!(report.all_ok, "max d2 = {}", report.max_second_difference);
        assert_eq!(report.closed_form_ok, Some(true));
        // closed-form sign at z = 0 is ln 2 - 1
        assert!((2.0f64.ln() - 1.0) < 0.0);
    }

    #[test]
    fn concavity_superadditivity_spot() {
        // four-point form at q=4, eps=1/4, x=1/2
        let g = |z: f64| log_moment(4, z.exp()).ln();
        let a = 0.5f64.ln();
        let b = 0.5f64.ln();
        assert!(g(0.0) + g(a + b) <= g(a) + g(b) + 1e-12);
        let report = check_concavity(4, &linspace(-8.0, 0.0, 50), DEFAULT_STEP, 1e-8, 5).unwrap();
        assert!(report.superadditivity_ok);
    }

    #[test]
    fn agrees_with_cube_pipeline_n1() {
        // one-dim values are q times the cube log-norm values
        for &x in &[0.0, 0.17, 0.5, 0.93, 1.0] {
            let f = CubeFunction::new(1, vec![1.0 - x, 1.0 + x]).unwrap();
            for &eps in &[0.0, 0.1, 0.25, 0.5] {
                for q in [2u32, 3, 4] {
                    let onedim =
                        check_onedim_inequality(Exponent::integer(q), eps, x, 1e-10).unwrap();
                    let lhs_cube = margin::theorem_lhs(
                        &f,
                        &NoiseVector::uniform(1, eps).unwrap(),
                        Exponent::integer(q),
                    )
                    .unwrap();
                    let lam = margin::MarginProfile::from_noise(
                        Exponent::integer(q),
                        &NoiseVector::uniform(1, eps).unwrap(),
                    )
                    .unwrap();
                    let rhs_cube =
                        margin::theorem_rhs_exact(&f, &lam, Exponent::integer(q)).unwrap();
                    assert!(
                        (onedim.lhs.unwrap() - q as f64 * lhs_cube).abs() < 1e-12,
                        "lhs mismatch q={q} eps={eps} x={x}"
                    );
                    assert!(
                        (onedim.rhs.unwrap() - q as f64 * rhs_cube).abs() < 1e-12,
                        "rhs mismatch q={q} eps={eps} x={x}"
                    );
                }
                // infinity norm carries no scale factor
                let onedim = check_onedim_inequality(Exponent::Infinity, eps, x, 1e-10).unwrap();
                let lhs_cube = margin::theorem_lhs(
                    &f,
                    &NoiseVector::uniform(1, eps).unwrap(),
                    Exponent::Infinity,
                )
                .unwrap();
                assert!((onedim.lhs.unwrap() - lhs_cube).abs() < 1e-12);
            }
        }
    }
}
