//! Single-threshold erasure design.
//!
//! With one threshold `T`, a received symbol is erased when it falls inside
//! `[-T, T]` and flipped (an error) when it falls below `-T`. Writing
//! `l_c = -ln p(-T, T)` and `l_e = -ln p(-inf, -T)`, the negative-log block
//! error probability at high SNR is governed by the goal function
//!
//! ```text
//! g(tau, T) = tau * l_c + (d - tau)/2 * l_e
//! ```
//!
//! which is affine in the erasure count `tau`. Its minimum over
//! `0 <= tau <= d` therefore sits at an endpoint, and the best threshold is
//! the one where both endpoints coincide: `l_e / 2 = l_c`, equivalently
//! `sqrt(p_e) = p_c`. [`solve_high_snr`] solves that balance equation,
//! [`analytic`] evaluates a closed-form approximation of its solution, and
//! [`asymptotic_gain_db`] gives the resulting SNR gain over errors-only
//! decoding in the small-sigma limit.

use crate::gauss::{neg_log_prob, Channel, Interval};
use crate::Error;

/// Block length and minimum distance of the outer binary code. The dimension
/// is carried along as metadata only; nothing here depends on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeShape {
    n: u32,
    d: u32,
    k: Option<u32>,
}

impl CodeShape {
    pub fn new(n: u32, d: u32) -> Result<Self, Error> {
        if n == 0 || d == 0 || d > n {
            return Err(Error::InvalidCodeShape(format!(
                "need 1 <= d <= n, got n={n}, d={d}"
            )));
        }
        Ok(CodeShape { n, d, k: None })
    }

    pub fn with_dimension(mut self, k: u32) -> Result<Self, Error> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidCodeShape(format!(
                "need 1 <= k <= n, got n={}, k={k}",
                self.n
            )));
        }
        self.k = Some(k);
        Ok(self)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn k(&self) -> Option<u32> {
        self.k
    }
}

/// One sample of the goal function: the (relaxed, real-valued) erasure count
/// and the corresponding negative-log probability value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalPoint {
    pub tau: f64,
    pub value: f64,
}

fn check_threshold(t: f64) -> Result<(), Error> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidThreshold(t));
    }
    Ok(())
}

/// Negative-log of the central erasure zone probability, `-ln p(-t, t)`.
pub(crate) fn l_center(ch: &Channel, t: f64) -> f64 {
    neg_log_prob(ch, Interval::centered(t))
}

/// Negative-log of the error tail probability, `-ln p(-inf, -t)`.
pub(crate) fn l_error(ch: &Channel, t: f64) -> f64 {
    neg_log_prob(ch, Interval::left_of(-t))
}

/// Goal function `g(tau, T) = tau * l_c + (d - tau)/2 * l_e`; affine in
/// `tau`, with the ceiling of `(d - tau)/2` deliberately dropped so the
/// affinity is exact.
pub fn goal(ch: &Channel, d: u32, tau: f64, t: f64) -> Result<f64, Error> {
    check_threshold(t)?;
    if !(tau.is_finite() && (0.0..=f64::from(d)).contains(&tau)) {
        return Err(Error::InvalidCount(format!(
            "tau must lie in [0, {d}], got {tau}"
        )));
    }
    let le = l_error(ch, t);
    let lc = l_center(ch, t);
    // 0 * inf guards: either term vanishes identically with its weight.
    let center_term = if tau == 0.0 { 0.0 } else { tau * lc };
    let weight = (f64::from(d) - tau) / 2.0;
    let error_term = if weight == 0.0 { 0.0 } else { weight * le };
    Ok(center_term + error_term)
}

/// Goal-function samples at integer `tau = 0..=d` for one threshold.
pub fn goal_points(ch: &Channel, d: u32, t: f64) -> Result<Vec<GoalPoint>, Error> {
    check_threshold(t)?;
    let le = l_error(ch, t);
    let lc = l_center(ch, t);
    Ok((0..=d)
        .map(|tau| {
            let tau = f64::from(tau);
            GoalPoint {
                tau,
                value: tau * lc + (f64::from(d) - tau) / 2.0 * le,
            }
        })
        .collect())
}

/// Log-domain residual of the balance equation, `l_e/2 - l_c`. Negative when
/// the erasure zone is too small, positive when it is too large; its root is
/// the optimal high-SNR threshold. The equation carries no dependence on the
/// code distance: both goal-function endpoints scale with the same power of
/// `d`.
pub fn balance_residual(ch: &Channel, t: f64) -> f64 {
    0.5 * l_error(ch, t) - l_center(ch, t)
}

/// Bisection on `[lo, hi]` assuming `f(lo) < 0 < f(hi)`; runs until the
/// bracket collapses to adjacent floats and returns the endpoint with the
/// smaller residual magnitude.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Solves the high-SNR balance equation `sqrt(p_e) = p_c` for the threshold,
/// entirely in the log domain (`l_e/2 = l_c`), where both sides stay finite
/// at SNRs far beyond linear-domain underflow.
///
/// The residual is `-inf` at `T = 0`, so a root exists whenever it is
/// positive at `T = 1`; otherwise the channel is too noisy for the balance
/// point to lie inside `[0, 1]` and `NoRoot` is returned.
pub fn solve_high_snr(ch: &Channel) -> Result<f64, Error> {
    let r = |t: f64| balance_residual(ch, t);
    if r(1.0) <= 0.0 {
        return Err(Error::NoRoot(format!(
            "balance residual does not change sign on [0, 1] at sigma = {}",
            ch.sigma()
        )));
    }
    Ok(bisect(r, 0.0, 1.0))
}

/// Closed-form approximation of the optimal high-SNR threshold,
///
/// ```text
/// T = 3 + 3*sigma^2 - sqrt(9*sigma^4 + (18 - ln(2*pi/sigma^2))*sigma^2 + 8)
/// ```
///
/// valid only for good channels: outside that regime the discriminant goes
/// negative or the value leaves `[0, 1]`, and `OutOfRegime` is returned
/// rather than a clamped number. For `sigma -> 0` the value tends to
/// `3 - 2*sqrt(2)`.
pub fn analytic(ch: &Channel) -> Result<f64, Error> {
    let s2 = ch.sigma() * ch.sigma();
    let disc = 9.0 * s2 * s2 + (18.0 - (2.0 * std::f64::consts::PI / s2).ln()) * s2 + 8.0;
    if disc < 0.0 {
        return Err(Error::OutOfRegime(format!(
            "negative discriminant at sigma = {}",
            ch.sigma()
        )));
    }
    let t = 3.0 + 3.0 * s2 - disc.sqrt();
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRegime(format!(
            "closed form gives {t} outside [0, 1] at sigma = {}",
            ch.sigma()
        )));
    }
    Ok(t)
}

/// Scale factor between noise levels at which optimally-thresholded
/// error/erasure decoding and errors-only decoding reach the same high-SNR
/// error exponent: `2*sqrt(2)*(sqrt(2) - 1)`, algebraically `4 - 2*sqrt(2)`.
pub fn asymptotic_gain_factor() -> f64 {
    let s = std::f64::consts::SQRT_2;
    2.0 * s * (s - 1.0)
}

/// Asymptotic SNR gain of single-threshold error/erasure decoding over
/// errors-only decoding, `20*log10(2*sqrt(2)*(sqrt(2)-1))`, about 1.38 dB.
pub fn asymptotic_gain_db() -> f64 {
    20.0 * asymptotic_gain_factor().log10()
}

#[cfg(test)]
// Reference constants below keep all digits of the 50-digit values they
// were frozen from.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::gauss::interval_prob;

    fn ch(sigma: f64) -> Channel {
        Channel::new(sigma).unwrap()
    }

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "actual {actual}, expected {expected}"
        );
    }

    // Roots of the balance equation solved with mpmath bisection at 50
    // decimal digits.
    const BALANCE_ROOTS: &[(f64, f64)] = &[
        (0.4, 0.25100919559965614),
        (0.3, 0.22304290305890693),
        (0.2, 0.19977409051690110),
        (0.1, 0.18105472979574064),
        (0.0707107, 0.17692842321015581),
        (1e-4, 0.17157290917541528),
    ];

    #[test]
    fn code_shape_validation() {
        assert!(CodeShape::new(15, 7).is_ok());
        assert!(CodeShape::new(7, 15).is_err());
        assert!(CodeShape::new(0, 0).is_err());
        assert!(CodeShape::new(15, 7).unwrap().with_dimension(5).is_ok());
        assert!(CodeShape::new(15, 7).unwrap().with_dimension(16).is_err());
        assert_eq!(CodeShape::new(15, 7).unwrap().k(), None);
    }

    #[test]
    fn goal_endpoints() {
        let c = ch(0.4);
        // tau = 0 leaves only the error term, tau = d only the erasure term.
        let g0 = goal(&c, 31, 0.0, 0.3).unwrap();
        assert_close(g0, 15.5 * l_error(&c, 0.3), 1e-12);
        let gd = goal(&c, 31, 31.0, 0.3).unwrap();
        assert_close(gd, 31.0 * l_center(&c, 0.3), 1e-12);
    }

    #[test]
    fn goal_rejects_bad_arguments() {
        let c = ch(0.4);
        assert!(goal(&c, 31, 0.0, -0.1).is_err());
        assert!(goal(&c, 31, 0.0, 1.1).is_err());
        assert!(goal(&c, 31, 32.0, 0.5).is_err());
        assert!(goal(&c, 31, -1.0, 0.5).is_err());
        assert!(goal(&c, 31, f64::NAN, 0.5).is_err());
    }

    #[test]
    fn goal_affine_in_tau() {
        let c = ch(0.4);
        let d = 31;
        for t in [0.05, 0.25, 0.5, 0.9] {
            let g0 = goal(&c, d, 0.0, t).unwrap();
            let gd = goal(&c, d, f64::from(d), t).unwrap();
            for tau in 0..=d {
                let tau = f64::from(tau);
                let line = g0 + tau * (gd - g0) / f64::from(d);
                let g = goal(&c, d, tau, t).unwrap();
                assert!((g - line).abs() <= 1e-12, "t={t} tau={tau}");
            }
        }
    }

    #[test]
    fn goal_spot_value() {
        // mpmath: tau=10, T=0.3, sigma=0.4, d=31.
        let g = goal(&ch(0.4), 31, 10.0, 0.3).unwrap();
        assert_close(g, 110.62413204314287, 1e-10);
    }

    #[test]
    fn solve_matches_reference_roots() {
        for &(sigma, want) in BALANCE_ROOTS {
            let t = solve_high_snr(&ch(sigma)).unwrap();
            assert_close(t, want, 1e-11);
        }
    }

    #[test]
    fn solve_residual_is_tiny() {
        for &(sigma, _) in &BALANCE_ROOTS[..5] {
            let c = ch(sigma);
            let t = solve_high_snr(&c).unwrap();
            assert!(balance_residual(&c, t).abs() <= 1e-10, "sigma={sigma}");
        }
    }

    #[test]
    fn solve_matches_grid_oracle() {
        // Independent oracle: dense grid maximizing min(l_e/2, l_c), the
        // log-domain version of minimizing max(p_e^(d/2), p_x^d).
        let c = ch(0.4);
        let mut best_t = 0.0;
        let mut best = f64::NEG_INFINITY;
        for k in 1..100_000 {
            let t = k as f64 * 1e-5;
            let m = (0.5 * l_error(&c, t)).min(l_center(&c, t));
            if m > best {
                best = m;
                best_t = t;
            }
        }
        let solved = solve_high_snr(&c).unwrap();
        assert_close(solved, best_t, 2e-5);
    }

    #[test]
    fn solve_small_sigma_limit() {
        let t = solve_high_snr(&ch(1e-4)).unwrap();
        assert_close(t, 3.0 - 2.0 * 2f64.sqrt(), 1e-3);
    }

    #[test]
    fn solve_balance_is_d_independent() {
        let c = ch(0.25);
        let t = solve_high_snr(&c).unwrap();
        for d in [1, 7, 31, 63] {
            let g0 = goal(&c, d, 0.0, t).unwrap();
            let gd = goal(&c, d, f64::from(d), t).unwrap();
            assert!((g0 - gd).abs() <= 1e-8 * g0.abs());
        }
    }

    #[test]
    fn solve_rejects_noisy_channel() {
        // At sigma = 2 the residual stays negative on (0, 1].
        assert!(matches!(solve_high_snr(&ch(2.0)), Err(Error::NoRoot(_))));
    }

    #[test]
    fn solve_perturbation_never_improves() {
        // Moving off the balance point can only grow
        // max(p_e^(d/2), p_x^d), i.e. shrink min((d/2) l_e, d l_c).
        let d = 31.0;
        for sigma in [0.1, 0.4] {
            let c = ch(sigma);
            let t = solve_high_snr(&c).unwrap();
            let min_form = |t: f64| (0.5 * d * l_error(&c, t)).min(d * l_center(&c, t));
            let at_opt = min_form(t);
            for delta in [0.01, 0.05] {
                for t2 in [t - delta, t + delta] {
                    assert!(min_form(t2) <= at_opt, "sigma={sigma} t'={t2}");
                }
            }
        }
    }

    #[test]
    fn analytic_matches_closed_form_reference() {
        // mpmath evaluations of the closed form.
        assert_close(analytic(&ch(1e-6)).unwrap(), 0.17157287525883734, 1e-12);
        assert_close(
            analytic(&ch(0.0707107)).unwrap(),
            0.17694714423212534,
            1e-12,
        );
        assert_close(analytic(&ch(0.4)).unwrap(), 0.23606309630184467, 1e-12);
    }

    #[test]
    fn analytic_small_sigma_limit() {
        let t = analytic(&ch(1e-6)).unwrap();
        assert_close(t, 3.0 - 2.0 * 2f64.sqrt(), 1e-9);
    }

    #[test]
    fn analytic_out_of_regime() {
        // At sigma = 3 the closed form falls below zero.
        assert!(matches!(analytic(&ch(3.0)), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn gain_value_and_identity() {
        let g = asymptotic_gain_db();
        assert_close(g, 1.3753861631621743, 1e-12);
        assert!((1.37..=1.38).contains(&g));
        let f = asymptotic_gain_factor();
        assert!((f - (4.0 - 2.0 * 2f64.sqrt())).abs() <= 1e-14);
    }

    #[test]
    fn gain_noise_scale_identity() {
        // With sigma1 = (4 - 2*sqrt2) * sigma2 the error tail below
        // -(3 - 2*sqrt2) under sigma1 equals the tail below 0 under sigma2.
        let a = 3.0 - 2.0 * 2f64.sqrt();
        for sigma2 in [0.05, 0.1] {
            let sigma1 = asymptotic_gain_factor() * sigma2;
            let lhs = neg_log_prob(&ch(sigma1), Interval::left_of(-a));
            let rhs = neg_log_prob(&ch(sigma2), Interval::left_of(0.0));
            assert!((lhs - rhs).abs() <= 1e-10 * rhs);
            // Linear domain too, where representable.
            if sigma2 >= 0.1 {
                let pl = interval_prob(&ch(sigma1), Interval::left_of(-a));
                let pr = interval_prob(&ch(sigma2), Interval::left_of(0.0));
                assert!((pl - pr).abs() <= 1e-10 * pr);
            }
        }
    }
}
