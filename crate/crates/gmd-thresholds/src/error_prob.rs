//! Exact and asymptotic block error probabilities.
//!
//! The decoder fails exactly when every trial fails, i.e. when
//! `2*eps_i + tau_i >= d` holds for all thresholds `T_i`, where the per-trial
//! error and erasure counts derive from the interval tally of the received
//! vector. Summing the multinomial probability of every such tally gives the
//! exact block error probability; all sums run in the log domain with a
//! deterministic two-pass log-sum-exp (first pass finds the peak exponent,
//! second pass accumulates), so probabilities far below the smallest
//! positive double keep an accurate negative-log value.

use crate::gauss::{interval_prob, Channel, Interval};
use crate::multi_threshold::{interval_neg_logs, interval_probs, ThresholdSet};
use crate::single_threshold::{l_center, l_error, CodeShape};
use crate::Error;

/// Cap on the naive enumeration cost `(n+1)^(2z)` of the exact
/// multi-threshold sum.
pub const ENUM_LIMIT: f64 = 1e8;

/// Counts of received symbols per threshold-delimited interval: below
/// `-T_z`, inside the central zone, above `T_z`, plus one count per gap
/// interval on the negative (`lower`) and positive (`upper`) side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalTally {
    pub left: u32,
    pub center: u32,
    pub right: u32,
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
}

impl IntervalTally {
    pub fn new(
        left: u32,
        center: u32,
        right: u32,
        lower: Vec<u32>,
        upper: Vec<u32>,
    ) -> Result<Self, Error> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        Ok(IntervalTally {
            left,
            center,
            right,
            lower,
            upper,
        })
    }

    /// All-zero tally for a `z`-threshold configuration.
    pub fn zeroed(z: usize) -> Self {
        IntervalTally {
            left: 0,
            center: 0,
            right: 0,
            lower: vec![0; z.saturating_sub(1)],
            upper: vec![0; z.saturating_sub(1)],
        }
    }

    /// Number of thresholds this tally was taken against.
    pub fn z(&self) -> usize {
        self.lower.len() + 1
    }

    pub fn total(&self) -> u32 {
        self.left
            + self.center
            + self.right
            + self.lower.iter().sum::<u32>()
            + self.upper.iter().sum::<u32>()
    }

    /// Number of symbols the decoder sees as errors in trial `trial`
    /// (zero-based): everything below `-T_{trial+1}`.
    pub fn errors_for_trial(&self, trial: usize) -> u32 {
        trial_counts(self.left, self.center, &self.lower, &self.upper, trial).0
    }

    /// Number of symbols erased in trial `trial`: everything inside
    /// `[-T_{trial+1}, T_{trial+1}]`.
    pub fn erasures_for_trial(&self, trial: usize) -> u32 {
        trial_counts(self.left, self.center, &self.lower, &self.upper, trial).1
    }
}

/// `(errors, erasures)` seen by trial `trial` (zero-based) of a tally given
/// as raw counts: errors are the left tail plus the lower gaps at or beyond
/// the trial's threshold, erasures the central zone plus both gap sides
/// strictly inside it.
pub(crate) fn trial_counts(
    left: u32,
    center: u32,
    lower: &[u32],
    upper: &[u32],
    trial: usize,
) -> (u32, u32) {
    let errors = left + lower[trial..].iter().sum::<u32>();
    let erasures = center + lower[..trial].iter().sum::<u32>() + upper[..trial].iter().sum::<u32>();
    (errors, erasures)
}

/// True when every trial fails, i.e. `2*errors + erasures >= d` for all of
/// them — the joint failure condition of `z`-trial decoding.
pub(crate) fn fails_all_trials(
    left: u32,
    center: u32,
    lower: &[u32],
    upper: &[u32],
    d: u32,
) -> bool {
    let z = lower.len() + 1;
    (0..z).all(|trial| {
        let (errors, erasures) = trial_counts(left, center, lower, upper, trial);
        2 * errors + erasures >= d
    })
}

/// `ln(k!)` for `k = 0..=n`, by cumulative summation.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for k in 2..=n {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    lf
}

fn check_threshold(t: f64) -> Result<(), Error> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidThreshold(t));
    }
    Ok(())
}

/// Streams `ln`-domain terms of the single-threshold failure sum
/// `sum_{tau} sum_{eps >= ceil((d-tau)/2)} multinomial * p_x^tau p_e^eps p_r^rest`
/// into `visit`. The ceiling is kept here; only the goal-function
/// approximation drops it.
fn for_each_single_term(code: &CodeShape, ch: &Channel, t: f64, visit: &mut dyn FnMut(f64)) {
    let n = code.n() as usize;
    let d = code.d();
    let p_x = interval_prob(ch, Interval::centered(t));
    let p_e = interval_prob(ch, Interval::left_of(-t));
    let p_r = interval_prob(ch, Interval::right_of(t));
    let (ln_px, ln_pe, ln_pr) = (p_x.ln(), p_e.ln(), p_r.ln());
    let lf = ln_factorials(n);
    for tau in 0..=n as u32 {
        if tau > 0 && p_x == 0.0 {
            continue;
        }
        let t_tau = if tau >= d { 0 } else { (d - tau).div_ceil(2) };
        for eps in t_tau..=(n as u32 - tau) {
            if eps > 0 && p_e == 0.0 {
                continue;
            }
            let rest = n as u32 - tau - eps;
            if rest > 0 && p_r == 0.0 {
                continue;
            }
            let mut term = lf[n] - lf[tau as usize] - lf[eps as usize] - lf[rest as usize];
            if tau > 0 {
                term += f64::from(tau) * ln_px;
            }
            if eps > 0 {
                term += f64::from(eps) * ln_pe;
            }
            if rest > 0 {
                term += f64::from(rest) * ln_pr;
            }
            visit(term);
        }
    }
}

/// Two-pass log-sum-exp over a replayable stream of ln-domain terms.
fn ln_sum_terms(mut stream: impl FnMut(&mut dyn FnMut(f64))) -> f64 {
    let mut max = f64::NEG_INFINITY;
    stream(&mut |t| {
        if t > max {
            max = t;
        }
    });
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut sum = 0.0;
    stream(&mut |t| sum += (t - max).exp());
    // The result is a probability; rounding must not push it above one.
    (max + sum.ln()).min(0.0)
}

fn ln_exact_single(code: &CodeShape, ch: &Channel, t: f64) -> Result<f64, Error> {
    check_threshold(t)?;
    Ok(ln_sum_terms(|visit| {
        for_each_single_term(code, ch, t, visit)
    }))
}

/// Exact single-threshold block error probability: the double sum over
/// erasure count `tau` and error count `eps >= ceil((d - tau)/2)` of the
/// trinomial tally probabilities. `O(n^2)` terms.
///
/// The returned linear-domain value underflows to zero at high SNR;
/// [`exact_neg_log_single`] stays finite there.
pub fn exact_single(code: &CodeShape, ch: &Channel, t: f64) -> Result<f64, Error> {
    Ok(ln_exact_single(code, ch, t)?.exp())
}

/// `-ln` of [`exact_single`], computed without underflow.
pub fn exact_neg_log_single(code: &CodeShape, ch: &Channel, t: f64) -> Result<f64, Error> {
    Ok(-ln_exact_single(code, ch, t)?)
}

/// High-SNR approximation of the negative-log error probability:
/// `min((d/2)*l_e, d*l_c)` — the smaller of the two endpoint values of the
/// goal function (all-errors vs all-erasures).
pub fn approx_neg_log_single(code: &CodeShape, ch: &Channel, t: f64) -> Result<f64, Error> {
    check_threshold(t)?;
    let d = f64::from(code.d());
    Ok((0.5 * d * l_error(ch, t)).min(d * l_center(ch, t)))
}

/// Result of the exact-probability threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptimum {
    pub threshold: f64,
    /// Exact block error probability at the optimum (zero if it underflows).
    pub error_prob: f64,
    /// `-ln` of the error probability; finite even when the linear value
    /// underflows.
    pub neg_log_error_prob: f64,
}

/// Minimizes the exact single-threshold error probability over
/// `T` in `[0, 1]` at any SNR: a step-0.01 grid locates the basin, a
/// golden-section refinement narrows it to 1e-6. Among minimizers within
/// tolerance the smallest threshold wins.
pub fn optimize_threshold(code: &CodeShape, ch: &Channel) -> ThresholdOptimum {
    // Work with the negative log (to be maximized): it stays finite where
    // the probability underflows, which is exactly where the high-SNR
    // comparison happens.
    let objective = |t: f64| -ln_exact_single(code, ch, t).expect("threshold in range");

    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=100 {
        let v = objective(k as f64 / 100.0);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let lo = (best_k.max(1) - 1) as f64 / 100.0;
    let hi = (best_k + 1).min(100) as f64 / 100.0;

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    while b - a > 1e-6 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }

    // Deterministic tie-breaking: smallest threshold among the candidates
    // whose objective matches the best one found.
    let mut result = (f64::INFINITY, f64::NEG_INFINITY);
    for t in [0.5 * (a + b), best_k as f64 / 100.0, lo, hi] {
        let v = objective(t);
        if v > result.1 || (v == result.1 && t < result.0) {
            result = (t, v);
        }
    }
    ThresholdOptimum {
        threshold: result.0,
        error_prob: (-result.1).exp(),
        neg_log_error_prob: result.1,
    }
}

/// Visits every tally of `n` symbols over `2z + 1` intervals: the first
/// `2z` counts (left, center, lower gaps, upper gaps) enumerate freely and
/// the right-tail count absorbs the remainder.
fn for_each_tally(n: u32, free_parts: usize, visit: &mut impl FnMut(&[u32], u32)) {
    fn rec(
        buf: &mut Vec<u32>,
        remaining: u32,
        free_parts: usize,
        visit: &mut impl FnMut(&[u32], u32),
    ) {
        if buf.len() == free_parts {
            visit(buf, remaining);
            return;
        }
        for v in 0..=remaining {
            buf.push(v);
            rec(buf, remaining - v, free_parts, visit);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(free_parts);
    rec(&mut buf, n, free_parts, visit);
}

/// Streams the ln-domain terms of the exact multi-threshold failure sum.
/// `parts` layout inside the visitor: `[left, center, lower.., upper..]`
/// with the right-tail count passed separately.
fn for_each_multi_term(
    code: &CodeShape,
    ch: &Channel,
    ts: &ThresholdSet,
    visit: &mut dyn FnMut(f64),
) {
    let n = code.n();
    let d = code.d();
    let z = ts.z();
    let p = interval_probs(ch, ts);
    // ln-probabilities in `parts` order, right tail last.
    let ln_p: Vec<f64> = [p.left, p.center]
        .into_iter()
        .chain(p.lower.iter().copied())
        .chain(p.upper.iter().copied())
        .chain([p.right])
        .map(f64::ln)
        .collect();
    let lf = ln_factorials(n as usize);
    for_each_tally(n, 2 * z, &mut |parts, right| {
        let (left, center) = (parts[0], parts[1]);
        let lower = &parts[2..2 + (z - 1)];
        let upper = &parts[2 + (z - 1)..];
        if !fails_all_trials(left, center, lower, upper, d) {
            return;
        }
        let mut term = lf[n as usize] - lf[right as usize];
        let mut dead = false;
        for (i, &count) in parts.iter().chain([&right]).enumerate() {
            if count == 0 {
                continue;
            }
            let lp = ln_p[if i < parts.len() { i } else { ln_p.len() - 1 }];
            if lp == f64::NEG_INFINITY {
                dead = true;
                break;
            }
            term += f64::from(count) * lp;
            if i < parts.len() {
                term -= lf[count as usize];
            }
        }
        if !dead {
            visit(term);
        }
    });
}

/// Naive enumeration cost of the exact multi-threshold sum, `(n+1)^(2z)`.
pub fn enumeration_cost(n: u32, z: usize) -> f64 {
    (f64::from(n) + 1.0).powi(2 * z as i32)
}

fn ln_exact_multi(code: &CodeShape, ch: &Channel, ts: &ThresholdSet) -> Result<f64, Error> {
    let cost = enumeration_cost(code.n(), ts.z());
    if cost > ENUM_LIMIT {
        return Err(Error::TooLarge {
            cost,
            limit: ENUM_LIMIT,
        });
    }
    Ok(ln_sum_terms(|visit| {
        for_each_multi_term(code, ch, ts, visit)
    }))
}

/// Exact multi-threshold block error probability: the sum of multinomial
/// tally probabilities over every tally for which all `z` trials fail.
/// Refuses configurations whose enumeration cost exceeds [`ENUM_LIMIT`]
/// (cost grows as `O(n^{2z})`); the Monte Carlo simulator covers those.
pub fn exact_multi(code: &CodeShape, ch: &Channel, ts: &ThresholdSet) -> Result<f64, Error> {
    Ok(ln_exact_multi(code, ch, ts)?.exp())
}

/// `-ln` of [`exact_multi`], computed without underflow.
pub fn exact_neg_log_multi(
    code: &CodeShape,
    ch: &Channel,
    ts: &ThresholdSet,
) -> Result<f64, Error> {
    Ok(-ln_exact_multi(code, ch, ts)?)
}

/// The `z + 1` negative-log terms of the max-form approximation:
/// `(d/2)*l_l`, `d*l_c`, and `(d/2)*(l_lower_i + l_upper_i)` per gap.
/// The approximation itself is the largest corresponding probability,
/// i.e. the smallest of these exponents.
pub fn approx_neg_log_terms(code: &CodeShape, ch: &Channel, ts: &ThresholdSet) -> Vec<f64> {
    let l = interval_neg_logs(ch, ts);
    let d = f64::from(code.d());
    let mut terms = Vec::with_capacity(ts.z() + 1);
    terms.push(0.5 * d * l.left);
    terms.push(d * l.center);
    for i in 0..ts.z() - 1 {
        terms.push(0.5 * d * l.pair(i));
    }
    terms
}

/// `-ln` of [`approx_multi`]: the smallest max-form exponent.
pub fn approx_neg_log_multi(code: &CodeShape, ch: &Channel, ts: &ThresholdSet) -> f64 {
    approx_neg_log_terms(code, ch, ts)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Max-form high-SNR approximation of the multi-threshold error
/// probability: `max(p_l^(d/2), p_c^d, max_i (lower_i*upper_i)^(d/2))`,
/// evaluated in the log domain. Underflows to zero when the exponents are
/// large; pair with [`approx_neg_log_multi`] at high SNR.
pub fn approx_multi(code: &CodeShape, ch: &Channel, ts: &ThresholdSet) -> f64 {
    (-approx_neg_log_multi(code, ch, ts)).exp()
}
