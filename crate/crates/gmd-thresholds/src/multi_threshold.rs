//! Multi-threshold (multi-trial) erasure design.
//!
//! A set of `z` thresholds `0 <= T_1 < ... < T_z <= 1` partitions the real
//! line into `2z + 1` intervals; decoding trial `i` erases everything inside
//! `[-T_i, T_i]`. With the abbreviations
//!
//! ```text
//! p_l = p(-inf, -T_z)      l_l = -ln p_l
//! p_c = p(-T_1,  T_1)      l_c = -ln p_c
//! lower_i = p(-T_{i+1}, -T_i),  upper_i = p(T_i, T_{i+1})
//! ```
//!
//! the high-SNR goal function is
//! `g = t_l*l_l + t_c*l_c + sum_i t_i*(l_lower_i + l_upper_i)`, affine in
//! each count. The optimal set balances all of its extremal values, which
//! yields the system
//!
//! ```text
//! l_l / 2 = l_c,      l_lower_i + l_upper_i = 2*l_c   for every gap i,
//! ```
//!
//! solved here by one-dimensional bisections: an outer bisection on `T_1`
//! and, for each candidate `T_1`, a chain of bracketed inner bisections
//! producing `T_2, ..., T_z`.

use crate::gauss::{interval_prob, neg_log_prob, Channel, Interval};
use crate::single_threshold::{l_center, l_error};
use crate::Error;

/// Strictly increasing erasure thresholds inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    ts: Vec<f64>,
}

impl ThresholdSet {
    pub fn new(ts: Vec<f64>) -> Result<Self, Error> {
        if ts.is_empty() {
            return Err(Error::InvalidThresholdSet("empty".into()));
        }
        for &t in &ts {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidThresholdSet(format!(
                    "threshold {t} outside [0, 1]"
                )));
            }
        }
        if ts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidThresholdSet(format!(
                "thresholds must be strictly increasing, got {ts:?}"
            )));
        }
        Ok(ThresholdSet { ts })
    }

    pub fn single(t: f64) -> Result<Self, Error> {
        ThresholdSet::new(vec![t])
    }

    /// Number of thresholds (and decoding trials).
    pub fn z(&self) -> usize {
        self.ts.len()
    }

    pub fn first(&self) -> f64 {
        self.ts[0]
    }

    pub fn last(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.ts
    }
}

/// Probabilities of the `2z + 1` intervals cut out by a threshold set:
/// left tail, central zone, right tail, and the `z - 1` gap intervals on
/// each side.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalProbs {
    pub left: f64,
    pub center: f64,
    pub right: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl IntervalProbs {
    /// Sum over the full partition; equals one up to rounding.
    pub fn total(&self) -> f64 {
        self.left
            + self.center
            + self.right
            + self.lower.iter().sum::<f64>()
            + self.upper.iter().sum::<f64>()
    }
}

/// Negative logarithms of the same interval probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalNegLogs {
    pub left: f64,
    pub center: f64,
    pub right: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl IntervalNegLogs {
    /// `l_lower_i + l_upper_i` for gap `i` (zero-based).
    pub fn pair(&self, i: usize) -> f64 {
        self.lower[i] + self.upper[i]
    }
}

pub fn interval_probs(ch: &Channel, ts: &ThresholdSet) -> IntervalProbs {
    let s = ts.as_slice();
    let z = ts.z();
    IntervalProbs {
        left: interval_prob(ch, Interval::left_of(-ts.last())),
        center: interval_prob(ch, Interval::centered(ts.first())),
        right: interval_prob(ch, Interval::right_of(ts.last())),
        lower: (0..z - 1)
            .map(|i| interval_prob(ch, Interval::new(-s[i + 1], -s[i]).unwrap()))
            .collect(),
        upper: (0..z - 1)
            .map(|i| interval_prob(ch, Interval::new(s[i], s[i + 1]).unwrap()))
            .collect(),
    }
}

pub fn interval_neg_logs(ch: &Channel, ts: &ThresholdSet) -> IntervalNegLogs {
    let s = ts.as_slice();
    let z = ts.z();
    IntervalNegLogs {
        left: neg_log_prob(ch, Interval::left_of(-ts.last())),
        center: neg_log_prob(ch, Interval::centered(ts.first())),
        right: neg_log_prob(ch, Interval::right_of(ts.last())),
        lower: (0..z - 1)
            .map(|i| neg_log_prob(ch, Interval::new(-s[i + 1], -s[i]).unwrap()))
            .collect(),
        upper: (0..z - 1)
            .map(|i| neg_log_prob(ch, Interval::new(s[i], s[i + 1]).unwrap()))
            .collect(),
    }
}

/// Multi-threshold goal function
/// `t_l*l_l + t_c*l_c + sum_i t_lower[i]*(l_lower_i + l_upper_i)`.
///
/// `t_lower` must carry one entry per gap, i.e. `z - 1` of them. Counts are
/// real-valued and must be non-negative; a zero count contributes nothing
/// even when its interval has probability zero.
pub fn goal(
    ch: &Channel,
    ts: &ThresholdSet,
    t_left: f64,
    t_center: f64,
    t_lower: &[f64],
) -> Result<f64, Error> {
    if t_lower.len() != ts.z() - 1 {
        return Err(Error::DimensionMismatch {
            expected: ts.z() - 1,
            got: t_lower.len(),
        });
    }
    for &c in [t_left, t_center].iter().chain(t_lower) {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidCount(format!(
                "counts must be finite and non-negative, got {c}"
            )));
        }
    }
    let l = interval_neg_logs(ch, ts);
    let mut g = 0.0;
    if t_left > 0.0 {
        g += t_left * l.left;
    }
    if t_center > 0.0 {
        g += t_center * l.center;
    }
    for (i, &c) in t_lower.iter().enumerate() {
        if c > 0.0 {
            g += c * l.pair(i);
        }
    }
    Ok(g)
}

/// The `z + 1` extremal goal values between which the optimum balances:
/// `(d/2)*l_l`, `d*l_c`, and `(d/2)*(l_lower_i + l_upper_i)` per gap.
pub fn extremal_goal_values(ch: &Channel, ts: &ThresholdSet, d: u32) -> Vec<f64> {
    let l = interval_neg_logs(ch, ts);
    let d = f64::from(d);
    let mut vals = Vec::with_capacity(ts.z() + 1);
    vals.push(d / 2.0 * l.left);
    vals.push(d * l.center);
    for i in 0..ts.z() - 1 {
        vals.push(d / 2.0 * l.pair(i));
    }
    vals
}

/// Log-domain residuals of the optimality system at `ts`, one per equation:
/// `l_l/2 - l_c`, then `l_c - (l_lower_1 + l_upper_1)/2`, then the chained
/// differences `pair_i - pair_{i+1}`. All are zero at the optimal set.
pub fn residuals(ch: &Channel, ts: &ThresholdSet) -> Vec<f64> {
    let l = interval_neg_logs(ch, ts);
    let mut out = Vec::with_capacity(ts.z());
    out.push(0.5 * l.left - l.center);
    if ts.z() >= 2 {
        out.push(l.center - 0.5 * l.pair(0));
    }
    for i in 0..ts.z().saturating_sub(2) {
        out.push(l.pair(i) - l.pair(i + 1));
    }
    out
}

/// `l(-t_j, -t_i) + l(t_i, t_j)`: negative log of the product of the two
/// gap probabilities between thresholds `t_i < t_j`.
fn pair_neg_log(ch: &Channel, t_i: f64, t_j: f64) -> f64 {
    neg_log_prob(ch, Interval::new(-t_j, -t_i).unwrap())
        + neg_log_prob(ch, Interval::new(t_i, t_j).unwrap())
}

/// Given `T_1`, extends the chain `T_2, ..., T_z` so that every gap
/// satisfies `l_lower_i + l_upper_i = 2*l_c`. Each extension is a bracketed
/// bisection on `(T_i, 1]`: the pair value falls monotonically from `+inf`
/// as the next threshold moves right, so a root exists iff the value at 1
/// is at or below the target. Returns `None` when the chain leaves `[0, 1]`.
fn chain(ch: &Channel, t1: f64, z: usize) -> Option<Vec<f64>> {
    let target = 2.0 * l_center(ch, t1);
    let mut ts = Vec::with_capacity(z);
    ts.push(t1);
    for _ in 1..z {
        let t_prev = *ts.last().unwrap();
        let f = |t: f64| pair_neg_log(ch, t_prev, t) - target;
        if f(1.0) > 0.0 {
            return None;
        }
        // f > 0 at the left end (pair prob -> 0), f <= 0 at 1.
        let mut lo = t_prev;
        let mut hi = 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        ts.push(hi);
    }
    Some(ts)
}

/// Outer residual `l_l(T_z)/2 - l_c(T_1)` for the chain grown from `t1`,
/// or `None` when the chain is infeasible.
fn outer_residual(ch: &Channel, t1: f64, z: usize) -> Option<f64> {
    let ts = chain(ch, t1, z)?;
    Some(0.5 * l_error(ch, *ts.last().unwrap()) - l_center(ch, t1))
}

/// Solves the `z`-threshold optimality system
///
/// ```text
/// l_l / 2 = l_c      and      l_lower_i + l_upper_i = 2*l_c  for all gaps
/// ```
///
/// by bisection on `T_1` with the remaining thresholds grown by the inner
/// chain. The outer residual is `-inf` as `T_1 -> 0` (the central zone
/// vanishes), so the solver scans upward for a feasible sign change and then
/// bisects; an infeasible chain during bisection counts as the positive
/// side, since it means the gap targets have become unreachable inside
/// `[0, 1]`.
pub fn solve(ch: &Channel, z: u32) -> Result<ThresholdSet, Error> {
    if z == 0 {
        return Err(Error::InvalidThresholdSet(
            "need at least one threshold".into(),
        ));
    }
    let z = z as usize;
    let no_root = || {
        Error::NoRoot(format!(
            "no balanced {z}-threshold set inside [0, 1] at sigma = {}",
            ch.sigma()
        ))
    };

    // Scan for a bracket: residual is negative for tiny T_1; find the first
    // grid point where it turns positive (or the chain dies).
    let mut lo = 1e-9;
    match outer_residual(ch, lo, z) {
        Some(r) if r < 0.0 => {}
        _ => return Err(no_root()),
    }
    let mut hi = None;
    let mut k = 1;
    while k <= 100 {
        let t1 = k as f64 * 0.01;
        if t1 >= 1.0 {
            break;
        }
        match outer_residual(ch, t1, z) {
            Some(r) if r < 0.0 => lo = t1,
            Some(_) => {
                hi = Some(t1);
                break;
            }
            // Chain infeasible: T_1 is already too large.
            None => {
                hi = Some(t1);
                break;
            }
        }
        k += 1;
    }
    let mut hi = hi.ok_or_else(no_root)?;

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match outer_residual(ch, mid, z) {
            Some(r) if r < 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    // One of the bracket ends must give a feasible chain with a small
    // residual; prefer the side with the smaller magnitude. If even the
    // best residual is not essentially zero, the bisection ran into the
    // feasibility boundary (the chain saturates at T_z = 1 before the
    // outer equation balances) and the system has no in-range root.
    let best = [lo, hi]
        .into_iter()
        .filter_map(|t1| Some((t1, outer_residual(ch, t1, z)?)))
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .ok_or_else(no_root)?;
    if best.1.abs() > 1e-8 {
        return Err(no_root());
    }
    let ts = chain(ch, best.0, z).ok_or_else(no_root)?;
    ThresholdSet::new(ts)
}
