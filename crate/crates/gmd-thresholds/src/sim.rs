//! Monte Carlo simulation of multi-trial erasure decoding on BPSK/AWGN.
//!
//! Each trial transmits the all-zero codeword (`+1` per symbol, sufficient
//! for a linear code with symmetric thresholds), adds Gaussian noise, takes
//! the interval tally of the received vector and declares a block error when
//! every decoding trial violates the capability bound `2*eps + tau < d`. No
//! algebraic decoding is performed: the decoder is modeled by its capability
//! region, which is the same idealization behind the closed-form error
//! probabilities this simulator cross-checks.
//!
//! Randomness is counter-based: the noise sample of symbol `j` in trial `t`
//! is a pure function of `(seed, t, j)`. Runs are therefore bit-identical
//! for a given seed regardless of how the trial loop is partitioned across
//! worker threads, and different threshold sets see identical noise.

use crate::error_prob::IntervalTally;
use crate::gauss::Channel;
use crate::multi_threshold::ThresholdSet;
use crate::single_threshold::CodeShape;
use crate::Error;

/// Hard output of the quantize-and-erase map for one received symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizedSymbol {
    /// `y > T`: the symbol reads as bit 0 (transmitted +1).
    Zero,
    /// `y < -T`: the symbol reads as bit 1 (transmitted -1).
    One,
    /// `-T <= y <= T`: too unreliable, erased.
    Erasure,
}

/// Quantize-and-erase map for threshold `t`: bit 1 below `-t`, bit 0 above
/// `t`, erasure inside the closed interval `[-t, t]` (boundary values erase).
pub fn quantize(y: f64, t: f64) -> Result<QuantizedSymbol, Error> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidThreshold(t));
    }
    Ok(if y < -t {
        QuantizedSymbol::One
    } else if y > t {
        QuantizedSymbol::Zero
    } else {
        QuantizedSymbol::Erasure
    })
}

/// Classifies every received symbol into one of the `2z + 1` threshold
/// intervals. Boundary values go to the erasure side, matching [`quantize`]:
/// `[-T_1, T_1]` is closed, the gap intervals are `[-T_{i+1}, -T_i)` below
/// and `(T_i, T_{i+1}]` above, and the tails are open.
pub fn tally(y: &[f64], ts: &ThresholdSet) -> IntervalTally {
    let mut out = IntervalTally::zeroed(ts.z());
    tally_into(y, ts, &mut out);
    out
}

pub(crate) fn tally_into(y: &[f64], ts: &ThresholdSet, out: &mut IntervalTally) {
    let s = ts.as_slice();
    let z = s.len();
    out.left = 0;
    out.center = 0;
    out.right = 0;
    out.lower.iter_mut().for_each(|c| *c = 0);
    out.upper.iter_mut().for_each(|c| *c = 0);
    for &v in y {
        let m = v.abs();
        if m <= s[0] {
            out.center += 1;
        } else if m > s[z - 1] {
            if v < 0.0 {
                out.left += 1;
            } else {
                out.right += 1;
            }
        } else {
            // s[i] < m <= s[i+1]
            let i = s[..z - 1].partition_point(|&t| t < m) - 1;
            debug_assert!(s[i] < m && m <= s[i + 1]);
            if v < 0.0 {
                out.lower[i] += 1;
            } else {
                out.upper[i] += 1;
            }
        }
    }
}

/// Capability of the bounded-minimum-distance error/erasure decoder:
/// success whenever `2*errors + erasures < d`.
pub fn bmd_success(errors: u32, erasures: u32, d: u32) -> bool {
    2 * errors + erasures < d
}

/// True when the received vector defeats every decoding trial: for each
/// threshold, the symbols it sees as errors and erasures exceed the
/// capability bound.
pub fn gmd_error_event(tally: &IntervalTally, d: u32) -> bool {
    (0..tally.z()).all(|trial| {
        !bmd_success(
            tally.errors_for_trial(trial),
            tally.erasures_for_trial(trial),
            d,
        )
    })
}

/// Empirical error-probability estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub trials: u64,
    pub error_events: u64,
    /// `error_events / trials`.
    pub p_hat: f64,
    /// Binomial standard error `sqrt(p_hat * (1 - p_hat) / trials)`.
    pub std_err: f64,
}

impl SimEstimate {
    fn new(trials: u64, error_events: u64) -> Self {
        let p_hat = error_events as f64 / trials as f64;
        SimEstimate {
            trials,
            error_events,
            p_hat,
            std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
        }
    }
}

/// SplitMix64 finalizer: a bijective 64-bit mix with full avalanche.
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Standard-normal sample keyed by `(seed, trial, symbol)` — the
/// counter-based generator behind the reproducibility contract. Box-Muller
/// on two mixed 53-bit uniforms.
fn normal_sample(seed: u64, trial: u64, symbol: u64) -> f64 {
    let h = mix64(mix64(mix64(seed ^ 0x9e3779b97f4a7c15).wrapping_add(trial)).wrapping_add(symbol));
    const SCALE: f64 = 1.0 / 9007199254740992.0; // 2^-53
    let u1 = ((mix64(h ^ 0xd1b54a32d192ed03) >> 11) + 1) as f64 * SCALE; // (0, 1]
    let u2 = (mix64(h ^ 0x8cb92ba72f3d8dd7) >> 11) as f64 * SCALE; // [0, 1)
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn count_errors_in_range(
    code: &CodeShape,
    ch: &Channel,
    ts: &ThresholdSet,
    seed: u64,
    range: std::ops::Range<u64>,
) -> u64 {
    let n = code.n() as usize;
    let d = code.d();
    let sigma = ch.sigma();
    let mut y = vec![0.0f64; n];
    let mut counts = IntervalTally::zeroed(ts.z());
    let mut events = 0u64;
    for trial in range {
        for (j, slot) in y.iter_mut().enumerate() {
            *slot = 1.0 + sigma * normal_sample(seed, trial, j as u64);
        }
        tally_into(&y, ts, &mut counts);
        if gmd_error_event(&counts, d) {
            events += 1;
        }
    }
    events
}

/// Simulates `trials` all-zero-codeword transmissions and counts the trials
/// on which every decoding attempt fails. Deterministic for a given
/// `(seed, trials)` pair; parallelized across available cores.
pub fn monte_carlo(
    code: &CodeShape,
    ch: &Channel,
    ts: &ThresholdSet,
    trials: u64,
    seed: u64,
) -> SimEstimate {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    monte_carlo_with_threads(code, ch, ts, trials, seed, threads)
}

/// [`monte_carlo`] with an explicit worker count. The estimate is a pure
/// function of `(seed, trials)`: per-trial keyed randomness plus integer
/// event accumulation make the partitioning invisible in the result.
pub fn monte_carlo_with_threads(
    code: &CodeShape,
    ch: &Channel,
    ts: &ThresholdSet,
    trials: u64,
    seed: u64,
    threads: usize,
) -> SimEstimate {
    assert!(trials >= 1, "need at least one trial");
    let threads = threads.clamp(1, trials.min(1024) as usize);
    if threads == 1 {
        let events = count_errors_in_range(code, ch, ts, seed, 0..trials);
        return SimEstimate::new(trials, events);
    }
    let chunk = trials.div_ceil(threads as u64);
    let events = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads as u64)
            .map(|w| {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(trials);
                scope.spawn(move || count_errors_in_range(code, ch, ts, seed, lo..hi))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    });
    SimEstimate::new(trials, events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_prob::{exact_multi, exact_single};

    fn ch(sigma: f64) -> Channel {
        Channel::new(sigma).unwrap()
    }

    fn code(n: u32, d: u32) -> CodeShape {
        CodeShape::new(n, d).unwrap()
    }

    fn set(ts: &[f64]) -> ThresholdSet {
        ThresholdSet::new(ts.to_vec()).unwrap()
    }

    #[test]
    fn quantize_three_way_split() {
        assert_eq!(quantize(0.5, 0.2).unwrap(), QuantizedSymbol::Zero);
        assert_eq!(quantize(-0.5, 0.2).unwrap(), QuantizedSymbol::One);
        assert_eq!(quantize(0.1, 0.2).unwrap(), QuantizedSymbol::Erasure);
        // Boundary values erase: the central interval is closed.
        assert_eq!(quantize(0.2, 0.2).unwrap(), QuantizedSymbol::Erasure);
        assert_eq!(quantize(-0.2, 0.2).unwrap(), QuantizedSymbol::Erasure);
        assert!(quantize(0.0, -0.1).is_err());
        assert!(quantize(0.0, 1.5).is_err());
    }

    #[test]
    fn tally_classifies_directly() {
        let t = tally(&[-0.5, 0.05, 0.2, 0.9], &set(&[0.1, 0.3]));
        assert_eq!(t.left, 1);
        assert_eq!(t.center, 1);
        assert_eq!(t.upper, vec![1]);
        assert_eq!(t.lower, vec![0]);
        assert_eq!(t.right, 1);
        assert_eq!(t.total(), 4);
    }

    #[test]
    fn tally_noiseless_vector() {
        let y = vec![1.0; 12];
        let t = tally(&y, &set(&[0.1, 0.3]));
        assert_eq!(t.right, 12);
        assert_eq!(t.total(), 12);
        assert!(!gmd_error_event(&t, 5));
    }

    #[test]
    fn tally_boundary_values_take_the_erasure_side() {
        let ts = set(&[0.1, 0.3]);
        // +-T_1 belong to the central zone, +-T_2 to the gap intervals.
        let t = tally(&[0.1, -0.1, 0.3, -0.3], &ts);
        assert_eq!(t.center, 2);
        assert_eq!(t.upper, vec![1]);
        assert_eq!(t.lower, vec![1]);
        // Consistency with quantize at every threshold: a symbol equal to
        // T_2 erases in trial 2 but reads as a value in trial 1.
        assert_eq!(quantize(0.3, 0.3).unwrap(), QuantizedSymbol::Erasure);
        assert_eq!(quantize(0.3, 0.1).unwrap(), QuantizedSymbol::Zero);
        assert_eq!(quantize(-0.3, 0.1).unwrap(), QuantizedSymbol::One);
        assert_eq!(t.errors_for_trial(0), 1); // -0.3 flips in trial 1
        assert_eq!(t.erasures_for_trial(0), 2);
        assert_eq!(t.errors_for_trial(1), 0); // everything erases in trial 2
        assert_eq!(t.erasures_for_trial(1), 4);
    }

    #[test]
    fn tally_agrees_with_quantize_per_trial() {
        // The per-trial error/erasure counts recovered from the tally must
        // match counting quantize() outputs threshold by threshold.
        let sets = [set(&[0.2]), set(&[0.1, 0.3]), set(&[0.05, 0.4, 0.71])];
        let chan = ch(0.5);
        for ts in &sets {
            for trial_idx in 0..3400u64 {
                let y: Vec<f64> = (0..23)
                    .map(|j| 1.0 + chan.sigma() * normal_sample(7, trial_idx, j))
                    .collect();
                let t = tally(&y, ts);
                assert_eq!(t.total() as usize, y.len());
                for (k, &thr) in ts.as_slice().iter().enumerate() {
                    let mut errors = 0;
                    let mut erasures = 0;
                    for &v in &y {
                        match quantize(v, thr).unwrap() {
                            QuantizedSymbol::One => errors += 1,
                            QuantizedSymbol::Erasure => erasures += 1,
                            QuantizedSymbol::Zero => {}
                        }
                    }
                    assert_eq!(t.errors_for_trial(k), errors);
                    assert_eq!(t.erasures_for_trial(k), erasures);
                }
            }
        }
    }

    #[test]
    fn bmd_capability_boundaries() {
        let d = 9;
        assert!(bmd_success(0, d - 1, d));
        assert!(!bmd_success(0, d, d));
        assert!(!bmd_success(d.div_ceil(2), 0, d));
        assert!(bmd_success((d - 1) / 2, 0, d));
    }

    #[test]
    fn gmd_event_single_threshold_reduction() {
        // z = 1: the event is exactly 2*left + center >= d.
        for left in 0..6u32 {
            for center in 0..6u32 {
                let t = IntervalTally::new(left, center, 9, vec![], vec![]).unwrap();
                assert_eq!(gmd_error_event(&t, 7), 2 * left + center >= 7);
            }
        }
    }

    #[test]
    fn gmd_event_matches_brute_force_oracle() {
        // Independent oracle: materialize a vector with one representative
        // value per interval, quantize it per threshold, and apply the
        // capability bound trial by trial.
        let ts = set(&[0.15, 0.45]);
        let reps = [-1.0, -0.3, 0.0, 0.3, 1.0]; // left, lower, center, upper, right
        let (n, d) = (8u32, 5u32);
        for left in 0..=n {
            for lo in 0..=n - left {
                for center in 0..=n - left - lo {
                    for up in 0..=n - left - lo - center {
                        let right = n - left - lo - center - up;
                        let mut y = Vec::with_capacity(n as usize);
                        for (count, rep) in [left, lo, center, up, right].iter().zip(reps) {
                            y.extend(std::iter::repeat_n(rep, *count as usize));
                        }
                        let t = tally(&y, &ts);
                        assert_eq!(
                            (t.left, t.lower[0], t.center, t.upper[0], t.right),
                            (left, lo, center, up, right)
                        );
                        let oracle = !ts.as_slice().iter().any(|&thr| {
                            let mut errors = 0;
                            let mut erasures = 0;
                            for &v in &y {
                                match quantize(v, thr).unwrap() {
                                    QuantizedSymbol::One => errors += 1,
                                    QuantizedSymbol::Erasure => erasures += 1,
                                    QuantizedSymbol::Zero => {}
                                }
                            }
                            bmd_success(errors, erasures, d)
                        });
                        assert_eq!(gmd_error_event(&t, d), oracle);
                    }
                }
            }
        }
    }

    #[test]
    fn normal_sample_moments() {
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        let n = 200_000;
        for i in 0..n {
            let v = normal_sample(123, i, 0);
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn monte_carlo_is_reproducible_across_thread_counts() {
        let c = code(15, 7);
        let chan = ch(0.7);
        let ts = set(&[0.2]);
        let a = monte_carlo_with_threads(&c, &chan, &ts, 20_000, 99, 1);
        let b = monte_carlo_with_threads(&c, &chan, &ts, 20_000, 99, 7);
        let c2 = monte_carlo_with_threads(&c, &chan, &ts, 20_000, 99, 16);
        assert_eq!(a, b);
        assert_eq!(a, c2);
        assert!(a.error_events > 0, "expected events at sigma=0.7");
    }

    #[test]
    fn monte_carlo_clean_channel_sees_nothing() {
        let est = monte_carlo(&code(15, 7), &ch(0.01), &set(&[0.2]), 100_000, 5);
        assert!(est.p_hat <= 1e-4);
    }

    #[test]
    fn monte_carlo_monotone_in_distance() {
        // Same seed, same noise: growing d can only remove error events.
        let chan = ch(0.4);
        let ts = set(&[0.2]);
        let mut prev = u64::MAX;
        for d in [3, 5, 7] {
            let est = monte_carlo_with_threads(&code(15, d), &chan, &ts, 200_000, 11, 4);
            assert!(est.error_events <= prev, "d={d}");
            prev = est.error_events;
        }
    }

    #[test]
    fn monte_carlo_extra_threshold_never_hurts() {
        // Same noise; an added trial can only rescue more vectors.
        let c = code(15, 7);
        let chan = ch(0.5);
        let one = monte_carlo_with_threads(&c, &chan, &set(&[0.2]), 200_000, 3, 4);
        let two = monte_carlo_with_threads(&c, &chan, &set(&[0.2, 0.25]), 200_000, 3, 4);
        assert!(two.error_events <= one.error_events);
    }

    #[test]
    fn monte_carlo_matches_exact_single() {
        // sigma = 0.55 keeps the error probability around 1e-3 so that 1e5
        // trials give a tight comparison against the exact sum.
        let c = code(15, 7);
        let chan = ch(0.55);
        let ts = set(&[0.2]);
        let exact = exact_single(&c, &chan, 0.2).unwrap();
        let est = monte_carlo_with_threads(&c, &chan, &ts, 100_000, 42, 8);
        assert!(
            (est.p_hat - exact).abs() <= 3.0 * est.std_err.max(1e-9),
            "p_hat {} exact {} std_err {}",
            est.p_hat,
            exact,
            est.std_err
        );
    }

    #[test]
    fn monte_carlo_matches_exact_multi() {
        let c = code(10, 5);
        let chan = ch(0.55);
        let ts = set(&[0.1, 0.3]);
        let exact = exact_multi(&c, &chan, &ts).unwrap();
        let est = monte_carlo_with_threads(&c, &chan, &ts, 100_000, 42, 8);
        assert!(
            (est.p_hat - exact).abs() <= 3.0 * est.std_err.max(1e-9),
            "p_hat {} exact {} std_err {}",
            est.p_hat,
            exact,
            est.std_err
        );
    }

    #[test]
    fn monte_carlo_t0_matches_errors_only_binomial() {
        // T = 0 disables erasing; the event is a plain binomial tail.
        let c = code(15, 7);
        let chan = ch(0.55);
        let p_e = crate::gauss::interval_prob(&chan, crate::gauss::Interval::left_of(0.0));
        let mut expect = 0.0;
        for eps in 4..=15u32 {
            let binom: f64 = (0..eps).map(|i| (15 - i) as f64 / (i + 1) as f64).product();
            expect += binom * p_e.powi(eps as i32) * (1.0 - p_e).powi(15 - eps as i32);
        }
        let est = monte_carlo_with_threads(&c, &chan, &set(&[0.0]), 200_000, 17, 4);
        assert!((est.p_hat - expect).abs() <= 3.0 * est.std_err.max(1e-9));
    }
}
