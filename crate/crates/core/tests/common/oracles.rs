//! Metric implementations against brute-force references. Each check runs
//! `CASES` random inputs and returns the worst absolute deviation.

use ogn_core::env::TerminalCause;
use ogn_core::metrics::{iqm, performance_profile, probability_of_improvement, spl, stratified_bootstrap_ci, TrialRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const CASES: usize = 1000;

/// Random scores with deliberate ties.
pub fn scores(r: &mut ChaCha8Rng, lo: usize) -> Vec<f64> {
    let n = r.random_range(lo..64);
    (0..n)
        .map(|_| {
            let v: f64 = r.random_range(-2.0..3.0);
            if r.random_bool(0.3) {
                (v * 4.0).round() / 4.0
            } else {
                v
            }
        })
        .collect()
}

/// Trimmed mean by explicit ranks: element `i` has rank equal to the number
/// of elements ordered before it, ties broken by position.
pub fn brute_iqm(x: &[f64]) -> f64 {
    let n = x.len();
    let k = n / 4;
    let mut sum = 0.0;
    let mut count = 0;
    for i in 0..n {
        let rank = (0..n).filter(|&j| x[j] < x[i] || (x[j] == x[i] && j < i)).count();
        if rank >= k && rank < n - k {
            sum += x[i];
            count += 1;
        }
    }
    sum / count as f64
}

pub fn iqm_worst() -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    (0..CASES)
        .map(|_| {
            let x = scores(&mut r, 4);
            (iqm(&x).unwrap() - brute_iqm(&x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Also checks that the curve never increases along sorted thresholds;
/// a violation returns infinity.
pub fn profile_worst() -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let x = scores(&mut r, 1);
        let mut taus: Vec<f64> = (0..20).map(|_| r.random_range(-2.5..3.5)).collect();
        taus.extend(x.iter().take(3));
        let got = performance_profile(&x, &taus).unwrap();
        for (t, g) in taus.iter().zip(&got) {
            let want = x.iter().filter(|&&v| v > *t).count() as f64 / x.len() as f64;
            worst = worst.max((g - want).abs());
        }
        taus.sort_by(f64::total_cmp);
        let curve = performance_profile(&x, &taus).unwrap();
        if !curve.windows(2).all(|w| w[1] <= w[0]) {
            return f64::INFINITY;
        }
    }
    worst
}

/// Includes the complementarity `P(X>Y) + P(Y>X) = 1`.
pub fn poi_worst() -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let x = scores(&mut r, 1);
        let y = scores(&mut r, 1);
        let mut acc = 0.0;
        for a in &x {
            for b in &y {
                acc += if a > b {
                    1.0
                } else if a == b {
                    0.5
                } else {
                    0.0
                };
            }
        }
        let want = acc / (x.len() * y.len()) as f64;
        let got = probability_of_improvement(&x, &y).unwrap();
        let back = probability_of_improvement(&y, &x).unwrap();
        worst = worst.max((got - want).abs()).max((got + back - 1.0).abs());
    }
    worst
}

pub fn record(success: bool, path_length: f64, shortest_path: f64) -> TrialRecord {
    TrialRecord {
        method: "m".into(),
        seed: 0,
        checkpoint: 1,
        target: 0,
        trial: 0,
        cumulative_reward: 0.0,
        success,
        terminal_cause: if success { TerminalCause::Success } else { TerminalCause::TimeLimit },
        path_length,
        shortest_path,
        final_distance: 0.35,
        r_dist: 0.0,
        r_ori: 0.0,
        r_elev: 0.0,
        steps: 1,
        elapsed: 0.2,
    }
}

pub fn spl_worst() -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let n = r.random_range(1..40);
        let trials: Vec<TrialRecord> = (0..n)
            .map(|_| {
                let l = r.random_range(0.1..2.0);
                record(r.random_bool(0.6), r.random_range(0.0..5.0), l)
            })
            .collect();
        let want = trials
            .iter()
            .map(|t| if t.success { t.shortest_path / t.path_length.max(t.shortest_path) } else { 0.0 })
            .sum::<f64>()
            / n as f64;
        let got = spl(&trials).unwrap();
        if !(0.0..=1.0).contains(&got) {
            return f64::INFINITY;
        }
        worst = worst.max((got - want).abs());
    }
    worst
}

/// Fraction of 95% percentile intervals of the pooled mean that cover the
/// true value on Gaussian strata.
pub fn bootstrap_coverage() -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let means = [0.0, 1.0, 3.0];
    let truth = means.iter().sum::<f64>() / 3.0;
    let sims = 500;
    let mut hits = 0;
    for _ in 0..sims {
        let strata: Vec<Vec<f64>> = means
            .iter()
            .map(|&m| {
                let d = Normal::new(m, 1.0).unwrap();
                (0..40).map(|_| d.sample(&mut r)).collect()
            })
            .collect();
        let (lo, hi) =
            stratified_bootstrap_ci(&strata, 2000, 0.95, &mut r, |s| Ok(s.iter().sum::<f64>() / s.len() as f64)).unwrap();
        hits += (lo <= truth && truth <= hi) as usize;
    }
    hits as f64 / sims as f64
}
