use rand::Rng;

use crate::error::{Error, Result};

/// Divide raw returns by a positive reference return.
pub fn normalize_scores(raw: &[f64], reference_max: f64) -> Result<Vec<f64>> {
    if !(reference_max > 0.0 && reference_max.is_finite()) {
        return Err(Error::Metric(format!("reference score must be positive, got {reference_max}")));
    }
    Ok(raw.iter().map(|r| r / reference_max).collect())
}

/// Linear-interpolation quantile of sorted data, `q` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn sorted_copy(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Metric("scores contain NaN".into()));
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Interquartile mean: sort, drop `floor(n / 4)` values from each end and
/// average the rest. For `n` divisible by four this is the exact middle half.
pub fn iqm(scores: &[f64]) -> Result<f64> {
    if scores.len() < 4 {
        return Err(Error::Metric(format!("interquartile mean needs at least 4 scores, got {}", scores.len())));
    }
    let s = sorted_copy(scores)?;
    let k = s.len() / 4;
    let mid = &s[k..s.len() - k];
    Ok(mid.iter().sum::<f64>() / mid.len() as f64)
}

/// Fraction of scores strictly above each threshold.
pub fn performance_profile(scores: &[f64], taus: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::Metric("performance profile of an empty score set".into()));
    }
    let s = sorted_copy(scores)?;
    let n = s.len() as f64;
    Ok(taus
        .iter()
        .map(|&t| {
            let at_or_below = s.partition_point(|&v| v <= t);
            (s.len() - at_or_below) as f64 / n
        })
        .collect())
}

/// Chance that a draw from `x` beats a draw from `y`, ties counting half.
pub fn probability_of_improvement(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Metric("probability of improvement needs two non-empty samples".into()));
    }
    let ys = sorted_copy(y)?;
    let mut total = 0.0;
    for &xi in x {
        let below = ys.partition_point(|&v| v < xi);
        let not_above = ys.partition_point(|&v| v <= xi);
        total += below as f64 + 0.5 * (not_above - below) as f64;
    }
    Ok(total / (x.len() * y.len()) as f64)
}

/// Bootstrap replicates of a vector statistic where each replicate resamples
/// every stratum with replacement and keeps the strata sizes.
pub fn stratified_bootstrap<R, F>(strata: &[Vec<f64>], resamples: usize, rng: &mut R, mut stat: F) -> Result<Vec<Vec<f64>>>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if strata.len() < 2 {
        return Err(Error::Metric("stratified bootstrap needs at least two strata".into()));
    }
    if strata.iter().any(|s| s.is_empty()) {
        return Err(Error::Metric("empty bootstrap stratum".into()));
    }
    if resamples == 0 {
        return Err(Error::Metric("bootstrap needs at least one resample".into()));
    }
    let total: usize = strata.iter().map(Vec::len).sum();
    let mut buf = Vec::with_capacity(total);
    let mut out = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        buf.clear();
        for s in strata {
            for _ in 0..s.len() {
                buf.push(s[rng.random_range(0..s.len())]);
            }
        }
        out.push(stat(&buf)?);
    }
    Ok(out)
}

/// Percentile interval of a scalar statistic under the stratified bootstrap.
pub fn stratified_bootstrap_ci<R, F>(strata: &[Vec<f64>], resamples: usize, level: f64, rng: &mut R, mut stat: F) -> Result<(f64, f64)>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<f64>,
{
    let ci = stratified_bootstrap_ci_vec(strata, resamples, level, rng, |s| Ok(vec![stat(s)?]))?;
    Ok(ci[0])
}

/// Per-component percentile intervals of a vector statistic.
pub fn stratified_bootstrap_ci_vec<R, F>(
    strata: &[Vec<f64>],
    resamples: usize,
    level: f64,
    rng: &mut R,
    stat: F,
) -> Result<Vec<(f64, f64)>>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Metric("confidence level must lie in (0, 1)".into()));
    }
    let reps = stratified_bootstrap(strata, resamples, rng, stat)?;
    let k = reps[0].len();
    let alpha = (1.0 - level) / 2.0;
    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let col: Vec<f64> = reps.iter().map(|r| r[c]).collect();
        let s = sorted_copy(&col)?;
        out.push((quantile_sorted(&s, alpha), quantile_sorted(&s, 1.0 - alpha)));
    }
    Ok(out)
}
