use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::aggregate::{iqm, normalize_scores, performance_profile, probability_of_improvement, stratified_bootstrap_ci, stratified_bootstrap_ci_vec};
use super::navigation::{spl, success_rate, trial_dts, TrialRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Method whose best trial return normalizes every score.
    pub reference_method: String,
    pub taus: Vec<f64>,
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
    pub d_g: f64,
    pub dts_tolerance: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            reference_method: "td3".into(),
            taus: (0..=60).map(|i| i as f64 * 0.025).collect(),
            resamples: 2000,
            level: 0.95,
            seed: 0,
            d_g: crate::env::EnvConfig::default().d_g(),
            dts_tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub checkpoint: u32,
    pub trials: usize,
    pub seeds: usize,
    pub iqm: f64,
    /// Bootstrap interval; absent with fewer than two seeds.
    pub iqm_low: Option<f64>,
    pub iqm_high: Option<f64>,
    pub success_rate: f64,
    pub dts_mean: f64,
    pub dts_std: f64,
    /// Path efficiency averaged over per-seed values.
    pub spl_mean: f64,
    pub spl_std: f64,
    pub reward_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub method: String,
    pub checkpoint: u32,
    pub tau: f64,
    pub fraction: f64,
    pub low: Option<f64>,
    pub high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRow {
    pub checkpoint: u32,
    pub x: String,
    pub y: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub reference_method: String,
    pub reference_max: f64,
    pub summaries: Vec<SummaryRow>,
    pub profiles: Vec<ProfileRow>,
    pub poi: Vec<PoiRow>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

/// Best trial return of the reference method, or of every record when the
/// reference method is absent.
pub fn reference_score(records: &[TrialRecord], method: &str) -> Result<(String, f64)> {
    let pick = |it: &mut dyn Iterator<Item = &TrialRecord>| it.map(|r| r.cumulative_reward).fold(f64::NEG_INFINITY, f64::max);
    let own = pick(&mut records.iter().filter(|r| r.method == method));
    if own.is_finite() {
        return Ok((method.to_string(), own));
    }
    let all = pick(&mut records.iter());
    if !all.is_finite() {
        return Err(Error::Metric("no trial records".into()));
    }
    Ok(("all".to_string(), all))
}

pub fn build_report(records: &[TrialRecord], opts: &ReportOptions) -> Result<MetricReport> {
    let (reference_method, reference_max) = reference_score(records, &opts.reference_method)?;
    let raw: Vec<f64> = records.iter().map(|r| r.cumulative_reward).collect();
    let scores = normalize_scores(&raw, reference_max)?;

    // (method, checkpoint) -> seed -> indices
    let mut groups: BTreeMap<(String, u32), BTreeMap<u64, Vec<usize>>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups
            .entry((r.method.clone(), r.checkpoint))
            .or_default()
            .entry(r.seed)
            .or_default()
            .push(i);
    }

    let mut summaries = Vec::new();
    let mut profiles = Vec::new();
    for (gi, ((method, checkpoint), seeds)) in groups.iter().enumerate() {
        let idx: Vec<usize> = seeds.values().flatten().copied().collect();
        let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        let trials: Vec<TrialRecord> = idx.iter().map(|&i| records[i].clone()).collect();
        let strata: Vec<Vec<f64>> = seeds.values().map(|v| v.iter().map(|&i| scores[i]).collect()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(gi as u64));

        let point = iqm(&s)?;
        let ci = if strata.len() >= 2 {
            Some(stratified_bootstrap_ci(&strata, opts.resamples, opts.level, &mut rng, iqm)?)
        } else {
            None
        };
        let dts: Vec<f64> = trials.iter().map(|t| trial_dts(t, opts.d_g, opts.dts_tolerance)).collect();
        let (dts_mean, dts_std) = mean_std(&dts);
        let per_seed_spl: Vec<f64> = seeds
            .values()
            .map(|v| spl(&v.iter().map(|&i| records[i].clone()).collect::<Vec<_>>()))
            .collect::<Result<_>>()?;
        let (spl_mean, spl_std) = mean_std(&per_seed_spl);
        summaries.push(SummaryRow {
            method: method.clone(),
            checkpoint: *checkpoint,
            trials: s.len(),
            seeds: strata.len(),
            iqm: point,
            iqm_low: ci.map(|c| c.0),
            iqm_high: ci.map(|c| c.1),
            success_rate: success_rate(&trials)?,
            dts_mean,
            dts_std,
            spl_mean,
            spl_std,
            reward_mean: mean_std(&raw_of(records, &idx)).0,
        });

        let fr = performance_profile(&s, &opts.taus)?;
        let pci = if strata.len() >= 2 {
            Some(stratified_bootstrap_ci_vec(&strata, opts.resamples, opts.level, &mut rng, |x| {
                performance_profile(x, &opts.taus)
            })?)
        } else {
            None
        };
        for (k, (&tau, &fraction)) in opts.taus.iter().zip(&fr).enumerate() {
            profiles.push(ProfileRow {
                method: method.clone(),
                checkpoint: *checkpoint,
                tau,
                fraction,
                low: pci.as_ref().map(|c| c[k].0),
                high: pci.as_ref().map(|c| c[k].1),
            });
        }
    }

    let mut by_ckpt: BTreeMap<u32, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for (r, &s) in records.iter().zip(&scores) {
        by_ckpt.entry(r.checkpoint).or_default().entry(r.method.clone()).or_default().push(s);
    }
    let mut poi = Vec::new();
    for (ckpt, methods) in &by_ckpt {
        for (x, xs) in methods {
            for (y, ys) in methods {
                poi.push(PoiRow {
                    checkpoint: *ckpt,
                    x: x.clone(),
                    y: y.clone(),
                    probability: probability_of_improvement(xs, ys)?,
                });
            }
        }
    }

    Ok(MetricReport {
        reference_method,
        reference_max,
        summaries,
        profiles,
        poi,
    })
}

fn raw_of(records: &[TrialRecord], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| records[i].cumulative_reward).collect()
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

impl MetricReport {
    pub fn summary_csv(&self) -> Result<String> {
        to_csv(&self.summaries)
    }

    pub fn profile_csv(&self) -> Result<String> {
        to_csv(&self.profiles)
    }

    pub fn poi_csv(&self) -> Result<String> {
        to_csv(&self.poi)
    }

    pub fn summary(&self, method: &str, checkpoint: u32) -> Option<&SummaryRow> {
        self.summaries.iter().find(|s| s.method == method && s.checkpoint == checkpoint)
    }
}
