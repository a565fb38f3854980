//! Dependence measurement between paired lifetimes: Spearman rank
//! correlation with bootstrap confidence intervals, per-cohort slices, and
//! a bootstrap Kolmogorov-Smirnov test of positive quadrant dependence.

use crate::copulas::pseudo_observations;
use crate::error::{Error, Result};
use crate::subseed;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Spearman point estimate with a percentile-bootstrap confidence interval.
#[derive(Debug, Clone, Serialize)]
pub struct SpearmanResult {
    pub rho: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub resamples: usize,
}

/// Ascending average ranks of `xs` (1-based; ties share the mean rank).
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average ranks.
///
/// Errors when either margin is constant (the correlation is undefined).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "paired samples differ in length: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "Spearman needs at least 3 pairs, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in sample".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidInput(
            "Spearman correlation is undefined for a constant margin".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman with a 95% percentile bootstrap confidence interval.
///
/// Resamples pairs with replacement; replicates whose resample has a
/// constant margin are dropped. The returned interval always contains the
/// point estimate.
pub fn spearman_ci(xs: &[f64], ys: &[f64], resamples: usize, seed: u64) -> Result<SpearmanResult> {
    let rho = spearman(xs, ys)?;
    if resamples < 40 {
        return Err(Error::InvalidInput(format!(
            "need at least 40 bootstrap resamples for a 95% interval, got {resamples}"
        )));
    }
    let n = xs.len();
    let mut rng = ChaCha12Rng::seed_from_u64(subseed(seed, "spearman-ci"));
    let mut stats = Vec::with_capacity(resamples);
    let mut bx = vec![0.0; n];
    let mut by = vec![0.0; n];
    for _ in 0..resamples {
        for i in 0..n {
            let j = rng.random_range(0..n);
            bx[i] = xs[j];
            by[i] = ys[j];
        }
        if let Ok(r) = spearman(&bx, &by) {
            stats.push(r);
        }
    }
    if stats.len() < resamples / 2 {
        return Err(Error::NonConvergence(
            "too many degenerate bootstrap resamples for a Spearman interval".into(),
        ));
    }
    stats.sort_by(f64::total_cmp);
    let quantile = |p: f64| -> f64 {
        let pos = p * (stats.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        stats[lo] * (1.0 - frac) + stats[hi] * frac
    };
    Ok(SpearmanResult {
        rho,
        ci_low: quantile(0.025).min(rho),
        ci_high: quantile(0.975).max(rho),
        n,
        resamples,
    })
}

/// One decade cohort's Spearman estimate.
#[derive(Debug, Clone, Serialize)]
pub struct CohortSpearman {
    /// First calendar year of the decade bucket (e.g. 1820 covers
    /// 1820-1829).
    pub cohort: i32,
    #[serde(flatten)]
    pub result: SpearmanResult,
}

/// A cohort left out of the scan, with the reason.
#[derive(Debug, Clone, Serialize)]
pub struct SkippedCohort {
    pub cohort: i32,
    pub n: usize,
    pub reason: String,
}

/// Per-cohort Spearman scan over decade buckets.
#[derive(Debug, Clone, Serialize)]
pub struct CohortScan {
    pub cohorts: Vec<CohortSpearman>,
    pub skipped: Vec<SkippedCohort>,
}

/// Spearman correlation sliced by decade of a cohort key (here: the birth
/// year of the pair's first member). Buckets with fewer than 3 pairs, or
/// with degenerate margins, are reported as skipped rather than failing
/// the whole scan.
pub fn spearman_by_cohort(
    rows: &[(i32, f64, f64)],
    resamples: usize,
    seed: u64,
) -> Result<CohortScan> {
    if rows.is_empty() {
        return Err(Error::EmptyRiskSet("no pairs to slice by cohort".into()));
    }
    let mut buckets: BTreeMap<i32, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for &(year, x, y) in rows {
        let decade = year.div_euclid(10) * 10;
        let entry = buckets.entry(decade).or_default();
        entry.0.push(x);
        entry.1.push(y);
    }
    let mut cohorts = Vec::new();
    let mut skipped = Vec::new();
    for (decade, (xs, ys)) in buckets {
        if xs.len() < 3 {
            skipped.push(SkippedCohort {
                cohort: decade,
                n: xs.len(),
                reason: "fewer than 3 pairs".into(),
            });
            continue;
        }
        match spearman_ci(&xs, &ys, resamples, subseed(seed, &format!("cohort-{decade}"))) {
            Ok(result) => cohorts.push(CohortSpearman {
                cohort: decade,
                result,
            }),
            Err(e) => skipped.push(SkippedCohort {
                cohort: decade,
                n: xs.len(),
                reason: e.to_string(),
            }),
        }
    }
    Ok(CohortScan { cohorts, skipped })
}

/// Result of the bootstrap KS test of positive quadrant dependence.
#[derive(Debug, Clone, Serialize)]
pub struct PqdTestResult {
    /// `√n · sup over the grid of (u·v − Ĉₙ(u,v))`: large positive values
    /// mean the sample copula falls below the independence copula
    /// somewhere, i.e. evidence against PQD.
    pub statistic: f64,
    /// Exact fraction of bootstrap statistics strictly exceeding the
    /// observed one.
    pub p_value: f64,
    pub n: usize,
    pub grid: usize,
    pub bootstraps: usize,
}

/// Empirical copula counts on the `grid × grid` lattice `(i/g, j/g)`,
/// i,j = 1..g, as cumulative counts scaled by 1/n later. Built in
/// O(n + g²) with a cell histogram and 2-D prefix sums.
fn empirical_grid_counts(pseudo: &[(f64, f64)], g: usize) -> Vec<u32> {
    let mut hist = vec![0u32; g * g];
    let gf = g as f64;
    for &(u, v) in pseudo {
        // Smallest grid index i with u <= i/g; the epsilon keeps values
        // sitting exactly on a grid line in the cell they bound.
        let i = ((u * gf - 1e-9).ceil() as usize).clamp(1, g);
        let j = ((v * gf - 1e-9).ceil() as usize).clamp(1, g);
        hist[(i - 1) * g + (j - 1)] += 1;
    }
    // Row-wise then column-wise running sums give inclusive 2-D prefixes.
    for i in 0..g {
        for j in 1..g {
            hist[i * g + j] += hist[i * g + j - 1];
        }
    }
    for i in 1..g {
        for j in 0..g {
            hist[i * g + j] += hist[(i - 1) * g + j];
        }
    }
    hist
}

/// Re-rank values to pseudo-observations `R/(n+1)` with average ranks,
/// preserving orientation. Used on bootstrap resamples, where duplicated
/// points make ties common.
fn rerank(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    average_ranks(values)
        .into_iter()
        .map(|r| r / (n + 1.0))
        .collect()
}

/// Bootstrap Kolmogorov-Smirnov test of positive quadrant dependence.
///
/// Null hypothesis: the copula is PQD, i.e. `C(u,v) ≥ u·v` everywhere. The
/// statistic is `Sₙ = √n · sup (u·v − Ĉₙ)` over the grid; its null
/// distribution is approximated by resampling the pseudo-observations with
/// replacement, re-ranking each resample, and computing
/// `Sₙ* = √n · sup (Ĉₙ* − Ĉₙ)`. The p-value is the fraction of resamples
/// with `Sₙ* > Sₙ`.
pub fn pqd_test(
    pseudo: &[(f64, f64)],
    grid: usize,
    bootstraps: usize,
    seed: u64,
) -> Result<PqdTestResult> {
    let n = pseudo.len();
    if n < 20 {
        return Err(Error::InvalidInput(format!(
            "the PQD test needs at least 20 pairs, got {n}"
        )));
    }
    if grid < 2 {
        return Err(Error::InvalidInput(format!(
            "PQD grid must be at least 2x2, got {grid}"
        )));
    }
    if bootstraps == 0 {
        return Err(Error::InvalidInput("need at least 1 bootstrap".into()));
    }
    for &(u, v) in pseudo {
        if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
            return Err(Error::InvalidInput(format!(
                "pseudo-observation ({u}, {v}) outside the open unit square"
            )));
        }
    }
    let g = grid;
    let gf = g as f64;
    let sqrt_n = (n as f64).sqrt();
    let base = empirical_grid_counts(pseudo, g);

    let mut statistic = f64::NEG_INFINITY;
    for i in 1..=g {
        for j in 1..=g {
            let c_hat = base[(i - 1) * g + (j - 1)] as f64 / n as f64;
            let indep = (i as f64 / gf) * (j as f64 / gf);
            statistic = statistic.max(indep - c_hat);
        }
    }
    statistic *= sqrt_n;

    let master = subseed(seed, "pqd-bootstrap");
    let exceed: Vec<bool> = (0..bootstraps)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha12Rng::seed_from_u64(master);
            rng.set_stream(b as u64 + 1);
            let mut us = Vec::with_capacity(n);
            let mut vs = Vec::with_capacity(n);
            for _ in 0..n {
                let idx = rng.random_range(0..n);
                us.push(pseudo[idx].0);
                vs.push(pseudo[idx].1);
            }
            let resampled: Vec<(f64, f64)> =
                rerank(&us).into_iter().zip(rerank(&vs)).collect();
            let counts = empirical_grid_counts(&resampled, g);
            let mut sup = f64::NEG_INFINITY;
            for k in 0..g * g {
                let diff = (counts[k] as f64 - base[k] as f64) / n as f64;
                sup = sup.max(diff);
            }
            sqrt_n * sup > statistic
        })
        .collect();
    let count = exceed.iter().filter(|&&e| e).count();

    Ok(PqdTestResult {
        statistic,
        p_value: count as f64 / bootstraps as f64,
        n,
        grid,
        bootstraps,
    })
}

/// Convenience: run the PQD test directly on raw paired lifetimes.
pub fn pqd_test_on_lifetimes(
    t1: &[f64],
    t2: &[f64],
    grid: usize,
    bootstraps: usize,
    seed: u64,
) -> Result<PqdTestResult> {
    let pseudo = pseudo_observations(t1, t2)?;
    pqd_test(&pseudo, grid, bootstraps, seed)
}
