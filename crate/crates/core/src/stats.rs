//! Correlation coefficients, cross-system agreement and significance tests.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::corpus::SystemScoreTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Kendall,
    Pearson,
    Spearman,
}

impl CorrelationMethod {
    pub const ALL: [CorrelationMethod; 3] = [
        CorrelationMethod::Kendall,
        CorrelationMethod::Pearson,
        CorrelationMethod::Spearman,
    ];
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMethod::Kendall => "kendall",
            CorrelationMethod::Pearson => "pearson",
            CorrelationMethod::Spearman => "spearman",
        })
    }
}

impl std::str::FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kendall" | "tau" => Ok(CorrelationMethod::Kendall),
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            other => Err(Error::invalid(format!("unknown correlation method `{other}`"))),
        }
    }
}

/// The three coefficients between two paired samples. Kendall is tau-b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub kendall: f64,
    pub pearson: f64,
    pub spearman: f64,
    pub n: usize,
}

fn check_paired(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("correlation inputs must be finite"));
    }
    Ok(())
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Sample Pearson correlation. Constant input is an error rather than 0.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(Error::Degenerate("Pearson correlation of a constant sample".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(Error::Degenerate("Spearman correlation of a constant sample".into()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Number of pairs tied within runs of equal keys of a sorted sequence.
fn tied_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for v in sorted {
        if prev.as_ref() == Some(&v) {
            run += 1;
        } else {
            total += run * (run.saturating_sub(1)) / 2;
            run = 1;
        }
        prev = Some(v);
    }
    total + run * run.saturating_sub(1) / 2
}

/// Sorts `v` in place and returns the number of inversions.
fn merge_sort_swaps(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_sort_swaps(&mut v[..mid], &mut buf[..mid]);
    swaps += merge_sort_swaps(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    let k = k + mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall's tau-b in O(n log n) (Knight's algorithm).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y)?;
    let n = x.len() as u64;
    let total = n * (n - 1) / 2;

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let x_ties = tied_pairs(pairs.iter().map(|p| p.0));
    let joint_ties = tied_pairs(pairs.iter().copied());

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let swaps = merge_sort_swaps(&mut ys, &mut buf);
    let y_ties = tied_pairs(ys.iter().copied());

    if x_ties == total || y_ties == total {
        return Err(Error::Degenerate("Kendall tau with all values tied".into()));
    }
    let concordant_minus_discordant =
        total as i64 - x_ties as i64 - y_ties as i64 + joint_ties as i64 - 2 * swaps as i64;
    let denom = (((total - x_ties) * (total - y_ties)) as f64).sqrt();
    Ok((concordant_minus_discordant as f64 / denom).clamp(-1.0, 1.0))
}

pub fn correlate(method: CorrelationMethod, x: &[f64], y: &[f64]) -> Result<f64> {
    match method {
        CorrelationMethod::Kendall => kendall_tau(x, y),
        CorrelationMethod::Pearson => pearson(x, y),
        CorrelationMethod::Spearman => spearman(x, y),
    }
}

pub fn correlation_report(x: &[f64], y: &[f64]) -> Result<CorrelationReport> {
    Ok(CorrelationReport {
        kendall: kendall_tau(x, y)?,
        pearson: pearson(x, y)?,
        spearman: spearman(x, y)?,
        n: x.len(),
    })
}

/// Mean pairwise correlation between every two systems' score columns,
/// each pair compared over the documents both systems scored.
pub fn system_agreement(table: &SystemScoreTable, method: CorrelationMethod) -> Result<f64> {
    let systems = table.system_ids();
    if systems.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: systems.len(),
        });
    }
    let columns: Vec<_> = systems.iter().map(|s| table.system_column(s)).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for l in 0..columns.len() {
        for k in (l + 1)..columns.len() {
            let (a, b): (Vec<f64>, Vec<f64>) = columns[l]
                .iter()
                .filter_map(|(doc, &s)| columns[k].get(doc).map(|&t| (s, t)))
                .unzip();
            if a.len() < 2 {
                return Err(Error::invalid(format!(
                    "systems `{}` and `{}` share fewer than 2 documents",
                    systems[l], systems[k]
                )));
            }
            sum += correlate(method, &a, &b)
                .map_err(|e| Error::Degenerate(format!("systems `{}` and `{}`: {e}", systems[l], systems[k])))?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// Outcome of a one-sided paired bootstrap test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub p_value: f64,
    /// Resamples in which the difference exceeded twice the observed one.
    pub s: usize,
    pub b: usize,
    pub original_diff: f64,
    pub seed: u64,
}

/// Indices of the `iteration`-th resample: `n` draws with replacement.
pub fn resample_indices(n: usize, seed: u64, iteration: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ iteration as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Paired bootstrap test that method A beats method B.
///
/// `diff` evaluates score(A) - score(B) on a multiset of instance indices.
/// When the observed difference is not positive there is nothing to test and
/// the p-value is 1. Iterations run on the current rayon pool; each one seeds
/// its own generator from `seed ^ iteration`, so the result does not depend on
/// the number of threads.
pub fn paired_bootstrap<F>(n: usize, iterations: usize, seed: u64, diff: F) -> Result<BootstrapResult>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    if n == 0 {
        return Err(Error::invalid("bootstrap over an empty document set"));
    }
    if iterations == 0 {
        return Err(Error::invalid("bootstrap needs at least one iteration"));
    }
    let all: Vec<usize> = (0..n).collect();
    let original_diff = diff(&all);
    if !original_diff.is_finite() {
        return Err(Error::invalid("non-finite score difference"));
    }
    if original_diff <= 0.0 {
        return Ok(BootstrapResult {
            p_value: 1.0,
            s: 0,
            b: iterations,
            original_diff,
            seed,
        });
    }
    // Resamples that merely repeat the observed gap land on the threshold up
    // to rounding; they must not count as exceeding it.
    let threshold = 2.0 * original_diff * (1.0 + 1e-12);
    let s = (0..iterations)
        .into_par_iter()
        .filter(|&i| diff(&resample_indices(n, seed, i)) > threshold)
        .count();
    Ok(BootstrapResult {
        p_value: s as f64 / iterations as f64,
        s,
        b: iterations,
        original_diff,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    /// Exact distribution up to 20 non-zero differences, normal approximation above.
    #[default]
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    /// Number of non-zero differences.
    pub n: usize,
    pub p_value: f64,
    pub exact: bool,
}

pub const WILCOXON_EXACT_MAX: usize = 20;

pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_signed_rank_with(x, y, WilcoxonMethod::Auto)
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
pub fn wilcoxon_signed_rank_with(x: &[f64], y: &[f64], method: WilcoxonMethod) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("Wilcoxon inputs must be finite"));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            n: 0,
            p_value: 1.0,
            exact: true,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let exact = match method {
        WilcoxonMethod::Auto => n <= WILCOXON_EXACT_MAX,
        WilcoxonMethod::Exact => true,
        WilcoxonMethod::Normal => false,
    };
    let p_value = if exact {
        wilcoxon_exact_p(&ranks, w_plus)
    } else {
        wilcoxon_normal_p(&ranks, w_plus)
    };
    Ok(WilcoxonResult {
        w_plus,
        n,
        p_value,
        exact,
    })
}

/// Counts sign assignments over doubled (integral) ranks.
fn wilcoxon_exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = 2f64.powi(ranks.len() as i32);
    let w = (2.0 * w_plus).round() as usize;
    let low: f64 = counts[..=w].iter().sum::<f64>() / total;
    let high: f64 = counts[w..].iter().sum::<f64>() / total;
    (2.0 * low.min(high)).min(1.0)
}

/// Normal approximation with tie and continuity corrections.
fn wilcoxon_normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Cohen's kappa between two annotators over the same items.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let mut marg_a: HashMap<&T, usize> = HashMap::new();
    let mut marg_b: HashMap<&T, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *marg_a.entry(x).or_default() += 1;
        *marg_b.entry(y).or_default() += 1;
    }
    let p_o = agree / n;
    let p_e: f64 = marg_a
        .iter()
        .map(|(label, &ca)| {
            let cb = marg_b.get(label).copied().unwrap_or(0);
            (ca as f64 / n) * (cb as f64 / n)
        })
        .sum();
    if marg_a.len() == 1 && marg_b.len() == 1 && p_e >= 1.0 - 1e-12 {
        return Err(Error::Degenerate("both annotators used the same single label".into()));
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
