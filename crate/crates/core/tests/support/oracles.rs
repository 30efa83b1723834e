//! Slow, definitional reference implementations used to check the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Fractional rank: one plus the number of smaller values plus half the other ties.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, a)| {
            let below = x.iter().filter(|b| *b < a).count() as f64;
            let tied = x.iter().enumerate().filter(|(j, b)| *j != i && *b == a).count() as f64;
            1.0 + below + tied / 2.0
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&ranks(x), &ranks(y))
}

/// Tau-b from an explicit walk over every pair.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                tied_x += 1;
                tied_y += 1;
            } else if dx == 0.0 {
                tied_x += 1;
            } else if dy == 0.0 {
                tied_y += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n.saturating_sub(1)) / 2) as i64;
    let denom = (((pairs - tied_x) * (pairs - tied_y)) as f64).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some((concordant - discordant) as f64 / denom)
}

fn normalized(tokens: &[&str]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(|t| t.to_lowercase())
        .collect()
}

/// Clipped n-gram overlap from explicit multisets: (overlap, candidate total, reference total).
pub fn rouge_n_counts(candidate: &[&str], reference: &[&str], n: usize) -> (usize, usize, usize) {
    let grams = |toks: &[String]| {
        let mut m: BTreeMap<Vec<String>, usize> = BTreeMap::new();
        if toks.len() >= n {
            for i in 0..=toks.len() - n {
                *m.entry(toks[i..i + n].to_vec()).or_default() += 1;
            }
        }
        m
    };
    let c = grams(&normalized(candidate));
    let r = grams(&normalized(reference));
    let overlap = c.iter().map(|(g, k)| (*k).min(r.get(g).copied().unwrap_or(0))).sum();
    (overlap, c.values().sum(), r.values().sum())
}

fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|x| it.any(|y| y == x))
}

/// LCS length by trying every subsequence of the candidate.
pub fn lcs_by_enumeration(candidate: &[&str], reference: &[&str]) -> (usize, usize, usize) {
    let c = normalized(candidate);
    let r = normalized(reference);
    let mut best = 0;
    for mask in 0u32..(1 << c.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let sub: Vec<String> = (0..c.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| c[i].clone())
            .collect();
        if is_subsequence(&sub, &r) {
            best = size;
        }
    }
    (best, c.len(), r.len())
}

pub fn f1(overlap: usize, cand: usize, reference: usize) -> (f64, f64, f64) {
    let p = if cand == 0 { 0.0 } else { overlap as f64 / cand as f64 };
    let r = if reference == 0 {
        0.0
    } else {
        overlap as f64 / reference as f64
    };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

/// Hybrid mean over a resample given as document indices, with instances
/// ordered by (priority, id, position) and the first `k` credited 1.0.
pub fn hybrid_mean(scores: &[f64], priority: &[f64], ids: &[&str], sample: &[usize], k: usize) -> f64 {
    let mut inst: Vec<(f64, &str, usize, f64)> = sample
        .iter()
        .enumerate()
        .map(|(pos, &d)| (priority[d], ids[d], pos, scores[d]))
        .collect();
    inst.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)).then(a.2.cmp(&b.2)));
    let total: f64 = inst
        .iter()
        .enumerate()
        .map(|(rank, i)| if rank < k { 1.0 } else { i.3 })
        .sum();
    total / sample.len() as f64
}

/// Exact bootstrap p-value by visiting all n^n equiprobable resamples.
pub fn exact_bootstrap_p(n: usize, diff: impl Fn(&[usize]) -> f64) -> f64 {
    let all: Vec<usize> = (0..n).collect();
    let original = diff(&all);
    if original <= 0.0 {
        return 1.0;
    }
    let total = n.pow(n as u32);
    let mut hits = 0;
    for code in 0..total {
        let mut c = code;
        let sample: Vec<usize> = (0..n)
            .map(|_| {
                let d = c % n;
                c /= n;
                d
            })
            .collect();
        if diff(&sample) > 2.0 * original {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

/// Two-sided signed-rank p-value by enumerating all 2^n sign assignments.
pub fn wilcoxon_exact_enumeration(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let r = ranks(&abs);
    let observed: f64 = d.iter().zip(&r).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let total: f64 = r.iter().sum();
    let centre = total / 2.0;
    let dev = (observed - centre).abs();
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| r[i]).sum();
        if (w - centre).abs() >= dev - 1e-9 {
            extreme += 1;
        }
    }
    (extreme as f64 / (1u64 << n) as f64).min(1.0)
}
