//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's own ranking, distance or enumeration code.

#![allow(dead_code)]

/// Every permutation of `1..=n` (as 1-based ranks) in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v + 1);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

pub fn footrule(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y)).sum()
}

/// `(a ∘ t)[i] = a[t[i] - 1]`.
pub fn compose(a: &[usize], t: &[usize]) -> Vec<usize> {
    t.iter().map(|&j| a[j - 1]).collect()
}

/// Average ranks by direct counting: rank = #smaller + (#equal + 1) / 2.
pub fn naive_average_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let less = values.iter().filter(|&&w| w < v).count() as f64;
            let equal = values.iter().filter(|&&w| w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Two-sided exact signed-rank p-value by listing all `2^k` sign vectors.
pub fn brute_force_signed_rank_p(diffs: &[f64]) -> f64 {
    let nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    if nz.is_empty() {
        return 1.0;
    }
    let abs: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    let ranks = naive_average_ranks(&abs);
    let total: f64 = ranks.iter().sum();
    let observed: f64 = ranks.iter().zip(&nz).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let dev = (observed - total / 2.0).abs();
    let k = nz.len();
    let mut extreme = 0u64;
    for mask in 0u64..(1 << k) {
        let w: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (w - total / 2.0).abs() >= dev - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << k) as f64
}
