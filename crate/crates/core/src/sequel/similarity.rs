//! String similarity kernels.

use std::collections::HashMap;

/// Length of the longest common subsequence of two char slices.
///
/// Uses the bit-parallel recurrence when the shorter side fits in a machine
/// word, a rolling-row dynamic program otherwise.
pub fn lcs_len(a: &[char], b: &[char]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 0;
    }
    if short.len() <= 64 {
        lcs_bit_parallel(short, long)
    } else {
        lcs_dp(short, long)
    }
}

fn lcs_bit_parallel(pattern: &[char], text: &[char]) -> usize {
    let mut masks: HashMap<char, u64> = HashMap::with_capacity(pattern.len());
    for (i, c) in pattern.iter().enumerate() {
        *masks.entry(*c).or_default() |= 1 << i;
    }
    let width = pattern.len();
    let live = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    let mut v = u64::MAX;
    for c in text {
        if let Some(&m) = masks.get(c) {
            let u = v & m;
            v = v.wrapping_add(u) | (v - u);
        }
    }
    (!v & live).count_ones() as usize
}

fn lcs_dp(a: &[char], b: &[char]) -> usize {
    let mut prev = vec![0usize; a.len() + 1];
    let mut cur = vec![0usize; a.len() + 1];
    for cb in b {
        for (i, ca) in a.iter().enumerate() {
            cur[i + 1] = if ca == cb { prev[i] + 1 } else { prev[i + 1].max(cur[i]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[a.len()]
}

/// Normalised indel similarity `2·|LCS| / (|a| + |b|)`, i.e. one minus the
/// insert/delete edit distance over the total length. Both empty → 1.0.
///
/// Callers fold case before calling.
pub fn username_ratio(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    ratio_from_matches(lcs_len(&a, &b), a.len() + b.len())
}

/// Upper bound of [`username_ratio`] given only the two lengths.
pub fn ratio_upper_bound(len_a: usize, len_b: usize) -> f64 {
    ratio_from_matches(len_a.min(len_b), len_a + len_b)
}

fn ratio_from_matches(matched: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        (2 * matched) as f64 / total as f64
    }
}

/// Longest common contiguous block of `a[alo..ahi]` and `b[blo..bhi]` as
/// `(i, j, size)`. Among equally long blocks the one starting first in `a`
/// wins, then the one starting first in `b`.
fn longest_block(a: &[char], b: &[char], alo: usize, ahi: usize, blo: usize, bhi: usize) -> (usize, usize, usize) {
    let width = bhi - blo;
    let mut prev = vec![0usize; width + 1];
    let mut cur = vec![0usize; width + 1];
    let mut best = (alo, blo, 0usize);
    for i in alo..ahi {
        for j in blo..bhi {
            let k = if a[i] == b[j] { prev[j - blo] + 1 } else { 0 };
            cur[j - blo + 1] = k;
            if k > best.2 {
                best = (i + 1 - k, j + 1 - k, k);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Characters matched by Ratcliff/Obershelp block matching: take the longest
/// common block, then recurse on the pieces to its left and to its right.
pub fn gestalt_matches(a: &[char], b: &[char]) -> usize {
    let mut matched = 0;
    let mut stack = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, k) = longest_block(a, b, alo, ahi, blo, bhi);
        if k == 0 {
            continue;
        }
        matched += k;
        stack.push((alo, i, blo, j));
        stack.push((i + k, ahi, j + k, bhi));
    }
    matched
}

/// Ratcliff/Obershelp ratio `2M / (|a| + |b|)` without junk heuristics.
/// Both empty → 1.0.
///
/// Unlike [`username_ratio`] this is not symmetric in general: block choice
/// depends on argument order (`("tide", "diet")` = 0.25, reversed = 0.5).
pub fn gestalt_ratio(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    ratio_from_matches(gestalt_matches(&a, &b), a.len() + b.len())
}
