use crate::error::{Error, Result};

/// Kendall rank correlation (tau-a): `(concordant − discordant) / (n(n−1)/2)`.
/// Pairs tied in either list count as neither.
///
/// Runs in `O(n log n)` by sorting on `a` and counting inversions in `b`.
pub fn krcc(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewItems(n));
    }
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(Error::InvalidParams(format!("non-finite score {v}")));
    }

    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let total = (n * (n - 1) / 2) as i64;
    let tied_a = tie_pairs(pairs.iter().map(|p| p.0));
    let tied_both = tie_pairs_by(&pairs, |x, y| x == y);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut scratch = vec![0.0; n];
    let discordant = count_inversions(&mut ys, &mut scratch) as i64;
    // ys is now sorted
    let tied_b = tie_pairs(ys.iter().copied());

    let concordant = total - tied_a - tied_b + tied_both - discordant;
    Ok((concordant - discordant) as f64 / total as f64)
}

fn tie_pairs(sorted: impl Iterator<Item = f64>) -> i64 {
    let v: Vec<f64> = sorted.collect();
    tie_pairs_by(&v, |x, y| x == y)
}

fn tie_pairs_by<T>(sorted: &[T], eq: impl Fn(&T, &T) -> bool) -> i64 {
    let mut total = 0i64;
    let mut run = 1i64;
    for w in sorted.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Merge sort counting pairs `i < j` with `v[i] > v[j]`.
fn count_inversions(v: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (lo, hi) = v.split_at_mut(mid);
        let (s_lo, s_hi) = scratch.split_at_mut(mid);
        count_inversions(lo, s_lo) + count_inversions(hi, s_hi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            scratch[k] = v[i];
            i += 1;
        } else {
            scratch[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    count
}
