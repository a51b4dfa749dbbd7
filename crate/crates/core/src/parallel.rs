//! Deterministic parallel reduction.
//!
//! Floating-point sums depend on association order, so naive parallel
//! reduction produces run-to-run differences.  Everything here splits the
//! index range into fixed-size chunks, evaluates chunks in parallel (each
//! chunk summed sequentially in index order), and combines the chunk totals
//! sequentially in chunk order.  The result is bit-identical for any thread
//! count, including one.

use num_complex::Complex64;
use rayon::prelude::*;

/// Fixed chunk width used by all deterministic sums.
pub const CHUNK: usize = 1024;

/// Sum `f(i)` for `i in 0..n` with deterministic association.
pub fn sum_complex<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let chunks: Vec<Complex64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                acc += f(i);
            }
            acc
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for c in chunks {
        total += c;
    }
    total
}

/// Sum a fixed-size array of accumulators per index, deterministically.
/// Used for the sixteen-component series where each term updates several
/// residue-class buckets at once.
pub fn sum_buckets<const K: usize, F>(n: usize, f: F) -> [Complex64; K]
where
    F: Fn(usize, &mut [Complex64; K]) + Sync,
{
    let chunks: Vec<[Complex64; K]> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = [Complex64::new(0.0, 0.0); K];
            for i in lo..hi {
                f(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = [Complex64::new(0.0, 0.0); K];
    for c in chunks {
        for (t, v) in total.iter_mut().zip(c.iter()) {
            *t += v;
        }
    }
    total
}

/// Deterministic parallel map: results are returned in index order.
pub fn map_ordered<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_sequential_bitwise() {
        // mixed-magnitude terms so association order matters
        let f = |i: usize| {
            let x = (i as f64 + 1.0).sin() * (1.0 + (i % 97) as f64 * 1e3);
            Complex64::new(x, 1.0 / (i as f64 + 1.0))
        };
        let n = 10_000;
        let par = sum_complex(n, f);
        // sequential reference with the same chunking
        let mut seq = Complex64::new(0.0, 0.0);
        for c in 0..n.div_ceil(CHUNK) {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc += f(i);
            }
            seq += acc;
        }
        assert_eq!(par, seq, "chunked parallel sum must be bit-stable");
    }

    #[test]
    fn bucket_sum_matches_scalar_sums() {
        let got: [Complex64; 4] = sum_buckets(5000, |i, acc| {
            acc[i % 4] += Complex64::new(1.0 / (i as f64 + 1.0), 0.0);
        });
        for r in 0..4 {
            let want = sum_complex(5000, |i| {
                if i % 4 == r {
                    Complex64::new(1.0 / (i as f64 + 1.0), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            assert_eq!(got[r], want);
        }
    }
}
