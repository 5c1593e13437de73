//! Deterministic numeric utilities: seed derivation, fixed-order summation,
//! and `l_q` norms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; the mixing step behind [`derive_seed`].
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a base seed and a path of tags.
///
/// This is the stream-splitting contract used by all stochastic operations:
/// replication `j` of grid point `g` uses `derive_seed(base, &[g, j])`, so any
/// subset of the grid can be recomputed independently and reproduces the same
/// streams. Identity is guaranteed per implementation, not across languages.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(base ^ 0xA076_1D64_78BD_642F);
    for &tag in tags {
        state = splitmix64(state ^ splitmix64(tag));
    }
    state
}

/// Seeded RNG used everywhere randomness is needed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pairwise (cascade) summation of `f(i)` for `i` in `lo..hi`.
///
/// The association order depends only on the index range, so results are
/// identical across runs and thread counts.
pub fn pairwise_sum_indexed<F: Fn(usize) -> f64 + Copy>(lo: usize, hi: usize, f: F) -> f64 {
    const LEAF: usize = 64;
    if hi - lo <= LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    } else {
        let mid = lo + (hi - lo) / 2;
        pairwise_sum_indexed(lo, mid, f) + pairwise_sum_indexed(mid, hi, f)
    }
}

/// Pairwise summation of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_indexed(0, xs.len(), |i| xs[i])
}

/// `l_q` norm of a vector; `q = f64::INFINITY` selects the max norm.
pub fn lq_norm(v: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else if q == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else if q == 2.0 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        v.iter()
            .map(|x| x.abs().powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = pairwise_sum_indexed(0, xs.len(), |i| {
        let d = xs[i] - mean;
        d * d
    });
    (mean, (ss / (n - 1.0)).sqrt())
}
