//! Deterministic low-discrepancy sampling.
//!
//! Every sample set is a Halton sequence whose starting index comes from an
//! FNV-1a hash of a tag and the bits of the inputs, so results are
//! reproducible bit for bit and independent of thread scheduling.

use crate::func::NormKind;
use crate::scalar::{count, lit, Scalar};

const PRIMES: [u32; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

/// FNV-1a over a tag and the `f64` bit patterns of the given vectors.
pub fn seed<S: Scalar>(tag: &str, parts: &[&[S]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut eat = |b: u8| {
        hash ^= b as u64;
        hash = hash.wrapping_mul(PRIME);
    };
    tag.bytes().for_each(&mut eat);
    for part in parts {
        for v in part.iter() {
            let bits = v.to_f64().unwrap_or(0.0).to_bits();
            bits.to_le_bytes().into_iter().for_each(&mut eat);
        }
        eat(0xff);
    }
    hash
}

/// Radical inverse of `index` in `base`, in `[0, 1)`.
pub fn halton(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % b) as f64;
        index /= b;
    }
    r
}

fn start(seed: u64) -> u64 {
    // keep indices small enough that radical inverses stay well spread
    1 + seed % 4096
}

fn prime(k: usize) -> u32 {
    PRIMES[k % PRIMES.len()]
}

/// `m` points of the closed unit ball in `ℝⁿ`.
///
/// In 1D the points come in `±r` pairs with low-discrepancy radii. In higher
/// dimension a sphere point is scaled by `r^{1/n}`.
pub fn ball_points<S: Scalar>(n: usize, m: usize, seed: u64) -> Vec<Vec<S>> {
    let base = start(seed);
    if n == 1 {
        return (0..m)
            .map(|k| {
                let r = 1.0 - halton(base + (k / 2) as u64, 2);
                let s = if k % 2 == 0 { r } else { -r };
                vec![lit(s)]
            })
            .collect();
    }
    let dirs = sphere_points::<S>(n, m, seed ^ 0x9e37_79b9_7f4a_7c15, NormKind::L2);
    dirs.into_iter()
        .enumerate()
        .map(|(k, d)| {
            let r = (1.0 - halton(base + k as u64, prime(n))).powf(1.0 / n as f64);
            d.into_iter().map(|c| c * lit::<S>(r)).collect()
        })
        .collect()
}

/// `m` points of the unit sphere of the given norm in `ℝⁿ`. In 1D these are
/// `+1, −1, +1, …`.
pub fn sphere_points<S: Scalar>(n: usize, m: usize, seed: u64, norm: NormKind) -> Vec<Vec<S>> {
    if n == 1 {
        return (0..m).map(|k| vec![if k % 2 == 0 { S::one() } else { -S::one() }]).collect();
    }
    let base = start(seed);
    let mut out = Vec::with_capacity(m);
    let mut k = 0u64;
    while out.len() < m {
        let v: Vec<S> = (0..n).map(|j| lit::<S>(2.0 * halton(base + k, prime(j)) - 1.0)).collect();
        k += 1;
        let len = norm.norm(&v);
        if len > lit(1e-6) {
            out.push(v.into_iter().map(|c| c / len).collect());
        }
    }
    out
}

/// `±e_j` for every coordinate, positive first.
pub fn coordinate_directions<S: Scalar>(n: usize) -> Vec<Vec<S>> {
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        for s in [S::one(), -S::one()] {
            let mut e = vec![S::zero(); n];
            e[j] = s;
            out.push(e);
        }
    }
    out
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space<S: Scalar>(lo: S, hi: S, n: usize) -> Vec<S> {
    if n <= 1 || lo == hi {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / count::<S>(n - 1);
    (0..n)
        .map(|k| if k == n - 1 { hi } else { (a + step * count(k)).exp() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn halton_base_two() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
    }

    #[test]
    fn seeds_differ_by_input() {
        let a = seed::<f64>("t", &[&[1.0], &[1.0]]);
        let b = seed::<f64>("t", &[&[1.0], &[-1.0]]);
        assert_ne!(a, b);
        assert_eq!(a, seed::<f64>("t", &[&[1.0], &[1.0]]));
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-3f64, 1.0, 4);
        assert_eq!(v.len(), 4);
        assert!((v[0] - 1e-3).abs() < 1e-15);
        assert_eq!(v[3], 1.0);
    }

    proptest! {
        #[test]
        fn ball_points_in_ball(n in 1usize..5, m in 1usize..40, s in any::<u64>()) {
            let pts = ball_points::<f64>(n, m, s);
            prop_assert_eq!(pts.len(), m);
            for p in pts {
                prop_assert!(NormKind::L2.norm(&p) <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn sphere_points_are_unit(n in 1usize..5, m in 1usize..40, s in any::<u64>(), l1 in any::<bool>()) {
            let norm = if l1 { NormKind::L1 } else { NormKind::L2 };
            for p in sphere_points::<f64>(n, m, s, norm) {
                prop_assert!((norm.norm(&p) - 1.0).abs() < 1e-12);
            }
        }
    }
}
