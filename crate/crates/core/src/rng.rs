//! Reproducible random streams and Gaussian column blocks.
//!
//! Every replica draws from its own ChaCha8 stream: the 256-bit key is
//! expanded from the 64-bit master seed with SplitMix64 and the replica index
//! selects the ChaCha stream id. Streams with different replica indices are
//! disjoint by construction, so replicas can be generated in any order or on
//! any worker without jump-ahead.
//!
//! Gaussian variates use the Marsaglia polar method. The choice is fixed;
//! changing it changes every stored fixture.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::field::{ColMatrix, FieldKind, FieldScalar};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    replica_index: u64,
    core: ChaCha8Rng,
    spare: Option<f64>,
}

/// Stream for `(master_seed, replica_index)`; identical inputs give identical
/// output regardless of how many other streams were created.
pub fn substream(master_seed: u64, replica_index: u64) -> RandomStream {
    let mut key = [0u8; 32];
    let mut state = master_seed;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut core = ChaCha8Rng::from_seed(key);
    core.set_stream(replica_index);
    RandomStream {
        master_seed,
        replica_index,
        core,
        spare: None,
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn replica_index(&self) -> u64 {
        self.replica_index
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normals (polar method).
    #[inline]
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s < 1.0 && s > 0.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                return (u * factor, v * factor);
            }
        }
    }

    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (a, b) = self.next_gaussian_pair();
        self.spare = Some(b);
        a
    }
}

/// Parses a 64-bit seed written in decimal or as `0x`-prefixed hex.
pub fn parse_seed(text: &str) -> Result<u64> {
    let t = text.trim().replace('_', "");
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse::<u64>(),
    };
    parsed.map_err(|e| Error::arg(format!("invalid seed `{text}`: {e}")))
}

/// `n×k` block of i.i.d. standard field Gaussians, filled column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBlock<T> {
    entries: ColMatrix<T>,
}

impl<T: FieldScalar> GaussianBlock<T> {
    pub fn from_matrix(entries: ColMatrix<T>) -> Self {
        Self { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn k(&self) -> usize {
        self.entries.cols()
    }

    pub fn field(&self) -> FieldKind {
        T::FIELD
    }

    pub fn entries(&self) -> &ColMatrix<T> {
        &self.entries
    }

    pub fn column(&self, i: usize) -> &[T] {
        self.entries.col(i)
    }

    pub fn into_matrix(self) -> ColMatrix<T> {
        self.entries
    }
}

pub fn gaussian_block<T: FieldScalar>(n: usize, k: usize, stream: &mut RandomStream) -> Result<GaussianBlock<T>> {
    if n == 0 || k == 0 {
        return Err(Error::arg(format!("gaussian block needs n, k >= 1 (got n={n}, k={k})")));
    }
    let data = (0..n * k).map(|_| T::standard_gaussian(stream)).collect();
    Ok(GaussianBlock {
        entries: ColMatrix::from_col_major(n, k, data)?,
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    fn first(stream: &mut RandomStream, count: usize) -> Vec<u64> {
        (0..count).map(|_| stream.next_u64()).collect()
    }

    #[test]
    fn same_seed_and_replica_repeat() {
        assert_eq!(first(&mut substream(42, 0), 100), first(&mut substream(42, 0), 100));
    }

    #[test]
    fn replicas_differ() {
        assert_ne!(first(&mut substream(42, 0), 100), first(&mut substream(42, 1), 100));
    }

    #[test]
    fn replica_is_order_independent() {
        let direct = first(&mut substream(42, 7), 100);
        for r in 0..7 {
            let _ = first(&mut substream(42, r), 1000);
        }
        assert_eq!(direct, first(&mut substream(42, 7), 100));
    }

    #[test]
    fn seed_parsing() {
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert_eq!(parse_seed("0x2A").unwrap(), 42);
        assert_eq!(parse_seed("0xffffffffffffffff").unwrap(), u64::MAX);
        assert!(parse_seed("-1").is_err());
        assert!(parse_seed("0xg").is_err());
    }

    #[test]
    fn block_rejects_empty_dimensions() {
        let mut s = substream(1, 0);
        assert!(gaussian_block::<f64>(0, 1, &mut s).is_err());
        assert!(gaussian_block::<f64>(3, 0, &mut s).is_err());
    }

    #[test]
    fn block_is_deterministic() {
        let a = gaussian_block::<f64>(3, 2, &mut substream(9, 4)).unwrap();
        let b = gaussian_block::<f64>(3, 2, &mut substream(9, 4)).unwrap();
        assert_eq!(a, b);
        let c = gaussian_block::<Complex64>(3, 2, &mut substream(9, 4)).unwrap();
        let d = gaussian_block::<Complex64>(3, 2, &mut substream(9, 4)).unwrap();
        assert_eq!(c, d);
    }

    // 5σ bounds: sd(mean) = n^{-1/2}, sd(var) ≈ √(2/n), sd(mean |z|²) = n^{-1/2}.
    #[test]
    fn real_moments() {
        let n = 100_000;
        let b = gaussian_block::<f64>(n, 1, &mut substream(2024, 0)).unwrap();
        let col = b.column(0);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn complex_moments() {
        let n = 100_000;
        let b = gaussian_block::<Complex64>(n, 1, &mut substream(2024, 1)).unwrap();
        let m2 = b.column(0).iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((m2 - 1.0).abs() < 0.02, "E|z|^2 {m2}");
        let re_var = b.column(0).iter().map(|z| z.re * z.re).sum::<f64>() / n as f64;
        assert!((re_var - 0.5).abs() < 0.02, "Var Re {re_var}");
    }

    #[test]
    fn chi_square_concentration() {
        let n = 1_000_000;
        let b = gaussian_block::<f64>(n, 1, &mut substream(77, 0)).unwrap();
        let r = b.column(0).iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((r - 1.0).abs() < 0.01, "{r}");
    }

    #[test]
    fn columns_are_uncorrelated() {
        let n = 50_000;
        let b = gaussian_block::<f64>(n, 2, &mut substream(5, 3)).unwrap();
        let corr = b.column(0).iter().zip(b.column(1)).map(|(x, y)| x * y).sum::<f64>() / n as f64;
        assert!(corr.abs() < 5.0 / (n as f64).sqrt(), "{corr}");
    }
}
