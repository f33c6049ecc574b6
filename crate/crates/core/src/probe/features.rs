//! Hashed token n-gram features.

use std::hash::Hasher;

use fnv::FnvHasher;

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f32>,
}

impl SparseVector {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn l1(&self) -> f32 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f32)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    /// Scales to unit L2 norm; the zero vector is left alone.
    pub fn l2_normalized(mut self) -> Self {
        let norm = self.values.iter().map(|v| v * v).sum::<f32>().sqrt();
        if norm > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= norm);
        }
        self
    }

    pub fn get(&self, index: usize) -> f32 {
        self.indices
            .binary_search(&(index as u32))
            .map(|p| self.values[p])
            .unwrap_or(0.0)
    }
}

/// Lowercased alphanumeric runs; everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// 64-bit FNV-1a of the n-gram bytes (tokens joined by one space).
pub fn ngram_hash(ngram: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(ngram.as_bytes());
    h.finish()
}

pub fn bucket(ngram: &str, hash_dims: usize) -> u32 {
    debug_assert!(hash_dims.is_power_of_two());
    (ngram_hash(ngram) & (hash_dims as u64 - 1)) as u32
}

/// All n-grams of the requested orders, in order of appearance per order.
pub fn ngrams(tokens: &[String], orders: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    for &n in orders {
        if n == 0 || n > tokens.len() {
            continue;
        }
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

/// Count vector of hashed n-grams. The L1 norm equals the number of emitted
/// n-grams.
pub fn featurize_with(text: &str, orders: &[usize], hash_dims: usize) -> SparseVector {
    let tokens = tokenize(text);
    let mut buckets: Vec<u32> = ngrams(&tokens, orders)
        .iter()
        .map(|g| bucket(g, hash_dims))
        .collect();
    buckets.sort_unstable();
    let mut v = SparseVector::default();
    for b in buckets {
        match v.indices.last() {
            Some(&last) if last == b => *v.values.last_mut().expect("parallel vecs") += 1.0,
            _ => {
                v.indices.push(b);
                v.values.push(1.0);
            }
        }
    }
    v
}
