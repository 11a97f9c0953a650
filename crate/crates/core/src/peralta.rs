//! n-Peralta primes: primes whose residuosity string contains every n-bit word.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{is_prime, primes_from, LegendreTable, Modulus};

/// Largest window length accepted by [`is_n_peralta`].
pub const MAX_WINDOW: usize = 24;

/// Default cap on the primes scanned by [`peralta_prime`].
pub const DEFAULT_MAX_PRIME: u64 = 1 << 22;

/// P_1..P_8.
pub const KNOWN_PERALTA: [u64; 8] = [3, 7, 11, 37, 67, 181, 367, 1091];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PeraltaRecord {
    pub n: usize,
    pub p: u64,
    /// Whether p < n^2 2^(2n-2).
    pub bound_ok: bool,
}

/// n^2 2^(2n-2), saturating.
pub fn peralta_bound(n: usize) -> u128 {
    if n == 0 {
        return 0;
    }
    let sh = 2 * n as u32 - 2;
    if sh >= 100 {
        return u128::MAX;
    }
    (n as u128 * n as u128) << sh
}

/// Residuosity bits of 1..p-1. Built by squaring, not by exponentiation.
fn residuosity_bits(p: u64) -> Vec<bool> {
    if p == 2 {
        return vec![true];
    }
    let t = LegendreTable::new(Modulus::new(p).expect("caller checked primality"));
    t.as_slice()[1..].iter().map(|&c| c == 1).collect()
}

/// Does `bits` contain every word of length n? Rolling window over a 2^n bitmap.
pub fn contains_all_words(bits: &[bool], n: usize) -> bool {
    let total = 1usize << n;
    if bits.len() < n + total - 1 {
        return false;
    }
    let mask = total - 1;
    let mut seen = vec![false; total];
    let mut left = total;
    let mut w = 0usize;
    for (i, &b) in bits.iter().enumerate() {
        w = ((w << 1) | b as usize) & mask;
        if i + 1 >= n && !seen[w] {
            seen[w] = true;
            left -= 1;
            if left == 0 {
                return true;
            }
        }
    }
    false
}

pub fn is_n_peralta(p: u64, n: usize) -> Result<bool> {
    if n == 0 || n > MAX_WINDOW {
        return Err(Error::WindowOutOfRange(n));
    }
    if p != 2 && Modulus::new(p).is_err() {
        return Err(Error::InvalidModulus(p));
    }
    Ok(contains_all_words(&residuosity_bits(p), n))
}

/// Least n-Peralta prime, scanning primes ascending from 2 up to `max_p`.
pub fn peralta_prime(n: usize, max_p: u64) -> Result<PeraltaRecord> {
    if n == 0 || n > MAX_WINDOW {
        return Err(Error::WindowOutOfRange(n));
    }
    // S_p has p-1 bits, so p must be at least 2^n + n.
    let start = ((1u64 << n) + n as u64).min(max_p + 1);
    for p in primes_from(start) {
        if p > max_p {
            break;
        }
        if contains_all_words(&residuosity_bits(p), n) {
            return Ok(record(n, p));
        }
    }
    Err(Error::SearchLimit { max_p })
}

fn record(n: usize, p: u64) -> PeraltaRecord {
    PeraltaRecord { n, p, bound_ok: (p as u128) < peralta_bound(n) }
}

/// Parallel variant: primes are scanned in ascending blocks and the least hit wins.
pub fn peralta_prime_par(n: usize, max_p: u64, block: usize) -> Result<PeraltaRecord> {
    if n == 0 || n > MAX_WINDOW {
        return Err(Error::WindowOutOfRange(n));
    }
    let mut lo = ((1u64 << n) + n as u64).max(2);
    let block = block.max(1) as u64;
    while lo <= max_p {
        let hi = lo.saturating_add(block).min(max_p + 1);
        let primes: Vec<u64> = (lo..hi).filter(|&c| is_prime(c)).collect();
        // find_first keeps the sequential answer regardless of scheduling
        if let Some(&p) = primes.par_iter().find_first(|&&p| contains_all_words(&residuosity_bits(p), n)) {
            return Ok(record(n, p));
        }
        lo = hi;
    }
    Err(Error::SearchLimit { max_p })
}

/// p 2^-n > n (sqrt p + 3), decided exactly.
pub fn peralta_sufficient(p: u64, n: usize) -> bool {
    if n >= 64 {
        return false;
    }
    // p > c sqrt p + 3c with c = n 2^n
    let c = (n as u128) << n;
    let p = p as u128;
    let Some(lhs) = p.checked_sub(3 * c) else {
        return false;
    };
    if lhs == 0 {
        return false;
    }
    match (lhs.checked_mul(lhs), c.checked_mul(c).and_then(|c2| c2.checked_mul(p))) {
        (Some(l), Some(r)) => l > r,
        (Some(_), None) => false,
        (None, _) => true,
    }
}

/// p > ((n-3) 2^(n-1) + 2) sqrt p + (n+1) 2^(n-1) - 1, decided exactly.
pub fn acg_sufficient(p: u64, n: usize) -> bool {
    if n == 0 || n >= 60 {
        return false;
    }
    let half = 1i128 << (n - 1);
    let a = (n as i128 - 3) * half + 2;
    let b = (n as i128 + 1) * half - 1;
    let p = p as i128;
    let d = p - b;
    // want d > a sqrt p
    match (d >= 0, a >= 0) {
        (true, true) => d > 0 && d * d > a * a * p,
        (true, false) => true,
        (false, true) => false,
        (false, false) => d * d < a * a * p,
    }
}

/// A window pattern entry: `Some(1)` residue, `Some(-1)` non-residue, `None` anything.
pub type PatternCell = Option<i8>;

/// Least b in [1, p-L] such that every defined position j has legendre(b+j) = pattern[j].
pub fn offset_for_pattern(p: u64, pattern: &[PatternCell]) -> Result<Option<u64>> {
    let m = Modulus::new(p)?;
    let table = LegendreTable::new(m);
    offset_in_table(&table, pattern)
}

pub fn offset_in_table(table: &LegendreTable, pattern: &[PatternCell]) -> Result<Option<u64>> {
    let p = table.p();
    let len = pattern.len();
    if len as u64 > p - 1 {
        return Err(Error::PatternTooLong { len, p });
    }
    let fits = |b: u64| {
        pattern
            .iter()
            .enumerate()
            .all(|(j, c)| c.is_none_or(|v| table.get(b + j as u64) == v))
    };
    Ok((1..=p - len as u64).find(|&b| fits(b)))
}

/// Text cache of `n p` lines. Every record is re-derived before it is trusted.
#[derive(Debug, Default, Clone)]
pub struct PeraltaCache {
    entries: BTreeMap<usize, u64>,
}

impl PeraltaCache {
    pub fn load(path: &Path) -> Self {
        let mut cache = PeraltaCache::default();
        let Ok(text) = std::fs::read_to_string(path) else {
            return cache;
        };
        for line in text.lines() {
            let mut it = line.split_whitespace();
            let (Some(n), Some(p), None) = (it.next(), it.next(), it.next()) else {
                continue;
            };
            let (Ok(n), Ok(p)) = (n.parse::<usize>(), p.parse::<u64>()) else {
                continue;
            };
            if cache.verify(n, p) {
                cache.entries.insert(n, p);
            }
        }
        cache
    }

    // A record is kept only if p is n-Peralta and no smaller prime is.
    fn verify(&self, n: usize, p: u64) -> bool {
        if n == 0 || n > MAX_WINDOW || !is_prime(p) {
            return false;
        }
        matches!(peralta_prime(n, p), Ok(r) if r.p == p)
    }

    pub fn get(&self, n: usize) -> Option<u64> {
        self.entries.get(&n).copied()
    }

    pub fn insert(&mut self, n: usize, p: u64) {
        self.entries.insert(n, p);
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let body: String = self.entries.iter().map(|(n, p)| format!("{n} {p}\n")).collect();
        std::fs::write(path, body)
    }
}

/// P_n, consulting `cache` first and recording fresh results in it.
pub fn peralta_prime_cached(n: usize, max_p: u64, cache: &mut PeraltaCache) -> Result<PeraltaRecord> {
    if let Some(p) = cache.get(n) {
        if p <= max_p {
            return Ok(record(n, p));
        }
    }
    let r = peralta_prime(n, max_p)?;
    cache.insert(n, r.p);
    Ok(r)
}
