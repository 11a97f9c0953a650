//! Linear QR-PSM protocols [a_0, a_1, ..., a_n]_p.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{index_bits, SignConvention, TruthTable};
use crate::numtheory::{is_prime, primes_from, residue_set, LegendreTable, Modulus};
use crate::peralta::{self, offset_in_table, PatternCell};
use crate::psm::PsmProtocol;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LqrProtocol {
    p: Modulus,
    a: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Descriptor {
    p: u64,
    a: Vec<i64>,
}

impl LqrProtocol {
    /// Coefficients are reduced mod p. At least a_0 and a_1 are required.
    pub fn new(p: u64, a: &[i64]) -> Result<Self> {
        let m = Modulus::new(p)?;
        if a.len() < 2 {
            return Err(Error::Invalid("an LQR protocol needs a_0 and at least one a_i".into()));
        }
        Ok(LqrProtocol { p: m, a: a.iter().map(|&c| m.reduce(c)).collect() })
    }

    pub fn from_reduced(p: Modulus, a: Vec<u64>) -> Self {
        debug_assert!(a.len() >= 2 && a.iter().all(|&c| c < p.get()));
        LqrProtocol { p, a }
    }

    pub fn modulus(&self) -> Modulus {
        self.p
    }

    pub fn p(&self) -> u64 {
        self.p.get()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.a
    }

    /// Number of players.
    pub fn n(&self) -> usize {
        self.a.len() - 1
    }

    /// a_0 + sum a_i x_i mod p for input index `i`.
    pub fn value(&self, index: usize) -> u64 {
        let m = self.p;
        (0..self.n()).filter(|j| index >> j & 1 == 1).fold(self.a[0], |s, j| m.add(s, self.a[j + 1]))
    }

    pub fn to_json(&self) -> String {
        let d = Descriptor { p: self.p(), a: self.a.iter().map(|&c| c as i64).collect() };
        serde_json::to_string(&d).expect("plain struct serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Descriptor = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        LqrProtocol::new(d.p, &d.a)
    }

    /// Communication in bits: n messages of ceil(log2 p) bits.
    pub fn bit_cost(&self) -> u64 {
        self.n() as u64 * ceil_log2(self.p())
    }
}

pub fn ceil_log2(v: u64) -> u64 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros() as u64
    }
}

impl fmt::Display for LqrProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(u64::to_string).collect();
        write!(f, "[{}]_{}", parts.join(","), self.p)
    }
}

/// The PSM view of an LQR protocol. R holds r_0 in R_p, free r_1..r_{n-1},
/// and r_n fixed so that r_1 + ... + r_n = 0.
#[derive(Debug, Clone)]
pub struct LqrPsm {
    proto: LqrProtocol,
    residues: Vec<u64>,
}

pub fn build_lqr(proto: &LqrProtocol) -> LqrPsm {
    let residues = residue_set(proto.p()).expect("modulus already validated").members().to_vec();
    LqrPsm { proto: proto.clone(), residues }
}

impl LqrPsm {
    pub fn protocol(&self) -> &LqrProtocol {
        &self.proto
    }
}

impl PsmProtocol for LqrPsm {
    fn players(&self) -> usize {
        self.proto.n()
    }

    fn input_domain(&self, _player: usize) -> Vec<u64> {
        vec![0, 1]
    }

    fn randomness_size(&self) -> u64 {
        let p = self.proto.p();
        self.residues.len() as u64 * p.pow(self.proto.n() as u32 - 1)
    }

    fn randomness(&self, index: u64) -> Vec<u64> {
        let m = self.proto.p;
        let p = m.get();
        let n = self.proto.n();
        let h = self.residues.len() as u64;
        let mut r = Vec::with_capacity(n + 1);
        r.push(self.residues[(index % h) as usize]);
        let mut k = index / h;
        let mut sum = 0;
        for _ in 1..n {
            let v = k % p;
            k /= p;
            sum = m.add(sum, v);
            r.push(v);
        }
        r.push(m.neg(sum));
        r
    }

    fn is_randomness(&self, r: &[u64]) -> bool {
        let m = self.proto.p;
        r.len() == self.proto.n() + 1
            && self.residues.binary_search(&r[0]).is_ok()
            && r.iter().all(|&v| v < m.get())
            && r[1..].iter().fold(0, |s, &v| m.add(s, v)) == 0
    }

    fn encode(&self, player: usize, x: u64, r: &[u64]) -> Vec<u64> {
        let m = self.proto.p;
        let a = &self.proto.a;
        let mut lin = m.mul(a[player + 1], x);
        if player == 0 {
            lin = m.add(lin, a[0]);
        }
        vec![m.add(m.mul(r[0], lin), r[player + 1])]
    }

    fn decode(&self, messages: &[Vec<u64>]) -> i8 {
        let m = self.proto.p;
        m.legendre(messages.iter().fold(0, |s, v| m.add(s, v[0])))
    }

    fn message_radix(&self) -> u64 {
        self.proto.p()
    }
}

fn check_arity(proto: &LqrProtocol, f: &TruthTable) -> Result<()> {
    if proto.n() != f.arity() {
        return Err(Error::Arity { expected: f.arity(), got: proto.n() });
    }
    Ok(())
}

/// Residuosity of a_0 + g(x) matches f for every x; a zero sum fails.
pub fn fast_verify_lqr(proto: &LqrProtocol, f: &TruthTable, conv: SignConvention) -> Result<bool> {
    check_arity(proto, f)?;
    let m = proto.modulus();
    Ok((0..1usize << f.arity()).all(|i| m.legendre(proto.value(i)) == conv.sign(f.at(i))))
}

/// Inputs with equal f value must share a residuosity class of a_0 + g(x).
pub fn fast_verify_security_lqr(proto: &LqrProtocol, f: &TruthTable) -> Result<bool> {
    check_arity(proto, f)?;
    let m = proto.modulus();
    let mut class: [Option<i8>; 2] = [None, None];
    for i in 0..1usize << f.arity() {
        let c = m.legendre(proto.value(i));
        let slot = &mut class[f.at(i) as usize];
        match *slot {
            None => *slot = Some(c),
            Some(prev) if prev != c => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

/// Multiply every coefficient by a nonzero residue s.
pub fn conjugate(proto: &LqrProtocol, s: u64) -> Result<LqrProtocol> {
    let m = proto.modulus();
    if m.legendre(s) != 1 {
        return Err(Error::NotResidue(s));
    }
    Ok(LqrProtocol { p: m, a: proto.a.iter().map(|&c| m.mul(c, s)).collect() })
}

/// Lexicographically least conjugate.
pub fn canonical_form(proto: &LqrProtocol) -> LqrProtocol {
    let m = proto.modulus();
    let Some(&lead) = proto.a.iter().find(|&&c| c != 0) else {
        return proto.clone();
    };
    let target = if m.legendre(lead) == 1 { 1 } else { m.least_nonresidue() };
    let s = m.mul(target, m.inv(lead).expect("lead is nonzero"));
    conjugate(proto, s).expect("target / lead is a residue")
}

pub fn is_canonical(proto: &LqrProtocol) -> bool {
    canonical_form(proto) == *proto
}

/// A linear map g(x) = sum c_i x_i over the integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearEmbedding {
    coeffs: Vec<i64>,
    min_g: i64,
    max_g: i64,
    reachable: Vec<bool>,
}

impl LinearEmbedding {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 || n > crate::funcs::MAX_ARITY {
            return Err(Error::Invalid(format!("embedding arity {n} out of range")));
        }
        let min_g: i64 = coeffs.iter().filter(|&&c| c < 0).sum();
        let max_g: i64 = coeffs.iter().filter(|&&c| c > 0).sum();
        let width = (max_g - min_g + 1) as usize;
        if width > 1 << 24 {
            return Err(Error::Invalid(format!("embedding length {width} is too large")));
        }
        let mut reachable = vec![false; width];
        for i in 0..1usize << n {
            reachable[(eval_linear(&coeffs, i) - min_g) as usize] = true;
        }
        Ok(LinearEmbedding { coeffs, min_g, max_g, reachable })
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn min_g(&self) -> i64 {
        self.min_g
    }

    pub fn max_g(&self) -> i64 {
        self.max_g
    }

    /// l(g) = max_g - min_g + 1.
    pub fn length(&self) -> usize {
        self.reachable.len()
    }

    pub fn reachable(&self) -> &[bool] {
        &self.reachable
    }

    pub fn eval(&self, index: usize) -> i64 {
        eval_linear(&self.coeffs, index)
    }

    /// Check that g(x) = g(x') forces f(x) = f(x'), and build the window pattern.
    pub fn pattern(&self, f: &TruthTable, conv: SignConvention) -> Result<Vec<PatternCell>> {
        if f.arity() != self.arity() {
            return Err(Error::Arity { expected: f.arity(), got: self.arity() });
        }
        let mut pattern: Vec<PatternCell> = vec![None; self.length()];
        let mut first: Vec<usize> = vec![usize::MAX; self.length()];
        for i in 0..1usize << f.arity() {
            let pos = (self.eval(i) - self.min_g) as usize;
            let s = conv.sign(f.at(i));
            match pattern[pos] {
                None => {
                    pattern[pos] = Some(s);
                    first[pos] = i;
                }
                Some(prev) if prev != s => {
                    let n = f.arity();
                    return Err(Error::EmbeddingViolation(index_bits(first[pos], n), index_bits(i, n)));
                }
                _ => {}
            }
        }
        Ok(pattern)
    }
}

fn eval_linear(coeffs: &[i64], index: usize) -> i64 {
    coeffs.iter().enumerate().filter(|(j, _)| index >> j & 1 == 1).map(|(_, &c)| c).sum()
}

pub fn embed_symmetric(n: usize) -> Result<LinearEmbedding> {
    LinearEmbedding::new(vec![1; n])
}

pub fn embed_weighted(w: &[i64]) -> Result<LinearEmbedding> {
    LinearEmbedding::new(w.to_vec())
}

/// f(x) = [sum w_i x_i >= t], the function a weighted embedding is meant for.
pub fn weighted_threshold(w: &[i64], t: i64) -> TruthTable {
    TruthTable::from_fn(w.len(), |x| x.iter().zip(w).map(|(&b, &c)| b as i64 * c).sum::<i64>() >= t)
}

pub fn embed_any(n: usize) -> Result<LinearEmbedding> {
    if n > 24 {
        return Err(Error::Invalid(format!("embed_any needs n <= 24, got {n}")));
    }
    LinearEmbedding::new((0..n).map(|i| 1i64 << i).collect())
}

/// m blocks of k variables each; block j carries weight (k+1)^j.
pub fn embed_composition(m: usize, k: usize) -> Result<LinearEmbedding> {
    if m == 0 || k == 0 {
        return Err(Error::Invalid("composition needs m, k >= 1".into()));
    }
    let mut coeffs = Vec::with_capacity(m * k);
    let mut w: i64 = 1;
    for _ in 0..m {
        coeffs.extend(std::iter::repeat_n(w, k));
        w = w.checked_mul(k as i64 + 1).ok_or(Error::Overflow(w as u64))?;
    }
    LinearEmbedding::new(coeffs)
}

/// Composition embedding for arity n with blocks of k; n must be a multiple of k.
pub fn embed_composition_for(n: usize, k: usize) -> Result<LinearEmbedding> {
    if k == 0 || !n.is_multiple_of(k) {
        return Err(Error::Invalid(format!("arity {n} is not a multiple of block size {k}")));
    }
    embed_composition(n / k, k)
}

/// Build [a_0, c_1, ..., c_n] modulo P_{l(g)} with a_0 from the offset scan.
pub fn synthesize(f: &TruthTable, g: &LinearEmbedding, conv: SignConvention, max_p: u64) -> Result<LqrProtocol> {
    let pattern = g.pattern(f, conv)?;
    let p = peralta::peralta_prime(g.length(), max_p)?.p;
    synthesize_mod(&pattern, g, p)
}

/// As [`synthesize`] with a caller-supplied prime that must host the pattern.
pub fn synthesize_with_prime(f: &TruthTable, g: &LinearEmbedding, conv: SignConvention, p: u64) -> Result<LqrProtocol> {
    let pattern = g.pattern(f, conv)?;
    synthesize_mod(&pattern, g, p)
}

fn synthesize_mod(pattern: &[PatternCell], g: &LinearEmbedding, p: u64) -> Result<LqrProtocol> {
    let m = Modulus::new(p)?;
    let table = LegendreTable::new(m);
    let b = offset_in_table(&table, pattern)?
        .ok_or_else(|| Error::Invalid(format!("S_{p} has no window matching the embedding pattern")))?;
    let a0 = m.reduce(b as i64 - g.min_g());
    let mut a = vec![a0];
    a.extend(g.coeffs().iter().map(|&c| m.reduce(c)));
    Ok(LqrProtocol { p: m, a })
}

/// Universal construction: a_0 = b_0, a_i = 2^(i-1) for i < n, a_n = b_1 - b_0,
/// where b_v hosts the truth table of f(., x_n = v) in S_p, p = P_{2^(n-1)}.
pub fn universal_protocol(f: &TruthTable, conv: SignConvention, max_p: u64) -> Result<LqrProtocol> {
    let n = f.arity();
    if n == 0 || n > 6 {
        return Err(Error::Invalid(format!("universal construction needs 1 <= n <= 6, got {n}")));
    }
    let half = 1usize << (n - 1);
    let p = peralta::peralta_prime(half, max_p)?.p;
    let m = Modulus::new(p)?;
    let table = LegendreTable::new(m);
    let offset = |top: usize| -> Result<u64> {
        let pattern: Vec<PatternCell> = (0..half).map(|i| Some(conv.sign(f.at(i + top * half)))).collect();
        offset_in_table(&table, &pattern)?.ok_or_else(|| Error::Invalid(format!("S_{p} misses a {half}-bit word")))
    };
    let (b0, b1) = (offset(0)?, offset(1)?);
    let mut a = vec![b0];
    a.extend((0..n - 1).map(|i| (1u64 << i) % p));
    a.push(m.sub(b1, b0));
    Ok(LqrProtocol { p: m, a })
}

/// Precomputed per-prime data for coefficient searches.
struct SearchCtx {
    p: u64,
    lqnr: u64,
    chi: Vec<i8>,
}

impl SearchCtx {
    fn new(p: u64) -> Result<Self> {
        let m = Modulus::new(p)?;
        Ok(SearchCtx { p, lqnr: m.least_nonresidue(), chi: LegendreTable::new(m).as_slice().to_vec() })
    }

    /// Candidate values for a coefficient; the first nonzero one is pinned to {1, lqnr}.
    fn choices(&self, seen_nonzero: bool) -> Vec<u64> {
        if seen_nonzero {
            (0..self.p).collect()
        } else {
            let mut v = vec![0, 1, self.lqnr];
            v.dedup();
            v
        }
    }
}

/// DFS over canonical coefficient vectors in lexicographic order.
/// `sums[i]` holds a_0 + g(x) for inputs whose index is below 2^level.
/// `leaf` returns true to stop the search.
fn dfs<F>(ctx: &SearchCtx, n: usize, level: usize, coeffs: &mut Vec<u64>, sums: &mut Vec<u64>, seen: bool, accept: &dyn Fn(usize, i8) -> bool, leaf: &mut F) -> bool
where
    F: FnMut(&[u64], &[u64]) -> bool,
{
    if level > n {
        return leaf(coeffs, sums);
    }
    let p = ctx.p;
    for c in ctx.choices(seen) {
        let (lo, hi) = if level == 0 { (0, 1) } else { (1usize << (level - 1), 1usize << level) };
        let mut ok = true;
        for i in lo..hi {
            let s = if level == 0 { c } else { (sums[i - lo] + c) % p };
            sums[i] = s;
            let chi = ctx.chi[s as usize];
            if chi == 0 || !accept(i, chi) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        coeffs.push(c);
        let stop = dfs(ctx, n, level + 1, coeffs, sums, seen || c != 0, accept, leaf);
        coeffs.pop();
        if stop {
            return true;
        }
    }
    false
}

/// Top-level prefixes (a_0, a_1) in lexicographic order, used to split work.
fn prefixes(ctx: &SearchCtx) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for a0 in ctx.choices(false) {
        if ctx.chi[a0 as usize] == 0 {
            continue;
        }
        for a1 in ctx.choices(a0 != 0) {
            out.push((a0, a1));
        }
    }
    out
}

fn run_prefix<F>(ctx: &SearchCtx, n: usize, prefix: (u64, u64), accept: &dyn Fn(usize, i8) -> bool, leaf: &mut F) -> bool
where
    F: FnMut(&[u64], &[u64]) -> bool,
{
    let p = ctx.p;
    let (a0, a1) = prefix;
    let s1 = (a0 + a1) % p;
    let (c0, c1) = (ctx.chi[a0 as usize], ctx.chi[s1 as usize]);
    if c0 == 0 || c1 == 0 || !accept(0, c0) || !accept(1, c1) {
        return false;
    }
    let mut sums = vec![0u64; 1 << n];
    sums[0] = a0;
    sums[1] = s1;
    let mut coeffs = vec![a0, a1];
    dfs(ctx, n, 2, &mut coeffs, &mut sums, a0 != 0 || a1 != 0, accept, leaf)
}

/// Least prime (then least canonical vector) computing f. Search stops past `max_p`.
pub fn find_minimal_protocol(f: &TruthTable, max_p: u64, conv: SignConvention) -> Result<LqrProtocol> {
    let n = f.arity();
    if n == 0 || n > 8 {
        return Err(Error::Invalid(format!("minimal search supports 1 <= n <= 8, got {n}")));
    }
    let want: Vec<i8> = (0..1usize << n).map(|i| conv.sign(f.at(i))).collect();
    let accept = |i: usize, chi: i8| want[i] == chi;
    for p in primes_from(3) {
        if p > max_p {
            break;
        }
        let ctx = SearchCtx::new(p)?;
        let found = prefixes(&ctx).into_par_iter().find_map_first(|prefix| {
            let mut hit = None;
            run_prefix(&ctx, n, prefix, &accept, &mut |c: &[u64], _: &[u64]| {
                hit = Some(c.to_vec());
                true
            });
            hit
        });
        if let Some(a) = found {
            let proto = LqrProtocol { p: Modulus::new(p)?, a };
            debug_assert!(fast_verify_lqr(&proto, f, conv).unwrap());
            debug_assert!(fast_verify_security_lqr(&proto, f).unwrap());
            return Ok(proto);
        }
    }
    Err(Error::SearchLimit { max_p })
}

#[derive(Debug, Clone)]
pub struct LqrPrimeRecord {
    pub n: usize,
    pub l_n: u64,
    /// Indexed by truth-table code; the first canonical vector realizing it.
    pub witnesses: Vec<Vec<u64>>,
}

/// Coverage of all 2^(2^n) functions at a single prime, as (count, witnesses).
pub fn coverage(n: usize, p: u64) -> Result<(usize, Vec<Option<Vec<u64>>>)> {
    if n == 0 || n > 4 {
        return Err(Error::Invalid(format!("coverage supports 1 <= n <= 4, got {n}")));
    }
    let ctx = SearchCtx::new(p)?;
    let total = 1usize << (1 << n);
    let accept = |_: usize, _: i8| true;
    let parts: Vec<Vec<Option<Vec<u64>>>> = prefixes(&ctx)
        .into_par_iter()
        .map(|prefix| {
            let mut local: Vec<Option<Vec<u64>>> = vec![None; total];
            run_prefix(&ctx, n, prefix, &accept, &mut |c: &[u64], sums: &[u64]| {
                let code = sums.iter().enumerate().fold(0usize, |acc, (i, &s)| acc | ((ctx.chi[s as usize] == 1) as usize) << i);
                if local[code].is_none() {
                    local[code] = Some(c.to_vec());
                }
                false
            });
            local
        })
        .collect();
    // Merge in prefix order so witnesses do not depend on scheduling.
    let mut merged: Vec<Option<Vec<u64>>> = vec![None; total];
    for part in parts {
        for (slot, w) in merged.iter_mut().zip(part) {
            if slot.is_none() {
                *slot = w;
            }
        }
    }
    let count = merged.iter().filter(|w| w.is_some()).count();
    Ok((count, merged))
}

/// L_n: least prime at which every n-variable function has an LQR protocol.
/// Witness codes use the Table convention (bit set where the sum is a residue).
pub fn lqr_prime(n: usize, max_p: u64) -> Result<LqrPrimeRecord> {
    for p in primes_from(3) {
        if p > max_p {
            break;
        }
        let (count, w) = coverage(n, p)?;
        if count == w.len() {
            return Ok(LqrPrimeRecord { n, l_n: p, witnesses: w.into_iter().map(|x| x.expect("covered")).collect() });
        }
    }
    Err(Error::SearchLimit { max_p })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LnBounds {
    pub lower: u64,
    pub upper: Option<u64>,
}

/// Lower bound: least L with L^n >= 2^(2^n - 2). Upper bound: P_{2^(n-1)}.
pub fn ln_bounds(n: usize, max_p: u64) -> LnBounds {
    assert!((1..=5).contains(&n));
    let target: u128 = 1u128 << ((1u32 << n) - 2);
    let mut lower = 1u64;
    while (lower as u128).pow(n as u32) < target {
        lower += 1;
    }
    let upper = peralta::peralta_prime(1 << (n - 1), max_p).ok().map(|r| r.p);
    LnBounds { lower, upper }
}

/// Check every realized witness of an [`LqrPrimeRecord`].
pub fn check_witnesses(rec: &LqrPrimeRecord) -> bool {
    if !is_prime(rec.l_n) {
        return false;
    }
    rec.witnesses.iter().enumerate().all(|(code, a)| {
        let proto = LqrProtocol { p: Modulus::new(rec.l_n).unwrap(), a: a.clone() };
        let f = TruthTable::from_code(rec.n, code as u64);
        fast_verify_lqr(&proto, &f, SignConvention::Table).unwrap_or(false)
    })
}
