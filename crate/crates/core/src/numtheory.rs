//! Modular arithmetic, primality and quadratic residuosity over small primes.

use crate::error::{Error, Result};

/// Exclusive upper bound on supported moduli.
pub const MAX_MODULUS: u64 = 1 << 31;

/// An odd prime below 2^31.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(p: u64) -> Result<Self> {
        if !(3..MAX_MODULUS).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(Modulus(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Reduce a signed integer into `0..p`.
    #[inline]
    pub fn reduce(self, a: i64) -> u64 {
        a.rem_euclid(self.0 as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        addmod(a, b, self.0)
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        submod(a, b, self.0)
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        mulmod(a, b, self.0)
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        submod(0, a % self.0, self.0)
    }

    #[inline]
    pub fn pow(self, a: u64, e: u64) -> u64 {
        powmod(a, e, self.0)
    }

    /// Inverse of a nonzero element (Fermat).
    pub fn inv(self, a: u64) -> Option<u64> {
        let a = a % self.0;
        (a != 0).then(|| powmod(a, self.0 - 2, self.0))
    }

    /// Legendre symbol of a residue already in `0..p`.
    #[inline]
    pub fn legendre(self, a: u64) -> i8 {
        euler(a % self.0, self.0)
    }

    /// Least quadratic non-residue.
    pub fn least_nonresidue(self) -> u64 {
        (2..self.0).find(|&a| self.legendre(a) == -1).expect("odd prime has a non-residue")
    }
}

impl std::fmt::Display for Modulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[inline]
pub fn addmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn submod(a: u64, b: u64, m: u64) -> u64 {
    let (a, b) = (a % m, b % m);
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    acc
}

#[inline]
fn euler(a: u64, p: u64) -> i8 {
    if a == 0 {
        return 0;
    }
    match powmod(a, (p - 1) / 2, p) {
        1 => 1,
        _ => -1,
    }
}

/// Legendre symbol (a/p) by Euler's criterion.
pub fn legendre(a: i64, p: u64) -> Result<i8> {
    let m = Modulus::new(p)?;
    Ok(m.legendre(m.reduce(a)))
}

/// Deterministic Miller-Rabin, exact for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> Result<u64> {
    let mut c = n.checked_add(1).ok_or(Error::Overflow(n))?;
    while !is_prime(c) {
        c = c.checked_add(1).ok_or(Error::Overflow(n))?;
    }
    Ok(c)
}

/// Iterator over primes in `[from, ..)`.
pub fn primes_from(from: u64) -> impl Iterator<Item = u64> {
    (from..).filter(|&c| is_prime(c))
}

/// Residuosity bitmap indexed by `0..p`: `table[a]` is the Legendre symbol of `a`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    p: u64,
    table: Vec<i8>,
}

impl LegendreTable {
    pub fn new(m: Modulus) -> Self {
        let p = m.get();
        let mut table = vec![-1i8; p as usize];
        table[0] = 0;
        for x in 1..=(p - 1) / 2 {
            table[mulmod(x, x, p) as usize] = 1;
        }
        LegendreTable { p, table }
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn get(&self, a: u64) -> i8 {
        self.table[(a % self.p) as usize]
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.table
    }
}

/// The residuosity string S_p: bit i-1 is set iff i is a nonzero square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrSequence {
    p: u64,
    bits: Vec<bool>,
}

impl QrSequence {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl std::fmt::Display for QrSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// S_p for an odd prime p. The degenerate p = 2 gives the one-bit string "1".
pub fn qr_sequence(p: u64) -> Result<QrSequence> {
    if p == 2 {
        return Ok(QrSequence { p, bits: vec![true] });
    }
    let m = Modulus::new(p)?;
    let bits = (1..p).map(|i| m.legendre(i) == 1).collect();
    Ok(QrSequence { p, bits })
}

/// The nonzero quadratic residues modulo p, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueSet {
    p: u64,
    members: Vec<u64>,
}

impl ResidueSet {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn contains(&self, a: u64) -> bool {
        self.members.binary_search(&(a % self.p)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn residue_set(p: u64) -> Result<ResidueSet> {
    let m = Modulus::new(p)?;
    let mut members: Vec<u64> = (1..p).map(|x| m.mul(x, x)).collect();
    members.sort_unstable();
    members.dedup();
    Ok(ResidueSet { p, members })
}
