//! Boolean functions as truth tables, and the function-spec mini language.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest arity a truth table may have.
pub const MAX_ARITY: usize = 20;

/// An n-variable Boolean function. Entry `i` is f(x) where i = sum of 2^(j-1) x_j.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(n: usize, bits: Vec<bool>) -> Result<Self> {
        if n > MAX_ARITY {
            return Err(Error::Invalid(format!("arity {n} exceeds {MAX_ARITY}")));
        }
        if bits.len() != 1 << n {
            return Err(Error::Invalid(format!("truth table of arity {n} needs {} entries, got {}", 1 << n, bits.len())));
        }
        Ok(TruthTable { n, bits })
    }

    pub fn from_fn(n: usize, f: impl Fn(&[u8]) -> bool) -> Self {
        assert!(n <= MAX_ARITY);
        let bits = (0..1usize << n).map(|i| f(&index_bits(i, n))).collect();
        TruthTable { n, bits }
    }

    /// Truth table whose bit i is bit i of `code` (n <= 6).
    pub fn from_code(n: usize, code: u64) -> Self {
        assert!(n <= 6);
        TruthTable { n, bits: (0..1usize << n).map(|i| code >> i & 1 == 1).collect() }
    }

    /// Inverse of [`from_code`](Self::from_code).
    pub fn code(&self) -> u64 {
        assert!(self.n <= 6);
        self.bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (b as u64) << i)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn at(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn eval(&self, x: &[u8]) -> bool {
        self.bits[bits_index(x)]
    }

    pub fn is_symmetric(&self) -> bool {
        let mut by_weight: Vec<Option<bool>> = vec![None; self.n + 1];
        for (i, &b) in self.bits.iter().enumerate() {
            let w = i.count_ones() as usize;
            match by_weight[w] {
                None => by_weight[w] = Some(b),
                Some(v) if v != b => return false,
                _ => {}
            }
        }
        true
    }

    /// Hex of the table read as an LSB-first integer.
    pub fn to_hex(&self) -> String {
        let mut nibbles: Vec<u8> = self
            .bits
            .chunks(4)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b as u8) << i))
            .collect();
        while nibbles.len() > 1 && *nibbles.last().unwrap() == 0 {
            nibbles.pop();
        }
        let digits: String = nibbles.iter().rev().map(|d| char::from_digit(*d as u32, 16).unwrap()).collect();
        format!("0x{digits}")
    }

    pub fn from_hex(hex: &str, n: usize) -> Result<Self> {
        if n > MAX_ARITY {
            return Err(Error::Parse(format!("arity {n} exceeds {MAX_ARITY}")));
        }
        let digits = hex.strip_prefix("0x").or_else(|| hex.strip_prefix("0X")).unwrap_or(hex);
        if digits.is_empty() {
            return Err(Error::Parse("empty truth table".into()));
        }
        let mut bits = vec![false; 1 << n];
        for (k, c) in digits.chars().rev().enumerate() {
            let d = c.to_digit(16).ok_or_else(|| Error::Parse(format!("bad hex digit {c:?}")))?;
            for b in 0..4 {
                if d >> b & 1 == 1 {
                    let i = 4 * k + b;
                    if i >= bits.len() {
                        return Err(Error::Parse(format!("truth table {hex} has bits beyond 2^{n}")));
                    }
                    bits[i] = true;
                }
            }
        }
        Ok(TruthTable { n, bits })
    }
}

/// Bits of `i` as x_1..x_n (LSB first).
pub fn index_bits(i: usize, n: usize) -> Vec<u8> {
    (0..n).map(|j| (i >> j & 1) as u8).collect()
}

pub fn bits_index(x: &[u8]) -> usize {
    x.iter().enumerate().fold(0, |acc, (j, &b)| acc | ((b & 1) as usize) << j)
}

/// How decoder output encodes a Boolean value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// +1 for f = 1, -1 for f = 0.
    #[default]
    Table,
    /// (-1)^f: +1 for f = 0, -1 for f = 1.
    Power,
}

impl SignConvention {
    #[inline]
    pub fn sign(self, bit: bool) -> i8 {
        match (self, bit) {
            (SignConvention::Table, true) | (SignConvention::Power, false) => 1,
            _ => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Named {
    And,
    Or,
    Xor,
    Eq,
    /// At least half the bits set.
    Maj,
    /// Strictly more than half the bits set.
    Smaj,
}

impl Named {
    pub fn name(self) -> &'static str {
        match self {
            Named::And => "AND",
            Named::Or => "OR",
            Named::Xor => "XOR",
            Named::Eq => "EQ",
            Named::Maj => "MAJ",
            Named::Smaj => "SMAJ",
        }
    }

    /// Value at Hamming weight w of an n-bit input.
    pub fn on_weight(self, w: usize, n: usize) -> bool {
        match self {
            Named::And => w == n,
            Named::Or => w > 0,
            Named::Xor => w % 2 == 1,
            Named::Eq => w == 0 || w == n,
            Named::Maj => 2 * w >= n,
            Named::Smaj => 2 * w > n,
        }
    }

    pub fn table(self, n: usize) -> TruthTable {
        TruthTable::from_fn(n, |x| self.on_weight(x.iter().filter(|&&b| b == 1).count(), n))
    }
}

/// A parsed `--f` argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionSpec {
    Named(Named, usize),
    /// Comparison of two trits: +1 if x_1 > x_2, 0 if equal, -1 otherwise.
    Comp,
    Table(TruthTable),
}

impl FunctionSpec {
    pub fn truth_table(&self) -> Option<TruthTable> {
        match self {
            FunctionSpec::Named(f, n) => Some(f.table(*n)),
            FunctionSpec::Comp => None,
            FunctionSpec::Table(t) => Some(t.clone()),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            FunctionSpec::Named(_, n) => *n,
            FunctionSpec::Comp => 2,
            FunctionSpec::Table(t) => t.arity(),
        }
    }
}

pub fn comp(x1: u64, x2: u64) -> i8 {
    match x1.cmp(&x2) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Less => -1,
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("COMP") {
            return Ok(FunctionSpec::Comp);
        }
        let parts: Vec<&str> = s.split(':').collect();
        let arity = |t: &str| -> Result<usize> {
            let n: usize = t.parse().map_err(|_| Error::Parse(format!("bad arity {t:?}")))?;
            if n == 0 || n > MAX_ARITY {
                return Err(Error::Parse(format!("arity {n} out of range 1..={MAX_ARITY}")));
            }
            Ok(n)
        };
        match parts.as_slice() {
            ["tt", hex, n] => Ok(FunctionSpec::Table(TruthTable::from_hex(hex, arity(n)?)?)),
            [name, n] => {
                let f = match name.to_ascii_uppercase().as_str() {
                    "AND" => Named::And,
                    "OR" => Named::Or,
                    "XOR" => Named::Xor,
                    "EQ" => Named::Eq,
                    "MAJ" => Named::Maj,
                    "SMAJ" => Named::Smaj,
                    other => return Err(Error::Parse(format!("unknown function {other:?}"))),
                };
                Ok(FunctionSpec::Named(f, arity(n)?))
            }
            _ => Err(Error::Parse(format!("bad function spec {s:?}"))),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Named(g, n) => write!(f, "{}:{n}", g.name()),
            FunctionSpec::Comp => f.write_str("COMP"),
            FunctionSpec::Table(t) => write!(f, "tt:{}:{}", t.to_hex(), t.arity()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_named() {
        assert_eq!("AND:4".parse::<FunctionSpec>().unwrap(), FunctionSpec::Named(Named::And, 4));
        assert_eq!("comp".parse::<FunctionSpec>().unwrap(), FunctionSpec::Comp);
        assert!("FOO:3".parse::<FunctionSpec>().is_err());
        assert!("AND:0".parse::<FunctionSpec>().is_err());
        assert!("AND".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn parse_hex_lsb_first() {
        let t = "tt:0x8:3".parse::<FunctionSpec>().unwrap().truth_table().unwrap();
        assert_eq!(t.bits(), &[false, false, false, true, false, false, false, false]);
        assert!(t.eval(&[1, 1, 0]));
        assert!("tt:0x100:3".parse::<FunctionSpec>().is_err());
        assert!("tt:0xg:3".parse::<FunctionSpec>().is_err());
        assert_eq!(Named::And.table(2), "tt:0x8:2".parse::<FunctionSpec>().unwrap().truth_table().unwrap());
    }

    #[test]
    fn named_tables() {
        assert_eq!(Named::And.table(2).code(), 0b1000);
        assert_eq!(Named::Xor.table(2).code(), 0b0110);
        assert_eq!(Named::Eq.table(2).code(), 0b1001);
        // at least half: MAJ(2) is OR
        assert_eq!(Named::Maj.table(2).code(), 0b1110);
        assert_eq!(Named::Smaj.table(2).code(), 0b1000);
        assert_eq!(Named::Maj.table(3), Named::Smaj.table(3));
        assert!(Named::Maj.table(4).is_symmetric());
        assert!(!TruthTable::from_code(2, 0b0010).is_symmetric());
    }

    #[test]
    fn sign_conventions() {
        assert_eq!(SignConvention::Table.sign(true), 1);
        assert_eq!(SignConvention::Table.sign(false), -1);
        assert_eq!(SignConvention::Power.sign(true), -1);
        assert_eq!(SignConvention::Power.sign(false), 1);
    }

    proptest! {
        #[test]
        fn hex_roundtrip(n in 1usize..9, seed in any::<u64>()) {
            let t = TruthTable::from_fn(n, |x| {
                let i = bits_index(x) as u64;
                (seed.rotate_left(i as u32 % 64) ^ i.wrapping_mul(0x9e37_79b9_7f4a_7c15)) & 1 == 1
            });
            let spec: FunctionSpec = format!("tt:{}:{}", t.to_hex(), n).parse().unwrap();
            prop_assert_eq!(spec.truth_table().unwrap(), t);
        }

        #[test]
        fn index_roundtrip(n in 1usize..16, i in any::<usize>()) {
            let i = i % (1 << n);
            prop_assert_eq!(bits_index(&index_bits(i, n)), i);
        }
    }
}
