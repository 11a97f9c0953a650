//! Integer polynomials in variables x1, x2, ... and their text syntax.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numtheory::Modulus;

/// Sum of c * x_{j1} * ... * x_{jk}. Variables are 0-based internally, so `x1` is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    arity: usize,
    /// Sorted variable multiset -> nonzero coefficient.
    terms: BTreeMap<Vec<usize>, i64>,
}

impl Polynomial {
    pub fn zero(arity: usize) -> Self {
        Polynomial { arity, terms: BTreeMap::new() }
    }

    /// Build from (coefficient, variables) pairs; duplicates are merged, zeros dropped.
    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (i64, Vec<usize>)>) -> Result<Self> {
        let mut p = Polynomial::zero(arity);
        for (c, mut vars) in terms {
            if let Some(&v) = vars.iter().find(|&&v| v >= arity) {
                return Err(Error::Invalid(format!("variable x{} exceeds arity {arity}", v + 1)));
            }
            vars.sort_unstable();
            let e = p.terms.entry(vars).or_insert(0);
            *e = e.checked_add(c).ok_or(Error::Overflow(c.unsigned_abs()))?;
        }
        p.terms.retain(|_, c| *c != 0);
        Ok(p)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Raise the arity without touching the terms.
    pub fn with_arity(mut self, arity: usize) -> Self {
        self.arity = self.arity.max(arity);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &[usize])> {
        self.terms.iter().map(|(v, &c)| (c, v.as_slice()))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[i64]) -> i128 {
        self.terms
            .iter()
            .map(|(vars, &c)| vars.iter().fold(c as i128, |acc, &v| acc * x[v] as i128))
            .sum()
    }

    pub fn eval_mod(&self, x: &[u64], m: Modulus) -> u64 {
        self.terms.iter().fold(0, |acc, (vars, &c)| {
            let t = vars.iter().fold(m.reduce(c), |t, &v| m.mul(t, x[v]));
            m.add(acc, t)
        })
    }

    /// Values over {0,1}^arity indexed LSB-first.
    pub fn boolean_values(&self) -> Vec<i128> {
        (0..1usize << self.arity)
            .map(|i| {
                let x: Vec<i64> = (0..self.arity).map(|j| (i >> j & 1) as i64).collect();
                self.eval(&x)
            })
            .collect()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // Higher degree first reads more naturally.
        let mut terms: Vec<(&Vec<usize>, &i64)> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(b.0)));
        for (k, (vars, &c)) in terms.into_iter().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            if k == 0 {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.unsigned_abs();
            let names: Vec<String> = vars.iter().map(|v| format!("x{}", v + 1)).collect();
            match (mag, names.is_empty()) {
                (_, true) => write!(f, "{mag}")?,
                (1, false) => f.write_str(&names.join("*"))?,
                _ => write!(f, "{mag}*{}", names.join("*"))?,
            }
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    /// Parses e.g. `3*x1*x2 + x3 - 2`. Arity is the largest variable index seen.
    fn from_str(s: &str) -> Result<Self> {
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        if src == "0" {
            return Ok(Polynomial::zero(0));
        }
        let mut terms = Vec::new();
        let mut arity = 0;
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = 1i64;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if bytes[i] == b'-' {
                    sign = -1;
                }
                i += 1;
            } else if i > 0 {
                return Err(Error::Parse(format!("expected + or - at offset {i} in {s:?}")));
            }
            let start = i;
            while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
                i += 1;
            }
            let body = &src[start..i];
            if body.is_empty() {
                return Err(Error::Parse(format!("missing term in {s:?}")));
            }
            let mut coeff = sign;
            let mut vars = Vec::new();
            for factor in body.split('*') {
                if let Some(idx) = factor.strip_prefix('x') {
                    let v: usize = idx.parse().map_err(|_| Error::Parse(format!("bad variable {factor:?}")))?;
                    if v == 0 {
                        return Err(Error::Parse("variables are numbered from x1".into()));
                    }
                    arity = arity.max(v);
                    vars.push(v - 1);
                } else {
                    let c: i64 = factor.parse().map_err(|_| Error::Parse(format!("bad factor {factor:?}")))?;
                    coeff = coeff.checked_mul(c).ok_or_else(|| Error::Parse(format!("coefficient overflow in {s:?}")))?;
                }
            }
            terms.push((coeff, vars));
        }
        Polynomial::from_terms(arity, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let p: Polynomial = "3*x1*x2 + x3 - 2".parse().unwrap();
        assert_eq!(p.arity(), 3);
        assert_eq!(p.term_count(), 3);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(&[1, 1, 1]), 2);
        assert_eq!(p.to_string(), "3*x1*x2 + x3 - 2");
        let q: Polynomial = "x1 + x2 - 2*x1*x2".parse().unwrap();
        assert_eq!(q.boolean_values(), vec![0, 1, 1, 0]);
        assert!("0".parse::<Polynomial>().unwrap().is_zero());
        assert!("x1 + x1 - 2*x1".parse::<Polynomial>().unwrap().is_zero());
        assert_eq!("x2*x1".parse::<Polynomial>().unwrap(), "x1*x2".parse().unwrap());
        assert_eq!("-x1".parse::<Polynomial>().unwrap().eval(&[3]), -3);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "x0", "x1 +", "y1", "x1 x2", "2**x1", "+"] {
            assert!(bad.parse::<Polynomial>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn eval_mod_matches_integer_eval() {
        let p: Polynomial = "3*x1*x2 + x3 - 2".parse().unwrap();
        let m = Modulus::new(7).unwrap();
        for x in 0..343u64 {
            let v = [x % 7, x / 7 % 7, x / 49];
            let want = p.eval(&[v[0] as i64, v[1] as i64, v[2] as i64]).rem_euclid(7) as u64;
            assert_eq!(p.eval_mod(&v, m), want);
        }
    }

    proptest! {
        #[test]
        fn display_roundtrip(terms in proptest::collection::vec((-9i64..10, proptest::collection::vec(0usize..4, 0..4)), 0..6)) {
            let p = Polynomial::from_terms(4, terms).unwrap();
            let q: Polynomial = p.to_string().parse().unwrap();
            prop_assert_eq!(q.with_arity(4), p.with_arity(4));
        }
    }
}
