//! Private simultaneous messages: the protocol abstraction and exhaustive verifiers.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numtheory::{residue_set, Modulus};

/// Default limit on |inputs| * |R| for each verifier.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// A PSM protocol with finite, enumerable input domains and randomness space.
///
/// Player `i` only ever sees its own input and the shared randomness, so
/// encoders are indexed by player and take a single input value.
pub trait PsmProtocol: Sync {
    fn players(&self) -> usize;

    fn input_domain(&self, player: usize) -> Vec<u64>;

    fn randomness_size(&self) -> u64;

    /// The `index`-th element of R, for `index < randomness_size()`.
    fn randomness(&self, index: u64) -> Vec<u64>;

    fn is_randomness(&self, r: &[u64]) -> bool;

    fn encode(&self, player: usize, x: u64, r: &[u64]) -> Vec<u64>;

    fn decode(&self, messages: &[Vec<u64>]) -> i8;

    /// Every message coordinate is below this value.
    fn message_radix(&self) -> u64;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub inputs: Vec<u64>,
    pub randomness: Vec<u64>,
    pub messages: Vec<Vec<u64>>,
    pub output: i8,
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x=[{}] r=[{}] m=[", join(&self.inputs), join(&self.randomness))?;
        if self.messages.iter().all(|m| m.len() == 1) {
            let flat: Vec<u64> = self.messages.iter().map(|m| m[0]).collect();
            f.write_str(&join(&flat))?;
        } else {
            let parts: Vec<String> = self.messages.iter().map(|m| format!("[{}]", join(m))).collect();
            f.write_str(&parts.join(","))?;
        }
        write!(f, "] out={}", self.output)
    }
}

fn check_inputs<P: PsmProtocol + ?Sized>(proto: &P, x: &[u64]) -> Result<()> {
    if x.len() != proto.players() {
        return Err(Error::Arity { expected: proto.players(), got: x.len() });
    }
    for (i, &v) in x.iter().enumerate() {
        if !proto.input_domain(i).contains(&v) {
            return Err(Error::Domain { player: i + 1, value: v });
        }
    }
    Ok(())
}

pub fn execute<P: PsmProtocol + ?Sized>(proto: &P, x: &[u64], r: &[u64]) -> Result<Transcript> {
    check_inputs(proto, x)?;
    if !proto.is_randomness(r) {
        return Err(Error::Randomness(r.to_vec()));
    }
    let messages: Vec<Vec<u64>> = x.iter().enumerate().map(|(i, &v)| proto.encode(i, v, r)).collect();
    let output = proto.decode(&messages);
    Ok(Transcript { inputs: x.to_vec(), randomness: r.to_vec(), messages, output })
}

/// All input tuples, player 1 varying fastest.
pub fn all_inputs<P: PsmProtocol + ?Sized>(proto: &P) -> Vec<Vec<u64>> {
    let domains: Vec<Vec<u64>> = (0..proto.players()).map(|i| proto.input_domain(i)).collect();
    let total: usize = domains.iter().map(Vec::len).product();
    (0..total)
        .map(|mut k| {
            domains
                .iter()
                .map(|d| {
                    let v = d[k % d.len()];
                    k /= d.len();
                    v
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectnessFailure {
    pub inputs: Vec<u64>,
    pub randomness: Vec<u64>,
    pub got: i8,
    pub want: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecurityFailure {
    pub x: Vec<u64>,
    pub x_prime: Vec<u64>,
    pub output: i8,
}

fn check_budget<P: PsmProtocol + ?Sized>(proto: &P, inputs: usize, budget: u128) -> Result<()> {
    let required = inputs as u128 * proto.randomness_size() as u128;
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    Ok(())
}

/// Exhaustive correctness: decoder output equals `target(x)` for every x and r.
/// Returns the least failing (x, r) in enumeration order.
pub fn verify_correctness<P, F>(proto: &P, target: F, budget: u128) -> Result<Option<CorrectnessFailure>>
where
    P: PsmProtocol + ?Sized,
    F: Fn(&[u64]) -> i8 + Sync,
{
    let inputs = all_inputs(proto);
    check_budget(proto, inputs.len(), budget)?;
    let size = proto.randomness_size();
    let fail = inputs.par_iter().find_map_first(|x| {
        let want = target(x);
        (0..size).find_map(|k| {
            let r = proto.randomness(k);
            let messages: Vec<Vec<u64>> = x.iter().enumerate().map(|(i, &v)| proto.encode(i, v, &r)).collect();
            let got = proto.decode(&messages);
            (got != want).then(|| CorrectnessFailure { inputs: x.clone(), randomness: r, got, want })
        })
    });
    Ok(fail)
}

/// Multiset of message tuples produced by one input over all of R.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MessageCounts {
    Packed(HashMap<u128, u64>),
    Wide(HashMap<Vec<u64>, u64>),
}

impl MessageCounts {
    pub fn total(&self) -> u64 {
        match self {
            MessageCounts::Packed(m) => m.values().sum(),
            MessageCounts::Wide(m) => m.values().sum(),
        }
    }

    pub fn distinct(&self) -> usize {
        match self {
            MessageCounts::Packed(m) => m.len(),
            MessageCounts::Wide(m) => m.len(),
        }
    }
}

fn bump<K: Hash + Eq>(m: &mut HashMap<K, u64>, k: K) {
    *m.entry(k).or_insert(0) += 1;
}

/// Exact count map of message tuples for input `x` over the whole randomness space.
pub fn message_counts<P: PsmProtocol + ?Sized>(proto: &P, x: &[u64]) -> MessageCounts {
    count_tuples(proto.randomness_size(), proto.message_radix(), |k| {
        let r = proto.randomness(k);
        x.iter().enumerate().flat_map(|(i, &v)| proto.encode(i, v, &r)).collect()
    })
}

/// Count the tuples `tuple(0..size)`. Coordinates must be below `radix`.
pub fn count_tuples(size: u64, radix: u64, tuple: impl Fn(u64) -> Vec<u64>) -> MessageCounts {
    let radix = radix.max(2) as u128;
    let len = if size == 0 { 0 } else { tuple(0).len() };
    // Pack the tuple into one integer when radix^len fits in 128 bits.
    if (len as f64) * (radix as f64).log2() < 127.0 {
        let mut m = HashMap::new();
        for k in 0..size {
            let key = tuple(k).iter().fold(0u128, |acc, &c| acc * radix + c as u128);
            bump(&mut m, key);
        }
        MessageCounts::Packed(m)
    } else {
        let mut m = HashMap::new();
        for k in 0..size {
            bump(&mut m, tuple(k));
        }
        MessageCounts::Wide(m)
    }
}

/// Perfect security: inputs with equal `target` value induce identical message
/// distributions. Returns the first violating pair, compared against the first
/// input of each output class.
pub fn verify_security<P, F>(proto: &P, target: F, budget: u128) -> Result<Option<SecurityFailure>>
where
    P: PsmProtocol + ?Sized,
    F: Fn(&[u64]) -> i8 + Sync,
{
    let inputs = all_inputs(proto);
    check_budget(proto, inputs.len(), budget)?;
    let mut classes: Vec<(i8, Vec<&Vec<u64>>)> = Vec::new();
    for x in &inputs {
        let v = target(x);
        match classes.iter_mut().find(|(c, _)| *c == v) {
            Some((_, members)) => members.push(x),
            None => classes.push((v, vec![x])),
        }
    }
    for (v, members) in classes {
        let reference = message_counts(proto, members[0]);
        let bad = members[1..].par_iter().find_map_first(|x| {
            (message_counts(proto, x) != reference).then(|| SecurityFailure {
                x: members[0].clone(),
                x_prime: (*x).clone(),
                output: v,
            })
        });
        if bad.is_some() {
            return Ok(bad);
        }
    }
    Ok(None)
}

/// The comparison protocol over {0,1,2} mod 7 with R = Z_7 x R_7.
#[derive(Debug, Clone)]
pub struct FknComp {
    m: Modulus,
    residues: Vec<u64>,
}

pub fn fkn_comp() -> FknComp {
    let m = Modulus::new(7).expect("7 is prime");
    FknComp { m, residues: residue_set(7).expect("7 is prime").members().to_vec() }
}

impl PsmProtocol for FknComp {
    fn players(&self) -> usize {
        2
    }

    fn input_domain(&self, _player: usize) -> Vec<u64> {
        vec![0, 1, 2]
    }

    fn randomness_size(&self) -> u64 {
        7 * self.residues.len() as u64
    }

    fn randomness(&self, index: u64) -> Vec<u64> {
        vec![index % 7, self.residues[(index / 7) as usize]]
    }

    fn is_randomness(&self, r: &[u64]) -> bool {
        r.len() == 2 && r[0] < 7 && self.residues.contains(&r[1])
    }

    fn encode(&self, player: usize, x: u64, r: &[u64]) -> Vec<u64> {
        let m = self.m;
        let t = m.mul(r[1], x);
        match player {
            0 => vec![m.add(r[0], t)],
            _ => vec![m.neg(m.add(r[0], t))],
        }
    }

    fn decode(&self, messages: &[Vec<u64>]) -> i8 {
        self.m.legendre(self.m.add(messages[0][0], messages[1][0]))
    }

    fn message_radix(&self) -> u64 {
        7
    }
}
