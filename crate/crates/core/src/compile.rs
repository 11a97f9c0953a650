//! QR-PSM protocols compiled from a polynomial embedding and a DRE of
//! h(x, x_{n+1}, x_{n+2}) = (g(x) + x_{n+1}) * x_{n+2}.

use serde::Serialize;

use crate::dre::{encode_polynomial, Domain, Dre};
use crate::error::{Error, Result};
use crate::funcs::{index_bits, SignConvention, TruthTable};
use crate::lqr::ceil_log2;
use crate::numtheory::{residue_set, LegendreTable, Modulus};
use crate::peralta::{offset_in_table, peralta_prime, PatternCell};
use crate::poly::Polynomial;
use crate::psm::PsmProtocol;

#[derive(Debug, Clone)]
pub struct QrPsmFromDre {
    f: TruthTable,
    g: Polynomial,
    m: Modulus,
    a0: u64,
    min_g: i128,
    dre: Dre,
    residues: Vec<u64>,
}

/// Values of g on {0,1}^n and the window pattern it induces for f.
fn embedding_window(f: &TruthTable, g: &Polynomial, conv: SignConvention) -> Result<(i128, Vec<PatternCell>)> {
    let n = f.arity();
    let vals = g.clone().with_arity(n).boolean_values();
    let (lo, hi) = (*vals.iter().min().unwrap(), *vals.iter().max().unwrap());
    let width = hi - lo + 1;
    if width > crate::peralta::MAX_WINDOW as i128 {
        return Err(Error::Invalid(format!("embedding length {width} exceeds {}", crate::peralta::MAX_WINDOW)));
    }
    let mut pattern: Vec<PatternCell> = vec![None; width as usize];
    let mut first = vec![0usize; width as usize];
    for (i, &v) in vals.iter().enumerate() {
        let pos = (v - lo) as usize;
        let s = conv.sign(f.at(i));
        match pattern[pos] {
            None => {
                pattern[pos] = Some(s);
                first[pos] = i;
            }
            Some(prev) if prev != s => return Err(Error::EmbeddingViolation(index_bits(first[pos], n), index_bits(i, n))),
            _ => {}
        }
    }
    Ok((lo, pattern))
}

/// h = (g + x_{n+1}) x_{n+2} as a polynomial in n + 2 variables.
pub fn lifted_target(g: &Polynomial, n: usize) -> Polynomial {
    let mut terms: Vec<(i64, Vec<usize>)> = g
        .terms()
        .map(|(c, vars)| {
            let mut v = vars.to_vec();
            v.push(n + 1);
            (c, v)
        })
        .collect();
    terms.push((1, vec![n, n + 1]));
    Polynomial::from_terms(n + 2, terms).expect("variables below n + 2")
}

/// Compile f with embedding g. p is the least l(g)-Peralta prime.
pub fn compile(f: &TruthTable, g: &Polynomial, conv: SignConvention, max_p: u64) -> Result<QrPsmFromDre> {
    let n = f.arity();
    if g.arity() > n {
        return Err(Error::Arity { expected: n, got: g.arity() });
    }
    let (lo, pattern) = embedding_window(f, g, conv)?;
    let p = peralta_prime(pattern.len(), max_p)?.p;
    let m = Modulus::new(p)?;
    let b = offset_in_table(&LegendreTable::new(m), &pattern)?
        .ok_or_else(|| Error::Invalid(format!("S_{p} has no window matching the embedding pattern")))?;
    let a0 = m.reduce((b as i128 - lo).rem_euclid(p as i128) as i64);
    let mut domains = vec![Domain::Full; n + 1];
    domains.push(Domain::NonZero);
    let dre = encode_polynomial(&lifted_target(g, n), p, domains)?;
    let residues = residue_set(p)?.members().to_vec();
    Ok(QrPsmFromDre { f: f.clone(), g: g.clone().with_arity(n), m, a0, min_g: lo, dre, residues })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub p: u64,
    /// Achieved DRE output length.
    pub s: usize,
    pub bits: u64,
}

#[derive(Serialize)]
struct Descriptor {
    p: u64,
    a0: u64,
    g: String,
    dre_len: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    encoders: Option<Vec<EncoderRow>>,
}

#[derive(Serialize)]
struct EncoderRow {
    block: String,
    poly: String,
}

impl QrPsmFromDre {
    pub fn p(&self) -> u64 {
        self.m.get()
    }

    pub fn a0(&self) -> u64 {
        self.a0
    }

    pub fn dre(&self) -> &Dre {
        &self.dre
    }

    pub fn function(&self) -> &TruthTable {
        &self.f
    }

    pub fn embedding(&self) -> &Polynomial {
        &self.g
    }

    /// l(g).
    pub fn embedding_length(&self) -> usize {
        let vals = self.g.boolean_values();
        (vals.iter().max().unwrap() - self.min_g + 1) as usize
    }

    pub fn estimate_cost(&self) -> CostReport {
        let s = self.dre.output_length();
        CostReport { p: self.p(), s, bits: s as u64 * ceil_log2(self.p()) }
    }

    /// a_0 + g(x) mod p for every Boolean x. None of these may be zero.
    pub fn shifted_values(&self) -> Vec<u64> {
        let m = self.m;
        self.g.boolean_values().iter().map(|&v| m.add(self.a0, m.reduce((v.rem_euclid(m.get() as i128)) as i64))).collect()
    }

    pub fn descriptor_json(&self, with_encoders: bool) -> String {
        let encoders = with_encoders.then(|| {
            self.dre
                .components()
                .iter()
                .map(|c| EncoderRow { block: format!("h{}", c.owner.map_or(0, |o| o + 1)), poly: c.poly.to_string() })
                .collect()
        });
        let d = Descriptor { p: self.p(), a0: self.a0, g: self.g.to_string(), dre_len: self.dre.output_length(), encoders };
        serde_json::to_string(&d).expect("plain struct serializes")
    }

    /// The raw DRE decode for Boolean x and randomness r, which must equal (g(x) + a_0) r'.
    pub fn dre_value(&self, x: &[u64], r: &[u64]) -> u64 {
        let messages: Vec<Vec<u64>> = x.iter().enumerate().map(|(i, &v)| self.encode(i, v, r)).collect();
        self.dre.decode(&self.split(&messages))
    }

    fn dre_randomness(&self, r: &[u64]) -> (Vec<u64>, u64) {
        let (dre_r, rest) = r.split_at(r.len() - 1);
        (dre_r.to_vec(), rest[0])
    }

    /// Undo the player-1 bundling into per-input DRE blocks.
    fn split(&self, messages: &[Vec<u64>]) -> Vec<Vec<u64>> {
        let n = self.f.arity();
        let lens = self.dre.block_lengths();
        let mut blocks = vec![Vec::new(); n + 3];
        let first = &messages[0];
        let mut at = 0;
        for b in [0, 1, n + 1, n + 2] {
            blocks[b] = first[at..at + lens[b]].to_vec();
            at += lens[b];
        }
        for (i, msg) in messages.iter().enumerate().skip(1) {
            blocks[i + 1] = msg.clone();
        }
        blocks
    }
}

impl PsmProtocol for QrPsmFromDre {
    fn players(&self) -> usize {
        self.f.arity()
    }

    fn input_domain(&self, _player: usize) -> Vec<u64> {
        vec![0, 1]
    }

    fn randomness_size(&self) -> u64 {
        let total = self.dre.randomness_size() * self.residues.len() as u128;
        u64::try_from(total).unwrap_or(u64::MAX)
    }

    fn randomness(&self, index: u64) -> Vec<u64> {
        let h = self.residues.len() as u64;
        let mut r = self.dre.randomness((index / h) as u128);
        r.push(self.residues[(index % h) as usize]);
        r
    }

    fn is_randomness(&self, r: &[u64]) -> bool {
        let p = self.p();
        r.len() == self.dre.rand_arity() + 1
            && r[..r.len() - 1].iter().zip(self.dre.rand_domains()).all(|(&v, d)| d.values(p).contains(&v))
            && self.residues.binary_search(&r[r.len() - 1]).is_ok()
    }

    fn encode(&self, player: usize, x: u64, r: &[u64]) -> Vec<u64> {
        let n = self.f.arity();
        let (dre_r, r_prime) = self.dre_randomness(r);
        if player == 0 {
            let mut out = self.dre.encode_block(0, 0, &dre_r);
            out.extend(self.dre.encode_block(1, x, &dre_r));
            out.extend(self.dre.encode_block(n + 1, self.a0, &dre_r));
            out.extend(self.dre.encode_block(n + 2, r_prime, &dre_r));
            out
        } else {
            self.dre.encode_block(player + 1, x, &dre_r)
        }
    }

    fn decode(&self, messages: &[Vec<u64>]) -> i8 {
        self.m.legendre(self.dre.decode(&self.split(messages)))
    }

    fn message_radix(&self) -> u64 {
        self.p()
    }
}
