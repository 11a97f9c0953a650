//! Decomposable randomized encodings of polynomials over Z_p.
//!
//! Encodings are built symbolically. Every output coordinate ("component") is a
//! polynomial in at most one input variable plus shared random values, so the
//! encoder for input i reads only x_i by construction. The decoder is an
//! arithmetic expression over components.
//!
//! A product x_v * Q + D is split with fresh a, b, e as
//!   u1 = x_v + a, u3 = b x_v + e - D_v, V = Q + b, W = a Q + a b - e - D_rest,
//! decoded as u1 V - u3 - W, with V and W encoded recursively. When x_v is known
//! to be nonzero a cheaper split with rho in Z_p^* is used instead:
//!   u = rho x_v, t = rho b x_v - D_v (+ s), V = rho^-1 Q + b (, W = D_rest + s),
//! decoded as u V - t (+ W).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numtheory::Modulus;
use crate::poly::Polynomial;
use crate::psm::{count_tuples, DEFAULT_BUDGET};

/// Values an input or random coordinate ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// All of Z_p.
    Full,
    /// Z_p minus zero.
    NonZero,
}

impl Domain {
    pub fn values(self, p: u64) -> std::ops::Range<u64> {
        match self {
            Domain::Full => 0..p,
            Domain::NonZero => 1..p,
        }
    }

    fn size(self, p: u64) -> u64 {
        match self {
            Domain::Full => p,
            Domain::NonZero => p - 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Input(usize),
    Rand(usize),
    RandInv(usize),
}

type Mono = Vec<(Sym, u32)>;

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut acc: BTreeMap<Sym, u32> = BTreeMap::new();
    for &(s, e) in a.iter().chain(b) {
        *acc.entry(s).or_insert(0) += e;
    }
    let pairs: Vec<usize> = acc.keys().filter_map(|s| if let Sym::Rand(j) = s { Some(*j) } else { None }).collect();
    for j in pairs {
        if let Some(&ei) = acc.get(&Sym::RandInv(j)) {
            let er = acc[&Sym::Rand(j)];
            let k = er.min(ei);
            acc.insert(Sym::Rand(j), er - k);
            acc.insert(Sym::RandInv(j), ei - k);
        }
    }
    acc.into_iter().filter(|&(_, e)| e > 0).collect()
}

fn mono_inputs(m: &Mono) -> Vec<usize> {
    m.iter().filter_map(|(s, _)| if let Sym::Input(i) = s { Some(*i) } else { None }).collect()
}

/// A polynomial over Z_p in inputs, randoms and inverses of nonzero randoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymPoly {
    terms: BTreeMap<Mono, u64>,
}

impl SymPoly {
    pub fn constant(c: u64) -> Self {
        let mut p = SymPoly::default();
        if c != 0 {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn var(s: Sym) -> Self {
        let mut p = SymPoly::default();
        p.terms.insert(vec![(s, 1)], 1);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, mono: Mono, c: u64, m: Modulus) {
        let e = self.terms.entry(mono).or_insert(0);
        *e = m.add(*e, c);
        if *e == 0 {
            self.terms.retain(|_, c| *c != 0);
        }
    }

    pub fn add(&self, other: &SymPoly, m: Modulus) -> SymPoly {
        let mut out = self.clone();
        for (mono, &c) in &other.terms {
            out.add_term(mono.clone(), c, m);
        }
        out
    }

    pub fn sub(&self, other: &SymPoly, m: Modulus) -> SymPoly {
        self.add(&other.scale(m.get() - 1, m), m)
    }

    pub fn scale(&self, c: u64, m: Modulus) -> SymPoly {
        let mut out = SymPoly::default();
        for (mono, &d) in &self.terms {
            out.add_term(mono.clone(), m.mul(c, d), m);
        }
        out
    }

    pub fn mul(&self, other: &SymPoly, m: Modulus) -> SymPoly {
        let mut out = SymPoly::default();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                out.add_term(mono_mul(a, b), m.mul(ca, cb), m);
            }
        }
        out
    }

    /// Input variables that occur.
    pub fn inputs(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(mono_inputs).collect()
    }

    /// Divide every term by one power of x_v. Terms must all contain x_v.
    fn divide_input(&self, v: usize) -> SymPoly {
        let mut out = SymPoly::default();
        for (mono, &c) in &self.terms {
            let mut q = mono.clone();
            let pos = q.iter().position(|&(s, _)| s == Sym::Input(v)).expect("term contains x_v");
            q[pos].1 -= 1;
            if q[pos].1 == 0 {
                q.remove(pos);
            }
            out.terms.insert(q, c);
        }
        out
    }

    fn compile(&self, n_inputs: usize, n_rands: usize) -> Compiled {
        let slot = |s: Sym| match s {
            Sym::Input(i) => i,
            Sym::Rand(j) => n_inputs + j,
            Sym::RandInv(j) => n_inputs + n_rands + j,
        };
        Compiled {
            terms: self.terms.iter().map(|(mono, &c)| (c, mono.iter().map(|&(s, e)| (slot(s), e)).collect())).collect(),
        }
    }
}

impl fmt::Display for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(mono, c)| {
                let mut factors: Vec<String> = Vec::new();
                if *c != 1 || mono.is_empty() {
                    factors.push(c.to_string());
                }
                for &(s, e) in mono {
                    let name = match s {
                        Sym::Input(i) => format!("x{}", i + 1),
                        Sym::Rand(j) => format!("r{}", j + 1),
                        Sym::RandInv(j) => format!("r{}^-1", j + 1),
                    };
                    factors.push(if e == 1 { name } else { format!("{name}^{e}") });
                }
                factors.join("*")
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Flattened evaluation form: coefficient and (slot, exponent) factors.
#[derive(Clone, Debug)]
struct Compiled {
    terms: Vec<(u64, Vec<(usize, u32)>)>,
}

impl Compiled {
    fn eval(&self, vals: &[u64], m: Modulus) -> u64 {
        self.terms.iter().fold(0, |acc, (c, fs)| {
            let t = fs.iter().fold(*c, |t, &(s, e)| {
                let v = vals[s];
                m.mul(t, if e == 1 { v } else { m.pow(v, e as u64) })
            });
            m.add(acc, t)
        })
    }
}

/// Decoder expression over component values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Comp(usize),
    Const(u64),
    Sum(Vec<(u64, Expr)>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self, comps: &[u64], m: Modulus) -> u64 {
        match self {
            Expr::Comp(i) => comps[*i],
            Expr::Const(c) => *c,
            Expr::Sum(parts) => parts.iter().fold(0, |acc, (c, e)| m.add(acc, m.mul(*c, e.eval(comps, m)))),
            Expr::Mul(a, b) => m.mul(a.eval(comps, m), b.eval(comps, m)),
        }
    }
}

/// One output coordinate. `owner` is the only input it may read.
#[derive(Clone, Debug)]
pub struct Component {
    pub owner: Option<usize>,
    pub poly: SymPoly,
}

/// A decomposable randomized encoding.
#[derive(Clone, Debug)]
pub struct Dre {
    m: Modulus,
    input_domains: Vec<Domain>,
    rand_domains: Vec<Domain>,
    components: Vec<Component>,
    compiled: Vec<Compiled>,
    decoder: Expr,
    /// Component indices per block: block 0 is randomness-only, block i+1 belongs to input i.
    blocks: Vec<Vec<usize>>,
}

impl Dre {
    /// Assemble a DRE. Fails if a component reads an input other than its owner.
    pub fn from_parts(p: u64, input_domains: Vec<Domain>, rand_domains: Vec<Domain>, components: Vec<Component>, decoder: Expr) -> Result<Self> {
        let m = Modulus::new(p)?;
        let n = input_domains.len();
        let mut blocks = vec![Vec::new(); n + 1];
        for (idx, c) in components.iter().enumerate() {
            let ins = c.poly.inputs();
            let ok = match c.owner {
                None => ins.is_empty(),
                Some(o) => o < n && ins.iter().all(|&i| i == o),
            };
            if !ok {
                return Err(Error::Invalid(format!("component {idx} reads inputs {ins:?} but is owned by {:?}", c.owner)));
            }
            for mono in c.poly.terms.keys() {
                for &(s, _) in mono {
                    match s {
                        Sym::Rand(j) if j >= rand_domains.len() => return Err(Error::Invalid(format!("unknown random r{}", j + 1))),
                        Sym::RandInv(j) if rand_domains.get(j) != Some(&Domain::NonZero) => {
                            return Err(Error::Invalid(format!("r{} is inverted but may be zero", j + 1)))
                        }
                        _ => {}
                    }
                }
            }
            blocks[c.owner.map_or(0, |o| o + 1)].push(idx);
        }
        let compiled = components.iter().map(|c| c.poly.compile(n, rand_domains.len())).collect();
        Ok(Dre { m, input_domains, rand_domains, components, compiled, decoder, blocks })
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    pub fn inputs(&self) -> usize {
        self.input_domains.len()
    }

    pub fn input_domains(&self) -> &[Domain] {
        &self.input_domains
    }

    pub fn rand_domains(&self) -> &[Domain] {
        &self.rand_domains
    }

    /// Randomness arity m_r.
    pub fn rand_arity(&self) -> usize {
        self.rand_domains.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn decoder(&self) -> &Expr {
        &self.decoder
    }

    /// Total output length s (an upper bound on the DRE complexity).
    pub fn output_length(&self) -> usize {
        self.components.len()
    }

    /// s_0, s_1, ..., s_n.
    pub fn block_lengths(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn randomness_size(&self) -> u128 {
        let p = self.m.get();
        self.rand_domains.iter().map(|d| d.size(p) as u128).product()
    }

    pub fn randomness(&self, mut index: u128) -> Vec<u64> {
        let p = self.m.get();
        self.rand_domains
            .iter()
            .map(|d| {
                let k = d.size(p) as u128;
                let v = (index % k) as u64;
                index /= k;
                d.values(p).start + v
            })
            .collect()
    }

    fn slots(&self, r: &[u64]) -> Vec<u64> {
        let n = self.inputs();
        let mut vals = vec![0u64; n + 2 * r.len()];
        vals[n..n + r.len()].copy_from_slice(r);
        for (j, (&v, d)) in r.iter().zip(&self.rand_domains).enumerate() {
            if *d == Domain::NonZero {
                vals[n + r.len() + j] = self.m.inv(v).unwrap_or(0);
            }
        }
        vals
    }

    /// Block `b` of the encoding: b = 0 uses only r, b = i + 1 uses x_i and r.
    pub fn encode_block(&self, block: usize, x: u64, r: &[u64]) -> Vec<u64> {
        let mut vals = self.slots(r);
        if block > 0 {
            vals[block - 1] = x % self.m.get();
        }
        self.blocks[block].iter().map(|&c| self.compiled[c].eval(&vals, self.m)).collect()
    }

    /// All blocks for input x.
    pub fn encode(&self, x: &[u64], r: &[u64]) -> Vec<Vec<u64>> {
        let mut vals = self.slots(r);
        for (i, &v) in x.iter().enumerate() {
            vals[i] = v % self.m.get();
        }
        self.blocks.iter().map(|b| b.iter().map(|&c| self.compiled[c].eval(&vals, self.m)).collect()).collect()
    }

    pub fn decode(&self, blocks: &[Vec<u64>]) -> u64 {
        let mut comps = vec![0u64; self.components.len()];
        for (b, vals) in self.blocks.iter().zip(blocks) {
            for (&c, &v) in b.iter().zip(vals) {
                comps[c] = v;
            }
        }
        self.decoder.eval(&comps, self.m)
    }

    /// Every input tuple in the input domains, x_1 varying fastest.
    pub fn all_inputs(&self) -> Vec<Vec<u64>> {
        let p = self.m.get();
        let sizes: Vec<u64> = self.input_domains.iter().map(|d| d.size(p)).collect();
        let total: u64 = sizes.iter().product();
        (0..total)
            .map(|mut k| {
                self.input_domains
                    .iter()
                    .zip(&sizes)
                    .map(|(d, &s)| {
                        let v = d.values(p).start + k % s;
                        k /= s;
                        v
                    })
                    .collect()
            })
            .collect()
    }
}

struct Builder {
    m: Modulus,
    input_domains: Vec<Domain>,
    rand_domains: Vec<Domain>,
    components: Vec<Component>,
}

fn sum_expr(parts: Vec<(u64, Expr)>) -> Expr {
    if parts.len() == 1 && parts[0].0 == 1 {
        return parts.into_iter().next().unwrap().1;
    }
    Expr::Sum(parts)
}

impl Builder {
    fn new(m: Modulus, input_domains: Vec<Domain>) -> Self {
        Builder { m, input_domains, rand_domains: Vec::new(), components: Vec::new() }
    }

    fn fresh(&mut self, d: Domain) -> usize {
        self.rand_domains.push(d);
        self.rand_domains.len() - 1
    }

    fn x(&self, v: usize) -> SymPoly {
        SymPoly::var(Sym::Input(v))
    }

    fn component(&mut self, poly: SymPoly) -> Expr {
        let ins = poly.inputs();
        debug_assert!(ins.len() <= 1);
        if let Some((mono, &c)) = poly.terms.iter().next() {
            if poly.terms.len() == 1 && mono.is_empty() {
                return Expr::Const(c);
            }
        } else {
            return Expr::Const(0);
        }
        self.components.push(Component { owner: ins.into_iter().next(), poly });
        Expr::Comp(self.components.len() - 1)
    }

    fn encode(&mut self, f: SymPoly) -> Expr {
        let m = self.m;
        if f.inputs().len() <= 1 {
            return self.component(f);
        }
        let mut multi = SymPoly::default();
        let mut leaves: BTreeMap<Option<usize>, SymPoly> = BTreeMap::new();
        for (mono, &c) in &f.terms {
            let mut key = mono_inputs(mono);
            key.dedup();
            if key.len() >= 2 {
                multi.terms.insert(mono.clone(), c);
            } else {
                leaves.entry(key.first().copied()).or_default().terms.insert(mono.clone(), c);
            }
        }
        let common = multi
            .terms
            .keys()
            .map(|mono| mono_inputs(mono).into_iter().collect::<BTreeSet<usize>>())
            .reduce(|a, b| &a & &b)
            .unwrap_or_default();
        if !common.is_empty() {
            let v = *common
                .iter()
                .min_by_key(|&&v| (self.input_domains[v] != Domain::NonZero, !leaves.contains_key(&Some(v)), v))
                .unwrap();
            let q = multi.divide_input(v);
            let mut d_v = leaves.remove(&Some(v)).unwrap_or_default();
            if let Some(c) = leaves.remove(&None) {
                d_v = d_v.add(&c, m);
            }
            let d_rest = leaves.values().fold(SymPoly::default(), |acc, l| acc.add(l, m));
            return if self.input_domains[v] == Domain::NonZero {
                self.nonzero_gadget(v, q, d_v, d_rest)
            } else {
                self.full_gadget(v, q, d_v, d_rest)
            };
        }
        // No shared variable: group by input set and split with additive masks.
        let mut parts: Vec<(BTreeSet<usize>, SymPoly)> = Vec::new();
        for (mono, &c) in &multi.terms {
            let key: BTreeSet<usize> = mono_inputs(mono).into_iter().collect();
            match parts.iter_mut().find(|(k, _)| *k == key) {
                Some((_, p)) => {
                    p.terms.insert(mono.clone(), c);
                }
                None => {
                    let mut p = SymPoly::default();
                    p.terms.insert(mono.clone(), c);
                    parts.push((key, p));
                }
            }
        }
        let constant = leaves.remove(&None);
        for (owner, leaf) in leaves {
            let u = owner.expect("constant leaf removed above");
            match parts.iter_mut().find(|(k, _)| k.contains(&u)) {
                Some((_, p)) => *p = p.add(&leaf, m),
                None => parts.push(([u].into_iter().collect(), leaf)),
            }
        }
        if let Some(c) = constant {
            parts[0].1 = parts[0].1.add(&c, m);
        }
        let k = parts.len();
        let masks: Vec<usize> = (0..k - 1).map(|_| self.fresh(Domain::Full)).collect();
        let mut exprs = Vec::with_capacity(k);
        for (i, (_, mut p)) in parts.into_iter().enumerate() {
            if i < k - 1 {
                p = p.add(&SymPoly::var(Sym::Rand(masks[i])), m);
            }
            if i > 0 {
                p = p.sub(&SymPoly::var(Sym::Rand(masks[i - 1])), m);
            }
            exprs.push((1, self.encode(p)));
        }
        sum_expr(exprs)
    }

    fn full_gadget(&mut self, v: usize, q: SymPoly, d_v: SymPoly, d_rest: SymPoly) -> Expr {
        let m = self.m;
        let (a, b, e) = (self.fresh(Domain::Full), self.fresh(Domain::Full), self.fresh(Domain::Full));
        let (ra, rb, re) = (SymPoly::var(Sym::Rand(a)), SymPoly::var(Sym::Rand(b)), SymPoly::var(Sym::Rand(e)));
        let xv = self.x(v);
        let u1 = self.component(xv.add(&ra, m));
        let u3 = self.component(rb.mul(&xv, m).add(&re, m).sub(&d_v, m));
        let big_v = self.encode(q.add(&rb, m));
        let w = ra.mul(&q, m).add(&ra.mul(&rb, m), m).sub(&re, m).sub(&d_rest, m);
        let big_w = self.encode(w);
        let neg = m.get() - 1;
        Expr::Sum(vec![(1, Expr::Mul(Box::new(u1), Box::new(big_v))), (neg, u3), (neg, big_w)])
    }

    fn nonzero_gadget(&mut self, v: usize, q: SymPoly, d_v: SymPoly, d_rest: SymPoly) -> Expr {
        let m = self.m;
        let rho = self.fresh(Domain::NonZero);
        let b = self.fresh(Domain::Full);
        let (rr, ri, rb) = (SymPoly::var(Sym::Rand(rho)), SymPoly::var(Sym::RandInv(rho)), SymPoly::var(Sym::Rand(b)));
        let xv = self.x(v);
        let u = self.component(rr.mul(&xv, m));
        let mut t = rr.mul(&rb, m).mul(&xv, m).sub(&d_v, m);
        let mask = (!d_rest.is_zero()).then(|| self.fresh(Domain::Full));
        if let Some(s) = mask {
            t = t.add(&SymPoly::var(Sym::Rand(s)), m);
        }
        let t = self.component(t);
        let big_v = self.encode(ri.mul(&q, m).add(&rb, m));
        let neg = m.get() - 1;
        let mut parts = vec![(1, Expr::Mul(Box::new(u), Box::new(big_v))), (neg, t)];
        if let Some(s) = mask {
            let w = self.encode(d_rest.add(&SymPoly::var(Sym::Rand(s)), m));
            parts.push((1, w));
        }
        Expr::Sum(parts)
    }

    fn finish(self, decoder: Expr) -> Result<Dre> {
        Dre::from_parts(self.m.get(), self.input_domains, self.rand_domains, self.components, decoder)
    }
}

/// Lift an integer polynomial into the symbolic ring.
pub fn lift(f: &Polynomial, m: Modulus) -> SymPoly {
    let mut out = SymPoly::default();
    for (c, vars) in f.terms() {
        let mut mono: BTreeMap<Sym, u32> = BTreeMap::new();
        for &v in vars {
            *mono.entry(Sym::Input(v)).or_insert(0) += 1;
        }
        out.add_term(mono.into_iter().collect(), m.reduce(c), m);
    }
    out
}

/// Encode a polynomial directly, with per-input domains.
pub fn encode_polynomial(f: &Polynomial, p: u64, input_domains: Vec<Domain>) -> Result<Dre> {
    let m = Modulus::new(p)?;
    if input_domains.len() < f.arity() {
        return Err(Error::Arity { expected: f.arity(), got: input_domains.len() });
    }
    let mut b = Builder::new(m, input_domains);
    let dec = b.encode(lift(f, m));
    b.finish(dec)
}

/// y_0 + y_1 * ... * y_k with inputs y_0..y_k.
pub fn product_plus(k: usize) -> Polynomial {
    Polynomial::from_terms(k + 1, [(1, vec![0]), (1, (1..=k).collect())]).expect("variables in range")
}

pub fn dre_product_plus(k: usize, p: u64) -> Result<Dre> {
    if k == 0 {
        return Err(Error::Invalid("product needs k >= 1".into()));
    }
    encode_polynomial(&product_plus(k), p, vec![Domain::Full; k + 1])
}

/// Per-term encodings of c * monomial + r_i with masks r_1 + ... + r_m = 0, summed.
pub fn dre_polynomial(f: &Polynomial, p: u64) -> Result<Dre> {
    let m = Modulus::new(p)?;
    let mut b = Builder::new(m, vec![Domain::Full; f.arity()]);
    let terms: Vec<SymPoly> = f
        .terms()
        .map(|(c, vars)| lift(&Polynomial::from_terms(f.arity(), [(c, vars.to_vec())]).expect("same arity"), m))
        .filter(|t| !t.is_zero())
        .collect();
    if terms.is_empty() {
        return b.finish(Expr::Const(0));
    }
    let masks: Vec<usize> = (0..terms.len() - 1).map(|_| b.fresh(Domain::Full)).collect();
    let last = masks.iter().fold(SymPoly::default(), |acc, &j| acc.sub(&SymPoly::var(Sym::Rand(j)), m));
    let mut parts = Vec::new();
    for (i, t) in terms.into_iter().enumerate() {
        let r = masks.get(i).map_or_else(|| last.clone(), |&j| SymPoly::var(Sym::Rand(j)));
        parts.push((1, b.encode(t.add(&r, m))));
    }
    b.finish(sum_expr(parts))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DreFailure {
    Correctness { x: Vec<u64>, r: Vec<u64>, got: u64, want: u64 },
    Security { x: Vec<u64>, x_prime: Vec<u64>, value: u64 },
}

/// Exhaustive check of correctness and perfect security against `target`.
pub fn verify_dre<F>(dre: &Dre, target: F, budget: u128) -> Result<Option<DreFailure>>
where
    F: Fn(&[u64]) -> u64 + Sync,
{
    let inputs = dre.all_inputs();
    let size = dre.randomness_size();
    let required = inputs.len() as u128 * size;
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let size = size as u64;
    let bad = inputs.par_iter().find_map_first(|x| {
        let want = target(x);
        (0..size).find_map(|k| {
            let r = dre.randomness(k as u128);
            let got = dre.decode(&dre.encode(x, &r));
            (got != want).then(|| DreFailure::Correctness { x: x.clone(), r, got, want })
        })
    });
    if bad.is_some() {
        return Ok(bad);
    }
    let mut fibers: BTreeMap<u64, Vec<&Vec<u64>>> = BTreeMap::new();
    for x in &inputs {
        fibers.entry(target(x)).or_default().push(x);
    }
    let p = dre.modulus().get();
    let counts = |x: &[u64]| count_tuples(size, p, |k| dre.encode(x, &dre.randomness(k as u128)).concat());
    for (value, xs) in fibers {
        let reference = counts(xs[0]);
        let bad = xs[1..].par_iter().find_map_first(|x| {
            (counts(x) != reference).then(|| DreFailure::Security { x: xs[0].clone(), x_prime: (*x).clone(), value })
        });
        if bad.is_some() {
            return Ok(bad);
        }
    }
    Ok(None)
}

/// [`verify_dre`] against a polynomial, with the default budget.
pub fn verify_dre_poly(dre: &Dre, f: &Polynomial) -> Result<Option<DreFailure>> {
    let m = dre.modulus();
    verify_dre(dre, |x| f.eval_mod(x, m), DEFAULT_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn sym_inverse_cancels() {
        let m = Modulus::new(7).unwrap();
        let a = SymPoly::var(Sym::Rand(0)).mul(&SymPoly::var(Sym::RandInv(0)), m);
        assert_eq!(a, SymPoly::constant(1));
        let x = SymPoly::var(Sym::Input(0));
        assert!(x.sub(&x, m).is_zero());
    }

    #[test]
    fn product_plus_randomness_counts() {
        assert_eq!(dre_product_plus(1, 5).unwrap().rand_arity(), 1);
        assert_eq!(dre_product_plus(2, 5).unwrap().rand_arity(), 4);
        assert_eq!(dre_product_plus(3, 5).unwrap().rand_arity(), 10);
    }

    #[test]
    fn product_plus_k1_p5() {
        let d = dre_product_plus(1, 5).unwrap();
        assert_eq!(verify_dre_poly(&d, &product_plus(1)).unwrap(), None);
    }

    #[test]
    fn product_plus_k2_p3() {
        let d = dre_product_plus(2, 3).unwrap();
        assert_eq!(verify_dre_poly(&d, &product_plus(2)).unwrap(), None);
    }

    #[test]
    fn product_plus_k3_p5_random_points() {
        let d = dre_product_plus(3, 5).unwrap();
        let m = d.modulus();
        let f = product_plus(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: Vec<u64> = (0..4).map(|_| rng.gen_range(0..5)).collect();
            let r = d.randomness(rng.gen_range(0..d.randomness_size()));
            assert_eq!(d.decode(&d.encode(&x, &r)), f.eval_mod(&x, m));
        }
    }

    #[test]
    fn decomposable_by_structure() {
        let d = dre_product_plus(3, 5).unwrap();
        for c in d.components() {
            let ins = c.poly.inputs();
            assert!(ins.len() <= 1);
            assert_eq!(ins.into_iter().next(), c.owner);
        }
        // blocks computed one at a time match the joint encoding
        let r = d.randomness(12345);
        let x = [1, 2, 3, 4];
        let joint = d.encode(&x, &r);
        assert_eq!(d.encode_block(0, 0, &r), joint[0]);
        for i in 0..4 {
            assert_eq!(d.encode_block(i + 1, x[i], &r), joint[i + 1]);
        }
        assert_eq!(d.block_lengths().iter().sum::<usize>(), d.output_length());
    }

    #[test]
    fn polynomial_examples() {
        let f = poly("x1 + x2");
        let d = dre_polynomial(&f, 3).unwrap();
        assert_eq!(verify_dre_poly(&d, &f).unwrap(), None);
        let f = poly("x1*x2");
        let d = dre_polynomial(&f, 5).unwrap();
        let m = d.modulus();
        for x in d.all_inputs() {
            for k in 0..d.randomness_size() {
                let r = d.randomness(k);
                assert_eq!(d.decode(&d.encode(&x, &r)), f.eval_mod(&x, m));
            }
        }
        let f = poly("x1*x2 + x3");
        let d = dre_polynomial(&f, 3).unwrap();
        assert_eq!(verify_dre_poly(&d, &f).unwrap(), None);
    }

    #[test]
    fn empty_polynomial_decodes_to_zero() {
        let f = Polynomial::zero(2);
        let d = dre_polynomial(&f, 5).unwrap();
        assert_eq!(d.decoder(), &Expr::Const(0));
        assert_eq!(d.output_length(), 0);
        assert_eq!(verify_dre_poly(&d, &f).unwrap(), None);
    }

    #[test]
    fn leaky_encoding_is_rejected() {
        // x_1 sent in the clear next to a correct encoding of x_1 * x_2.
        let f = poly("x1*x2");
        let good = dre_polynomial(&f, 3).unwrap();
        let mut comps = good.components().to_vec();
        comps.push(Component { owner: Some(0), poly: SymPoly::var(Sym::Input(0)) });
        let leaky = Dre::from_parts(3, good.input_domains().to_vec(), good.rand_domains().to_vec(), comps, good.decoder().clone()).unwrap();
        assert!(matches!(verify_dre_poly(&leaky, &f).unwrap(), Some(DreFailure::Security { .. })));
    }

    #[test]
    fn wrong_decoder_is_rejected() {
        let f = poly("x1*x2");
        let d = dre_polynomial(&f, 3).unwrap();
        let bad = Dre::from_parts(3, d.input_domains().to_vec(), d.rand_domains().to_vec(), d.components().to_vec(), Expr::Const(0)).unwrap();
        assert!(matches!(verify_dre_poly(&bad, &f).unwrap(), Some(DreFailure::Correctness { .. })));
    }

    #[test]
    fn ownership_is_enforced() {
        let c = Component { owner: Some(0), poly: SymPoly::var(Sym::Input(1)) };
        assert!(Dre::from_parts(3, vec![Domain::Full; 2], vec![], vec![c], Expr::Comp(0)).is_err());
        let c = Component { owner: None, poly: SymPoly::var(Sym::RandInv(0)) };
        assert!(Dre::from_parts(3, vec![], vec![Domain::Full], vec![c], Expr::Comp(0)).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let d = dre_product_plus(3, 5).unwrap();
        assert!(matches!(verify_dre_poly(&d, &product_plus(3)), Err(Error::Budget { .. })));
    }

    #[test]
    fn nonzero_input_gadget() {
        // (x1 + x2) * x3 with x3 != 0
        let f = poly("x1*x3 + x2*x3");
        let d = encode_polynomial(&f, 5, vec![Domain::Full, Domain::Full, Domain::NonZero]).unwrap();
        assert_eq!(verify_dre_poly(&d, &f).unwrap(), None);
        assert!(d.rand_arity() < encode_polynomial(&f, 5, vec![Domain::Full; 3]).unwrap().rand_arity());
    }

    #[test]
    fn generated_encodings_verify_small() {
        let cases = [
            "x1", "x1 + x2 + x3", "2*x1*x2", "x1*x1", "x1*x2 - x2*x3 + 1", "x1*x2 + x1*x3", "x1*x2*x3", "x1*x2 + x3 + x1",
            "3*x1*x1*x2 + x2", "x1*x2 + x2*x3 + x1*x3",
        ];
        let budget = 5_000_000;
        let mut checked = 0;
        for s in cases {
            let f = poly(s);
            for p in [3, 5] {
                let m = Modulus::new(p).unwrap();
                let direct = encode_polynomial(&f, p, vec![Domain::Full; f.arity()]).unwrap();
                let per_term = dre_polynomial(&f, p).unwrap();
                for d in [direct, per_term] {
                    match verify_dre(&d, |x| f.eval_mod(x, m), budget) {
                        Ok(res) => {
                            assert_eq!(res, None, "{s} mod {p}");
                            checked += 1;
                        }
                        Err(Error::Budget { .. }) => assert_eq!(p, 5, "{s} mod 3 over budget"),
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
        assert!(checked >= 20);
    }
}
