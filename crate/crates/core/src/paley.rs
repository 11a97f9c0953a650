//! Paley graphs and tournaments and the window property (*)_n.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{is_prime, legendre, primes_from, LegendreTable, Modulus};
use crate::peralta::peralta_bound;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PaleyKind {
    /// p = 1 mod 4, undirected.
    Graph,
    /// p = 3 mod 4, x -> y iff x - y is a residue.
    Tournament,
}

#[derive(Debug, Clone)]
pub struct PaleyStructure {
    table: LegendreTable,
    kind: PaleyKind,
}

impl PaleyStructure {
    pub fn new(p: u64) -> Result<Self> {
        let m = Modulus::new(p)?;
        let kind = if p % 4 == 1 { PaleyKind::Graph } else { PaleyKind::Tournament };
        Ok(PaleyStructure { table: LegendreTable::new(m), kind })
    }

    pub fn p(&self) -> u64 {
        self.table.p()
    }

    pub fn kind(&self) -> PaleyKind {
        self.kind
    }

    /// Graph: x ~ y. Tournament: the arc x -> y.
    pub fn edge(&self, x: u64, y: u64) -> bool {
        let p = self.p();
        x % p != y % p && self.table.get((x % p + p - y % p) % p) == 1
    }

    /// z realizes (A, B) on S when it is joined to A and not to B in the
    /// graph, or beats A and loses to B in the tournament.
    fn realizes(&self, z: u64, a: bool, s: u64) -> bool {
        match (self.kind, a) {
            (_, true) => self.edge(z, s),
            (PaleyKind::Graph, false) => !self.edge(z, s),
            (PaleyKind::Tournament, false) => self.edge(s, z),
        }
    }

    /// One `x y` or `x>y` line per edge.
    pub fn edge_list(&self) -> String {
        let p = self.p();
        let mut out = String::new();
        for x in 0..p {
            for y in 0..p {
                match self.kind {
                    PaleyKind::Graph if x < y && self.edge(x, y) => writeln!(out, "{x} {y}").unwrap(),
                    PaleyKind::Tournament if self.edge(x, y) => writeln!(out, "{x}>{y}").unwrap(),
                    _ => {}
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarWitness {
    pub s: Vec<u64>,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarPropertyReport {
    pub p: u64,
    pub n: usize,
    pub kind: PaleyKind,
    pub holds: bool,
    pub witness_failure: Option<StarWitness>,
}

impl fmt::Display for StarPropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            PaleyKind::Graph => "G",
            PaleyKind::Tournament => "T",
        };
        write!(f, "{kind}_{} (*)_{} {}", self.p, self.n, if self.holds { "holds" } else { "fails" })?;
        if let Some(w) = &self.witness_failure {
            write!(f, " S={:?} A={:?} B={:?}", w.s, w.a, w.b)?;
        }
        Ok(())
    }
}

fn check_args(p: u64, n: usize) -> Result<()> {
    if p == 2 || !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    if n == 0 || n as u64 >= p {
        return Err(Error::WindowOutOfRange(n));
    }
    Ok(())
}

/// First missing partition for the window starting at w, as a bitmask over S (bit i set means w + i is in A).
fn missing_partition(g: &PaleyStructure, w: u64, n: usize) -> Option<usize> {
    let p = g.p();
    let window: Vec<u64> = (0..n as u64).map(|i| (w + i) % p).collect();
    let mut seen = vec![false; 1 << n];
    for z in 0..p {
        if window.contains(&z) {
            continue;
        }
        // Outside S the edge is never degenerate, so every z realizes exactly one partition.
        let mask = window.iter().enumerate().fold(0, |m, (i, &s)| m | (g.realizes(z, true, s) as usize) << i);
        seen[mask] = true;
    }
    seen.iter().position(|&ok| !ok)
}

/// Checks every cyclic window and every partition.
pub fn has_star_property_full(p: u64, n: usize) -> Result<StarPropertyReport> {
    check_args(p, n)?;
    let g = PaleyStructure::new(p)?;
    let failure = (0..p).into_par_iter().find_map_first(|w| missing_partition(&g, w, n).map(|mask| (w, mask)));
    let witness_failure = failure.map(|(w, mask)| {
        let s: Vec<u64> = (0..n as u64).map(|i| (w + i) % p).collect();
        let (a, b) = s.iter().enumerate().partition::<Vec<_>, _>(|(i, _)| mask >> i & 1 == 1);
        StarWitness { s: s.clone(), a: a.into_iter().map(|(_, &v)| v).collect(), b: b.into_iter().map(|(_, &v)| v).collect() }
    });
    Ok(StarPropertyReport { p, n, kind: g.kind(), holds: witness_failure.is_none(), witness_failure })
}

/// Only the window {1, ..., n}; x -> x + 1 is an automorphism so this suffices.
/// Uses Euler's criterion directly rather than any residuosity table.
pub fn has_star_property_reduced(p: u64, n: usize) -> Result<bool> {
    check_args(p, n)?;
    let mut seen = vec![false; 1 << n];
    let mut missing = 1usize << n;
    for z in std::iter::once(0).chain(n as u64 + 1..p) {
        let mut mask = 0;
        for i in 0..n {
            // z is joined to (or beats) i + 1 iff z - (i + 1) is a residue, in both kinds.
            if legendre(z as i64 - i as i64 - 1, p)? == 1 {
                mask |= 1 << i;
            }
        }
        if !seen[mask] {
            seen[mask] = true;
            missing -= 1;
            if missing == 0 {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MValues {
    pub n: usize,
    pub m_g: u64,
    pub m_t: u64,
    pub m: u64,
}

/// Least graph prime and least tournament prime with (*)_n.
pub fn m_values(n: usize, max_p: u64) -> Result<MValues> {
    let (mut m_g, mut m_t) = (None, None);
    for p in primes_from((n as u64 + 1).max(3)) {
        if p > max_p {
            return Err(Error::SearchLimit { max_p });
        }
        let slot = if p % 4 == 1 { &mut m_g } else { &mut m_t };
        if slot.is_none() && has_star_property_reduced(p, n)? {
            *slot = Some(p);
        }
        if let (Some(g), Some(t)) = (m_g, m_t) {
            return Ok(MValues { n, m_g: g, m_t: t, m: g.min(t) });
        }
    }
    unreachable!("prime iterator is infinite")
}

/// The first `sample` odd primes above n^2 2^(2n-2). There is no Paley structure on Z_2.
pub fn spotcheck_primes(n: usize, sample: usize) -> Vec<u64> {
    let bound = peralta_bound(n) as u64;
    primes_from((bound + 1).max(3)).take(sample).collect()
}

/// Every prime in `spotcheck_primes(n, sample)` has (*)_n.
pub fn thm_ec_spotcheck(n: usize, sample: usize) -> bool {
    spotcheck_primes(n, sample).into_iter().all(|p| has_star_property_reduced(p, n).unwrap_or(false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peralta::is_n_peralta;

    #[test]
    fn adjacency_shape() {
        for p in [5u64, 13, 17, 29] {
            let g = PaleyStructure::new(p).unwrap();
            assert_eq!(g.kind(), PaleyKind::Graph);
            for x in 0..p {
                assert!(!g.edge(x, x));
                for y in 0..p {
                    assert_eq!(g.edge(x, y), g.edge(y, x));
                }
            }
            // (p - 1) / 2 neighbours each.
            assert_eq!(g.edge_list().lines().count() as u64, p * (p - 1) / 4);
        }
        for p in [3u64, 7, 11, 19, 23] {
            let t = PaleyStructure::new(p).unwrap();
            assert_eq!(t.kind(), PaleyKind::Tournament);
            for x in 0..p {
                for y in 0..p {
                    if x != y {
                        assert!(t.edge(x, y) ^ t.edge(y, x));
                    }
                }
            }
            assert_eq!(t.edge_list().lines().count() as u64, p * (p - 1) / 2);
        }
        assert_eq!(PaleyStructure::new(7).unwrap().edge_list().lines().next(), Some("0>3"));
        assert_eq!(PaleyStructure::new(5).unwrap().edge_list().lines().next(), Some("0 1"));
    }

    #[test]
    fn examples() {
        assert!(has_star_property_full(17, 2).unwrap().holds);
        let r = has_star_property_full(5, 2).unwrap();
        assert!(!r.holds);
        let w = r.witness_failure.unwrap();
        assert_eq!(w.s.len(), 2);
        assert_eq!(w.a.len() + w.b.len(), 2);
        assert!(has_star_property_full(7, 1).unwrap().holds);
        assert!(has_star_property_reduced(37, 4).unwrap());
        assert!(!has_star_property_reduced(31, 4).unwrap());
    }

    #[test]
    fn witness_is_a_real_failure() {
        let r = has_star_property_full(29, 3).unwrap();
        let g = PaleyStructure::new(29).unwrap();
        if let Some(w) = r.witness_failure {
            for z in (0..29).filter(|z| !w.s.contains(z)) {
                let ok = w.a.iter().all(|&a| g.realizes(z, true, a)) && w.b.iter().all(|&b| g.realizes(z, false, b));
                assert!(!ok, "z = {z} realizes the witness");
            }
        }
    }

    #[test]
    fn errors() {
        assert!(has_star_property_full(2, 1).is_err());
        assert!(has_star_property_full(9, 1).is_err());
        assert!(has_star_property_reduced(5, 5).is_err());
        assert!(has_star_property_reduced(5, 0).is_err());
    }

    #[test]
    fn reduced_matches_full() {
        for p in primes_from(3).take_while(|&p| p <= 200) {
            for n in 1..=4usize.min(p as usize - 1) {
                assert_eq!(has_star_property_full(p, n).unwrap().holds, has_star_property_reduced(p, n).unwrap(), "p={p} n={n}");
            }
        }
    }

    #[test]
    fn reduced_matches_peralta() {
        for p in primes_from(3).take_while(|&p| p <= 400) {
            for n in 1..=6usize.min(p as usize - 1) {
                assert_eq!(has_star_property_reduced(p, n).unwrap(), is_n_peralta(p, n).unwrap(), "p={p} n={n}");
            }
        }
    }

    #[test]
    fn m_values_small() {
        let expect = [(1, 3), (2, 7), (3, 11), (4, 37), (5, 67)];
        for (n, m) in expect {
            let v = m_values(n, 1 << 20).unwrap();
            assert_eq!(v.m, m);
            assert_eq!(v.m, v.m_g.min(v.m_t));
            assert_eq!(v.m_g % 4, 1);
            assert_eq!(v.m_t % 4, 3);
        }
        assert!(matches!(m_values(4, 20), Err(Error::SearchLimit { .. })));
    }

    #[test]
    fn spotchecks() {
        assert_eq!(spotcheck_primes(1, 5), vec![3, 5, 7, 11, 13]);
        assert!(thm_ec_spotcheck(2, 5));
        assert_eq!(spotcheck_primes(2, 1), vec![17]);
        assert!(thm_ec_spotcheck(3, 3));
        assert!(primes_from(577).take(3).all(|p| has_star_property_reduced(p, 3).unwrap()));
    }
}
