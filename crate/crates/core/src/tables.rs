//! Published reference values, embedded for regression and the `tables` command.

use crate::error::Result;
use crate::funcs::FunctionSpec;
use crate::lqr::LqrProtocol;

/// S_p for the primes 2..19.
pub const QR_SEQUENCES: [(u64, &str); 8] = [
    (2, "1"),
    (3, "10"),
    (5, "1001"),
    (7, "110100"),
    (11, "1011100010"),
    (13, "101100001101"),
    (17, "1101000110001011"),
    (19, "100111101010000110"),
];

/// (n, P_n).
pub const PERALTA_PRIMES: [(usize, u64); 8] = [(1, 3), (2, 7), (3, 11), (4, 37), (5, 67), (6, 181), (7, 367), (8, 1091)];

/// (n, L_n) as published.
pub const LQR_PRIMES: [(usize, u64); 4] = [(1, 3), (2, 7), (3, 11), (4, 37)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolListEntry {
    pub n: usize,
    /// Column heading: AND, XOR, EQ or MAJ.
    pub column: &'static str,
    /// The function the vector actually computes. The MAJ cells for n = 4 and n = 6
    /// only verify against strict majority.
    pub function: &'static str,
    pub p: u64,
    pub a: &'static [i64],
}

impl ProtocolListEntry {
    pub fn spec(&self) -> FunctionSpec {
        self.function.parse().expect("golden function specs parse")
    }

    pub fn protocol(&self) -> Result<LqrProtocol> {
        LqrProtocol::new(self.p, self.a)
    }
}

const fn e(n: usize, column: &'static str, function: &'static str, p: u64, a: &'static [i64]) -> ProtocolListEntry {
    ProtocolListEntry { n, column, function, p, a }
}

pub const PROTOCOL_LIST: [ProtocolListEntry; 24] = [
    e(2, "AND", "AND:2", 5, &[2, 1, 1]),
    e(2, "XOR", "XOR:2", 5, &[2, 2, 4]),
    e(2, "EQ", "EQ:2", 5, &[1, 1, 2]),
    e(2, "MAJ", "MAJ:2", 5, &[2, 2, 2]),
    e(3, "AND", "AND:3", 11, &[6, 1, 1, 1]),
    e(3, "XOR", "XOR:3", 7, &[6, 3, 3, 3]),
    e(3, "EQ", "EQ:3", 5, &[1, 1, 1, 1]),
    e(3, "MAJ", "MAJ:3", 7, &[3, 3, 3, 2]),
    e(4, "AND", "AND:4", 13, &[5, 1, 1, 1, 1]),
    e(4, "XOR", "XOR:4", 17, &[12, 1, 1, 1, 7]),
    e(4, "EQ", "EQ:4", 11, &[5, 1, 1, 1, 1]),
    e(4, "MAJ", "SMAJ:4", 11, &[6, 2, 2, 2, 2]),
    e(5, "AND", "AND:5", 41, &[11, 1, 1, 1, 1, 1]),
    e(5, "XOR", "XOR:5", 19, &[14, 2, 2, 2, 2, 2]),
    e(5, "EQ", "EQ:5", 13, &[4, 1, 1, 1, 1, 1]),
    e(5, "MAJ", "MAJ:5", 11, &[6, 2, 2, 2, 2, 2]),
    e(6, "AND", "AND:6", 53, &[18, 1, 1, 1, 1, 1, 1]),
    e(6, "XOR", "XOR:6", 41, &[15, 1, 1, 1, 1, 1, 6]),
    e(6, "EQ", "EQ:6", 41, &[10, 1, 1, 1, 1, 1, 1]),
    e(6, "MAJ", "SMAJ:6", 31, &[21, 3, 3, 3, 3, 3, 3]),
    e(7, "AND", "AND:7", 83, &[52, 1, 1, 1, 1, 1, 1, 1]),
    e(7, "XOR", "XOR:7", 79, &[35, 1, 1, 1, 1, 1, 1, 1]),
    e(7, "EQ", "EQ:7", 53, &[17, 1, 1, 1, 1, 1, 1, 1]),
    e(7, "MAJ", "MAJ:7", 31, &[21, 3, 3, 3, 3, 3, 3, 2]),
];
