//! Quadratic-residue PSM protocols over small primes.

pub mod compile;
pub mod dre;
pub mod error;
pub mod funcs;
pub mod lqr;
pub mod numtheory;
pub mod paley;
pub mod peralta;
pub mod poly;
pub mod psm;
pub mod tables;

pub use compile::QrPsmFromDre;
pub use dre::Dre;
pub use error::{Error, Result};
pub use funcs::{FunctionSpec, SignConvention, TruthTable};
pub use lqr::{LinearEmbedding, LqrPrimeRecord, LqrProtocol};
pub use numtheory::{Modulus, QrSequence, ResidueSet};
pub use paley::{PaleyStructure, StarPropertyReport};
pub use peralta::PeraltaRecord;
pub use poly::Polynomial;
pub use psm::{PsmProtocol, Transcript};
