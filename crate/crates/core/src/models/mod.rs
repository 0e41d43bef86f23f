//! Built-in models with exact oracles.

mod chain;
mod toy_hmm;

pub use chain::{ChainStatistic, ConstrainedChain, NamedChainStatistic};
pub use toy_hmm::{enumerate_exact, HmmStatistic, NamedHmmStatistic, ToyHmm, ENUMERATION_BOUND};
