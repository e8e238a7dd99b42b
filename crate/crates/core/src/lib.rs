//! LZ78 factorization of texts given as straight-line programs.

pub mod access;
pub mod corpus;
pub mod engine;
pub mod format;
pub mod level_ancestor;
pub mod lz77;
pub mod lz78;
pub mod report;
pub mod slp;
pub mod suffix_tree;
pub mod window;

pub use access::{AccessError, AccessIndex, StabResult};
pub use engine::{factorize, Backend, EngineConfig, EngineError, FactorizationReport, Mode};
pub use lz77::{Lz77Factor, Lz77Factorization};
pub use lz78::{Lz78Factorization, Lz78Pair};
pub use slp::{Rule, SlpError, SlpGrammar, VarId};
