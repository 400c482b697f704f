//! Computational companion to the counting argument showing that the abc
//! conjecture holds for almost all coprime triples: radical sieves, radical
//! classes, explicit bound constants, and exhaustive enumeration of the
//! exceptional triples with `rad(abc) < c^(1-ε)`.

pub mod arith;
pub mod bounds;
pub mod error;
pub mod hp;
pub mod ratio;
pub mod report;
pub mod search;
pub mod sieve;

pub use arith::{
    below_threshold, divisor_count, factorize, is_coprime, radical, radical_of_coprime_product,
    BoundParams, Factorization, Threshold,
};
pub use error::{Error, Result};
pub use ratio::Ratio;
pub use sieve::{
    count_small_radical, enumerate_radical_class, squarefree_list, RadicalClass, SieveConfig, SieveTables,
};
