//! Bi-sided subshifts: sequences given by rules, dictionaries, the subshift
//! metric, Fell shells `M_i` around the limit set, trace sets `ℤ_x(N)` and
//! the Hamiltonians built from a locally constant symbol `h(x, k)`.
//!
//! The shift acts by `τ_k(x)(j) = x(j - k)`, so `τ_l(x)|_[-p, p]` is
//! `x|_[-p-l, p-l]`. Orbit points `τ_k(z)` of the generator are labelled by
//! `k`, and the same labels index kernel sites.

mod model;
mod operator;
mod seq;
mod symbol;

pub use model::{trace_set, ModelCheck, Shell, SubshiftModel};
pub use operator::{
    limit_operator, main_orbit_operator, subshift_operator, symbol_range, validate_symbol,
    AdjointWitness, CovarianceWitness, SymbolRange, SymbolReport,
};
pub use seq::{
    admissibility_probe, dictionary, subshift_metric, Alphabet, Letter, MetricValue, Periodicity,
    ProbeReport, SeqPoint, Word,
};
pub use symbol::{HoppingSymbol, SymbolRow};
