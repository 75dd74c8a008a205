//! Digital quantum simulation toolkit for the quantum β-FPUT chain.
//!
//! Each lattice displacement is represented on a `b`-bit register, the full
//! wavefunction lives in a dense [`LatticeState`], and time evolution uses
//! split-operator Trotter-Suzuki product formulas:
//!
//! - kinetic factors act per site as DFT, momentum phase, inverse DFT;
//! - potential factors are a single diagonal phase in the position basis.
//!
//! On top of the propagator, [`correlator`] extracts mode-resolved
//! displacement correlators `<Q_k(t) Q_k(0)>` from generating functions of
//! the Hermitian cosine/sine quadratures, and [`circuit`] builds a gate-level
//! IR of the same Trotter step for logical resource estimates.
//!
//! Small systems (`N·b <= 14`) can be checked against a dense Hamiltonian
//! oracle ([`model::build_dense_hamiltonian`], [`propagator::DenseOracle`]).
//!
//! # Features
//!
//! - `parallel` (default): data-parallel amplitude kernels on rayon. Without
//!   it every kernel runs sequentially; see [`Execution`].

pub mod circuit;
pub mod correlator;
pub mod encoding;
mod error;
mod exec;
pub mod model;
pub mod propagator;
pub mod quadratures;
pub mod state;
pub mod validation;

pub use encoding::{EncodingKind, GridSpec};
pub use error::{Error, Result};
pub use exec::Execution;
pub use model::ModelParams;
pub use propagator::{Propagator, TrotterOrder, TrotterPlan};
pub use quadratures::{QuadratureKind, QuadratureWeights};
pub use state::LatticeState;

pub use num_complex::Complex64;
