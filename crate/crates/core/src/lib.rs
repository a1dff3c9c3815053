//! Non-Markovian open quantum dynamics from stochastic forward/backward
//! hierarchy trajectories.
//!
//! The bath correlation function is split into a noise-carried real part and
//! a deterministic remainder (the adjusted BCF). The remainder is expanded in
//! a general basis `{phi_k}` closed under differentiation (`phi' = eta phi`),
//! which turns the memory term into a linear, non-Hermitian evolution in a
//! truncated pseudo-Fock space. Averaging `|psi+><psi-|` over correlated noise
//! realizations reconstructs the reduced density matrix.
//!
//! Module map:
//! - [`bath`]: spectral densities and (adjusted) bath correlation functions
//! - [`basis`]: basis sets, their `eta` matrices and expansion coefficients
//! - [`noise`]: correlated `(Z+, Z-)` process pairs
//! - [`models`]: system Hamiltonians and coupling operators
//! - [`hierarchy`]: pseudo-Fock space, effective Hamiltonian, propagation, ensembles
//! - [`oracle`]: exact references (closed-system Rabi, exact diagonalization)

pub mod basis;
pub mod bath;
pub mod error;
pub mod hierarchy;
pub mod models;
pub mod noise;
pub mod oracle;
pub mod quad;

pub use error::{Error, Result};

/// Complex double used for all amplitudes.
pub type C64 = num_complex::Complex64;
