//! Laboratory for the discrete Cesaro operator on co-echelon spaces `k0(V)`.
//!
//! Weight families are given in log-space, classified against asymptotic
//! criteria over a finite budget, and paired with exact finite sections of the
//! operator, its resolvent and its eigenvectors.

pub mod weightlang;
pub mod weights;
pub mod criteria;
pub mod sections;
pub mod spectra;
pub mod dynamics;
pub mod cli;
