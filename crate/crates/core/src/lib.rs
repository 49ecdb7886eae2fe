//! Optimal approximate broadcasting of quantum states and correlations.
//!
//! The crate builds the semidefinite programs that give the optimal
//! fidelity of broadcasting a bipartite state on one side, or a finite
//! ensemble of states, solves them with a built-in interior-point method,
//! and checks the results against closed forms and dual certificates.
//! It also evaluates discord-type correlation losses for two-qubit states.
//!
//! Modules:
//! - [`qmat`]: matrices with tensor structure, partial operations, entropies, fidelity
//! - [`sdp`]: Hermitian SDPs and their primal-dual solver
//! - [`broadcast`]: Choi matrices, broadcasting SDPs and named channels
//! - [`analytic`]: closed-form reference values
//! - [`discord`]: measurement channels, discord search, correlation loss

pub mod analytic;
pub mod broadcast;
pub mod discord;
pub mod qmat;
pub mod sdp;
