//! Executable concrete-security analysis for wPRF-based leakage-resilient
//! stream ciphers.
//!
//! * [`reduction`]: time-success ratios under algebraic reductions, by closed
//!   form and by an independent numerical program.
//! * [`catalog`]: the published bounds as exact affine formulas in `(k, λ)`.
//! * [`wprf`]: weak PRFs (SHA-512, AES, toy tables) and the random-input game.
//! * [`cipher`]: the three stream-cipher topologies with per-round leakage taps.
//! * [`game`]: the leakage-resilience game and an exact Bayes-optimal oracle.
//! * [`simulator`]: constructive auxiliary-input simulators on finite tables.

pub mod bits;
pub mod catalog;
pub mod cipher;
pub mod game;
pub mod reduction;
pub mod rng;
pub mod simulator;
pub mod wprf;

pub use bits::BitString;
