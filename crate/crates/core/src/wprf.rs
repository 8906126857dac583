//! Weak pseudorandom functions `F: {0,1}^k × {0,1}^n → {0,1}^m` and the
//! random-input distinguishing game.
//!
//! The game is a falsification tool: it estimates a distinguisher's advantage
//! by Monte Carlo and catches broken instantiations or broken game plumbing.
//! It proves nothing about real primitives.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha512};
use thiserror::Error;

use crate::bits::BitString;
use crate::rng::trial_rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WprfError {
    #[error("unsupported width: {0}")]
    UnsupportedWidth(String),
    #[error("toy sizes too large: {0}")]
    SizeTooLarge(String),
}

/// A deterministic keyed function with fixed widths.
pub trait WeakPrf: Send + Sync + fmt::Debug {
    fn key_bits(&self) -> usize;
    fn input_bits(&self) -> usize;
    fn output_bits(&self) -> usize;
    /// Panics if `key` or `input` has the wrong width.
    fn evaluate(&self, key: &BitString, input: &BitString) -> BitString;
}

pub type SharedPrf = Arc<dyn WeakPrf>;

fn check_widths(f: &dyn WeakPrf, key: &BitString, input: &BitString) {
    assert_eq!(key.len(), f.key_bits(), "key width");
    assert_eq!(input.len(), f.input_bits(), "input width");
}

fn nonzero(name: &str, v: usize) -> Result<(), WprfError> {
    if v == 0 {
        return Err(WprfError::UnsupportedWidth(format!("{name} must be >= 1")));
    }
    Ok(())
}

/// `F(K, x)` = leading `m` bits of `SHA-512(K ∥ x)`, with `K` and `x` in their
/// left-aligned byte encodings (`ceil(k/8)` and `ceil(n/8)` bytes).
#[derive(Debug, Clone)]
pub struct HashWprf {
    key_bits: usize,
    input_bits: usize,
    output_bits: usize,
}

pub const SHA512_DIGEST_BITS: usize = 512;

pub fn make_hash_wprf(k: usize, n: usize, m: usize) -> Result<HashWprf, WprfError> {
    nonzero("k", k)?;
    nonzero("n", n)?;
    nonzero("m", m)?;
    if m > SHA512_DIGEST_BITS {
        return Err(WprfError::UnsupportedWidth(format!(
            "output {m} bits exceeds the {SHA512_DIGEST_BITS}-bit digest"
        )));
    }
    Ok(HashWprf { key_bits: k, input_bits: n, output_bits: m })
}

impl WeakPrf for HashWprf {
    fn key_bits(&self) -> usize {
        self.key_bits
    }
    fn input_bits(&self) -> usize {
        self.input_bits
    }
    fn output_bits(&self) -> usize {
        self.output_bits
    }
    fn evaluate(&self, key: &BitString, input: &BitString) -> BitString {
        check_widths(self, key, input);
        let digest = Sha512::new().chain_update(key.as_bytes()).chain_update(input.as_bytes()).finalize();
        BitString::from_bytes(&digest, self.output_bits)
    }
}

/// AES in counter mode: `F(K, x)` = leading `m` bits of
/// `E_K(x̂ ∥ 0) ∥ E_K(x̂ ∥ 1) ∥ …`, where `x̂` is `x` left-padded with zeros to
/// 96 bits and the counter is a 32-bit big-endian integer.
#[derive(Clone)]
pub struct BlockCipherWprf {
    key_bits: usize,
    input_bits: usize,
    output_bits: usize,
}

impl fmt::Debug for BlockCipherWprf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockCipherWprf(AES-{}, n={}, m={})", self.key_bits, self.input_bits, self.output_bits)
    }
}

pub const AES_BLOCK_BITS: usize = 128;
pub const COUNTER_BITS: usize = 32;

pub fn make_blockcipher_wprf(k: usize, n: usize, m: usize) -> Result<BlockCipherWprf, WprfError> {
    if ![128, 192, 256].contains(&k) {
        return Err(WprfError::UnsupportedWidth(format!("AES keys are 128, 192 or 256 bits, got {k}")));
    }
    nonzero("n", n)?;
    nonzero("m", m)?;
    if n > AES_BLOCK_BITS - COUNTER_BITS {
        return Err(WprfError::UnsupportedWidth(format!(
            "input {n} bits does not fit beside a {COUNTER_BITS}-bit counter"
        )));
    }
    if m.div_ceil(AES_BLOCK_BITS) as u64 > u64::from(u32::MAX) {
        return Err(WprfError::UnsupportedWidth(format!("output {m} bits overflows the counter")));
    }
    Ok(BlockCipherWprf { key_bits: k, input_bits: n, output_bits: m })
}

impl BlockCipherWprf {
    fn encrypt_blocks(&self, key: &[u8], blocks: &mut [GenericArray<u8, aes::cipher::consts::U16>]) {
        match self.key_bits {
            128 => aes::Aes128::new_from_slice(key).expect("key length").encrypt_blocks(blocks),
            192 => aes::Aes192::new_from_slice(key).expect("key length").encrypt_blocks(blocks),
            _ => aes::Aes256::new_from_slice(key).expect("key length").encrypt_blocks(blocks),
        }
    }
}

impl WeakPrf for BlockCipherWprf {
    fn key_bits(&self) -> usize {
        self.key_bits
    }
    fn input_bits(&self) -> usize {
        self.input_bits
    }
    fn output_bits(&self) -> usize {
        self.output_bits
    }
    fn evaluate(&self, key: &BitString, input: &BitString) -> BitString {
        check_widths(self, key, input);
        let prefix = input.left_pad(AES_BLOCK_BITS - COUNTER_BITS);
        let mut blocks: Vec<_> = (0..self.output_bits.div_ceil(AES_BLOCK_BITS) as u32)
            .map(|ctr| {
                let block = prefix.concat(&BitString::from_u64(u64::from(ctr), COUNTER_BITS));
                GenericArray::clone_from_slice(block.as_bytes())
            })
            .collect();
        self.encrypt_blocks(key.as_bytes(), &mut blocks);
        let stream: Vec<u8> = blocks.iter().flat_map(|b| b.iter().copied()).collect();
        BitString::from_bytes(&stream, self.output_bits)
    }
}

/// Desk-scale keyed function family, small enough to enumerate every key.
#[derive(Debug, Clone)]
pub struct ToyWprf {
    key_bits: usize,
    input_bits: usize,
    output_bits: usize,
    seed: u64,
}

pub const TOY_MAX_KEY_BITS: usize = 16;
pub const TOY_MAX_INPUT_BITS: usize = 16;
pub const TOY_MAX_OUTPUT_BITS: usize = 32;

pub fn make_toy_wprf(k: usize, n: usize, m: usize, seed: u64) -> Result<ToyWprf, WprfError> {
    nonzero("k", k)?;
    nonzero("n", n)?;
    nonzero("m", m)?;
    if k > TOY_MAX_KEY_BITS || n > TOY_MAX_INPUT_BITS || m > TOY_MAX_OUTPUT_BITS {
        return Err(WprfError::SizeTooLarge(format!(
            "(k, n, m) = ({k}, {n}, {m}) exceeds ({TOY_MAX_KEY_BITS}, {TOY_MAX_INPUT_BITS}, {TOY_MAX_OUTPUT_BITS})"
        )));
    }
    Ok(ToyWprf { key_bits: k, input_bits: n, output_bits: m, seed })
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl ToyWprf {
    /// The table entry for `(key, input)` as an integer.
    pub fn lookup(&self, key: u64, input: u64) -> u64 {
        let cell = (key << TOY_MAX_INPUT_BITS) | input;
        let h = mix64(mix64(self.seed ^ 0x9e37_79b9_7f4a_7c15).wrapping_add(cell));
        h >> (64 - self.output_bits)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl WeakPrf for ToyWprf {
    fn key_bits(&self) -> usize {
        self.key_bits
    }
    fn input_bits(&self) -> usize {
        self.input_bits
    }
    fn output_bits(&self) -> usize {
        self.output_bits
    }
    fn evaluate(&self, key: &BitString, input: &BitString) -> BitString {
        check_widths(self, key, input);
        BitString::from_u64(self.lookup(key.to_u64(), input.to_u64()), self.output_bits)
    }
}

/// Deliberately broken "wPRF" `F(K, x) = x`, for validating the game.
#[derive(Debug, Clone)]
pub struct IdentityPrf {
    key_bits: usize,
    width: usize,
}

pub fn make_identity_prf(k: usize, n: usize) -> Result<IdentityPrf, WprfError> {
    nonzero("k", k)?;
    nonzero("n", n)?;
    Ok(IdentityPrf { key_bits: k, width: n })
}

impl WeakPrf for IdentityPrf {
    fn key_bits(&self) -> usize {
        self.key_bits
    }
    fn input_bits(&self) -> usize {
        self.width
    }
    fn output_bits(&self) -> usize {
        self.width
    }
    fn evaluate(&self, key: &BitString, input: &BitString) -> BitString {
        check_widths(self, key, input);
        input.clone()
    }
}

/// A test over the full transcript `((Xᵢ), (Yᵢ))`.
pub trait Distinguisher: Send + Sync {
    fn distinguish(&self, inputs: &[BitString], outputs: &[BitString]) -> bool;
}

/// Always answers the same bit.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDistinguisher(pub bool);

impl Distinguisher for ConstantDistinguisher {
    fn distinguish(&self, _: &[BitString], _: &[BitString]) -> bool {
        self.0
    }
}

/// Answers 1 iff every output replays its input, which catches `F(K, x) = x`.
#[derive(Debug, Clone, Copy)]
pub struct ReplayDistinguisher;

impl Distinguisher for ReplayDistinguisher {
    fn distinguish(&self, inputs: &[BitString], outputs: &[BitString]) -> bool {
        inputs.iter().zip(outputs).all(|(x, y)| x == y)
    }
}

/// Answers 1 iff every output equals `F(k₀, x)` for a hardwired key `k₀`.
#[derive(Debug, Clone)]
pub struct KeyGuessDistinguisher {
    pub prf: SharedPrf,
    pub key: BitString,
}

impl Distinguisher for KeyGuessDistinguisher {
    fn distinguish(&self, inputs: &[BitString], outputs: &[BitString]) -> bool {
        inputs.iter().zip(outputs).all(|(x, y)| &self.prf.evaluate(&self.key, x) == y)
    }
}

/// Monobit frequency test on the concatenated outputs: answers 1 iff the
/// fraction of ones deviates from 1/2 by more than `threshold`.
#[derive(Debug, Clone, Copy)]
pub struct MonobitDistinguisher {
    pub threshold: f64,
}

impl Distinguisher for MonobitDistinguisher {
    fn distinguish(&self, _: &[BitString], outputs: &[BitString]) -> bool {
        let total: usize = outputs.iter().map(BitString::len).sum();
        if total == 0 {
            return false;
        }
        let ones: u32 = outputs.iter().map(BitString::count_ones).sum();
        (f64::from(ones) / total as f64 - 0.5).abs() > self.threshold
    }
}

/// 99%-confidence Chernoff–Hoeffding half-width for `trials` samples.
pub fn hoeffding_halfwidth(trials: u64) -> f64 {
    ((2.0f64 / 0.01).ln() / (2.0 * trials as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub advantage_estimate: f64,
    pub trials: u64,
    pub confidence_halfwidth: f64,
}

impl GameResult {
    /// `|hits_a − hits_b| / trials` for a paired two-world experiment.
    pub fn from_counts(hits_real: u64, hits_ideal: u64, trials: u64) -> Self {
        Self {
            advantage_estimate: hits_real.abs_diff(hits_ideal) as f64 / trials as f64,
            trials,
            confidence_halfwidth: hoeffding_halfwidth(trials),
        }
    }

    /// Hybrid-argument bound on distinguishing the whole `q`-block stream.
    pub fn stream_advantage_bound(&self, q: usize) -> f64 {
        (self.advantage_estimate * q as f64).min(1.0)
    }
}

/// Random-world outputs for `inputs`: fresh uniform values, repeated
/// whenever an input repeats.
pub fn random_world_outputs<R: Rng + ?Sized>(inputs: &[BitString], m: usize, rng: &mut R) -> Vec<BitString> {
    let mut seen: HashMap<&BitString, BitString> = HashMap::with_capacity(inputs.len());
    inputs.iter().map(|x| seen.entry(x).or_insert_with(|| BitString::random(m, rng)).clone()).collect()
}

/// Estimate `|Pr[D(X, F(K, X)) = 1] − Pr[D(X, R) = 1]|` over `trials`
/// independent trials. Both worlds are run in every trial from the trial's
/// own RNG stream, so the estimate does not depend on thread scheduling.
pub fn wprf_game(f: &dyn WeakPrf, d: &dyn Distinguisher, q: usize, trials: u64, seed: u64) -> GameResult {
    assert!(q >= 1 && trials >= 1, "need q >= 1 and trials >= 1");
    let (real, ideal) = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let key = BitString::random(f.key_bits(), &mut rng);
            let inputs: Vec<_> = (0..q).map(|_| BitString::random(f.input_bits(), &mut rng)).collect();
            let outputs: Vec<_> = inputs.iter().map(|x| f.evaluate(&key, x)).collect();
            let random = random_world_outputs(&inputs, f.output_bits(), &mut rng);
            (u64::from(d.distinguish(&inputs, &outputs)), u64::from(d.distinguish(&inputs, &random)))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    GameResult::from_counts(real, ideal, trials)
}
