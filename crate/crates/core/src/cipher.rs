//! The three wPRF-based leakage-resilient stream ciphers.
//!
//! Every round evaluates `F` once and splits its `k + n` output bits into the
//! next key (leading `k` bits) and an `n`-bit public value (trailing bits):
//!
//! * EC09 keeps two keys and alternates between them. Round `i` (0-based)
//!   consumes `K_i` and `x_i` and produces `(K_{i+2} ∥ x_{i+1})`; `x_{i+1}` is
//!   the keystream block and the next round's input.
//! * CSS10 keeps one key and feeds fresh public values: `(K_{i+1} ∥ x_i) =
//!   F(K_i, p_i)`.
//! * CTRSA13 is CSS10 with `p_i = G(s, i)` from a PRF `G` in counter mode.
//!
//! Leakage functions only ever see the round's [`TouchedState`], which holds
//! the key read and the key written that round. The idle EC09 key is not in
//! it, and a declarative leakage that names it is rejected before the round
//! runs.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::wprf::{SharedPrf, WeakPrf};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CipherError {
    #[error("wPRF widths do not fit the cipher: {0}")]
    OutputWidthMismatch(String),
    #[error("public sequence exhausted after {0} rounds")]
    PublicSeqExhausted(usize),
    #[error("round {round}: illegal leakage function: {reason}")]
    IllegalLeakage { round: usize, reason: String },
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CipherKind {
    Ec09,
    Css10,
    Ctrsa13,
}

impl fmt::Display for CipherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CipherKind::Ec09 => "ec09",
            CipherKind::Css10 => "css10",
            CipherKind::Ctrsa13 => "ctrsa13",
        })
    }
}

/// The part of the secret state a round reads or overwrites, plus the public
/// value it consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TouchedState {
    /// 0-based round index.
    pub round: usize,
    /// Key register consumed this round (always 0 for single-key ciphers).
    pub slot: usize,
    pub read_key: BitString,
    pub written_key: BitString,
    pub public_input: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutput {
    pub block: BitString,
    pub touched: TouchedState,
}

fn check_prf(f: &dyn WeakPrf, key_bits: usize, block_bits: usize) -> Result<(), CipherError> {
    if f.key_bits() != key_bits || f.input_bits() != block_bits || f.output_bits() != key_bits + block_bits {
        return Err(CipherError::OutputWidthMismatch(format!(
            "need F: {{0,1}}^{key_bits} x {{0,1}}^{block_bits} -> {{0,1}}^{}, got ({}, {}, {})",
            key_bits + block_bits,
            f.key_bits(),
            f.input_bits(),
            f.output_bits()
        )));
    }
    Ok(())
}

/// Alternating two-key state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ec09State {
    keys: [BitString; 2],
    x: BitString,
    round: usize,
}

impl Ec09State {
    /// `x0` is public.
    pub fn new(k0: BitString, k1: BitString, x0: BitString) -> Result<Self, CipherError> {
        if k0.len() != k1.len() {
            return Err(CipherError::OutputWidthMismatch("K0 and K1 differ in width".into()));
        }
        Ok(Self { keys: [k0, k1], x: x0, round: 0 })
    }

    pub fn key_bits(&self) -> usize {
        self.keys[0].len()
    }

    pub fn block_bits(&self) -> usize {
        self.x.len()
    }

    pub fn keys(&self) -> &[BitString; 2] {
        &self.keys
    }

    pub fn public_value(&self) -> &BitString {
        &self.x
    }

    pub fn round(&mut self, f: &dyn WeakPrf) -> Result<RoundOutput, CipherError> {
        check_prf(f, self.key_bits(), self.block_bits())?;
        let slot = self.round % 2;
        let (next_key, block) = f.evaluate(&self.keys[slot], &self.x).split_at(self.key_bits());
        let read_key = std::mem::replace(&mut self.keys[slot], next_key.clone());
        let public_input = std::mem::replace(&mut self.x, block.clone());
        let touched = TouchedState { round: self.round, slot, read_key, written_key: next_key, public_input };
        self.round += 1;
        Ok(RoundOutput { block, touched })
    }
}

/// Where CSS10 gets its per-round public values.
#[derive(Debug, Clone)]
pub enum PublicSeq {
    /// Caller-supplied fresh values, one per round.
    Provided { values: Vec<BitString>, next: usize },
    /// Fresh values from a seeded RNG.
    Seeded { rng: Box<ChaCha8Rng>, bits: usize },
    /// Two public values reused alternately. Its security argument is known
    /// to be wrong; for experiments only.
    AlternatingUnsafe { values: [BitString; 2], next: usize },
}

impl PublicSeq {
    pub fn provided(values: Vec<BitString>) -> Self {
        PublicSeq::Provided { values, next: 0 }
    }

    pub fn seeded(seed: u64, bits: usize) -> Self {
        PublicSeq::Seeded { rng: Box::new(ChaCha8Rng::seed_from_u64(seed)), bits }
    }

    pub fn alternating_unsafe(p0: BitString, p1: BitString) -> Self {
        PublicSeq::AlternatingUnsafe { values: [p0, p1], next: 0 }
    }

    fn next_value(&mut self, round: usize) -> Result<BitString, CipherError> {
        match self {
            PublicSeq::Provided { values, next } => {
                let v = values.get(*next).cloned().ok_or(CipherError::PublicSeqExhausted(round))?;
                *next += 1;
                Ok(v)
            }
            PublicSeq::Seeded { rng, bits } => Ok(BitString::random(*bits, rng.as_mut())),
            PublicSeq::AlternatingUnsafe { values, next } => {
                let v = values[*next % 2].clone();
                *next += 1;
                Ok(v)
            }
        }
    }
}

/// Single key refreshed with fresh public values.
#[derive(Debug, Clone)]
pub struct Css10State {
    key: BitString,
    round: usize,
    public: PublicSeq,
}

impl Css10State {
    pub fn new(key: BitString, public: PublicSeq) -> Self {
        Self { key, round: 0, public }
    }

    pub fn key(&self) -> &BitString {
        &self.key
    }

    pub fn round(&mut self, f: &dyn WeakPrf) -> Result<RoundOutput, CipherError> {
        check_prf(f, self.key.len(), f.input_bits())?;
        let p = self.public.next_value(self.round)?;
        if p.len() != f.input_bits() {
            return Err(CipherError::OutputWidthMismatch(format!(
                "public value has {} bits, F takes {}",
                p.len(),
                f.input_bits()
            )));
        }
        Ok(single_key_round(&mut self.key, &mut self.round, p, f))
    }
}

fn single_key_round(key: &mut BitString, round: &mut usize, p: BitString, f: &dyn WeakPrf) -> RoundOutput {
    let (next_key, block) = f.evaluate(key, &p).split_at(key.len());
    let read_key = std::mem::replace(key, next_key.clone());
    let touched = TouchedState { round: *round, slot: 0, read_key, written_key: next_key, public_input: p };
    *round += 1;
    RoundOutput { block, touched }
}

/// Single key with public values `p_i = G(s, i)`.
#[derive(Debug, Clone)]
pub struct Ctrsa13State {
    key: BitString,
    seed: BitString,
    round: usize,
    g: SharedPrf,
}

impl Ctrsa13State {
    /// `g` is keyed by the public seed and maps the round counter, encoded
    /// big-endian on `g.input_bits()` bits, to a public value.
    pub fn new(key: BitString, seed: BitString, g: SharedPrf) -> Result<Self, CipherError> {
        if seed.len() != g.key_bits() {
            return Err(CipherError::OutputWidthMismatch(format!(
                "seed has {} bits, G takes {}",
                seed.len(),
                g.key_bits()
            )));
        }
        Ok(Self { key, seed, round: 0, g })
    }

    pub fn key(&self) -> &BitString {
        &self.key
    }

    /// `G(s, i)`.
    pub fn public_value(&self, i: usize) -> BitString {
        let counter_bits = self.g.input_bits();
        let counter = if counter_bits >= 64 {
            BitString::from_u64(i as u64, 64).left_pad(counter_bits)
        } else {
            BitString::from_u64(i as u64 & ((1u64 << counter_bits) - 1), counter_bits)
        };
        self.g.evaluate(&self.seed, &counter)
    }

    pub fn round(&mut self, f: &dyn WeakPrf) -> Result<RoundOutput, CipherError> {
        check_prf(f, self.key.len(), f.input_bits())?;
        if self.g.output_bits() != f.input_bits() {
            return Err(CipherError::OutputWidthMismatch(format!(
                "G outputs {} bits, F takes {}",
                self.g.output_bits(),
                f.input_bits()
            )));
        }
        let p = self.public_value(self.round);
        Ok(single_key_round(&mut self.key, &mut self.round, p, f))
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum CipherState {
    Ec09(Ec09State),
    Css10(Css10State),
    Ctrsa13(Ctrsa13State),
}

impl CipherState {
    pub fn kind(&self) -> CipherKind {
        match self {
            CipherState::Ec09(_) => CipherKind::Ec09,
            CipherState::Css10(_) => CipherKind::Css10,
            CipherState::Ctrsa13(_) => CipherKind::Ctrsa13,
        }
    }

    pub fn key_bits(&self) -> usize {
        match self {
            CipherState::Ec09(s) => s.key_bits(),
            CipherState::Css10(s) => s.key.len(),
            CipherState::Ctrsa13(s) => s.key.len(),
        }
    }

    /// Rounds completed so far.
    pub fn rounds_done(&self) -> usize {
        match self {
            CipherState::Ec09(s) => s.round,
            CipherState::Css10(s) => s.round,
            CipherState::Ctrsa13(s) => s.round,
        }
    }

    /// Key register the next round will consume.
    pub fn next_slot(&self) -> usize {
        match self {
            CipherState::Ec09(s) => s.round % 2,
            _ => 0,
        }
    }

    pub fn step(&mut self, f: &dyn WeakPrf) -> Result<RoundOutput, CipherError> {
        match self {
            CipherState::Ec09(s) => s.round(f),
            CipherState::Css10(s) => s.round(f),
            CipherState::Ctrsa13(s) => s.round(f),
        }
    }
}

pub type CustomLeakage = Arc<dyn Fn(&TouchedState) -> BitString + Send + Sync>;

/// A λ-bit function of the round's touched state.
#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LeakageFn {
    /// λ = 0.
    Nothing,
    /// The consumed key verbatim (λ = k).
    ConsumedKey,
    /// Leading `bits` bits of the consumed key.
    KeyPrefix { bits: usize },
    /// Selected bit positions of the consumed key.
    KeyBits { positions: Vec<usize> },
    /// Popcount of the consumed key on `ceil(log₂(k+1))` bits.
    HammingWeight,
    /// Parity of the consumed key's popcount (λ = 1).
    HammingWeightLsb,
    /// Leading `bits` bits of key register `slot`. Legal only in rounds that
    /// consume that register.
    StoredKey { slot: usize, bits: usize },
    /// Arbitrary function with a declared output width.
    #[serde(skip)]
    Custom { lambda: usize, f: CustomLeakage },
}

impl fmt::Debug for LeakageFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeakageFn::Nothing => f.write_str("Nothing"),
            LeakageFn::ConsumedKey => f.write_str("ConsumedKey"),
            LeakageFn::KeyPrefix { bits } => write!(f, "KeyPrefix({bits})"),
            LeakageFn::KeyBits { positions } => write!(f, "KeyBits({positions:?})"),
            LeakageFn::HammingWeight => f.write_str("HammingWeight"),
            LeakageFn::HammingWeightLsb => f.write_str("HammingWeightLsb"),
            LeakageFn::StoredKey { slot, bits } => write!(f, "StoredKey(slot {slot}, {bits})"),
            LeakageFn::Custom { lambda, .. } => write!(f, "Custom(λ = {lambda})"),
        }
    }
}

fn popcount_width(k: usize) -> usize {
    (usize::BITS - k.leading_zeros()) as usize
}

impl LeakageFn {
    /// Output width for a `k`-bit key.
    pub fn output_bits(&self, k: usize) -> usize {
        match self {
            LeakageFn::Nothing => 0,
            LeakageFn::ConsumedKey => k,
            LeakageFn::KeyPrefix { bits } | LeakageFn::StoredKey { bits, .. } => *bits,
            LeakageFn::KeyBits { positions } => positions.len(),
            LeakageFn::HammingWeight => popcount_width(k),
            LeakageFn::HammingWeightLsb => 1,
            LeakageFn::Custom { lambda, .. } => *lambda,
        }
    }

    /// Check the function against the register the round will touch.
    pub fn validate(&self, round: usize, slot: usize, k: usize, lambda: usize) -> Result<(), CipherError> {
        let illegal = |reason: String| Err(CipherError::IllegalLeakage { round, reason });
        match self {
            LeakageFn::KeyPrefix { bits } if *bits > k => {
                return illegal(format!("prefix of {bits} bits from a {k}-bit key"));
            }
            LeakageFn::KeyBits { positions } => {
                if let Some(p) = positions.iter().find(|&&p| p >= k) {
                    return illegal(format!("bit {p} of a {k}-bit key"));
                }
            }
            LeakageFn::StoredKey { slot: wanted, bits } => {
                if *wanted != slot {
                    return illegal(format!("reads key register {wanted}, but only register {slot} is touched"));
                }
                if *bits > k {
                    return illegal(format!("prefix of {bits} bits from a {k}-bit key"));
                }
            }
            _ => {}
        }
        let width = self.output_bits(k);
        if width != lambda {
            return illegal(format!("outputs {width} bits, budget is λ = {lambda}"));
        }
        Ok(())
    }

    pub fn apply(&self, touched: &TouchedState) -> BitString {
        let key = &touched.read_key;
        match self {
            LeakageFn::Nothing => BitString::empty(),
            LeakageFn::ConsumedKey => key.clone(),
            LeakageFn::KeyPrefix { bits } | LeakageFn::StoredKey { bits, .. } => key.prefix(*bits),
            LeakageFn::KeyBits { positions } => {
                let mut out = BitString::zeros(positions.len());
                for (i, &p) in positions.iter().enumerate() {
                    out.set(i, key.get(p));
                }
                out
            }
            LeakageFn::HammingWeight => BitString::from_u64(u64::from(key.count_ones()), popcount_width(key.len())),
            LeakageFn::HammingWeightLsb => BitString::from_u64(u64::from(key.count_ones() & 1), 1),
            LeakageFn::Custom { f, .. } => f(touched),
        }
    }
}

/// Picks the leakage function for each round, possibly adaptively.
pub trait LeakageChooser {
    /// `round` is 0-based; `trace` holds every earlier round.
    fn choose(&mut self, round: usize, trace: &KeystreamTrace) -> LeakageFn;
}

/// A non-adaptive plan: the same function every round, or one per round.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakagePlan {
    Fixed(LeakageFn),
    PerRound(Vec<LeakageFn>),
}

impl LeakagePlan {
    pub fn none() -> Self {
        LeakagePlan::Fixed(LeakageFn::Nothing)
    }
}

impl LeakageChooser for LeakagePlan {
    fn choose(&mut self, round: usize, _: &KeystreamTrace) -> LeakageFn {
        match self {
            LeakagePlan::Fixed(f) => f.clone(),
            LeakagePlan::PerRound(fs) => fs.get(round).cloned().unwrap_or(LeakageFn::Nothing),
        }
    }
}

impl<F: FnMut(usize, &KeystreamTrace) -> LeakageFn> LeakageChooser for F {
    fn choose(&mut self, round: usize, trace: &KeystreamTrace) -> LeakageFn {
        self(round, trace)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub cipher: CipherKind,
    pub key_bits: usize,
    pub block_bits: usize,
    pub lambda: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeystreamTrace {
    pub header: TraceHeader,
    pub blocks: Vec<BitString>,
    pub leakages: Vec<BitString>,
    pub touched: Vec<TouchedState>,
}

impl KeystreamTrace {
    pub fn new(header: TraceHeader) -> Self {
        Self { header, blocks: Vec::new(), leakages: Vec::new(), touched: Vec::new() }
    }

    pub fn rounds(&self) -> usize {
        self.blocks.len()
    }
}

/// Run `rounds` rounds, validating each round's leakage function before the
/// round executes.
pub fn generate_keystream(
    state: &mut CipherState,
    f: &dyn WeakPrf,
    rounds: usize,
    leak: &mut dyn LeakageChooser,
    lambda: usize,
) -> Result<KeystreamTrace, CipherError> {
    let k = state.key_bits();
    let mut trace = KeystreamTrace::new(TraceHeader {
        cipher: state.kind(),
        key_bits: k,
        block_bits: f.output_bits().saturating_sub(k),
        lambda,
    });
    for _ in 0..rounds {
        let round = state.rounds_done();
        let leakage_fn = leak.choose(round, &trace);
        leakage_fn.validate(round, state.next_slot(), k, lambda)?;
        let out = state.step(f)?;
        let leaked = leakage_fn.apply(&out.touched);
        if leaked.len() != lambda {
            return Err(CipherError::IllegalLeakage {
                round,
                reason: format!("produced {} bits, budget is λ = {lambda}", leaked.len()),
            });
        }
        trace.blocks.push(out.block);
        trace.leakages.push(leaked);
        trace.touched.push(out.touched);
    }
    Ok(trace)
}

#[derive(Serialize, Deserialize)]
struct TouchedRecord {
    round: usize,
    slot: usize,
    read_key: String,
    written_key: String,
    public_input: String,
}

#[derive(Serialize, Deserialize)]
struct TraceFile {
    header: TraceHeader,
    blocks: Vec<String>,
    leakages: Vec<String>,
    touched: Vec<TouchedRecord>,
}

impl Serialize for KeystreamTrace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let hex = |v: &[BitString]| v.iter().map(BitString::to_hex).collect();
        TraceFile {
            header: self.header,
            blocks: hex(&self.blocks),
            leakages: hex(&self.leakages),
            touched: self
                .touched
                .iter()
                .map(|t| TouchedRecord {
                    round: t.round,
                    slot: t.slot,
                    read_key: t.read_key.to_hex(),
                    written_key: t.written_key.to_hex(),
                    public_input: t.public_input.to_hex(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KeystreamTrace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let file = TraceFile::deserialize(d)?;
        let h = file.header;
        let parse = |s: &str, bits: usize| BitString::from_hex(s, bits).map_err(D::Error::custom);
        let blocks = file.blocks.iter().map(|b| parse(b, h.block_bits)).collect::<Result<Vec<_>, _>>()?;
        let leakages = file.leakages.iter().map(|b| parse(b, h.lambda)).collect::<Result<Vec<_>, _>>()?;
        let touched = file
            .touched
            .iter()
            .map(|t| {
                Ok(TouchedState {
                    round: t.round,
                    slot: t.slot,
                    read_key: parse(&t.read_key, h.key_bits)?,
                    written_key: parse(&t.written_key, h.key_bits)?,
                    public_input: parse(&t.public_input, h.block_bits)?,
                })
            })
            .collect::<Result<Vec<_>, D::Error>>()?;
        if blocks.len() != leakages.len() || blocks.len() != touched.len() {
            return Err(D::Error::custom("blocks, leakages and touched differ in length"));
        }
        Ok(KeystreamTrace { header: h, blocks, leakages, touched })
    }
}
