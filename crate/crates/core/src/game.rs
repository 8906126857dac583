//! The leakage-resilience game as a Monte-Carlo experiment at toy scale.
//!
//! A trial samples fresh secrets and public values, runs the cipher for `q`
//! rounds while the adversary picks each round's leakage function, then asks
//! the adversary to judge the last block. The adversary sees
//! `X_1..X_{q-1}`, `Λ_1..Λ_q` (including the challenge round's leakage) and
//! every public value. Each trial presents both the real `X_q` and a uniform
//! block against the same transcript, and the estimate is
//! `|Pr[A(real) = 1] − Pr[A(uniform) = 1]|`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::BitString;
use crate::cipher::{
    generate_keystream, CipherError, CipherKind, CipherState, Css10State, Ctrsa13State, Ec09State, KeystreamTrace,
    LeakageFn, PublicSeq, TouchedState,
};
use crate::rng::{derive_seed, trial_rng};
use crate::wprf::{hoeffding_halfwidth, make_hash_wprf, make_toy_wprf, SharedPrf, WprfError};

/// Largest secret space the enumerating routines will walk.
pub const MAX_SECRET_BITS: usize = 20;

/// Counter width fed to `G` in the CTRSA13 instantiation.
const COUNTER_BITS: usize = 16;

#[derive(Debug, Error)]
pub enum GameError {
    #[error(transparent)]
    Cipher(#[from] CipherError),
    #[error(transparent)]
    Wprf(#[from] WprfError),
    #[error("secret space of 2^{bits} exceeds the enumeration limit 2^{MAX_SECRET_BITS}")]
    SizeTooLarge { bits: usize },
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
}

/// Which wPRF instantiates `F` (and `G` for CTRSA13).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PrfChoice {
    Toy { seed: u64 },
    Hash,
}

impl Default for PrfChoice {
    fn default() -> Self {
        PrfChoice::Toy { seed: 0 }
    }
}

/// Library of concrete adversaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AdversarySpec {
    /// Leaks each consumed key whole and recomputes the challenge block.
    FullKey,
    /// Ignores everything and always answers `guess_real`.
    Constant { guess_real: bool },
    /// Leaks with a fixed function, enumerates the initial secrets consistent
    /// with the view and runs the likelihood-ratio test on the challenge.
    ConsistentKeys { leakage: LeakageFn },
}

fn default_public_samples() -> usize {
    32
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub cipher: CipherKind,
    pub key_bits: usize,
    pub block_bits: usize,
    #[serde(default)]
    pub prf: PrfChoice,
    /// Rounds `q`; the last one is the challenge.
    pub rounds: usize,
    pub lambda: usize,
    pub adversary: AdversarySpec,
    pub trials: u64,
    pub seed: u64,
    /// Public-value draws averaged over by [`bayes_optimal_advantage`] when
    /// the public space is larger than this.
    #[serde(default = "default_public_samples")]
    pub bayes_public_samples: usize,
}

impl GameConfig {
    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    /// Bits of secret state sampled per trial.
    pub fn secret_bits(&self) -> usize {
        match self.cipher {
            CipherKind::Ec09 => 2 * self.key_bits,
            CipherKind::Css10 | CipherKind::Ctrsa13 => self.key_bits,
        }
    }

    /// The leakage function the adversary applies every round.
    pub fn leakage_fn(&self) -> LeakageFn {
        match &self.adversary {
            AdversarySpec::FullKey => LeakageFn::ConsumedKey,
            AdversarySpec::Constant { .. } if self.lambda == 0 => LeakageFn::Nothing,
            AdversarySpec::Constant { .. } => LeakageFn::KeyPrefix { bits: self.lambda },
            AdversarySpec::ConsistentKeys { leakage } => leakage.clone(),
        }
    }
}

/// Everything public about a game: the primitives and the widths.
#[derive(Debug, Clone)]
pub struct GameInstance {
    pub cipher: CipherKind,
    pub key_bits: usize,
    pub block_bits: usize,
    pub f: SharedPrf,
    pub g: Option<SharedPrf>,
}

impl GameInstance {
    pub fn new(cipher: CipherKind, key_bits: usize, block_bits: usize, prf: PrfChoice) -> Result<Self, GameError> {
        let (k, n) = (key_bits, block_bits);
        let (f, g): (SharedPrf, Option<SharedPrf>) = match prf {
            PrfChoice::Toy { seed } => (
                Arc::new(make_toy_wprf(k, n, k + n, seed)?),
                (cipher == CipherKind::Ctrsa13)
                    .then(|| make_toy_wprf(n, COUNTER_BITS, n, derive_seed(seed, "G")))
                    .transpose()?
                    .map(|g| Arc::new(g) as SharedPrf),
            ),
            PrfChoice::Hash => (
                Arc::new(make_hash_wprf(k, n, k + n)?),
                (cipher == CipherKind::Ctrsa13)
                    .then(|| make_hash_wprf(n, 64, n))
                    .transpose()?
                    .map(|g| Arc::new(g) as SharedPrf),
            ),
        };
        Ok(Self { cipher, key_bits, block_bits, f, g })
    }

    pub fn from_config(cfg: &GameConfig) -> Result<Self, GameError> {
        Self::new(cfg.cipher, cfg.key_bits, cfg.block_bits, cfg.prf)
    }

    pub fn secret_bits(&self) -> usize {
        match self.cipher {
            CipherKind::Ec09 => 2 * self.key_bits,
            _ => self.key_bits,
        }
    }

    fn public_bits(&self, rounds: usize) -> usize {
        match self.cipher {
            CipherKind::Ec09 => self.block_bits,
            CipherKind::Css10 => rounds * self.block_bits,
            CipherKind::Ctrsa13 => self.block_bits,
        }
    }

    pub fn sample_secret<R: Rng + ?Sized>(&self, rng: &mut R) -> Secret {
        let keys = match self.cipher {
            CipherKind::Ec09 => vec![BitString::random(self.key_bits, rng), BitString::random(self.key_bits, rng)],
            _ => vec![BitString::random(self.key_bits, rng)],
        };
        Secret { keys }
    }

    /// The `index`-th secret in enumeration order.
    pub fn secret_at(&self, index: u64) -> Secret {
        let k = self.key_bits;
        let mask = (1u64 << k) - 1;
        let keys = match self.cipher {
            CipherKind::Ec09 => vec![BitString::from_u64((index >> k) & mask, k), BitString::from_u64(index & mask, k)],
            _ => vec![BitString::from_u64(index & mask, k)],
        };
        Secret { keys }
    }

    pub fn sample_public<R: Rng + ?Sized>(&self, rounds: usize, rng: &mut R) -> PublicInfo {
        let n = self.block_bits;
        match self.cipher {
            CipherKind::Ec09 => PublicInfo::InitialValue(BitString::random(n, rng)),
            CipherKind::Css10 => PublicInfo::Values((0..rounds).map(|_| BitString::random(n, rng)).collect()),
            CipherKind::Ctrsa13 => PublicInfo::Seed(BitString::random(n, rng)),
        }
    }

    fn public_at(&self, rounds: usize, index: u64) -> PublicInfo {
        let n = self.block_bits;
        let mask = (1u64 << n) - 1;
        match self.cipher {
            CipherKind::Ec09 => PublicInfo::InitialValue(BitString::from_u64(index, n)),
            CipherKind::Css10 => PublicInfo::Values(
                (0..rounds).map(|j| BitString::from_u64((index >> (n * (rounds - 1 - j))) & mask, n)).collect(),
            ),
            CipherKind::Ctrsa13 => PublicInfo::Seed(BitString::from_u64(index, n)),
        }
    }

    pub fn init_state(&self, secret: &Secret, public: &PublicInfo) -> Result<CipherState, GameError> {
        Ok(match (self.cipher, public) {
            (CipherKind::Ec09, PublicInfo::InitialValue(x0)) => {
                CipherState::Ec09(Ec09State::new(secret.keys[0].clone(), secret.keys[1].clone(), x0.clone())?)
            }
            (CipherKind::Css10, PublicInfo::Values(p)) => {
                CipherState::Css10(Css10State::new(secret.keys[0].clone(), PublicSeq::provided(p.clone())))
            }
            (CipherKind::Ctrsa13, PublicInfo::Seed(s)) => {
                let g = self.g.clone().ok_or_else(|| GameError::InvalidConfig("CTRSA13 needs G".into()))?;
                CipherState::Ctrsa13(Ctrsa13State::new(secret.keys[0].clone(), s.clone(), g)?)
            }
            (kind, _) => {
                return Err(GameError::InvalidConfig(format!("public information does not match {kind}")));
            }
        })
    }

    /// Run `rounds` rounds with a fixed leakage function, reporting each
    /// round's `(block, leakage)` to `visit`. Stops early when `visit`
    /// returns false.
    fn replay(
        &self,
        secret: &Secret,
        public: &PublicInfo,
        leak: &LeakageFn,
        rounds: usize,
        mut visit: impl FnMut(usize, &BitString, &BitString) -> bool,
    ) -> Result<(), GameError> {
        let mut state = self.init_state(secret, public)?;
        for j in 0..rounds {
            let out = state.step(self.f.as_ref())?;
            if !visit(j, &out.block, &leak.apply(&out.touched)) {
                break;
            }
        }
        Ok(())
    }
}

/// Initial secret state of one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Secret {
    pub keys: Vec<BitString>,
}

/// Public randomness of one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PublicInfo {
    /// EC09's `x_0`.
    InitialValue(BitString),
    /// CSS10's `p_0..p_{q-1}`.
    Values(Vec<BitString>),
    /// CTRSA13's seed `s`.
    Seed(BitString),
}

/// What the adversary sees before judging the challenge.
#[derive(Debug, Clone)]
pub struct View {
    /// `X_1..X_{q-1}`.
    pub blocks: Vec<BitString>,
    /// `Λ_1..Λ_q`.
    pub leakages: Vec<BitString>,
    pub public: PublicInfo,
}

pub trait Adversary: Send + Sync {
    fn name(&self) -> String;

    /// Leakage function for `round` (0-based), given the transcript so far.
    fn leakage(&self, round: usize, trace: &KeystreamTrace) -> LeakageFn;

    /// For each candidate challenge, answer true for "this is the real
    /// block".
    fn guess(&self, game: &GameInstance, view: &View, challenges: &[BitString]) -> Result<Vec<bool>, GameError>;
}

pub struct FullKeyAdversary;

impl Adversary for FullKeyAdversary {
    fn name(&self) -> String {
        "full_key".into()
    }

    fn leakage(&self, _: usize, _: &KeystreamTrace) -> LeakageFn {
        LeakageFn::ConsumedKey
    }

    fn guess(&self, game: &GameInstance, view: &View, challenges: &[BitString]) -> Result<Vec<bool>, GameError> {
        let q = view.leakages.len();
        let key = &view.leakages[q - 1];
        let input = match &view.public {
            PublicInfo::InitialValue(x0) => view.blocks.last().unwrap_or(x0).clone(),
            PublicInfo::Values(p) => p[q - 1].clone(),
            PublicInfo::Seed(s) => {
                let state = game.init_state(&Secret { keys: vec![key.clone()] }, &PublicInfo::Seed(s.clone()))?;
                match state {
                    CipherState::Ctrsa13(st) => st.public_value(q - 1),
                    _ => unreachable!("seed implies CTRSA13"),
                }
            }
        };
        let predicted = game.f.evaluate(key, &input).slice(game.key_bits, game.key_bits + game.block_bits);
        Ok(challenges.iter().map(|c| *c == predicted).collect())
    }
}

pub struct ConstantAdversary {
    pub guess_real: bool,
    pub lambda: usize,
}

impl Adversary for ConstantAdversary {
    fn name(&self) -> String {
        format!("constant_{}", self.guess_real)
    }

    fn leakage(&self, _: usize, _: &KeystreamTrace) -> LeakageFn {
        if self.lambda == 0 {
            LeakageFn::Nothing
        } else {
            LeakageFn::KeyPrefix { bits: self.lambda }
        }
    }

    fn guess(&self, _: &GameInstance, _: &View, challenges: &[BitString]) -> Result<Vec<bool>, GameError> {
        Ok(vec![self.guess_real; challenges.len()])
    }
}

/// Likelihood-ratio adversary over the exhaustively enumerated secrets.
pub struct ConsistentKeyAdversary {
    pub leakage: LeakageFn,
}

impl Adversary for ConsistentKeyAdversary {
    fn name(&self) -> String {
        format!("consistent_keys({:?})", self.leakage)
    }

    fn leakage(&self, _: usize, _: &KeystreamTrace) -> LeakageFn {
        self.leakage.clone()
    }

    fn guess(&self, game: &GameInstance, view: &View, challenges: &[BitString]) -> Result<Vec<bool>, GameError> {
        let bits = game.secret_bits();
        if bits > MAX_SECRET_BITS {
            return Err(GameError::SizeTooLarge { bits });
        }
        let (consistent, hits) = match &view.public {
            PublicInfo::InitialValue(x0) => self.count_ec09_chain(game, view, x0, challenges),
            _ => self.count_exhaustive(game, view, challenges)?,
        };
        // Real iff Pr[c | view, real] = hits / consistent exceeds 2^-n.
        Ok(hits.iter().map(|&h| u128::from(h) << game.block_bits > u128::from(consistent)).collect())
    }
}

impl ConsistentKeyAdversary {
    /// Walk every initial secret; returns the consistent count and, per
    /// challenge, how many consistent secrets output it as `X_q`.
    pub fn count_exhaustive(
        &self,
        game: &GameInstance,
        view: &View,
        challenges: &[BitString],
    ) -> Result<(u64, Vec<u64>), GameError> {
        let q = view.leakages.len();
        let mut consistent = 0u64;
        let mut hits = vec![0u64; challenges.len()];
        for index in 0..1u64 << game.secret_bits() {
            let mut last = None;
            game.replay(&game.secret_at(index), &view.public, &self.leakage, q, |j, block, leaked| {
                if *leaked != view.leakages[j] {
                    return false;
                }
                if j + 1 == q {
                    last = Some(block.clone());
                    return true;
                }
                *block == view.blocks[j]
            })?;
            if let Some(x_q) = last {
                consistent += 1;
                for (h, c) in hits.iter_mut().zip(challenges) {
                    *h += u64::from(*c == x_q);
                }
            }
        }
        Ok((consistent, hits))
    }

    /// EC09 only. Every round input is public (`x_0` or an earlier block in
    /// the view), so the even and odd key chains can be checked separately
    /// and the consistent set is a product. The ratio `hits / consistent`
    /// only depends on the chain that produces `X_q`, which is the one
    /// enumerated here.
    pub fn count_ec09_chain(
        &self,
        game: &GameInstance,
        view: &View,
        x0: &BitString,
        challenges: &[BitString],
    ) -> (u64, Vec<u64>) {
        let q = view.leakages.len();
        let k = game.key_bits;
        let slot = (q - 1) % 2;
        let mut consistent = 0u64;
        let mut hits = vec![0u64; challenges.len()];
        'keys: for key in 0..1u64 << k {
            let mut key = BitString::from_u64(key, k);
            for j in (slot..q).step_by(2) {
                let input = if j == 0 { x0 } else { &view.blocks[j - 1] };
                let (next, block) = game.f.evaluate(&key, input).split_at(k);
                let touched = TouchedState {
                    round: j,
                    slot,
                    read_key: key,
                    written_key: next.clone(),
                    public_input: input.clone(),
                };
                if self.leakage.apply(&touched) != view.leakages[j] {
                    continue 'keys;
                }
                if j + 1 == q {
                    consistent += 1;
                    for (h, c) in hits.iter_mut().zip(challenges) {
                        *h += u64::from(*c == block);
                    }
                } else if block != view.blocks[j] {
                    continue 'keys;
                }
                key = next;
            }
        }
        (consistent, hits)
    }
}

impl AdversarySpec {
    pub fn instantiate(&self, lambda: usize) -> Box<dyn Adversary> {
        match self {
            AdversarySpec::FullKey => Box::new(FullKeyAdversary),
            AdversarySpec::Constant { guess_real } => Box::new(ConstantAdversary { guess_real: *guess_real, lambda }),
            AdversarySpec::ConsistentKeys { leakage } => Box::new(ConsistentKeyAdversary { leakage: leakage.clone() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrGameResult {
    pub adversary: String,
    pub advantage: f64,
    pub halfwidth: f64,
    pub trials: u64,
    pub real_accepts: u64,
    pub random_accepts: u64,
    /// Hybrid bound on distinguishing all `q` blocks: `q × advantage`.
    pub stream_advantage_bound: f64,
    pub config_digest: String,
}

fn validate(cfg: &GameConfig) -> Result<(), GameError> {
    if cfg.rounds == 0 {
        return Err(GameError::InvalidConfig("rounds must be at least 1".into()));
    }
    if cfg.trials == 0 {
        return Err(GameError::InvalidConfig("trials must be at least 1".into()));
    }
    if cfg.key_bits == 0 || cfg.block_bits == 0 {
        return Err(GameError::InvalidConfig("key and block widths must be positive".into()));
    }
    Ok(())
}

/// One trial: returns whether the adversary accepted the real and the
/// uniform challenge.
fn play_trial(
    game: &GameInstance,
    cfg: &GameConfig,
    adversary: &dyn Adversary,
    trial: u64,
) -> Result<(bool, bool), GameError> {
    let mut rng = trial_rng(cfg.seed, trial);
    let secret = game.sample_secret(&mut rng);
    let public = game.sample_public(cfg.rounds, &mut rng);
    let mut state = game.init_state(&secret, &public)?;
    let mut chooser = |round: usize, trace: &KeystreamTrace| adversary.leakage(round, trace);
    let trace = generate_keystream(&mut state, game.f.as_ref(), cfg.rounds, &mut chooser, cfg.lambda)?;
    let uniform = BitString::random(game.block_bits, &mut rng);
    let q = cfg.rounds;
    let view = View { blocks: trace.blocks[..q - 1].to_vec(), leakages: trace.leakages, public };
    let answers = adversary.guess(game, &view, &[trace.blocks[q - 1].clone(), uniform])?;
    Ok((answers[0], answers[1]))
}

pub fn run_lr_game(cfg: &GameConfig) -> Result<LrGameResult, GameError> {
    validate(cfg)?;
    let game = GameInstance::from_config(cfg)?;
    if cfg.key_bits > MAX_SECRET_BITS {
        log::warn!("2^{} keys exceeds 2^{MAX_SECRET_BITS}; toy estimates are uninformative at this size", cfg.key_bits);
    }
    let adversary = cfg.adversary.instantiate(cfg.lambda);
    let (real, random) = (0..cfg.trials)
        .into_par_iter()
        .map(|t| play_trial(&game, cfg, adversary.as_ref(), t).map(|(a, b)| (u64::from(a), u64::from(b))))
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let advantage = real.abs_diff(random) as f64 / cfg.trials as f64;
    Ok(LrGameResult {
        adversary: adversary.name(),
        advantage,
        halfwidth: hoeffding_halfwidth(cfg.trials),
        trials: cfg.trials,
        real_accepts: real,
        random_accepts: random,
        stream_advantage_bound: (advantage * cfg.rounds as f64).min(1.0),
        config_digest: cfg.digest(),
    })
}

/// Total-variation numerator for one public value, in units of
/// `1 / (2 · |secrets| · 2^n)`.
fn tv_numerator(game: &GameInstance, public: &PublicInfo, leak: &LeakageFn, rounds: usize) -> Result<u128, GameError> {
    let bits = game.secret_bits();
    // view -> (count, challenge -> count)
    let mut views: HashMap<BitString, (u64, HashMap<BitString, u64>)> = HashMap::new();
    for index in 0..1u64 << bits {
        let mut view = BitString::empty();
        let mut challenge = BitString::empty();
        game.replay(&game.secret_at(index), public, leak, rounds, |j, block, leaked| {
            view = view.concat(leaked);
            if j + 1 == rounds {
                challenge = block.clone();
            } else {
                view = view.concat(block);
            }
            true
        })?;
        let entry = views.entry(view).or_default();
        entry.0 += 1;
        *entry.1.entry(challenge).or_default() += 1;
    }
    let scale = 1u128 << game.block_bits;
    Ok(views
        .values()
        .map(|(n_v, cs)| {
            let n_v = u128::from(*n_v);
            let seen: u128 = cs.values().map(|&n_c| (u128::from(n_c) * scale).abs_diff(n_v)).sum();
            seen + (scale - cs.len() as u128) * n_v
        })
        .sum())
}

/// Exact advantage of the optimal adversary for the configured (fixed)
/// leakage function, averaged over public values. Public values are
/// enumerated when there are at most `bayes_public_samples` of them and
/// sampled from the config seed otherwise.
pub fn bayes_optimal_advantage(cfg: &GameConfig) -> Result<f64, GameError> {
    validate(cfg)?;
    let game = GameInstance::from_config(cfg)?;
    let bits = game.secret_bits();
    if bits > MAX_SECRET_BITS {
        return Err(GameError::SizeTooLarge { bits });
    }
    let leak = cfg.leakage_fn();
    for round in 0..cfg.rounds {
        let slot = if cfg.cipher == CipherKind::Ec09 { round % 2 } else { 0 };
        leak.validate(round, slot, cfg.key_bits, cfg.lambda)?;
    }
    let public_bits = game.public_bits(cfg.rounds);
    let samples = cfg.bayes_public_samples.max(1);
    let publics: Vec<PublicInfo> = if public_bits < 64 && (1u64 << public_bits) <= samples as u64 {
        (0..1u64 << public_bits).map(|i| game.public_at(cfg.rounds, i)).collect()
    } else {
        let mut rng = trial_rng(derive_seed(cfg.seed, "bayes-public"), 0);
        (0..samples).map(|_| game.sample_public(cfg.rounds, &mut rng)).collect()
    };
    let total: u128 =
        publics.par_iter().map(|p| tv_numerator(&game, p, &leak, cfg.rounds)).try_reduce(|| 0, |a, b| Ok(a + b))?;
    let denom = 2.0 * (publics.len() as f64) * ((1u128 << bits) as f64) * ((1u128 << game.block_bits) as f64);
    Ok(total as f64 / denom)
}

/// Run every adversary on the same game and return the results in order.
pub fn run_library(base: &GameConfig, library: &[AdversarySpec]) -> Result<Vec<LrGameResult>, GameError> {
    library
        .iter()
        .map(|spec| {
            let cfg = GameConfig { adversary: spec.clone(), ..base.clone() };
            run_lr_game(&cfg)
        })
        .collect()
}
