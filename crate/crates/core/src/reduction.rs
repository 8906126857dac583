//! Security levels of primitives derived through algebraic reductions.
//!
//! A reduction with constants `(A, B, C, a, b, c)` says: if the base primitive
//! resists adversaries `(s, ε)`, the derived primitive resists adversaries
//!
//! ```text
//! s' = s·c·ε^C − b·ε^(−B)
//! ε' = a·ε^A
//! ```
//!
//! Given `k` bits of base security (every size-`s` adversary has advantage
//! below `s·2^(−k)`), two independent routes compute the derived level `k'`:
//!
//! * [`closed_form_security`], the explicit two-case formula valid when
//!   `A ≤ C + 1`;
//! * [`oracle_security`], a grid search plus bisection over `log₂ ε` on the
//!   reduced one-variable program
//!   `min a⁻¹ε^(−A)(2^k c ε^(C+1) − b ε^(−B))` s.t. `2^k c ε^(C+1) − b ε^(−B) ≥ 1`.
//!
//! All quantities live in the log₂ domain; `2^k` is never materialised.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("invalid reduction parameters: {0}")]
    InvalidParams(String),
    #[error("closed form requires A <= C + 1, got A = {adv_exponent}, C = {mul_exponent}")]
    ConditionViolated { adv_exponent: f64, mul_exponent: f64 },
    #[error("closed form is only established for b = 0 or b >= 1, got b = {0}")]
    UnsupportedCoefficient(f64),
    #[error("base security level must be finite")]
    NonFiniteLevel,
    #[error("malformed oracle search range: {0}")]
    EmptyRange(String),
}

/// Constants of an algebraic reduction. Serialised as `{A, B, C, a, b, c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ReductionParams {
    adv_exponent: f64,
    add_exponent: f64,
    mul_exponent: f64,
    adv_coeff: f64,
    add_coeff: f64,
    mul_coeff: f64,
}

#[allow(non_snake_case)]
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    A: f64,
    B: f64,
    C: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl TryFrom<RawParams> for ReductionParams {
    type Error = ReductionError;

    fn try_from(r: RawParams) -> Result<Self, Self::Error> {
        ReductionParams::new(r.A, r.B, r.C, r.a, r.b, r.c)
    }
}

impl From<ReductionParams> for RawParams {
    fn from(p: ReductionParams) -> Self {
        RawParams {
            A: p.adv_exponent,
            B: p.add_exponent,
            C: p.mul_exponent,
            a: p.adv_coeff,
            b: p.add_coeff,
            c: p.mul_coeff,
        }
    }
}

impl ReductionParams {
    /// `A, a, c > 0` and `B, C, b ≥ 0`, all finite.
    #[allow(non_snake_case)]
    pub fn new(A: f64, B: f64, C: f64, a: f64, b: f64, c: f64) -> Result<Self, ReductionError> {
        let all = [("A", A), ("B", B), ("C", C), ("a", a), ("b", b), ("c", c)];
        if let Some((name, v)) = all.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ReductionError::InvalidParams(format!("{name} = {v} is not finite")));
        }
        for (name, v) in [("A", A), ("a", a), ("c", c)] {
            if v <= 0.0 {
                return Err(ReductionError::InvalidParams(format!("{name} = {v} must be > 0")));
            }
        }
        for (name, v) in [("B", B), ("C", C), ("b", b)] {
            if v < 0.0 {
                return Err(ReductionError::InvalidParams(format!("{name} = {v} must be >= 0")));
            }
        }
        Ok(Self { adv_exponent: A, add_exponent: B, mul_exponent: C, adv_coeff: a, add_coeff: b, mul_coeff: c })
    }

    /// Exponent `A` of ε in ε'.
    pub fn adv_exponent(&self) -> f64 {
        self.adv_exponent
    }
    /// Exponent `B` of ε⁻¹ in the additive time cost.
    pub fn add_exponent(&self) -> f64 {
        self.add_exponent
    }
    /// Exponent `C` of ε in the multiplicative time factor.
    pub fn mul_exponent(&self) -> f64 {
        self.mul_exponent
    }
    /// Multiplier `a` of ε^A.
    pub fn adv_coeff(&self) -> f64 {
        self.adv_coeff
    }
    /// Coefficient `b` of ε^(−B).
    pub fn add_coeff(&self) -> f64 {
        self.add_coeff
    }
    /// Coefficient `c` of s·ε^C.
    pub fn mul_coeff(&self) -> f64 {
        self.mul_coeff
    }

    /// Same reduction with `a` scaled by `2^bits`.
    pub fn with_adv_coeff_scaled(mut self, bits: f64) -> Self {
        self.adv_coeff *= bits.exp2();
        self
    }

    /// Whether the closed form applies, i.e. `A ≤ C + 1`.
    pub fn closed_form_applicable(&self) -> bool {
        objective_monotone_check(self)
    }
}

/// Bits of security in the time-success-ratio sense, or the "no guarantee"
/// sentinel (an empty feasible set, value −∞).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SecurityLevel(f64);

impl SecurityLevel {
    pub const INFEASIBLE: SecurityLevel = SecurityLevel(f64::NEG_INFINITY);

    pub fn bits(bits: f64) -> Self {
        SecurityLevel(bits)
    }

    /// `None` for the infeasible sentinel.
    pub fn value(&self) -> Option<f64> {
        self.0.is_finite().then_some(self.0)
    }

    pub fn raw(&self) -> f64 {
        self.0
    }

    pub fn is_infeasible(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl fmt::Display for SecurityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v:.2}"),
            None => f.write_str("no guarantee"),
        }
    }
}

impl Serialize for SecurityLevel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SecurityLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map_or(Self::INFEASIBLE, SecurityLevel))
    }
}

/// An adversary's resources: size `s ≥ 1` and advantage `ε ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversaryPoint {
    pub size: f64,
    pub advantage: f64,
}

impl AdversaryPoint {
    pub fn new(size: f64, advantage: f64) -> Result<Self, ReductionError> {
        if size.is_nan() || size < 1.0 || !(0.0..=1.0).contains(&advantage) {
            return Err(ReductionError::InvalidParams(format!(
                "adversary point needs s >= 1 and 0 <= eps <= 1, got ({size}, {advantage})"
            )));
        }
        Ok(Self { size, advantage })
    }

    /// `log₂(s/ε)`; +∞ for a zero-advantage adversary.
    pub fn log2_ratio(&self) -> f64 {
        self.size.log2() - self.advantage.log2()
    }

    /// The derived-primitive adversary `(s', ε')` this point maps to.
    pub fn map_through(&self, p: &ReductionParams) -> (f64, f64) {
        let eps = self.advantage;
        let s_derived = self.size * p.mul_coeff * eps.powf(p.mul_exponent) - p.add_coeff * eps.powf(-p.add_exponent);
        (s_derived, p.adv_coeff * eps.powf(p.adv_exponent))
    }
}

/// `A ≤ C + 1`: the reduced objective `f(u)` is non-decreasing on `(0, 1]`.
pub fn objective_monotone_check(params: &ReductionParams) -> bool {
    params.adv_exponent <= params.mul_exponent + 1.0
}

/// Derived security level from the explicit two-case formula.
pub fn closed_form_security(params: &ReductionParams, k: SecurityLevel) -> Result<SecurityLevel, ReductionError> {
    let k = k.value().ok_or(ReductionError::NonFiniteLevel)?;
    if !objective_monotone_check(params) {
        return Err(ReductionError::ConditionViolated {
            adv_exponent: params.adv_exponent,
            mul_exponent: params.mul_exponent,
        });
    }
    let ReductionParams {
        adv_exponent: a_exp,
        add_exponent: b_exp,
        mul_exponent: c_exp,
        adv_coeff: a,
        add_coeff: b,
        mul_coeff: c,
    } = *params;
    let bits = if b == 0.0 {
        let r = a_exp / (c_exp + 1.0);
        r * k + r * c.log2() - a.log2()
    } else if b >= 1.0 {
        let r = a_exp / (b_exp + c_exp + 1.0);
        r * k + r * (c.log2() - b.log2()) - a.log2()
    } else {
        return Err(ReductionError::UnsupportedCoefficient(b));
    };
    Ok(SecurityLevel(bits))
}

/// Search range and resolution for [`oracle_security`], all in `log₂ ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub log2_eps_min: f64,
    pub log2_eps_max: f64,
    pub step_bits: f64,
    pub bisect_iters: u32,
}

impl OracleConfig {
    /// `log₂ ε ∈ [−2k, 0]` at 0.01-bit steps, 60 bisection steps.
    pub fn default_for(k: f64) -> Self {
        Self { log2_eps_min: -2.0 * k.abs().max(1.0), log2_eps_max: 0.0, step_bits: 0.01, bisect_iters: 60 }
    }

    fn validate(&self) -> Result<usize, ReductionError> {
        let Self { log2_eps_min: lo, log2_eps_max: hi, step_bits: step, .. } = *self;
        if !lo.is_finite() || !hi.is_finite() || !step.is_finite() {
            return Err(ReductionError::EmptyRange("non-finite bounds".into()));
        }
        if lo > hi {
            return Err(ReductionError::EmptyRange(format!("min {lo} > max {hi}")));
        }
        if hi > 0.0 {
            return Err(ReductionError::EmptyRange(format!("max {hi} > 0 means eps > 1")));
        }
        if step <= 0.0 {
            return Err(ReductionError::EmptyRange(format!("step {step} must be > 0")));
        }
        let steps = ((hi - lo) / step).floor();
        if steps > 1e9 {
            return Err(ReductionError::EmptyRange(format!("{steps} grid points")));
        }
        Ok(steps as usize + 1)
    }
}

/// Detailed result of the numerical route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub level: SecurityLevel,
    /// `log₂ ε` of the minimiser, if any point was feasible.
    pub log2_eps: Option<f64>,
    /// Whether the minimiser was the refined constraint boundary.
    pub on_boundary: bool,
}

/// The reduced program, evaluated in log₂ space at `u = log₂ ε`.
struct ReducedProgram {
    k: f64,
    params: ReductionParams,
}

impl ReducedProgram {
    /// `log₂(2^k c ε^(C+1) − b ε^(−B))`, −∞ where the difference is ≤ 0.
    fn log2_slack(&self, u: f64) -> f64 {
        let p = &self.params;
        let gain = self.k + p.mul_coeff.log2() + (p.mul_exponent + 1.0) * u;
        if p.add_coeff == 0.0 {
            return gain;
        }
        let cost = p.add_coeff.log2() - p.add_exponent * u;
        if gain <= cost {
            return f64::NEG_INFINITY;
        }
        // log₂(1 − 2^d) for d < 0
        let d = cost - gain;
        gain + (-(d * LN_2).exp_m1()).ln() / LN_2
    }

    fn feasible(&self, u: f64) -> bool {
        self.log2_slack(u) >= 0.0
    }

    fn objective(&self, u: f64) -> f64 {
        -self.params.adv_coeff.log2() - self.params.adv_exponent * u + self.log2_slack(u)
    }
}

/// Derived security level from the numerical min-max program.
pub fn oracle_security(
    params: &ReductionParams,
    k: SecurityLevel,
    grid: &OracleConfig,
) -> Result<SecurityLevel, ReductionError> {
    solve_oracle(params, k, grid).map(|s| s.level)
}

pub fn solve_oracle(
    params: &ReductionParams,
    k: SecurityLevel,
    grid: &OracleConfig,
) -> Result<OracleSolution, ReductionError> {
    let k = k.value().ok_or(ReductionError::NonFiniteLevel)?;
    let points = grid.validate()?;
    let program = ReducedProgram { k, params: *params };

    let mut best: Option<(f64, f64)> = None;
    // Last infeasible point followed by the first feasible one.
    let mut transition: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, bool)> = None;
    for i in 0..points {
        let u = (grid.log2_eps_min + i as f64 * grid.step_bits).min(grid.log2_eps_max);
        let feasible = program.feasible(u);
        if let Some((prev_u, false)) = prev {
            if feasible && transition.is_none() {
                transition = Some((prev_u, u));
            }
        }
        prev = Some((u, feasible));
        if !feasible {
            continue;
        }
        let value = program.objective(u);
        // Strict comparison keeps the smallest ε among ties.
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((u, value));
        }
    }

    let Some((mut arg, mut value)) = best else {
        return Ok(OracleSolution { level: SecurityLevel::INFEASIBLE, log2_eps: None, on_boundary: false });
    };

    let mut on_boundary = false;
    if let Some((mut lo, mut hi)) = transition {
        for _ in 0..grid.bisect_iters {
            let mid = 0.5 * (lo + hi);
            if program.feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // The slack is 1 on the boundary, so log₂ of it vanishes. Evaluating
        // it at `hi` instead is hopeless: near the root the slack changes by
        // many orders of magnitude within one ulp of u.
        let boundary_value = -params.adv_coeff.log2() - params.adv_exponent * hi;
        if boundary_value <= value {
            arg = hi;
            value = boundary_value;
            on_boundary = true;
        }
    }

    Ok(OracleSolution { level: SecurityLevel(value), log2_eps: Some(arg), on_boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(v: [f64; 6]) -> ReductionParams {
        ReductionParams::new(v[0], v[1], v[2], v[3], v[4], v[5]).unwrap()
    }

    fn oracle(p: &ReductionParams, k: f64) -> f64 {
        oracle_security(p, SecurityLevel::bits(k), &OracleConfig::default_for(k)).unwrap().raw()
    }

    fn closed(p: &ReductionParams, k: f64) -> f64 {
        closed_form_security(p, SecurityLevel::bits(k)).unwrap().raw()
    }

    #[test]
    fn near_identity_reduction_keeps_level() {
        let p = params([1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(closed(&p, 128.0), 128.0);
        // Boundary 2^128·ε − 1 = 1 gives ε = 2^-127.
        assert!((oracle(&p, 128.0) - 127.0).abs() < 1e-9);
    }

    #[test]
    fn chernoff_style_reduction_halves_level() {
        let p = params([1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        assert_eq!(closed(&p, 128.0), 64.0);
        let sol = solve_oracle(&p, SecurityLevel::bits(128.0), &OracleConfig::default_for(128.0)).unwrap();
        assert!(sol.on_boundary);
        assert!((sol.level.raw() - 64.0).abs() <= 0.01);
        assert!((sol.log2_eps.unwrap() + 64.0).abs() <= 0.01);
    }

    #[test]
    fn additive_cost_reduction() {
        let p = params([1.0, 1.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(closed(&p, 120.0), 60.0);
        // 2^120·ε² − 1 = ε puts the boundary a hair above 2^-60.
        let o = oracle(&p, 120.0);
        assert!(o <= 60.0 && o > 59.99, "{o}");
    }

    #[test]
    fn monotone_check_examples() {
        let check = |a: f64, c: f64| objective_monotone_check(&params([a, 0.0, c, 1.0, 0.0, 1.0]));
        assert!(check(1.0, 1.0));
        assert!(!check(3.0, 1.0));
        assert!(check(2.0, 1.0));
    }

    #[test]
    fn closed_form_errors() {
        let violated = params([3.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            closed_form_security(&violated, SecurityLevel::bits(128.0)),
            Err(ReductionError::ConditionViolated { .. })
        ));
        let fractional_b = params([1.0, 0.0, 1.0, 1.0, 0.5, 1.0]);
        assert_eq!(
            closed_form_security(&fractional_b, SecurityLevel::bits(128.0)),
            Err(ReductionError::UnsupportedCoefficient(0.5))
        );
        let p = params([1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        assert_eq!(closed_form_security(&p, SecurityLevel::INFEASIBLE), Err(ReductionError::NonFiniteLevel));
    }

    #[test]
    fn infeasible_program_yields_sentinel() {
        // c·2^k = 2^4 < 1 + b: unsatisfiable at ε = 1, and the slack only
        // shrinks as ε decreases.
        let p = params([1.0, 1.0, 0.0, 1.0, 100.0, 1.0]);
        let level = oracle_security(&p, SecurityLevel::bits(4.0), &OracleConfig::default_for(4.0)).unwrap();
        assert!(level.is_infeasible());
        assert_eq!(level.value(), None);
    }

    #[test]
    fn malformed_ranges_are_rejected() {
        let p = params([1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let k = SecurityLevel::bits(64.0);
        for grid in [
            OracleConfig { log2_eps_min: 0.0, log2_eps_max: -1.0, step_bits: 0.1, bisect_iters: 10 },
            OracleConfig { log2_eps_min: -10.0, log2_eps_max: 1.0, step_bits: 0.1, bisect_iters: 10 },
            OracleConfig { log2_eps_min: -10.0, log2_eps_max: 0.0, step_bits: 0.0, bisect_iters: 10 },
            OracleConfig { log2_eps_min: f64::NAN, log2_eps_max: 0.0, step_bits: 0.1, bisect_iters: 10 },
        ] {
            assert!(matches!(oracle_security(&p, k, &grid), Err(ReductionError::EmptyRange(_))));
        }
    }

    #[test]
    fn params_json_is_flat() {
        let p = params([1.0, 0.0, 1.0, 2.0, 0.0, 1.0]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"A":1.0,"B":0.0,"C":1.0,"a":2.0,"b":0.0,"c":1.0}"#);
        let back: ReductionParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<ReductionParams>(r#"{"A":0,"B":0,"C":1,"a":1,"b":0,"c":1}"#).is_err());
    }

    #[test]
    fn adversary_point_maps_through_reduction() {
        let p = params([1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let pt = AdversaryPoint::new(2f64.powi(10), 0.25).unwrap();
        let (s, e) = pt.map_through(&p);
        assert_eq!((s, e), (256.0, 0.25));
        assert!(AdversaryPoint::new(0.5, 0.1).is_err());
        assert!(AdversaryPoint::new(1.0, 1.5).is_err());
    }

    fn valid_params() -> impl Strategy<Value = ReductionParams> {
        (
            0.1f64..3.0,
            0.0f64..3.0,
            0.0f64..3.0,
            0.0f64..10.0,
            prop_oneof![Just(None), (0.0f64..10.0).prop_map(Some)],
            0.0f64..10.0,
        )
            .prop_filter_map("A <= C + 1", |(a_exp, b_exp, c_exp, log_a, log_b, log_c)| {
                (a_exp <= c_exp + 1.0)
                    .then(|| params([a_exp, b_exp, c_exp, log_a.exp2(), log_b.map_or(0.0, f64::exp2), log_c.exp2()]))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn oracle_is_monotone_in_k(p in valid_params(), k in 64.0f64..256.0, dk in 0.0f64..64.0) {
            let grid = OracleConfig::default_for(k + dk);
            let lo = oracle_security(&p, SecurityLevel::bits(k), &grid).unwrap();
            let hi = oracle_security(&p, SecurityLevel::bits(k + dk), &grid).unwrap();
            prop_assert!(hi.raw() >= lo.raw() - 1e-9);
        }

        #[test]
        fn scaling_a_shifts_both_routes_exactly(p in valid_params(), k in 64.0f64..256.0, d in 0.0f64..8.0) {
            let scaled = p.with_adv_coeff_scaled(d);
            let shift_closed = closed(&p, k) - closed(&scaled, k);
            prop_assert!((shift_closed - d).abs() < 1e-9);
            let shift_oracle = oracle(&p, k) - oracle(&scaled, k);
            prop_assert!((shift_oracle - d).abs() < 1e-9);
        }

        #[test]
        fn routes_agree_within_one_bit(p in valid_params(), k in 64.0f64..256.0) {
            prop_assert!((closed(&p, k) - oracle(&p, k)).abs() <= 1.0);
        }

        #[test]
        fn identity_like_reduction_is_exact(k in 1.0f64..1024.0) {
            let p = params([1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
            prop_assert_eq!(closed(&p, k), k);
        }
    }
}
