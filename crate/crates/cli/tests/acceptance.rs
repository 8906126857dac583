//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Every check compares library output with an oracle computed
//! here, independently of the code under test.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;
use tsr_cli::execute;
use tsr_core::catalog::{Catalog, IMPROVED_SIMULATOR};
use tsr_core::cipher::{
    generate_keystream, CipherState, Css10State, Ctrsa13State, Ec09State, KeystreamTrace, LeakageFn, LeakagePlan,
    PublicSeq,
};
use tsr_core::game::{bayes_optimal_advantage, run_lr_game, AdversarySpec, GameConfig, PrfChoice};
use tsr_core::reduction::{closed_form_security, oracle_security, OracleConfig, ReductionParams, SecurityLevel};
use tsr_core::simulator::{
    benchmark_instance, two_point_simulator, discretize_distinguisher, minmax_mixture, sparsify, BenchmarkSpec,
    DistinguisherTable, JointDistribution, SimulatorFn, SimulatorMixture,
};
use tsr_core::wprf::{make_toy_wprf, SharedPrf, WeakPrf};
use tsr_core::BitString;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, &'static str, Duration, Box<dyn Fn() -> Check + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tsr(args: &[&str]) -> Result<String, String> {
    let out = execute(std::iter::once("tsr").chain(args.iter().copied()));
    if out.code == 0 {
        Ok(out.stdout)
    } else {
        Err(format!("tsr {args:?} exited {}: {}", out.code, out.stderr.trim()))
    }
}

fn json_result(artifact: &str) -> Result<Value, String> {
    let doc: Value = serde_json::from_str(artifact).map_err(|e| e.to_string())?;
    Ok(doc["result"].clone())
}

// ---- AC1 ----------------------------------------------------------------

fn ac1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac1);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let c_exp = rng.gen_range(0.0..3.0);
        let a_exp = rng.gen_range(0.1..=c_exp + 1.0);
        let b_exp = rng.gen_range(0.0..3.0);
        let b = if i % 4 == 0 { 0.0 } else { 2f64.powf(rng.gen_range(0.0..=10.0)) };
        let a = 2f64.powf(rng.gen_range(-4.0..4.0));
        let c = 2f64.powf(rng.gen_range(-4.0..10.0));
        let k = rng.gen_range(64.0..=512.0);
        let p = ReductionParams::new(a_exp, b_exp, c_exp, a, b, c).map_err(|e| e.to_string())?;
        let closed = closed_form_security(&p, SecurityLevel::bits(k)).map_err(|e| e.to_string())?.raw();
        let oracle = oracle_security(&p, SecurityLevel::bits(k), &OracleConfig::default_for(k))
            .map_err(|e| e.to_string())?
            .raw();
        let gap = (closed - oracle).abs();
        ensure(gap <= 1.0, || format!("{p:?}, k = {k}: closed {closed}, oracle {oracle}"))?;
        worst = worst.max(gap);
    }
    Ok(format!("500 parameter sets, max |closed − oracle| = {worst:.4} bits"))
}

// ---- AC2 ----------------------------------------------------------------

/// `(id, k coefficient, λ coefficient)` as printed in the comparison table.
type Fraction = (i64, i64);

const TABLE: [(&str, Fraction, Fraction); 7] = [
    ("pietrzak09", (1, 8), (0, 1)),
    ("jetchev_pietrzak14", (1, 6), (5, 6)),
    ("vadhan_zheng13", (1, 6), (1, 3)),
    ("improved_simulator", (1, 6), (1, 2)),
    ("dream_bound", (1, 4), (1, 1)),
    ("faust12", (1, 5), (3, 5)),
    ("yu_standaert13", (1, 4), (3, 4)),
];

fn rational(v: &Value) -> Option<Rational64> {
    let a = v.as_array()?;
    Some(Rational64::new(a.first()?.as_i64()?, a.get(1)?.as_i64()?))
}

fn render(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ac2() -> Check {
    for lambda in [0i64, 8, 32] {
        let ls = lambda.to_string();
        let doc = json_result(&tsr(&["table", "--k", "256", "--lambda", &ls, "--format", "json"])?)?;
        let rows = doc["rows"].as_array().ok_or("no rows")?;
        ensure(rows.len() == TABLE.len(), || format!("{} rows", rows.len()))?;
        for (row, (id, kc, lc)) in rows.iter().zip(TABLE) {
            let kc = Rational64::new(kc.0, kc.1);
            let lc = Rational64::new(lc.0, lc.1);
            ensure(row["id"] == id, || format!("row {} where {id} expected", row["id"]))?;
            ensure(rational(&row["k_coeff"]) == Some(kc), || format!("{id}: k coefficient {}", row["k_coeff"]))?;
            ensure(rational(&row["lambda_coeff"]) == Some(lc), || {
                format!("{id}: λ coefficient {}", row["lambda_coeff"])
            })?;
            ensure(rational(&row["constant"]) == Some(Rational64::from(0)), || format!("{id}: constant"))?;
            let expected = render(kc * 256 - lc * lambda);
            ensure(row["level_exact"] == expected.as_str(), || {
                format!("{id} at λ = {lambda}: {} vs {expected}", row["level_exact"])
            })?;
            let dream = row["status"] == "dream_unproven";
            ensure(dream == (id == "dream_bound"), || format!("{id}: status {}", row["status"]))?;
            ensure(!dream || row["guarantee"] == false, || format!("{id} is offered as a guarantee"))?;
        }
        let md = tsr(&["table", "--k", "256", "--lambda", &ls])?;
        let flagged: Vec<&str> = md.lines().filter(|l| l.contains("UNPROVEN")).collect();
        ensure(flagged.len() == 1 && flagged[0].contains("Dream bound"), || format!("markdown flags {flagged:?}"))?;
    }
    Ok("7 rows × λ ∈ {0, 8, 32} match exactly; dream bound flagged unproven".into())
}

// ---- AC3 ----------------------------------------------------------------

fn ac3() -> Check {
    let k = Catalog::published()
        .get(IMPROVED_SIMULATOR)
        .map_err(|e| e.to_string())?
        .minimum_key_for_target(80.0, 0.0)
        .ok_or("no key length reaches 80 bits")?;
    // k/6 − λ/2 = 80 at λ = 0.
    let oracle = 6.0 * 80.0;
    ensure((474.0..=486.0).contains(&k) && k <= 512.0, || format!("{k}"))?;
    ensure((k - oracle).abs() < 1e-9, || format!("{k} vs {oracle}"))?;
    Ok(format!("minimum key for 80 bits = {k} ≤ 512"))
}

// ---- AC4 ----------------------------------------------------------------

fn plain_run(state: &mut CipherState, f: &dyn WeakPrf, rounds: usize) -> Result<KeystreamTrace, String> {
    generate_keystream(state, f, rounds, &mut LeakagePlan::none(), 0).map_err(|e| e.to_string())
}

/// Alternating keys; round i reads `K_{i mod 2}` and the previous block.
fn ec09_by_hand(f: &dyn WeakPrf, k0: &BitString, k1: &BitString, x0: &BitString, rounds: usize) -> Vec<BitString> {
    let k = k0.len();
    let (mut ka, mut kb, mut x) = (k0.clone(), k1.clone(), x0.clone());
    let mut blocks = Vec::new();
    for i in 0..rounds {
        let key = if i % 2 == 0 { &mut ka } else { &mut kb };
        let out = f.evaluate(key, &x);
        *key = out.slice(0, k);
        x = out.slice(k, out.len());
        blocks.push(x.clone());
    }
    blocks
}

fn single_key_by_hand(f: &dyn WeakPrf, k0: &BitString, publics: &[BitString]) -> Vec<BitString> {
    let k = k0.len();
    let mut key = k0.clone();
    publics
        .iter()
        .map(|p| {
            let out = f.evaluate(&key, p);
            key = out.slice(0, k);
            out.slice(k, out.len())
        })
        .collect()
}

fn ac4() -> Check {
    let (k, n, rounds) = (8, 8, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(0xac4);
    for instance in 0..20u64 {
        let f = make_toy_wprf(k, n, k + n, rng.gen()).map_err(|e| e.to_string())?;
        let g: SharedPrf = std::sync::Arc::new(make_toy_wprf(n, 16, n, rng.gen()).map_err(|e| e.to_string())?);

        let (k0, k1, x0) =
            (BitString::random(k, &mut rng), BitString::random(k, &mut rng), BitString::random(n, &mut rng));
        let mut ec = CipherState::Ec09(Ec09State::new(k0.clone(), k1.clone(), x0.clone()).map_err(|e| e.to_string())?);
        let got = plain_run(&mut ec, &f, rounds)?.blocks;
        ensure(got == ec09_by_hand(&f, &k0, &k1, &x0, rounds), || format!("EC09 instance {instance}"))?;

        let publics: Vec<BitString> = (0..rounds).map(|_| BitString::random(n, &mut rng)).collect();
        let mut css = CipherState::Css10(Css10State::new(k0.clone(), PublicSeq::provided(publics.clone())));
        let css_trace = plain_run(&mut css, &f, rounds)?;
        ensure(css_trace.blocks == single_key_by_hand(&f, &k0, &publics), || format!("CSS10 instance {instance}"))?;

        let s = BitString::random(n, &mut rng);
        let expanded: Vec<BitString> =
            (0..rounds).map(|i| g.evaluate(&s, &BitString::from_u64(i as u64, 16))).collect();
        let mut ctr = CipherState::Ctrsa13(Ctrsa13State::new(k0.clone(), s, g.clone()).map_err(|e| e.to_string())?);
        let ctr_trace = plain_run(&mut ctr, &f, rounds)?;
        ensure(ctr_trace.blocks == single_key_by_hand(&f, &k0, &expanded), || format!("CTRSA13 instance {instance}"))?;

        let mut pre = CipherState::Css10(Css10State::new(k0.clone(), PublicSeq::provided(expanded)));
        let pre_trace = plain_run(&mut pre, &f, rounds)?;
        ensure(pre_trace.blocks == ctr_trace.blocks && pre_trace.touched == ctr_trace.touched, || {
            format!("CTRSA13 ≠ pre-expanded CSS10 on instance {instance}")
        })?;
    }
    Ok("20 instances × 3 constructions × 6 rounds equal the hand transcriptions".into())
}

// ---- AC5 ----------------------------------------------------------------

fn ec09_game(lambda: usize, adversary: AdversarySpec, trials: u64) -> GameConfig {
    GameConfig {
        cipher: tsr_core::cipher::CipherKind::Ec09,
        key_bits: 8,
        block_bits: 8,
        prf: PrfChoice::Toy { seed: 5 },
        rounds: 3,
        lambda,
        adversary,
        trials,
        seed: 0xac5,
        bayes_public_samples: 8,
    }
}

fn ac5() -> Check {
    let full = run_lr_game(&ec09_game(8, AdversarySpec::FullKey, 10_000)).map_err(|e| e.to_string())?;
    ensure(full.advantage >= 0.95, || format!("full-key advantage {}", full.advantage))?;

    let constant =
        run_lr_game(&ec09_game(0, AdversarySpec::Constant { guess_real: true }, 10_000)).map_err(|e| e.to_string())?;
    ensure(constant.advantage == 0.0, || format!("constant advantage {}", constant.advantage))?;

    let mut curve = Vec::new();
    for lambda in [0usize, 1, 2, 4, 8] {
        let leakage = if lambda == 0 { LeakageFn::Nothing } else { LeakageFn::KeyPrefix { bits: lambda } };
        let mut cfg = ec09_game(lambda, AdversarySpec::ConsistentKeys { leakage }, 1);
        cfg.rounds = 2;
        curve.push(bayes_optimal_advantage(&cfg).map_err(|e| e.to_string())?);
    }
    ensure(curve.windows(2).all(|w| w[0] <= w[1]), || format!("optimal advantage over λ: {curve:?}"))?;
    Ok(format!(
        "full-key {:.4}, constant {}, optimal over λ ∈ {{0,1,2,4,8}} = {:?}",
        full.advantage,
        constant.advantage,
        curve.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
    ))
}

// ---- simulator helpers ----------------------------------------------------

fn random_dist(rng: &mut ChaCha8Rng, x_count: usize, lambda: usize) -> JointDistribution {
    let raw: Vec<f64> = (0..x_count << lambda).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    JointDistribution::new(x_count, lambda, raw.iter().map(|v| v / total).collect()).unwrap()
}

fn random_table(rng: &mut ChaCha8Rng, x_count: usize, lambda: usize) -> DistinguisherTable {
    DistinguisherTable::new(x_count, lambda, (0..x_count << lambda).map(|_| rng.gen()).collect(), 1.0).unwrap()
}

/// `E D(X, Z)` straight from the joint table.
fn real_expectation(dist: &JointDistribution, d: &DistinguisherTable) -> f64 {
    dist.table().iter().zip(d.values()).map(|(p, v)| p * v).sum()
}

/// `E D(X, h(X))` from the marginal and the simulator's rows.
fn sim_expectation(dist: &JointDistribution, d: &DistinguisherTable, h: &SimulatorFn) -> f64 {
    let width = 1usize << dist.lambda();
    (0..dist.x_count())
        .map(|x| {
            let px: f64 = dist.table()[x * width..(x + 1) * width].iter().sum();
            let row = &h.rows()[x * width..(x + 1) * width];
            let vals = &d.values()[x * width..(x + 1) * width];
            px * row.iter().zip(vals).map(|(q, v)| q * v).sum::<f64>()
        })
        .sum()
}

/// Worst advantage over `family` and every complement `1 − D`.
fn closed_max_advantage(dist: &JointDistribution, family: &[DistinguisherTable], h: &SimulatorFn) -> f64 {
    family
        .iter()
        // The complement flips the sign of the advantage.
        .map(|d| (real_expectation(dist, d) - sim_expectation(dist, d, h)).abs())
        .fold(0.0, f64::max)
}

// ---- AC6 ----------------------------------------------------------------

fn ac6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x_count = rng.gen_range(1..=64);
        let lambda = rng.gen_range(1..=3);
        let dist = random_dist(&mut rng, x_count, lambda);
        let d = random_table(&mut rng, x_count, lambda);
        let h = two_point_simulator(&dist, &d).map_err(|e| e.to_string())?;
        worst = worst.max((sim_expectation(&dist, &d, &h) - real_expectation(&dist, &d)).abs());
    }
    ensure(worst < 1e-10, || format!("max gap {worst:e}"))?;
    Ok(format!("1000 instances, max |E D(X,h(X)) − E D(X,Z)| = {worst:.2e}"))
}

// ---- AC7 ----------------------------------------------------------------

fn ac7() -> Check {
    let spec = BenchmarkSpec { x_bits: 3, lambda: 2, family_size: 128, boolean: true, seed: 0xac7 };
    let (dist, family) = benchmark_instance(&spec).map_err(|e| e.to_string())?;
    let closed: Vec<DistinguisherTable> = family.iter().flat_map(|d| [d.clone(), d.complement()]).collect();
    ensure(closed.len() == 256, || format!("{} tables", closed.len()))?;
    let out = minmax_mixture(&dist, &closed, 0.1, None).map_err(|e| e.to_string())?;
    let adv = closed_max_advantage(&dist, &closed, &out.mixture.average());
    ensure(adv <= 0.1, || format!("max advantage {adv} after {} rounds", out.rounds))?;
    Ok(format!("{} rounds, exhaustive max advantage {adv:.4} ≤ 0.1", out.rounds))
}

// ---- AC8 ----------------------------------------------------------------

fn random_simulator(rng: &mut ChaCha8Rng, x_count: usize, lambda: usize) -> SimulatorFn {
    let width = 1usize << lambda;
    let mut rows = Vec::with_capacity(x_count * width);
    for _ in 0..x_count {
        let raw: Vec<f64> = (0..width).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        rows.extend(raw.iter().map(|v| v / total));
    }
    SimulatorFn::new(x_count, lambda, rows, 1.0).unwrap()
}

fn weighted_row_distance(dist: &JointDistribution, a: &SimulatorFn, b: &SimulatorFn) -> f64 {
    let width = 1usize << dist.lambda();
    (0..dist.x_count())
        .map(|x| {
            let px: f64 = dist.table()[x * width..(x + 1) * width].iter().sum();
            let d2: f64 = (0..width).map(|z| (a.rows()[x * width + z] - b.rows()[x * width + z]).powi(2)).sum();
            px * d2
        })
        .sum()
}

fn barycenter(sims: &[SimulatorFn]) -> Vec<f64> {
    let n = sims.len() as f64;
    (0..sims[0].rows().len()).map(|i| sims.iter().map(|s| s.rows()[i]).sum::<f64>() / n).collect()
}

fn ac8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac8);
    let (x_count, lambda, t) = (16, 2, 50);
    let dist = random_dist(&mut rng, x_count, lambda);
    let sims: Vec<SimulatorFn> = (0..8).map(|_| random_simulator(&mut rng, x_count, lambda)).collect();
    let h_bar = SimulatorFn::new(x_count, lambda, barycenter(&sims), 1.0).map_err(|e| e.to_string())?;
    let mixture = SimulatorMixture::uniform(sims).map_err(|e| e.to_string())?;
    let samples = (0..200u64)
        .map(|r| sparsify(&mixture, t, r).map(|h| weighted_row_distance(&dist, &h, &h_bar)))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| e.to_string())?;
    let mean = samples.iter().sum::<f64>() / 200.0;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / 199.0;
    let se = (var / 200.0).sqrt();
    let bound = 1.0 / t as f64 + 3.0 * se;
    ensure(mean <= bound, || format!("second moment {mean} > {bound}"))?;

    let mut worst_ratio: f64 = 0.0;
    let mut instances = 0;
    for lambda in [1usize, 2, 3] {
        for seed in 0..4u64 {
            for eps in [0.1, 0.25] {
                let spec = BenchmarkSpec { lambda, seed, ..BenchmarkSpec::default() };
                let (dist, family) = benchmark_instance(&spec).map_err(|e| e.to_string())?;
                let out = minmax_mixture(&dist, &family, eps, None).map_err(|e| e.to_string())?;
                let full = out.mixture.average();
                let t = ((1u64 << lambda) as f64 / (eps * eps)).ceil() as usize;
                let h = sparsify(&out.mixture, t, seed).map_err(|e| e.to_string())?;
                let inflation = closed_max_advantage(&dist, &family, &h) - closed_max_advantage(&dist, &family, &full);
                ensure(inflation <= 2.0 * eps, || {
                    format!("λ = {lambda}, seed {seed}, eps {eps}: inflation {inflation}")
                })?;
                worst_ratio = worst_ratio.max(inflation / (2.0 * eps));
                instances += 1;
            }
        }
    }
    Ok(format!(
        "second moment {mean:.5} ≤ 1/50 + 3σ = {bound:.5}; inflation ≤ {worst_ratio:.3}·2eps on {instances} instances"
    ))
}

// ---- AC9 ----------------------------------------------------------------

/// Least squares `y ≈ c0 + c1·u + c2·v`.
fn fit_plane(points: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean = |f: &dyn Fn(&(f64, f64, f64)) -> f64| points.iter().map(f).sum::<f64>() / n;
    let (mu, mv, my) = (mean(&|p| p.0), mean(&|p| p.1), mean(&|p| p.2));
    let cov = |f: &dyn Fn(&(f64, f64, f64)) -> f64, g: &dyn Fn(&(f64, f64, f64)) -> f64| {
        points.iter().map(|p| f(p) * g(p)).sum::<f64>()
    };
    let cu = |p: &(f64, f64, f64)| p.0 - mu;
    let cv = |p: &(f64, f64, f64)| p.1 - mv;
    let cy = |p: &(f64, f64, f64)| p.2 - my;
    let (suu, svv, suv) = (cov(&cu, &cu), cov(&cv, &cv), cov(&cu, &cv));
    let (suy, svy) = (cov(&cu, &cy), cov(&cv, &cy));
    let det = suu * svv - suv * suv;
    let b = (suy * svv - svy * suv) / det;
    let c = (svy * suu - suy * suv) / det;
    (my - b * mu - c * mv, b, c)
}

fn ac9(dir: &Path) -> Check {
    let artifact = dir.join("sweep.json");
    tsr(&[
        "simulate",
        "--sweep",
        "--lambdas",
        "1,2,3",
        "--epss",
        "0.05,0.1,0.2",
        "--format",
        "json",
        "--output",
        artifact.to_str().unwrap(),
    ])?;
    let rows = json_result(&fs::read_to_string(&artifact).map_err(|e| e.to_string())?)?;
    let rows = rows.as_array().ok_or("sweep is not an array")?;
    ensure(rows.len() == 9, || format!("{} sweep rows", rows.len()))?;
    let points: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| {
            (
                r["lambda"].as_f64().unwrap(),
                r["eps"].as_f64().unwrap().log2(),
                r["complexity_units"].as_f64().unwrap().log2(),
            )
        })
        .collect();
    let (_, lambda_slope, eps_slope) = fit_plane(&points);
    ensure((lambda_slope - 2.0).abs() <= 0.3, || format!("λ-slope {lambda_slope}"))?;
    ensure((eps_slope + 4.0).abs() <= 0.5, || format!("eps-slope {eps_slope}"))?;
    // Within a factor of 4 of s·2^{2λ}·eps^{-4} for one fitted constant.
    let logs: Vec<f64> = points.iter().map(|(l, e, y)| y - 2.0 * l + 4.0 * e).collect();
    let centre = logs.iter().sum::<f64>() / logs.len() as f64;
    let spread = logs.iter().map(|v| (v - centre).abs()).fold(0.0, f64::max);
    ensure(spread <= 2.0, || format!("off the scaling law by 2^{spread:.2}"))?;
    Ok(format!(
        "λ-slope {lambda_slope:.3}, eps-slope {eps_slope:.3}, max deviation from 2^{{2λ}}·eps^{{-4}} ×2^{spread:.2}"
    ))
}

// ---- AC10 ---------------------------------------------------------------

fn ac10() -> Check {
    let rho = 10;
    let limit = 2f64.powi(-rho) * (1.0 + 1e-12);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for boolean in [true, false] {
        for lambda in [1usize, 2, 3] {
            for seed in 0..4u64 {
                let spec = BenchmarkSpec { lambda, seed, boolean, ..BenchmarkSpec::default() };
                let (dist, family) = benchmark_instance(&spec).map_err(|e| e.to_string())?;
                let h = two_point_simulator(&dist, &family[0]).map_err(|e| e.to_string())?;
                for d in &family {
                    let dd = discretize_distinguisher(d, rho as u32).map_err(|e| e.to_string())?;
                    let shifts = [
                        (real_expectation(&dist, d) - real_expectation(&dist, &dd)).abs(),
                        (sim_expectation(&dist, d, &h) - sim_expectation(&dist, &dd, &h)).abs(),
                    ];
                    for s in shifts {
                        ensure(s <= limit, || format!("shift {s:e} on λ = {lambda}, seed {seed}"))?;
                        worst = worst.max(s);
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} tables, max shift {worst:.3e} ≤ 2^-10"))
}

// ---- AC11 ---------------------------------------------------------------

fn ac11(dir: &Path) -> Check {
    let w = |name: &str, text: &str| {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let params = w("params.json", r#"{"A":1,"B":0,"C":1,"a":1,"b":0,"c":1}"#);
    let ec09 = w("ec09.json", r#"{"key_bits":8,"block_bits":8,"keys":["13","a7"],"x0":"5c"}"#);
    let css10 = w("css10.json", r#"{"key_bits":8,"block_bits":8,"keys":["3c"]}"#);
    let ctr = w("ctrsa13.json", r#"{"key_bits":8,"block_bits":8,"keys":["3c"],"seed":"9e"}"#);
    let plan = w("plan.json", r#"{"fixed":{"kind":"hamming_weight_lsb"}}"#);
    let game = w(
        "game.json",
        r#"{"cipher":"ec09","key_bits":8,"block_bits":8,"rounds":2,"lambda":1,
            "adversary":{"kind":"consistent_keys","leakage":{"kind":"hamming_weight_lsb"}},"trials":500}"#,
    );
    let runs: Vec<Vec<&str>> = vec![
        vec!["security", "--params", &params, "--k", "128", "--oracle"],
        vec!["table", "--k", "256", "--lambda", "8"],
        vec!["table", "--k", "512", "--format", "json"],
        vec!["table", "--k", "480", "--format", "csv"],
        vec!["keystream", "--cipher", "ec09", "--init", &ec09, "--rounds", "6", "--leak-plan", &plan],
        vec!["keystream", "--cipher", "css10", "--init", &css10, "--rounds", "6", "--seed", "4"],
        vec!["keystream", "--cipher", "ctrsa13", "--init", &ctr, "--rounds", "6"],
        vec!["lr-game", "--config", &game, "--seed", "7"],
        vec!["simulate", "--eps", "0.1", "--seed", "3"],
        vec!["simulate", "--sweep", "--lambdas", "1,2", "--epss", "0.2"],
    ];
    let mut replayed = 0;
    for (i, run) in runs.iter().enumerate() {
        let path = dir.join(format!("artifact{i}"));
        let first = tsr(run)?;
        tsr(&[&run[..], &["--output", path.to_str().unwrap()]].concat())?;
        let written = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        ensure(first == written, || format!("{run:?}: two runs differ"))?;
        tsr(&["replay", path.to_str().unwrap()])?;
        replayed += 1;
    }
    let sweep = dir.join("sweep.json");
    if sweep.exists() {
        tsr(&["replay", sweep.to_str().unwrap()])?;
        replayed += 1;
    }
    Ok(format!("{replayed} artifacts re-run from their manifests byte-identically"))
}

// ---- driver ---------------------------------------------------------------

fn main() {
    let dir = TempDir::new().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("AC1", "closed form vs oracle", Duration::from_secs(10), Box::new(ac1)),
        ("AC2", "comparison table", Duration::from_secs(1), Box::new(ac2)),
        ("AC3", "80-bit key length", Duration::from_secs(1), Box::new(ac3)),
        ("AC4", "cipher dataflow", Duration::from_secs(5), Box::new(ac4)),
        ("AC5", "leakage game sanity", Duration::from_secs(60), Box::new(ac5)),
        ("AC6", "two-point simulator exactness", Duration::from_secs(5), Box::new(ac6)),
        ("AC7", "multiplicative weights", Duration::from_secs(30), Box::new(ac7)),
        ("AC8", "sparsification", Duration::from_secs(60), Box::new(ac8)),
        ("AC9", "complexity scaling", Duration::from_secs(300), Box::new(|| ac9(dir.path()))),
        ("AC10", "discretization", Duration::from_secs(5), Box::new(ac10)),
        ("AC11", "manifest replay", Duration::from_secs(300), Box::new(|| ac11(dir.path()))),
    ];
    let mut failures = 0;
    for (id, name, limit, check) in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let verdict = match outcome {
            Ok(_) if elapsed > *limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match verdict {
            Ok(detail) => println!("{id} PASS {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failures += 1;
                println!("{id} FAIL {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
