use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tsr_core::catalog::{emit_table, Catalog, TableFormat};
use tsr_core::cipher::{
    generate_keystream, CipherKind, CipherState, Css10State, Ctrsa13State, Ec09State, KeystreamTrace, LeakagePlan,
    PublicSeq,
};
use tsr_core::game::{bayes_optimal_advantage, run_lr_game, GameConfig, GameInstance, PrfChoice, MAX_SECRET_BITS};
use tsr_core::reduction::{closed_form_security, solve_oracle, OracleConfig, ReductionParams, SecurityLevel};
use tsr_core::rng::derive_seed;
use tsr_core::simulator::{
    full_simulator, read_distribution_csv, read_family_csv, simulate_sweep, sweep_to_csv, BenchmarkSpec,
    DistinguisherTable, JointDistribution, SweepRow,
};
use tsr_core::BitString;

use crate::args::{KeystreamArgs, LrGameArgs, OutputFormat, SecurityArgs, SimulateArgs, TableArgs};
use crate::error::CliError;
use crate::manifest::{unwrap_json, Body, Inputs};

fn parse_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Parse { path: path.display().to_string(), message: e.to_string() }
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| parse_err(path, e))
}

fn unsupported(command: &str, format: OutputFormat, allowed: &[&str]) -> CliError {
    CliError::Usage(format!(
        "{command} does not support --format {}; use one of: {}",
        serde_json::to_value(format).expect("format serializes").as_str().unwrap_or("?"),
        allowed.join(", ")
    ))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

/// Reduction constants as written in a params file; validated by
/// [`ReductionParams::new`] so bad values keep their own exit code.
#[allow(non_snake_case)]
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    A: f64,
    B: f64,
    C: f64,
    a: f64,
    b: f64,
    c: f64,
}

pub fn default_format(command: &str, sweep: bool) -> OutputFormat {
    match command {
        "security" => OutputFormat::Text,
        "table" => OutputFormat::Markdown,
        "simulate" if sweep => OutputFormat::Csv,
        _ => OutputFormat::Json,
    }
}

pub fn security(args: &SecurityArgs, format: OutputFormat, inputs: &mut Inputs) -> Result<Body, CliError> {
    let text = inputs.read(&args.params)?;
    let p: ParamsFile = parse_json(&args.params, &text)?;
    let params = ReductionParams::new(p.A, p.B, p.C, p.a, p.b, p.c)?;
    let k = SecurityLevel::bits(args.k);
    let closed = closed_form_security(&params, k)?.raw();
    let oracle = if args.oracle {
        let cfg = OracleConfig { step_bits: args.step_bits, ..OracleConfig::default_for(args.k) };
        Some((solve_oracle(&params, k, &cfg)?, cfg.step_bits))
    } else {
        None
    };
    match format {
        OutputFormat::Text => {
            let mut out = format!("closed-form {closed:.2}");
            if let Some((sol, step)) = oracle {
                match sol.level.value() {
                    Some(level) => {
                        let _ = write!(
                            out,
                            ", oracle {level:.2} ± {step:.2}, difference {:.2} bits",
                            (closed - level).abs()
                        );
                    }
                    None => out.push_str(", oracle infeasible"),
                }
            }
            out.push('\n');
            Ok(Body::Text(out))
        }
        OutputFormat::Json => Ok(Body::Json(json!({
            "params": params,
            "k": args.k,
            "closed_form": closed,
            "oracle": oracle.map(|(s, step)| json!({
                "level": s.level.value(),
                "log2_eps": s.log2_eps,
                "on_boundary": s.on_boundary,
                "resolution_bits": step,
            })),
            "difference_bits": oracle.and_then(|(s, _)| s.level.value()).map(|l| (closed - l).abs()),
        }))),
        other => Err(unsupported("security", other, &["text", "json"])),
    }
}

fn parse_rational(name: &str, s: &str) -> Result<Rational64, CliError> {
    Rational64::from_str(s.trim()).map_err(|e| CliError::Usage(format!("--{name} {s}: {e}")))
}

pub fn table(args: &TableArgs, format: OutputFormat) -> Result<Body, CliError> {
    let k = parse_rational("k", &args.k)?;
    let lambda = parse_rational("lambda", &args.lambda)?;
    let catalog = Catalog::published();
    match format {
        OutputFormat::Markdown | OutputFormat::Text => {
            Ok(Body::Text(emit_table(&catalog, k, lambda, TableFormat::Markdown)?))
        }
        OutputFormat::Csv => Ok(Body::Text(emit_table(&catalog, k, lambda, TableFormat::Csv)?)),
        OutputFormat::Json => {
            let text = emit_table(&catalog, k, lambda, TableFormat::Json)?;
            Ok(Body::Json(serde_json::from_str(&text).expect("table JSON parses")))
        }
    }
}

/// Initial state for `keystream`. Bit strings are hex, left-aligned.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeystreamInit {
    key_bits: usize,
    block_bits: usize,
    #[serde(default)]
    prf: PrfChoice,
    /// EC09: `[K0, K1]`; the others: `[K0]`.
    keys: Vec<String>,
    /// EC09's `x_0`.
    #[serde(default)]
    x0: Option<String>,
    /// CSS10's public values, one per round. Seeded when absent.
    #[serde(default)]
    public: Option<Vec<String>>,
    /// CTRSA13's public seed `s`.
    #[serde(default)]
    seed: Option<String>,
}

fn hex_field(path: &Path, field: &str, value: Option<&String>, bits: usize) -> Result<BitString, CliError> {
    let value = value.ok_or_else(|| parse_err(path, format!("missing `{field}`")))?;
    BitString::from_hex(value, bits).map_err(|e| parse_err(path, format!("{field}: {e} (expected {bits} bits)")))
}

fn build_state(
    args: &KeystreamArgs,
    init: &KeystreamInit,
    game: &GameInstance,
    seed: u64,
) -> Result<CipherState, CliError> {
    let path = args.init.as_path();
    let (k, n) = (init.key_bits, init.block_bits);
    let expected_keys = if game.cipher == CipherKind::Ec09 { 2 } else { 1 };
    if init.keys.len() != expected_keys {
        return Err(parse_err(path, format!("{} takes {expected_keys} key(s), got {}", game.cipher, init.keys.len())));
    }
    let key = |i: usize| hex_field(path, &format!("keys[{i}]"), init.keys.get(i), k);
    Ok(match game.cipher {
        CipherKind::Ec09 => {
            CipherState::Ec09(Ec09State::new(key(0)?, key(1)?, hex_field(path, "x0", init.x0.as_ref(), n)?)?)
        }
        CipherKind::Css10 => {
            let public = match &init.public {
                Some(values) => PublicSeq::provided(
                    values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| hex_field(path, &format!("public[{i}]"), Some(v), n))
                        .collect::<Result<_, _>>()?,
                ),
                None => PublicSeq::seeded(derive_seed(seed, "css10-public"), n),
            };
            CipherState::Css10(Css10State::new(key(0)?, public))
        }
        CipherKind::Ctrsa13 => {
            let g = game.g.clone().expect("CTRSA13 instance carries G");
            let s = hex_field(path, "seed", init.seed.as_ref(), g.key_bits())?;
            CipherState::Ctrsa13(Ctrsa13State::new(key(0)?, s, g)?)
        }
    })
}

fn describe_mismatch(expected: &KeystreamTrace, found: &KeystreamTrace) -> String {
    if expected.header != found.header {
        return format!("header {:?} vs {:?}", found.header, expected.header);
    }
    if expected.rounds() != found.rounds() {
        return format!("{} rounds in file, {} re-derived", found.rounds(), expected.rounds());
    }
    let round = (0..expected.rounds())
        .find(|&i| {
            expected.blocks[i] != found.blocks[i]
                || expected.leakages[i] != found.leakages[i]
                || expected.touched[i] != found.touched[i]
        })
        .unwrap_or(0);
    format!("first difference in round {round}")
}

pub fn keystream(args: &KeystreamArgs, format: OutputFormat, seed: u64, inputs: &mut Inputs) -> Result<Body, CliError> {
    if format != OutputFormat::Json {
        return Err(unsupported("keystream", format, &["json"]));
    }
    let init: KeystreamInit = parse_json(&args.init, &inputs.read(&args.init)?)?;
    let game = GameInstance::new(args.cipher.into(), init.key_bits, init.block_bits, init.prf)?;
    let mut state = build_state(args, &init, &game, seed)?;
    let mut plan = match &args.leak_plan {
        Some(path) => parse_json(path, &inputs.read(path)?)?,
        None => LeakagePlan::none(),
    };
    let lambda = args.lambda.unwrap_or_else(|| match &plan {
        LeakagePlan::Fixed(f) => f.output_bits(init.key_bits),
        LeakagePlan::PerRound(fs) => fs.first().map_or(0, |f| f.output_bits(init.key_bits)),
    });
    let trace = generate_keystream(&mut state, game.f.as_ref(), args.rounds, &mut plan, lambda)?;
    if let Some(path) = &args.verify {
        let doc: Value = parse_json(path, &inputs.read(path)?)?;
        let found: KeystreamTrace = serde_json::from_value(unwrap_json(doc))
            .map_err(|e| tsr_core::cipher::CipherError::MalformedTrace(format!("{}: {e}", path.display())))?;
        if found != trace {
            return Err(CliError::TraceMismatch(format!("{}: {}", path.display(), describe_mismatch(&trace, &found))));
        }
        log::info!("{} matches the re-derived trace", path.display());
    }
    Ok(Body::Json(to_value(&trace)))
}

pub fn lr_game(args: &LrGameArgs, format: OutputFormat, seed: u64, inputs: &mut Inputs) -> Result<Body, CliError> {
    let mut doc: Value = parse_json(&args.config, &inputs.read(&args.config)?)?;
    if let Value::Object(m) = &mut doc {
        m.entry("seed").or_insert_with(|| json!(derive_seed(seed, "lr-game")));
    }
    let cfg: GameConfig = serde_json::from_value(doc).map_err(|e| parse_err(&args.config, e))?;
    let result = run_lr_game(&cfg)?;
    let bits = cfg.secret_bits();
    let (bayes, status) = if args.no_bayes {
        (None, "skipped".to_string())
    } else if bits > MAX_SECRET_BITS {
        (None, format!("not computed: 2^{bits} secrets exceeds 2^{MAX_SECRET_BITS}"))
    } else {
        (Some(bayes_optimal_advantage(&cfg)?), "exact".to_string())
    };
    match format {
        OutputFormat::Json => Ok(Body::Json(json!({
            "config": cfg,
            "game": result,
            "bayes_optimal_advantage": bayes,
            "bayes_status": status,
        }))),
        OutputFormat::Text => {
            let mut out = format!(
                "{} on {} (k={}, n={}, q={}, λ={}): advantage {:.4} ± {:.4} over {} trials\n",
                result.adversary,
                cfg.cipher,
                cfg.key_bits,
                cfg.block_bits,
                cfg.rounds,
                cfg.lambda,
                result.advantage,
                result.halfwidth,
                result.trials
            );
            match bayes {
                Some(b) => {
                    let _ = writeln!(out, "optimal advantage {b:.6}");
                }
                None => {
                    let _ = writeln!(out, "optimal advantage {status}");
                }
            }
            Ok(Body::Text(out))
        }
        other => Err(unsupported("lr-game", other, &["json", "text"])),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn load_instance(
    args: &SimulateArgs,
    seed: u64,
    inputs: &mut Inputs,
) -> Result<(JointDistribution, Vec<DistinguisherTable>), CliError> {
    match (&args.dist, &args.family) {
        (Some(dp), Some(fp)) => {
            let dtext = inputs.read(dp)?;
            let dist = if is_csv(dp) { read_distribution_csv(&dtext, args.lambda)? } else { parse_json(dp, &dtext)? };
            let ftext = inputs.read(fp)?;
            let family = if is_csv(fp) { read_family_csv(&ftext, args.lambda)? } else { parse_json(fp, &ftext)? };
            Ok((dist, family))
        }
        (None, None) => Ok(tsr_core::simulator::benchmark_instance(&benchmark_spec(args, seed))?),
        _ => Err(CliError::Usage("--dist and --family go together".into())),
    }
}

fn benchmark_spec(args: &SimulateArgs, seed: u64) -> BenchmarkSpec {
    BenchmarkSpec {
        x_bits: args.x_bits,
        lambda: args.lambda,
        family_size: args.family_size,
        boolean: !args.real_valued,
        seed: derive_seed(seed, "benchmark"),
    }
}

pub fn simulate(args: &SimulateArgs, format: OutputFormat, seed: u64, inputs: &mut Inputs) -> Result<Body, CliError> {
    let sparsify_seed = derive_seed(seed, "sparsify");
    if args.sweep {
        if args.dist.is_some() {
            return Err(CliError::Usage("--sweep generates its own instances; drop --dist/--family".into()));
        }
        let rows = simulate_sweep(&benchmark_spec(args, seed), &args.lambdas, &args.epss, sparsify_seed)?;
        return match format {
            OutputFormat::Csv => Ok(Body::Text(sweep_to_csv(&rows)?)),
            OutputFormat::Json => Ok(Body::Json(to_value(&rows))),
            other => Err(unsupported("simulate --sweep", other, &["csv", "json"])),
        };
    }
    let (dist, family) = load_instance(args, seed, inputs)?;
    let report = full_simulator(&dist, &family, args.eps, sparsify_seed)?;
    match format {
        OutputFormat::Json => Ok(Body::Json(to_value(&report))),
        OutputFormat::Csv => Ok(Body::Text(sweep_to_csv(&[SweepRow {
            lambda: report.lambda,
            eps: report.eps,
            rounds: report.rounds,
            advantage: report.advantage,
            complexity_units: report.complexity_units,
        }])?)),
        other => Err(unsupported("simulate", other, &["json", "csv"])),
    }
}
