//! Cipher traces against hand-unrolled dataflow graphs.
//!
//! Each oracle below names every wire of the construction explicitly and
//! splits `F`'s output by hand, without going through the cipher module.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsr_core::cipher::{generate_keystream, CipherState, Css10State, Ctrsa13State, Ec09State, LeakagePlan, PublicSeq};
use tsr_core::wprf::{make_toy_wprf, SharedPrf, ToyWprf, WeakPrf};
use tsr_core::BitString;

struct Instance {
    k: usize,
    n: usize,
    f: ToyWprf,
    g: ToyWprf,
    k0: u64,
    k1: u64,
    x0: u64,
    p: Vec<u64>,
    s: u64,
}

fn instance(rng: &mut ChaCha8Rng) -> Instance {
    let k = rng.gen_range(4..=12);
    let n = rng.gen_range(4..=12);
    let mask = |b: usize| (1u64 << b) - 1;
    Instance {
        k,
        n,
        f: make_toy_wprf(k, n, k + n, rng.gen()).unwrap(),
        g: make_toy_wprf(n, 16, n, rng.gen()).unwrap(),
        k0: rng.gen::<u64>() & mask(k),
        k1: rng.gen::<u64>() & mask(k),
        x0: rng.gen::<u64>() & mask(n),
        p: (0..6).map(|_| rng.gen::<u64>() & mask(n)).collect(),
        s: rng.gen::<u64>() & mask(n),
    }
}

/// `F(key, input)` as `(next key, public part)` integers.
fn f_split(inst: &Instance, key: u64, input: u64) -> (u64, u64) {
    let out = inst.f.lookup(key, input);
    (out >> inst.n, out & ((1 << inst.n) - 1))
}

fn ec09_oracle(i: &Instance) -> Vec<u64> {
    let (k2, x1) = f_split(i, i.k0, i.x0);
    let (k3, x2) = f_split(i, i.k1, x1);
    let (k4, x3) = f_split(i, k2, x2);
    let (k5, x4) = f_split(i, k3, x3);
    let (k6, x5) = f_split(i, k4, x4);
    let (_k7, x6) = f_split(i, k5, x5);
    let _ = k6;
    vec![x1, x2, x3, x4, x5, x6]
}

fn css10_oracle(i: &Instance, p: &[u64]) -> Vec<u64> {
    let (k1, x0) = f_split(i, i.k0, p[0]);
    let (k2, x1) = f_split(i, k1, p[1]);
    let (k3, x2) = f_split(i, k2, p[2]);
    let (k4, x3) = f_split(i, k3, p[3]);
    let (k5, x4) = f_split(i, k4, p[4]);
    let (_k6, x5) = f_split(i, k5, p[5]);
    vec![x0, x1, x2, x3, x4, x5]
}

fn ctrsa13_oracle(i: &Instance) -> Vec<u64> {
    let p: Vec<u64> = (0..6).map(|ctr| i.g.lookup(i.s, ctr)).collect();
    css10_oracle(i, &p)
}

fn blocks(trace: &tsr_core::cipher::KeystreamTrace) -> Vec<u64> {
    trace.blocks.iter().map(BitString::to_u64).collect()
}

fn run(state: CipherState, f: &dyn WeakPrf) -> tsr_core::cipher::KeystreamTrace {
    let mut state = state;
    generate_keystream(&mut state, f, 6, &mut LeakagePlan::none(), 0).unwrap()
}

#[test]
fn six_round_traces_match_the_dataflow_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let i = instance(&mut rng);
        let b = |v: u64, w: usize| BitString::from_u64(v, w);

        let ec = CipherState::Ec09(Ec09State::new(b(i.k0, i.k), b(i.k1, i.k), b(i.x0, i.n)).unwrap());
        assert_eq!(blocks(&run(ec, &i.f)), ec09_oracle(&i));

        let p: Vec<BitString> = i.p.iter().map(|&v| b(v, i.n)).collect();
        let css = CipherState::Css10(Css10State::new(b(i.k0, i.k), PublicSeq::provided(p)));
        assert_eq!(blocks(&run(css, &i.f)), css10_oracle(&i, &i.p));

        let g: SharedPrf = Arc::new(i.g.clone());
        let ctr = CipherState::Ctrsa13(Ctrsa13State::new(b(i.k0, i.k), b(i.s, i.n), g.clone()).unwrap());
        let ctr_trace = run(ctr, &i.f);
        assert_eq!(blocks(&ctr_trace), ctrsa13_oracle(&i));

        // Pre-expanding G(s, i) into CSS10 yields the identical trace.
        let expanded: Vec<BitString> = (0..6).map(|c| g.evaluate(&b(i.s, i.n), &b(c, 16))).collect();
        let css = CipherState::Css10(Css10State::new(b(i.k0, i.k), PublicSeq::provided(expanded)));
        let css_trace = run(css, &i.f);
        assert_eq!(css_trace.blocks, ctr_trace.blocks);
        assert_eq!(css_trace.leakages, ctr_trace.leakages);
        assert_eq!(css_trace.touched, ctr_trace.touched);
    }
}

#[test]
fn ec09_key_and_block_widths_are_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let i = instance(&mut rng);
        let b = |v: u64, w: usize| BitString::from_u64(v, w);
        let ec = CipherState::Ec09(Ec09State::new(b(i.k0, i.k), b(i.k1, i.k), b(i.x0, i.n)).unwrap());
        let trace = run(ec, &i.f);
        for t in &trace.touched {
            assert_eq!(t.read_key.len(), i.k);
            assert_eq!(t.written_key.len(), i.k);
            assert_eq!(t.public_input.len(), i.n);
        }
        assert!(trace.blocks.iter().all(|x| x.len() == i.n));
        // Slots alternate 0, 1, 0, 1, ...
        let slots: Vec<usize> = trace.touched.iter().map(|t| t.slot).collect();
        assert_eq!(slots, vec![0, 1, 0, 1, 0, 1]);
    }
}

#[test]
fn css10_three_rounds_with_recorded_public_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let i = instance(&mut rng);
    let mut state = CipherState::Css10(Css10State::new(BitString::from_u64(i.k0, i.k), PublicSeq::seeded(5, i.n)));
    let trace = generate_keystream(&mut state, &i.f, 3, &mut LeakagePlan::none(), 0).unwrap();
    let recorded: Vec<u64> = trace.touched.iter().map(|t| t.public_input.to_u64()).collect();
    let mut padded = recorded.clone();
    padded.extend([0, 0, 0]);
    assert_eq!(blocks(&trace), css10_oracle(&i, &padded)[..3].to_vec());
}

#[test]
fn ctrsa13_four_rounds_and_seed_determinism() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let i = instance(&mut rng);
    let g: SharedPrf = Arc::new(i.g.clone());
    let mut state = CipherState::Ctrsa13(
        Ctrsa13State::new(BitString::from_u64(i.k0, i.k), BitString::from_u64(i.s, i.n), g).unwrap(),
    );
    let trace = generate_keystream(&mut state, &i.f, 4, &mut LeakagePlan::none(), 0).unwrap();
    assert_eq!(blocks(&trace), ctrsa13_oracle(&i)[..4].to_vec());
    for (c, t) in trace.touched.iter().enumerate() {
        assert_eq!(t.public_input.to_u64(), i.g.lookup(i.s, c as u64));
    }
}
