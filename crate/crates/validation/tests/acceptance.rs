//! Acceptance criteria. Prints one `[PASS]` or `[FAIL]` line per criterion
//! and exits nonzero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;

use common::{absorbed_exact, arb_instance, arb_multigraph, brute_assortativity, build_instance, triples};
use consensus_core::dynamics;
use consensus_core::experiments::{
    self, summarize, GroupField, Summary, SweepConfig, DEFAULT_CONSENSUS_BAND,
};
use consensus_core::ingest::{self, powerlaw_fit, powerlaw_fit_histogram};
use consensus_core::netgen::{self, GenConfig};
use consensus_core::rewire::{self, RewireConfig};
use consensus_core::{DirectedMultigraph, Direction};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MASTER_SEED: u64 = 20_160_301;
const BY_CELL: [GroupField; 3] = [GroupField::RTarget, GroupField::NTh, GroupField::P];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn threshold_sweep() -> Summary {
    let cfg = SweepConfig {
        r_targets: vec![0.0],
        n_th_values: vec![2, 5, 10, 100],
        p_values: vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
        replicates: 50,
        master_seed: MASTER_SEED,
        ..Default::default()
    };
    sweep_summary(&cfg)
}

fn mixing_sweep() -> Summary {
    let cfg = SweepConfig {
        r_targets: vec![-0.1, 0.0, 0.1],
        n_th_values: vec![5, 100],
        p_values: vec![0.4, 0.5, 0.6],
        replicates: 50,
        master_seed: MASTER_SEED,
        ..Default::default()
    };
    sweep_summary(&cfg)
}

fn sweep_summary(cfg: &SweepConfig) -> Summary {
    let rows = experiments::run_sweep(cfg).expect("sweep");
    let flagged = rows.iter().filter(|r| !r.is_ok()).count();
    assert_eq!(flagged, 0, "{flagged} flagged rows");
    summarize(&rows, &BY_CELL, DEFAULT_CONSENSUS_BAND).expect("summary")
}

fn cell(s: &Summary, r: f64, n_th: usize, p: f64) -> &experiments::SummaryRow {
    s.find(&[r, n_th as f64, p]).expect("cell present")
}

fn c1_final_opinion(threshold_grid: &Summary) -> Verdict {
    let mut bad = Vec::new();
    for n_th in [2, 100] {
        for p in [0.2, 0.3, 0.4] {
            let m = cell(threshold_grid, 0.0, n_th, p).s_bar.median;
            if m >= 0.1 {
                bad.push(format!("N_th={n_th} p={p} median={m:.4}"));
            }
        }
        for p in [0.6, 0.7, 0.8] {
            let m = cell(threshold_grid, 0.0, n_th, p).s_bar.median;
            if m <= 0.9 {
                bad.push(format!("N_th={n_th} p={p} median={m:.4}"));
            }
        }
    }
    verdict(bad.is_empty(), if bad.is_empty() { "all 12 medians on the right side".into() } else { bad.join("; ") })
}

fn c2_fixation_time(threshold_grid: &Summary) -> Verdict {
    let mut bad = Vec::new();
    let mut at_half = Vec::new();
    for n_th in [2, 5, 10, 100] {
        let t = |p| cell(threshold_grid, 0.0, n_th, p).t_f_sweeps.median;
        let (lo, mid, hi) = (t(0.2), t(0.5), t(0.8));
        if !(mid > lo && mid > hi) {
            bad.push(format!("N_th={n_th} peak fails ({lo}, {mid}, {hi})"));
        }
        at_half.push(mid);
    }
    if at_half.windows(2).any(|w| w[1] < w[0]) {
        bad.push(format!("median t_F at p=0.5 over N_th 2,5,10,100 = {at_half:?}"));
    }
    verdict(bad.is_empty(), if bad.is_empty() { format!("p=0.5 medians {at_half:?}") } else { bad.join("; ") })
}

fn c3_consensus_rate(mixing_grid: &Summary) -> Verdict {
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for n_th in [5, 100] {
        for p in [0.4, 0.5, 0.6] {
            let rate = |r| cell(mixing_grid, r, n_th, p).consensus_rate;
            let (neg, zero, pos) = (rate(-0.1), rate(0.0), rate(0.1));
            seen.push(format!("N_th={n_th} p={p}: {neg:.2}/{zero:.2}/{pos:.2}"));
            if !(neg >= zero && zero >= pos) {
                bad.push(format!("order N_th={n_th} p={p}"));
            }
            if p == 0.5 && neg - pos < 0.1 {
                bad.push(format!("gap N_th={n_th} = {:.2}", neg - pos));
            }
        }
    }
    let detail = format!("{}; rates r=-0.1/0/+0.1 {}", if bad.is_empty() { "ok".into() } else { bad.join(", ") }, seen.join(", "));
    verdict(bad.is_empty(), detail)
}

fn c4_neutral_minimum(mixing_grid: &Summary) -> Verdict {
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for n_th in [5, 100] {
        let t = |r| cell(mixing_grid, r, n_th, 0.5).t_f_sweeps.median;
        let (neg, zero, pos) = (t(-0.1), t(0.0), t(0.1));
        seen.push(format!("N_th={n_th}: {neg}/{zero}/{pos}"));
        if !(zero <= neg && zero <= pos) {
            bad.push(format!("N_th={n_th}"));
        }
    }
    let detail = format!("median t_F r=-0.1/0/+0.1 {}{}", seen.join(", "), if bad.is_empty() { String::new() } else { format!("; fails at {}", bad.join(", ")) });
    verdict(bad.is_empty(), detail)
}

fn default_graphs() -> Vec<DirectedMultigraph> {
    (0..20)
        .map(|seed| netgen::generate(&GenConfig { seed, ..Default::default() }).expect("generate"))
        .collect()
}

fn c5_rewiring(graphs: &[DirectedMultigraph]) -> Verdict {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (seed, g) in graphs.iter().enumerate() {
        for target in [-0.1, 0.1] {
            match rewire::rewire_seeded(g, &RewireConfig::new(target, seed as u64)) {
                Ok(out) => {
                    let err = (out.achieved_r - target).abs();
                    worst = worst.max(err);
                    let recomputed = out.graph.assortativity().unwrap_or(f64::NAN);
                    if err > 0.005 || (recomputed - out.achieved_r).abs() > 1e-9 {
                        bad.push(format!("seed {seed} target {target}: r={}", out.achieved_r));
                    }
                    if out.graph.degrees() != g.degrees() {
                        bad.push(format!("seed {seed} target {target}: degrees changed"));
                    }
                }
                Err(e) => bad.push(format!("seed {seed} target {target}: {e}")),
            }
        }
    }
    verdict(bad.is_empty(), if bad.is_empty() { format!("40 rewirings, worst |r - target| = {worst:.5}") } else { bad.join("; ") })
}

fn c6_generator(graphs: &[DirectedMultigraph]) -> Verdict {
    let ok = graphs.iter().all(|g| {
        g.node_count() == 1000
            && g.degree_sequence(Direction::In).iter().all(|&d| d == 17)
            && g.degree_sequence(Direction::Out).iter().sum::<u64>() == 17_000
    });
    verdict(ok, format!("{} graphs checked", graphs.len()))
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config::with_cases(cases), TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn c7_oracles() -> Verdict {
    let mut notes = Vec::new();
    let r = runner(100).run(&arb_multigraph(20, 60), |(n, edges)| {
        let g = DirectedMultigraph::from_weighted_edges(n, edges.iter().copied()).unwrap();
        match (g.assortativity().ok(), brute_assortativity(n, &triples(&g))) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12, "{a} vs {b}"),
            (None, None) => {}
            (a, b) => panic!("defined-ness differs: {a:?} vs {b:?}"),
        }
        Ok(())
    });
    if let Err(e) = r {
        notes.push(format!("assortativity: {e}"));
    }
    let r = runner(100).run(&arb_instance(10, 30), |(n, edges, n_th, opinions, levels)| {
        let (g, s, th) = build_instance(n, &edges, n_th, &opinions, &levels);
        assert_eq!(dynamics::is_absorbed(&g, &s, &th), absorbed_exact(n_th, &edges, &opinions, &levels));
        Ok(())
    });
    if let Err(e) = r {
        notes.push(format!("is_absorbed: {e}"));
    }
    let swaps = std::cell::Cell::new(0u64);
    let r = runner(100).run(&arb_multigraph(8, 20), |(n, edges)| {
        let g = DirectedMultigraph::from_weighted_edges(n, edges.iter().copied()).unwrap();
        let Ok(before) = g.assortativity() else { return Ok(()) };
        let inst = g.edge_instances();
        for i in 0..inst.len() {
            for j in 0..inst.len() {
                let ((a, b), (c, d)) = (inst[i], inst[j]);
                if i == j || a == d || c == b {
                    continue;
                }
                let mut next = inst.clone();
                next[i] = (a, d);
                next[j] = (c, b);
                let after = brute_assortativity(n, &next.iter().map(|&(s, t)| (s, t, 1)).collect::<Vec<_>>())
                    .expect("degrees unchanged so r stays defined");
                let delta = rewire::swap_delta(&g, inst[i], inst[j]);
                let moved = after - before;
                let agree = if delta == 0.0 { moved.abs() <= 1e-12 } else { moved.signum() == delta.signum() && moved.abs() > 1e-15 };
                assert!(agree, "swap {:?} {:?}: delta {delta}, r moved {moved}", inst[i], inst[j]);
                swaps.set(swaps.get() + 1);
            }
        }
        Ok(())
    });
    if let Err(e) = r {
        notes.push(format!("swap_delta: {e}"));
    }
    let pass = notes.is_empty();
    verdict(pass, if pass { format!("100+100 instances, {} swaps checked", swaps.get()) } else { notes.join("; ") })
}

const REFERENCE_CASCADE: &str = r#"{"id":"t1","parent_id":null,"author":"A","created_utc":1000,"polarity":0.3}
{"id":"t2","parent_id":"t1","author":"B","created_utc":1001,"polarity":0.1}
{"id":"t3","parent_id":"t1","author":"C","created_utc":1002,"polarity":-0.2}
{"id":"t4","parent_id":"t3","author":"D","created_utc":1003,"polarity":0.0}
{"id":"t5","parent_id":"t1","author":"E","created_utc":1004,"polarity":0.6}
{"id":"t6","parent_id":"t5","author":"F","created_utc":1005,"polarity":-0.4}
{"id":"t7","parent_id":"t6","author":"G","created_utc":1006,"polarity":0.2}
"#;

fn c8_reference_cascade() -> Verdict {
    let forest = ingest::read_cascades(REFERENCE_CASCADE.as_bytes()).expect("parse");
    let (g, authors) = ingest::build_network(&forest).expect("network");
    let mut got: Vec<String> = g
        .edges()
        .iter()
        .map(|e| format!("{}{}x{}", authors.name(e.source), authors.name(e.target), e.weight))
        .collect();
    got.sort();
    let mut want: Vec<String> = ["AB", "AC", "CD", "AD", "AE", "EF", "AF", "FG", "EG", "AG"]
        .iter()
        .map(|p| format!("{p}x1"))
        .collect();
    want.sort();
    let no_bd = !got.iter().any(|e| e.starts_with("BD"));
    verdict(got == want && no_bd, format!("edges {}", got.join(" ")))
}

fn c9_powerlaw() -> Verdict {
    let collinear = powerlaw_fit_histogram((0..8u32).map(|i| (1u64 << i, 1u64 << (3 * (8 - i))))).expect("fit");
    let collinear_ok = (collinear.r_squared - 1.0).abs() <= 1e-9;
    let mut pooled = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    for _ in 0..100 {
        pooled.extend(netgen::sample_raw_outdegrees(&GenConfig::default(), &mut rng).expect("sample"));
    }
    let fit = powerlaw_fit(&pooled).expect("fit");
    let gamma_ok = (fit.gamma_hat - 3.0).abs() <= 0.5;
    verdict(
        collinear_ok && gamma_ok,
        format!(
            "collinear R^2 = {:.12}; pooled gamma_hat = {:.3} (R^2 {:.3}, {} points)",
            collinear.r_squared, fit.gamma_hat, fit.r_squared, fit.points
        ),
    )
}

fn c10_determinism() -> Verdict {
    let cfg = SweepConfig {
        n: 400,
        k_in: 10,
        r_targets: vec![-0.1, 0.0, 0.1],
        n_th_values: vec![2, 100],
        p_values: vec![0.3, 0.5],
        replicates: 4,
        master_seed: MASTER_SEED,
        ..Default::default()
    };
    let csv = |rows: Vec<experiments::ExperimentResult>| {
        let mut buf = Vec::new();
        experiments::write_results(&rows, &mut buf).expect("write");
        buf
    };
    let a = csv(experiments::run_sweep(&cfg).expect("sweep"));
    let b = csv(experiments::run_sweep(&cfg).expect("sweep"));
    let c = csv(experiments::run_sweep_serial(&cfg).expect("sweep"));
    verdict(a == b && a == c, format!("{} bytes, {} rows", a.len(), cfg.cell_count()))
}

fn main() -> ExitCode {
    let threshold_grid = threshold_sweep();
    let mixing_grid = mixing_sweep();
    let graphs = default_graphs();
    let results = [
        ("C1", "final opinion follows the initial majority", c1_final_opinion(&threshold_grid)),
        ("C2", "fixation time peaks at p=0.5 and grows with N_th", c2_fixation_time(&threshold_grid)),
        ("C3", "disassortative mixing favours consensus", c3_consensus_rate(&mixing_grid)),
        ("C4", "neutral mixing minimises fixation time", c4_neutral_minimum(&mixing_grid)),
        ("C5", "rewiring hits +-0.1 and keeps degrees", c5_rewiring(&graphs)),
        ("C6", "generator degree contract", c6_generator(&graphs)),
        ("C7", "oracle equivalence", c7_oracles()),
        ("C8", "reference cascade edges", c8_reference_cascade()),
        ("C9", "power-law fit sanity", c9_powerlaw()),
        ("C10", "determinism", c10_determinism()),
    ];
    let mut failed = 0;
    for (id, name, v) in &results {
        println!("[{}] {id} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
