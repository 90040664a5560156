//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints its own PASS/FAIL line; exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::time::Instant;

use common::*;
use hsp_bench::{aggregate, compare_sets, paired_sign_test, Algorithm, Bench, BenchConfig, EpisodeRow};
use hsp_core::baselines::dpw::widening_limit;
use hsp_core::baselines::uct::{DreamrUctModel, UctState};
use hsp_core::baselines::{DpwTree, GenerativeModel};
use hsp_core::dreamr::{build_move_table, generate_scenario, DreamrParams, DreamrWorld, ScenarioConfig, TableSpec};
use hsp_core::executive::Environment;
use hsp_core::global::{global_plan, PlanNode, SearchConfig};
use hsp_core::local::{evaluate_policy, horizon_from_progress, should_preempt};
use hsp_core::model::{GoalSpace, HybridState, ModeId};
use hsp_core::oracle::decompose_policy_value;
use hsp_core::HorizonDist;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn vi_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let n = rng.random_range(2..=6);
        let a = rng.random_range(1..=3);
        let k = rng.random_range(1..=5);
        let mdp = random_mdp(&mut rng, n, a);
        let phi = rng.random_range(0.0..30.0);
        let table = vi_table(&mdp, phi, k, false);
        for depth in 0..=k {
            for s in 0..n {
                worst = worst.max((table.layer(depth)[s] - expectimax(&mdp, s, depth, phi)).abs());
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(worst <= 1e-9 && secs < 10.0, format!("max |VI − expectimax| = {worst:.2e}, {secs:.3} s"))
}

fn decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let n = rng.random_range(2..=6);
        let a = rng.random_range(1..=3);
        let k = rng.random_range(0..=5);
        let mdp = random_mdp(&mut rng, n, a);
        let phi = rng.random_range(0.0..30.0);
        let policy: Vec<usize> = (0..n).map(|_| rng.random_range(0..a)).collect();
        let values = evaluate_policy(&mdp, &mdp.grid(), &policy, phi, k).unwrap();
        for (s, v) in values.iter().enumerate() {
            let d = decompose_policy_value(&mdp, &policy, s, k).unwrap();
            worst = worst.max((v - d.total(phi)).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.2e} over 25 instances"))
}

fn random_window(rng: &mut impl Rng, k: u32) -> HorizonDist {
    let lo = rng.random_range(1..=k);
    let hi = rng.random_range(lo..=k);
    let w: Vec<f64> = (lo..=hi).map(|_| rng.random_range(0.01..1.0)).collect();
    HorizonDist::from_weights(lo, w).unwrap()
}

fn preemption() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let (mut violations, mut fired, mut triples) = (0, 0, 0);
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let a = rng.random_range(1..=3);
        let mdp = random_mdp(&mut rng, n, a);
        let k = rng.random_range(1..=8);
        let table = vi_table(&mdp, rng.random_range(0.0..30.0), k, false);
        for _ in 0..200 {
            let rel = [rng.random_range(-0.5..n as f64 - 0.5)];
            let p = random_window(&mut rng, k);
            let b1 = rng.random_range(0.0..=1.0);
            let b2 = rng.random_range(b1..=1.0);
            let hi = should_preempt(&table, &rel, &p, b2);
            fired += hi as u32;
            if hi && !should_preempt(&table, &rel, &p, b1) {
                violations += 1;
            }
            triples += 1;
        }
    }
    outcome(violations == 0, format!("{triples} triples, {fired} fire at β₂, {violations} violations"))
}

fn horizon_selection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut bad = 0;
    for _ in 0..100 {
        let delta: f64 = rng.random_range(0.01..0.99);
        let eps: f64 = rng.random_range(1e-6..0.99);
        let k = horizon_from_progress(delta, eps).unwrap();
        if delta.powi(k as i32) > eps || (k > 1 && delta.powi(k as i32 - 1) <= eps) {
            bad += 1;
        }
    }
    let half = horizon_from_progress(0.5, 0.1).unwrap();
    outcome(bad == 0 && half == 4, format!("{bad} of 100 pairs wrong; δ=0.5, ε=0.1 → K={half}"))
}

fn search_soundness() -> Outcome {
    let search = SearchConfig {
        samples: 4,
        quantum: 1e-6,
        max_expansions: 1_000_000,
    };
    let (mut mismatches, mut switched) = (0, 0);
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let modes = rng.random_range(2..=4u16);
        let mut hooks = GraphHooks::new(500 + seed, modes);
        hooks.candidates = 4;
        let weights = LinearWeights {
            unit: (0..modes).map(|_| rng.random_range(0.2..3.0)).collect(),
        };
        let start = HybridState::new(ModeId(0), vec![rng.random_range(0..=hooks.span) as f64]);
        let goal = GoalSpace::new(
            ModeId(rng.random_range(0..modes)),
            vec![rng.random_range(0..=hooks.span) as f64],
            0.0,
            1,
        )
        .unwrap();
        let mut best = f64::INFINITY;
        let node = PlanNode {
            state: start.clone(),
            elapsed: 0,
        };
        enumerate_best(&hooks, &weights, &goal, &unit_context(), 4, &node, 0.0, usize::MAX, &mut best);
        let mut prng = ChaCha8Rng::seed_from_u64(0);
        let got = global_plan(&start, &goal, &unit_context(), &hooks, &weights, &search, &mut prng).unwrap();
        let g = got.as_ref().map_or(f64::INFINITY, |p| p.cost);
        if g != best {
            mismatches += 1;
        }
        switched += got.is_some_and(|p| p.num_switches() > 0) as u32;
    }
    outcome(mismatches == 0, format!("{mismatches} of 50 differ from enumeration ({switched} use switches)"))
}

fn generator() -> Outcome {
    let params = DreamrParams::default();
    let cfg = ScenarioConfig {
        routes_min: 50,
        routes_max: 200,
        perturb_p: 0.75,
    };
    let (mut routes, mut bad) = (0, 0);
    for seed in 0..1000 {
        for r in generate_scenario(&cfg, &params, seed).routes {
            routes += 1;
            let n = r.waypoints.len();
            if !(5..=15).contains(&n) || !(100.0..=900.0).contains(&r.duration_s) || r.endpoint_separation() <= 0.2 {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{bad} of {routes} routes out of bounds"))
}

/// Counts the simulations and checks the widening report after each batch.
fn dpw_check<M: GenerativeModel>(tree: &mut DpwTree<M>, rng: &mut dyn RngCore) -> (usize, usize) {
    let mut violations = 0;
    for _ in 0..20 {
        tree.search(500, rng);
        violations += tree.widening_report().violations;
    }
    (violations, tree.widening_report().max_actions)
}

fn dpw_bound(bench: &Bench) -> Outcome {
    let params = &bench.cfg.dreamr;
    let table = bench.table();
    let sc = bench.scenario(&bench.cfg.sets[0], 0);
    let world = DreamrWorld::new(&sc, params.clone(), bench.cfg.hsp.context_horizon);
    let mut total = 0;
    let mut details = Vec::new();
    for (i, p) in bench.cfg.uct.iter().enumerate() {
        let model = DreamrUctModel::new(params, table, world.snapshot(), sc.goal, p.depth);
        let root = UctState {
            state: world.state().clone(),
            t: 0,
        };
        let mut tree = DpwTree::new(&model, p.clone(), root);
        let (v, max_a) = dpw_check(&mut tree, &mut ChaCha8Rng::seed_from_u64(i as u64));
        total += v;
        details.push(format!("uct{}: {} nodes, ≤{} actions (bound {})", i + 1, tree.num_nodes(), max_a, widening_limit(p.k_a, p.alpha_a, 10_000)));
    }
    outcome(total == 0, format!("10⁴ simulations per variant, {total} violations; {}", details.join("; ")))
}

fn mean_of(rows: &[EpisodeRow], name: &str) -> f64 {
    let v: Vec<f64> = rows.iter().filter(|r| r.algorithm == name).map(|r| r.cost).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "value iteration matches expectimax", vi_oracle()),
        (2, "reach/stage-cost decomposition", decomposition()),
        (3, "pre-emption monotone in β", preemption()),
        (4, "horizon selection", horizon_selection()),
        (5, "search matches enumeration", search_soundness()),
        (11, "scenario generator bounds", generator()),
    ];

    let t0 = Instant::now();
    let cfg = BenchConfig::default();
    cfg.validate().unwrap();
    let (model, table) = build_move_table(&cfg.dreamr, &cfg.table).unwrap();
    eprintln!("Move table ({} points, K = {}) in {:.1?}", table.num_points(), table.horizon, t0.elapsed());
    assert_eq!(cfg.table, TableSpec::default());
    let bench = Bench::new(cfg, model, table);
    results.push((12, "DPW child bound", dpw_bound(&bench)));

    let t1 = Instant::now();
    let set1_algos = bench.cfg.algorithm_list().unwrap();
    let set1: Vec<EpisodeRow> = bench.run_set(1, &set1_algos).unwrap().into_iter().map(|r| r.row).collect();
    eprintln!("set 1: {} episodes in {:.1?}", set1.len(), t1.elapsed());
    let rep1 = aggregate(&set1);
    eprint!("{}", rep1.table());

    let hsp = "hsp-0.75";
    let baselines = ["uct1", "uct2", "uct3", "rhc"];
    let mut pass6 = true;
    let mut d6 = Vec::new();
    for b in baselines {
        let t = paired_sign_test(&set1, hsp, b).unwrap();
        let (mh, mb) = (mean_of(&set1, hsp), mean_of(&set1, b));
        pass6 &= mh < mb && t.p_value < 0.05;
        d6.push(format!("{b} {mb:.1} (W{}/L{}/T{}, p={:.1e})", t.wins, t.losses, t.ties, t.p_value));
    }
    results.push((6, "HSP cheaper than every baseline", outcome(pass6, format!("HSP {:.1} vs {}", mean_of(&set1, hsp), d6.join(", ")))));

    let sw = |n: &str| rep1.get(n).unwrap().mean_switches;
    let uct_max = ["uct1", "uct2", "uct3"].map(sw).into_iter().fold(0.0, f64::max);
    let pass7 = sw(hsp) >= 1.0 && sw(hsp) >= 10.0 * uct_max && (sw("rhc") - sw(hsp)).abs() <= 0.5 * sw(hsp);
    results.push((
        7,
        "mode-switch counts",
        outcome(pass7, format!("HSP {:.2}, max UCT {:.2}, RHC {:.2}", sw(hsp), uct_max, sw("rhc"))),
    ));

    let betas = ["hsp-0.55", "hsp-0.75", "hsp-0.95"].map(|n| mean_of(&set1, n));
    let mut spread: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            spread = spread.max((betas[i] - betas[j]).abs() / betas[i].min(betas[j]));
        }
    }
    results.push((
        8,
        "β-insensitivity",
        outcome(spread < 0.05, format!("means {:.1}/{:.1}/{:.1}, max pairwise {:.2}%", betas[0], betas[1], betas[2], 100.0 * spread)),
    ));

    let t2 = Instant::now();
    let pair = [Algorithm::Hsp { beta: 0.75 }, Algorithm::Rhc];
    let set2: Vec<EpisodeRow> = bench.run_set(2, &pair).unwrap().into_iter().map(|r| r.row).collect();
    let set3: Vec<EpisodeRow> = bench.run_set(3, &pair).unwrap().into_iter().map(|r| r.row).collect();
    eprintln!("sets 2/3: {} episodes in {:.1?}", set2.len() + set3.len(), t2.elapsed());
    let cmp = compare_sets(&set2, &set3).unwrap();
    let change = |n: &str| cmp.iter().find(|c| c.algorithm == n).unwrap().relative_decrease;
    results.push((
        9,
        "robustness between sets 2 and 3",
        outcome(
            change(hsp).abs() < change("rhc").abs(),
            format!("HSP {:+.2}%, RHC {:+.2}%", 100.0 * change(hsp), 100.0 * change("rhc")),
        ),
    ));

    let mut pass10 = true;
    let mut d10 = Vec::new();
    for rep in [rep1, aggregate(&set2), aggregate(&set3)] {
        for a in rep.algorithms.iter().filter(|a| a.algorithm.starts_with("hsp")) {
            pass10 &= a.median_plan_ms < 2000.0 && a.median_decision_ms < 100.0;
        }
        let h = rep.get(hsp).unwrap();
        d10.push(format!("plan {:.1} ms / decide {:.2} ms", h.median_plan_ms, h.median_decision_ms));
    }
    results.push((10, "timing medians", outcome(pass10, format!("HSP sets 1–3: {}", d10.join(", ")))));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, name, o) in &results {
        println!("criterion {id:>2} {:<4} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as u32;
    }
    println!("{} of {} criteria passed", results.len() as u32 - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
