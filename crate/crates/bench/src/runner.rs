//! Runs configured planners on seeded episode sets.

use std::sync::Arc;
use std::time::Instant;

use hsp_core::baselines::{run_controller, RhcController, UctController};
use hsp_core::dreamr::{
    generate_scenario, goal_space, ArrivalModel, DoubleIntegratorModel, DreamrHooks, DreamrSwitch, DreamrWorld, Scenario,
};
use hsp_core::executive::run_episode;
use hsp_core::global::{LocalLayer, ModePolicy};
use hsp_core::model::{Clock, NullClock, StepRecord};
use hsp_core::{CostToGoTable, EpisodeResult, ExecError, ModeId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, BenchConfig, EpisodeSet};

/// Offsets of the planner and environment random streams from the
/// scenario seed.
pub const PLANNER_STREAM: u64 = 1000;
pub const ENV_STREAM: u64 = 2000;

/// Monotonic wall clock.
pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now_ns(&self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}

/// One CSV row: the outcome of one algorithm on one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub set: usize,
    pub episode: u32,
    pub seed: u64,
    pub algorithm: String,
    pub cost: f64,
    pub switches: u32,
    pub steps: u32,
    pub reached: bool,
    pub failed_switches: u32,
    pub preemptions: u32,
    pub plans: u32,
    pub plan_ms_mean: f64,
    pub plan_ms_median: f64,
    pub decisions: u32,
    pub decision_ms_mean: f64,
    pub decision_ms_median: f64,
}

/// Mean and median in milliseconds; zero for an empty list.
fn ms_stats(ns: &[u64]) -> (f64, f64) {
    if ns.is_empty() {
        return (0.0, 0.0);
    }
    let ms: Vec<f64> = ns.iter().map(|v| *v as f64 / 1e6).collect();
    (ms.iter().sum::<f64>() / ms.len() as f64, median(ms))
}

/// Median (mean of the middle pair for even lengths); `NaN` when empty.
pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

impl EpisodeRow {
    pub fn from_result(set: usize, episode: u32, seed: u64, algorithm: String, r: &EpisodeResult<DreamrSwitch>) -> Self {
        let (plan_ms_mean, plan_ms_median) = ms_stats(&r.plan_times_ns);
        let (decision_ms_mean, decision_ms_median) = ms_stats(&r.decision_times_ns);
        Self {
            set,
            episode,
            seed,
            algorithm,
            cost: r.cumulative_cost,
            switches: r.switch_count,
            steps: r.steps_taken,
            reached: r.reached_goal,
            failed_switches: r.failed_switches,
            preemptions: r.preemptions,
            plans: r.plan_times_ns.len() as u32,
            plan_ms_mean,
            plan_ms_median,
            decisions: r.decision_times_ns.len() as u32,
            decision_ms_mean,
            decision_ms_median,
        }
    }
}

/// Row plus the trajectory, when step logging is on.
#[derive(Clone, Debug)]
pub struct EpisodeRun {
    pub row: EpisodeRow,
    pub log: Vec<StepRecord<DreamrSwitch>>,
}

/// Preprocessed tables and the configuration, shared by all episodes.
pub struct Bench {
    pub cfg: BenchConfig,
    layer: LocalLayer,
}

impl Bench {
    pub fn new(cfg: BenchConfig, model: DoubleIntegratorModel, table: CostToGoTable) -> Self {
        let layer = LocalLayer::new(vec![
            ModePolicy::Table {
                table,
                model: Box::new(model),
            },
            // One epoch of riding costs its time.
            ModePolicy::Passive { step_cost: 1.0 },
        ]);
        Self { cfg, layer }
    }

    pub fn table(&self) -> &CostToGoTable {
        self.layer.table(ModeId(0)).expect("Move table")
    }

    pub fn scenario(&self, set: &EpisodeSet, episode: u32) -> Scenario {
        let seed = self.cfg.seed + episode as u64;
        generate_scenario(&self.cfg.scenario_config(set), &self.cfg.dreamr, seed)
    }

    pub fn arrival(&self, set: &EpisodeSet) -> Arc<ArrivalModel> {
        Arc::new(ArrivalModel::new(set.perturb_p, self.cfg.hsp.arrival_max_eta))
    }

    /// Runs one algorithm on one episode of `set` (1-based index `set_no`).
    pub fn run_one(
        &self,
        set_no: usize,
        set: &EpisodeSet,
        arrival: &Arc<ArrivalModel>,
        algo: &Algorithm,
        episode: u32,
    ) -> Result<EpisodeRun, ExecError> {
        let cfg = &self.cfg;
        let sc = self.scenario(set, episode);
        let params = cfg.dreamr.clone();
        let horizon = cfg.hsp.context_horizon;
        let mut world = DreamrWorld::new(&sc, params.clone(), horizon);
        let goal = goal_space(&sc, &params);
        let mut pr = ChaCha8Rng::seed_from_u64(sc.seed + PLANNER_STREAM);
        let mut er = ChaCha8Rng::seed_from_u64(sc.seed + ENV_STREAM);
        let wall = WallClock::new();
        let clock: &dyn Clock = if cfg.output.timing { &wall } else { &NullClock };
        let logs = cfg.output.step_logs;
        let r = match algo {
            Algorithm::Hsp { beta } => {
                let hooks = DreamrHooks::new(params, horizon, sc.goal, arrival.clone());
                run_episode(&hooks, &self.layer, &cfg.executive(*beta), &mut world, &goal, &mut pr, &mut er, clock)?
            }
            Algorithm::Uct(i) => {
                let mut ctrl = UctController {
                    params: cfg.uct[*i].clone(),
                    dparams: params,
                    table: self.table(),
                    goal: sc.goal,
                };
                run_controller(&mut ctrl, &mut world, &goal, cfg.step_cap, logs, &mut pr, &mut er, clock)?
            }
            Algorithm::Rhc => {
                let mut ctrl = RhcController::new(cfg.rhc.clone(), params, goal.clone());
                run_controller(&mut ctrl, &mut world, &goal, cfg.step_cap, logs, &mut pr, &mut er, clock)?
            }
        };
        Ok(EpisodeRun {
            row: EpisodeRow::from_result(set_no, episode, sc.seed, algo.name(), &r),
            log: r.per_step_log,
        })
    }

    /// Every algorithm on every episode of set `set_no`, in parallel. Output
    /// is ordered by algorithm, then episode, whatever the completion order.
    pub fn run_set(&self, set_no: usize, algos: &[Algorithm]) -> Result<Vec<EpisodeRun>, ExecError> {
        let set = &self.cfg.sets[set_no - 1];
        let arrival = self.arrival(set);
        let n = self.cfg.episode_count();
        let jobs: Vec<(&Algorithm, u32)> = algos.iter().flat_map(|a| (0..n).map(move |e| (a, e))).collect();
        jobs.par_iter()
            .map(|(a, e)| self.run_one(set_no, set, &arrival, a, *e))
            .collect()
    }
}
