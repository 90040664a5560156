//! Aggregation of per-episode rows. Everything here is a function of the CSV
//! rows alone.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use thiserror::Error;

use crate::runner::{median, EpisodeRow};

/// Per-algorithm summary of one episode set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub n: usize,
    pub mean_cost: f64,
    /// Sample standard deviation over `√n` (zero for a single episode).
    pub stderr_cost: f64,
    pub mean_switches: f64,
    pub stderr_switches: f64,
    pub reached_rate: f64,
    /// Mean over all global plans in the set.
    pub mean_plan_ms: f64,
    /// Median of the per-episode median plan times (episodes with a plan).
    pub median_plan_ms: f64,
    pub mean_decision_ms: f64,
    pub median_decision_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub algorithms: Vec<AlgorithmSummary>,
}

impl AggregateReport {
    pub fn get(&self, algorithm: &str) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|a| a.algorithm == algorithm)
    }

    /// Fixed-width text table.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<10} {:>5} {:>10} {:>8} {:>8} {:>8} {:>8} {:>10} {:>10}\n",
            "algorithm", "n", "cost", "stderr", "switches", "reached", "plan ms", "decide ms", "med plan"
        );
        for a in &self.algorithms {
            s += &format!(
                "{:<10} {:>5} {:>10.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>10.3} {:>10.2}\n",
                a.algorithm,
                a.n,
                a.mean_cost,
                a.stderr_cost,
                a.mean_switches,
                a.reached_rate,
                a.mean_plan_ms,
                a.mean_decision_ms,
                a.median_plan_ms
            );
        }
        s
    }
}

/// Mean and standard error (sample std / √n).
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Algorithms in order of first appearance.
fn algorithms(rows: &[EpisodeRow]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in rows {
        if !out.contains(&r.algorithm) {
            out.push(r.algorithm.clone());
        }
    }
    out
}

/// Weighted mean of per-episode means; zero when nothing was timed.
fn pooled_mean(rows: &[&EpisodeRow], count: fn(&EpisodeRow) -> u32, mean: fn(&EpisodeRow) -> f64) -> f64 {
    let total: u64 = rows.iter().map(|r| count(r) as u64).sum();
    if total == 0 {
        return 0.0;
    }
    rows.iter().map(|r| count(r) as f64 * mean(r)).sum::<f64>() / total as f64
}

fn median_of(rows: &[&EpisodeRow], count: fn(&EpisodeRow) -> u32, med: fn(&EpisodeRow) -> f64) -> f64 {
    let v: Vec<f64> = rows.iter().filter(|r| count(r) > 0).map(|r| med(r)).collect();
    if v.is_empty() {
        0.0
    } else {
        median(v)
    }
}

pub fn aggregate(rows: &[EpisodeRow]) -> AggregateReport {
    let algorithms = algorithms(rows)
        .into_iter()
        .map(|name| {
            let mine: Vec<&EpisodeRow> = rows.iter().filter(|r| r.algorithm == name).collect();
            let costs: Vec<f64> = mine.iter().map(|r| r.cost).collect();
            let switches: Vec<f64> = mine.iter().map(|r| r.switches as f64).collect();
            let (mean_cost, stderr_cost) = mean_stderr(&costs);
            let (mean_switches, stderr_switches) = mean_stderr(&switches);
            AlgorithmSummary {
                algorithm: name,
                n: mine.len(),
                mean_cost,
                stderr_cost,
                mean_switches,
                stderr_switches,
                reached_rate: mine.iter().filter(|r| r.reached).count() as f64 / mine.len() as f64,
                mean_plan_ms: pooled_mean(&mine, |r| r.plans, |r| r.plan_ms_mean),
                median_plan_ms: median_of(&mine, |r| r.plans, |r| r.plan_ms_median),
                mean_decision_ms: pooled_mean(&mine, |r| r.decisions, |r| r.decision_ms_mean),
                median_decision_ms: median_of(&mine, |r| r.decisions, |r| r.decision_ms_median),
            }
        })
        .collect();
    AggregateReport { algorithms }
}

/// Paired one-sided sign test of "`a` is lower than `b`".
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Pairs with `a < b`.
    pub wins: u32,
    pub losses: u32,
    pub ties: u32,
    /// `P(W ≥ wins)` for `W ~ Bin(wins + losses, ½)`; ties are dropped.
    pub p_value: f64,
}

pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    assert_eq!(a.len(), b.len(), "sign test needs paired samples");
    let (mut wins, mut losses, mut ties) = (0u32, 0u32, 0u32);
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Less) => wins += 1,
            Some(std::cmp::Ordering::Greater) => losses += 1,
            _ => ties += 1,
        }
    }
    let n = (wins + losses) as u64;
    let p_value = if n == 0 || wins == 0 {
        1.0
    } else {
        let bin = Binomial::new(0.5, n).expect("valid binomial");
        bin.sf(wins as u64 - 1)
    };
    SignTest {
        wins,
        losses,
        ties,
        p_value,
    }
}

/// Per-episode costs of `algorithm`, ordered by episode.
pub fn costs_of(rows: &[EpisodeRow], algorithm: &str) -> Vec<(u64, f64)> {
    let mut v: Vec<(u32, u64, f64)> = rows
        .iter()
        .filter(|r| r.algorithm == algorithm)
        .map(|r| (r.episode, r.seed, r.cost))
        .collect();
    v.sort_by_key(|x| x.0);
    v.into_iter().map(|(_, s, c)| (s, c)).collect()
}

/// Sign test of `a` against `b` over the episodes both ran; refuses unpaired
/// data.
pub fn paired_sign_test(rows: &[EpisodeRow], a: &str, b: &str) -> Result<SignTest, CompareError> {
    let (x, y) = (costs_of(rows, a), costs_of(rows, b));
    if x.iter().map(|p| p.0).ne(y.iter().map(|p| p.0)) {
        return Err(CompareError::Seeds(format!("{a} vs {b}")));
    }
    let xa: Vec<f64> = x.iter().map(|p| p.1).collect();
    let ya: Vec<f64> = y.iter().map(|p| p.1).collect();
    Ok(sign_test(&xa, &ya))
}

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("episode seeds differ: {0}")]
    Seeds(String),
    #[error("algorithm {0} is missing from one of the sets")]
    Missing(String),
}

/// One row of the robustness table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetComparison {
    pub algorithm: String,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `(mean_a − mean_b) / mean_a`: positive when `b` is cheaper.
    pub relative_decrease: f64,
}

/// Relative mean-cost change per algorithm between two sets run on the same
/// seeds.
pub fn compare_sets(a: &[EpisodeRow], b: &[EpisodeRow]) -> Result<Vec<SetComparison>, CompareError> {
    let names = algorithms(a);
    if algorithms(b).iter().any(|n| !names.contains(n)) {
        let extra = algorithms(b).into_iter().find(|n| !names.contains(n)).unwrap_or_default();
        return Err(CompareError::Missing(extra));
    }
    names
        .into_iter()
        .map(|name| {
            let (x, y) = (costs_of(a, &name), costs_of(b, &name));
            if y.is_empty() {
                return Err(CompareError::Missing(name));
            }
            if x.iter().map(|p| p.0).ne(y.iter().map(|p| p.0)) {
                return Err(CompareError::Seeds(name));
            }
            let mean = |v: &[(u64, f64)]| v.iter().map(|p| p.1).sum::<f64>() / v.len() as f64;
            let (mean_a, mean_b) = (mean(&x), mean(&y));
            Ok(SetComparison {
                algorithm: name,
                mean_a,
                mean_b,
                relative_decrease: (mean_a - mean_b) / mean_a,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_by_hand() {
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // s² = 5/3, se = √(5/12).
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_stderr(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn sign_test_tails() {
        // 6 wins of 6: 1/64.
        let t = sign_test(&[0.0; 6], &[1.0; 6]);
        assert_eq!((t.wins, t.losses, t.ties), (6, 0, 0));
        assert!((t.p_value - 1.0 / 64.0).abs() < 1e-12);
        // 3 wins, 1 loss, 1 tie: P(W ≥ 3 | n = 4) = 5/16.
        let t = sign_test(&[0.0, 0.0, 0.0, 2.0, 1.0], &[1.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(t.ties, 1);
        assert!((t.p_value - 5.0 / 16.0).abs() < 1e-12);
        assert_eq!(sign_test(&[1.0], &[1.0]).p_value, 1.0);
    }
}
