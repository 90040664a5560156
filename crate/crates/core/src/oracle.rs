//! Exhaustive-enumeration checks for small discrete instances.

use crate::error::LocalError;
use crate::local::DiscreteMdp;

/// Split of a fixed policy's `k`-step cost into the probability of reaching
/// the target and the expected stage cost accumulated along the way.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyDecomposition {
    /// `ρ_π(c)`.
    pub reach_prob: f64,
    /// `Ĵ^k(c | π)`, stage costs only, zero terminal cost.
    pub bare_cost: f64,
}

impl PolicyDecomposition {
    /// `Ĵ + (1 − ρ) φ`.
    pub fn total(&self, phi: f64) -> f64 {
        self.bare_cost + (1.0 - self.reach_prob) * phi
    }
}

pub const MAX_ORACLE_STATES: usize = 6;
pub const MAX_ORACLE_DEPTH: u32 = 5;

/// Enumerates every `k`-step trajectory of `policy` from `start`. The target is
/// absorbing; a trajectory that enters it stops accruing cost.
pub fn decompose_policy_value(
    mdp: &DiscreteMdp,
    policy: &[usize],
    start: usize,
    k: u32,
) -> Result<PolicyDecomposition, LocalError> {
    if mdp.num_states() > MAX_ORACLE_STATES {
        return Err(LocalError::TooLarge("more than 6 states"));
    }
    if k > MAX_ORACLE_DEPTH {
        return Err(LocalError::TooLarge("depth above 5"));
    }
    if policy.len() != mdp.num_states() || start >= mdp.num_states() {
        return Err(LocalError::Config("policy/state mismatch".into()));
    }
    let mut out = PolicyDecomposition {
        reach_prob: 0.0,
        bare_cost: 0.0,
    };
    walk(mdp, policy, start, k, 1.0, 0.0, &mut out);
    Ok(out)
}

fn walk(mdp: &DiscreteMdp, policy: &[usize], s: usize, left: u32, prob: f64, acc: f64, out: &mut PolicyDecomposition) {
    if s == mdp.target {
        out.reach_prob += prob;
        out.bare_cost += prob * acc;
        return;
    }
    if left == 0 {
        out.bare_cost += prob * acc;
        return;
    }
    let a = policy[s];
    let c = mdp.cost[s][a];
    for &(to, p) in &mdp.trans[s][a] {
        if p > 0.0 {
            walk(mdp, policy, to, left - 1, prob * p, acc + c, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn deterministic_reach() {
        let mdp = DiscreteMdp::chain(3, 0.0);
        let d = decompose_policy_value(&mdp, &[1, 1, 1], 0, 2).unwrap();
        assert_eq!(d, PolicyDecomposition { reach_prob: 1.0, bare_cost: 2.0 });
        let never = decompose_policy_value(&mdp, &[0, 0, 0], 0, 3).unwrap();
        assert_eq!(never.reach_prob, 0.0);
        assert_eq!(never.total(5.0), 3.0 + 5.0);
    }

    #[test]
    fn refuses_large_instances() {
        let mdp = DiscreteMdp::chain(7, 0.0);
        assert!(decompose_policy_value(&mdp, &vec![0; 7], 0, 2).is_err());
        let mdp = DiscreteMdp::chain(3, 0.0);
        assert!(decompose_policy_value(&mdp, &[0; 3], 0, 6).is_err());
    }
}
