//! Admission control under a bandwidth budget reserved ahead of time.
//!
//! [`join_cluster`] drops the slowest uploader until the remaining cluster's
//! minimum bandwidth fits the budget. For a fixed cluster size the minimum
//! bandwidth only falls as the summed upload grows, so the top-`m` uploaders
//! are always the cheapest `m`-peer cluster and the greedy scan lands on the
//! largest admissible size. [`brute_force_admission`] checks this by
//! enumerating every subset of small candidate pools.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::model::{peer_order, sort_peers, PeerProfile, StreamParams};
use crate::solver::{allocated_bandwidth, min_bandwidth, AllocationPlan};
use crate::tolerance::approx_le;
use crate::{Error, Result};

/// Largest pool [`brute_force_admission`] will enumerate.
pub const MAX_EXHAUSTIVE_CANDIDATES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionBudget {
    /// Bandwidth the base station reserved for the cluster, in bps.
    pub budget: f64,
    pub candidates: Vec<PeerProfile>,
    pub stream: StreamParams,
}

impl AdmissionBudget {
    pub fn new(budget: f64, candidates: Vec<PeerProfile>, stream: StreamParams) -> Result<Self> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidBudget { budget });
        }
        if candidates.is_empty() {
            return Err(Error::EmptyCluster);
        }
        Ok(AdmissionBudget {
            budget,
            candidates,
            stream,
        })
    }

    fn check_floor(&self) -> Result<()> {
        let livestream = self.stream.livestream_bandwidth();
        if !approx_le(livestream, self.budget) {
            return Err(Error::InsufficientBudget {
                budget: self.budget,
                livestream,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AdmissionOutcome {
    pub admitted: Vec<PeerProfile>,
    pub rejected: Vec<PeerProfile>,
    pub plan: AllocationPlan,
    #[cfg_attr(feature = "serde", serde(rename = "budget_bps"))]
    pub budget: f64,
    /// `bw / BW`, in `(0, 1]`.
    pub efficiency: f64,
    /// Candidates removed before the cluster fit the budget.
    pub removals: usize,
}

impl AdmissionOutcome {
    fn new(
        admitted: Vec<PeerProfile>,
        rejected: Vec<PeerProfile>,
        stream: &StreamParams,
        budget: f64,
        removals: usize,
    ) -> Result<Self> {
        let plan = min_bandwidth(&admitted, stream)?;
        // Within-tolerance overshoot only happens at BW == bw; report it as 1.
        let efficiency = (plan.total_bandwidth / budget).min(1.0);
        Ok(AdmissionOutcome {
            admitted: plan.peers.clone(),
            rejected,
            plan,
            budget,
            efficiency,
            removals,
        })
    }

    pub fn admitted_count(&self) -> usize {
        self.admitted.len()
    }
}

/// Cost of a cluster, with an infeasible allocation counted as unbounded.
fn cost(peers: &[PeerProfile], stream: &StreamParams) -> Result<f64> {
    match allocated_bandwidth(peers, stream) {
        Ok(bw) => Ok(bw),
        Err(Error::Infeasible { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Greedy admission: sort by upload, then remove the lowest uploader while
/// the cluster's minimum bandwidth exceeds the budget.
pub fn join_cluster(budget: &AdmissionBudget) -> Result<AdmissionOutcome> {
    budget.check_floor()?;
    let sorted = sort_peers(budget.candidates.clone());

    let mut start = 0;
    let mut bw = cost(&sorted, &budget.stream)?;
    while !approx_le(bw, budget.budget) {
        start += 1;
        // The last peer alone costs S/T, which the floor check already cleared.
        debug_assert!(start < sorted.len());
        bw = cost(&sorted[start..], &budget.stream)?;
    }

    let rejected = sorted[..start].to_vec();
    AdmissionOutcome::new(
        sorted[start..].to_vec(),
        rejected,
        &budget.stream,
        budget.budget,
        start,
    )
}

/// Upper bound on the number of admitted peers for a cluster costing `bw`:
/// `1 + sum(u) / (S/T) - sum(u) / bw`, summed over every candidate.
///
/// Callers floor the result for an integer bound.
pub fn admitted_upper_bound(
    candidates: &[PeerProfile],
    stream: &StreamParams,
    bw: f64,
) -> Result<f64> {
    let livestream = stream.livestream_bandwidth();
    if !approx_le(livestream, bw) {
        return Err(Error::BelowLivestream {
            bandwidth: bw,
            livestream,
        });
    }
    let upload_sum: f64 = candidates.iter().map(|p| p.upload).sum();
    Ok(1.0 + upload_sum / livestream - upload_sum / bw)
}

/// Exhaustive admission over all `2^N - 1` non-empty subsets.
///
/// Keeps the largest admissible subset; ties go to the lower bandwidth, then
/// to the lexicographically smaller sorted id list.
pub fn brute_force_admission(budget: &AdmissionBudget) -> Result<AdmissionOutcome> {
    let n = budget.candidates.len();
    if n > MAX_EXHAUSTIVE_CANDIDATES {
        return Err(Error::TooManyCandidates {
            n,
            max: MAX_EXHAUSTIVE_CANDIDATES,
        });
    }
    budget.check_floor()?;

    let mut best: Option<(u32, f64, Vec<PeerProfile>)> = None;
    let mut subset = Vec::with_capacity(n);
    for mask in 1u32..(1 << n) {
        subset.clear();
        subset.extend(
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| budget.candidates[i].clone()),
        );
        subset.sort_by(peer_order);
        let bw = cost(&subset, &budget.stream)?;
        if !approx_le(bw, budget.budget) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((best_mask, best_bw, best_peers)) => {
                let (size, best_size) = (mask.count_ones(), best_mask.count_ones());
                size > best_size
                    || (size == best_size
                        && (bw < *best_bw
                            || (bw == *best_bw
                                && subset
                                    .iter()
                                    .map(|p| &p.id)
                                    .lt(best_peers.iter().map(|p| &p.id)))))
            }
        };
        if better {
            best = Some((mask, bw, subset.clone()));
        }
    }

    let Some((mask, _, admitted)) = best else {
        return Err(Error::InsufficientBudget {
            budget: budget.budget,
            livestream: budget.stream.livestream_bandwidth(),
        });
    };
    let rejected = sort_peers(
        (0..n)
            .filter(|i| mask & (1 << i) == 0)
            .map(|i| budget.candidates[i].clone())
            .collect(),
    );
    let removals = rejected.len();
    AdmissionOutcome::new(admitted, rejected, &budget.stream, budget.budget, removals)
}
