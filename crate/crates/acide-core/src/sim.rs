//! Event-level replay of the two-phase package distribution.
//!
//! Event times are computed in closed form. Phase 1 sends block `i` from the
//! base station to peer `i` at rate `bw_i`, all starting at zero. Phase 2
//! begins once the last Phase 1 transfer lands and runs the circulant
//! schedule in barrier-synchronised steps. Each step lasts
//! `max_i s_i / u_i`, and block `i` always travels at its owner's upload
//! rate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::model::StreamParams;
use crate::schedule::build_schedule;
use crate::solver::AllocationPlan;
use crate::tolerance::approx_le;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Endpoint {
    BaseStation,
    Peer(String),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::BaseStation => f.write_str("base"),
            Endpoint::Peer(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TransferEvent {
    /// 1 for base station delivery, 2 for peer exchange.
    pub phase: u8,
    /// 0 in Phase 1, `1..n` in Phase 2.
    pub step: usize,
    pub sender: Endpoint,
    pub receiver: String,
    /// Sorted position of the peer the block was cut for.
    #[cfg_attr(feature = "serde", serde(rename = "block"))]
    pub block_index: usize,
    #[cfg_attr(feature = "serde", serde(rename = "bits"))]
    pub size: f64,
    #[cfg_attr(feature = "serde", serde(rename = "start_s"))]
    pub start_time: f64,
    #[cfg_attr(feature = "serde", serde(rename = "end_s"))]
    pub end_time: f64,
    #[cfg_attr(feature = "serde", serde(rename = "rate_bps"))]
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SimulationTrace {
    pub plan: AllocationPlan,
    pub events: Vec<TransferEvent>,
    /// Per sorted peer: time at which it holds every block.
    #[cfg_attr(feature = "serde", serde(rename = "completion_times_s"))]
    pub completion_times: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "makespan_s"))]
    pub makespan: f64,
}

impl SimulationTrace {
    /// Rebuilds completion times and makespan from an event list.
    pub fn from_events(plan: AllocationPlan, events: Vec<TransferEvent>) -> Self {
        let mut completion_times = alloc::vec![0.0f64; plan.len()];
        for e in &events {
            if let Some(pos) = plan.peers.iter().position(|p| p.id == e.receiver) {
                completion_times[pos] = completion_times[pos].max(e.end_time);
            }
        }
        let makespan = completion_times.iter().cloned().fold(0.0, f64::max);
        SimulationTrace {
            plan,
            events,
            completion_times,
            makespan,
        }
    }

    /// Block indices received by the peer at sorted position `pos`, in arrival order.
    pub fn blocks_received(&self, pos: usize) -> Vec<usize> {
        let id = &self.plan.peers[pos].id;
        self.events
            .iter()
            .filter(|e| &e.receiver == id)
            .map(|e| e.block_index)
            .collect()
    }
}

fn check_plan(plan: &AllocationPlan) -> Result<()> {
    let n = plan.len();
    if n == 0 {
        return Err(Error::PlanMismatch("no peers"));
    }
    if plan.block_sizes.len() != n || plan.peer_bandwidths.len() != n {
        return Err(Error::PlanMismatch(
            "per-peer vectors differ in length from the peer list",
        ));
    }
    let positive = |x: &f64| x.is_finite() && *x > 0.0;
    if !plan.block_sizes.iter().all(positive) {
        return Err(Error::PlanMismatch("block sizes must be positive"));
    }
    if !plan.peer_bandwidths.iter().all(positive) {
        return Err(Error::PlanMismatch("peer bandwidths must be positive"));
    }
    if !plan.peers.iter().map(|p| p.upload).all(|u| positive(&u)) {
        return Err(Error::PlanMismatch("peer uploads must be positive"));
    }
    Ok(())
}

pub fn simulate(plan: &AllocationPlan) -> Result<SimulationTrace> {
    check_plan(plan)?;
    let n = plan.len();
    let mut events = Vec::with_capacity(n * n);

    for (i, peer) in plan.peers.iter().enumerate() {
        let (size, rate) = (plan.block_sizes[i], plan.peer_bandwidths[i]);
        events.push(TransferEvent {
            phase: 1,
            step: 0,
            sender: Endpoint::BaseStation,
            receiver: peer.id.clone(),
            block_index: i,
            size,
            start_time: 0.0,
            end_time: size / rate,
            rate,
        });
    }

    let phase2_start = events.iter().map(|e| e.end_time).fold(0.0, f64::max);
    let step_time = plan
        .block_sizes
        .iter()
        .zip(&plan.peers)
        .map(|(s, p)| s / p.upload)
        .fold(0.0, f64::max);

    for t in build_schedule(n) {
        let start = phase2_start + (t.step - 1) as f64 * step_time;
        let sender = &plan.peers[t.sender];
        let size = plan.block_sizes[t.sender];
        events.push(TransferEvent {
            phase: 2,
            step: t.step,
            sender: Endpoint::Peer(sender.id.clone()),
            receiver: plan.peers[t.receiver].id.clone(),
            block_index: t.sender,
            size,
            start_time: start,
            end_time: start + size / sender.upload,
            rate: sender.upload,
        });
    }

    Ok(SimulationTrace::from_events(plan.clone(), events))
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlaybackReport {
    /// Every peer held the whole package in time; `slack = T - makespan`.
    Continuous { slack: f64 },
    /// The latest peer and by how much it missed the delay bound.
    Violation {
        peer: String,
        completion: f64,
        overshoot: f64,
    },
}

impl PlaybackReport {
    pub fn is_continuous(&self) -> bool {
        matches!(self, PlaybackReport::Continuous { .. })
    }
}

pub fn playback_check(trace: &SimulationTrace, params: &StreamParams) -> PlaybackReport {
    let deadline = params.delay_bound;
    let worst = trace.completion_times.iter().enumerate().fold(
        None,
        |acc: Option<(usize, f64)>, (i, &c)| match acc {
            Some((_, best)) if best >= c => acc,
            _ => Some((i, c)),
        },
    );
    match worst {
        Some((i, completion)) if !approx_le(completion, deadline) => PlaybackReport::Violation {
            peer: trace.plan.peers[i].id.clone(),
            completion,
            overshoot: completion - deadline,
        },
        _ => PlaybackReport::Continuous {
            slack: deadline - trace.makespan,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PeerProfile;
    use crate::solver::min_bandwidth;
    use crate::tolerance::relative_error;
    use alloc::format;
    use proptest::prelude::*;

    fn plan_for(uploads: &[f64], v: f64) -> AllocationPlan {
        let peers: Vec<_> = uploads
            .iter()
            .enumerate()
            .map(|(i, &u)| PeerProfile::new(format!("p{i}"), u, 1e7).unwrap())
            .collect();
        min_bandwidth(&peers, &StreamParams::from_livestream(v, 0.2).unwrap()).unwrap()
    }

    #[test]
    fn three_peer_trace_meets_deadline() {
        let plan = plan_for(&[10000.0, 15000.0, 20000.0], 10000.0);
        let trace = simulate(&plan).unwrap();
        assert_eq!(trace.events.len(), 9);

        let step = 2000.0 / 45000.0;
        let phase2: Vec<_> = trace.events.iter().filter(|e| e.phase == 2).collect();
        for e in &phase2 {
            assert!(relative_error(e.end_time - e.start_time, step) < 1e-9);
        }
        assert!(relative_error(trace.makespan, 0.2) < 1e-9);
        assert!(relative_error(plan.phase1_time + 2.0 * step, 0.2) < 1e-9);
        assert!(playback_check(&trace, &plan.stream).is_continuous());
    }

    #[test]
    fn single_peer_trace() {
        let plan = plan_for(&[30000.0], 10000.0);
        let trace = simulate(&plan).unwrap();
        assert_eq!(trace.events.len(), 1);
        assert_eq!(trace.events[0].sender, Endpoint::BaseStation);
        assert!(relative_error(trace.makespan, 0.2) < 1e-9);
        assert!(playback_check(&trace, &plan.stream).is_continuous());
    }

    #[test]
    fn enlarged_block_misses_deadline() {
        let mut plan = plan_for(&[10000.0, 15000.0, 20000.0], 10000.0);
        plan.block_sizes[1] *= 1.01;
        let trace = simulate(&plan).unwrap();
        assert!(trace.makespan > 0.2 * (1.0 + 1e-6));
        match playback_check(&trace, &plan.stream) {
            PlaybackReport::Violation { overshoot, .. } => assert!(overshoot > 0.0),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn delayed_step_names_late_peer() {
        let plan = plan_for(&[10000.0, 15000.0, 20000.0], 10000.0);
        let mut events = simulate(&plan).unwrap().events;
        let late = events
            .iter_mut()
            .find(|e| e.phase == 2 && e.step == 2 && e.receiver == "p1")
            .unwrap();
        late.start_time += 0.01;
        late.end_time += 0.01;
        let trace = SimulationTrace::from_events(plan.clone(), events);
        match playback_check(&trace, &plan.stream) {
            PlaybackReport::Violation {
                peer, overshoot, ..
            } => {
                assert_eq!(peer, "p1");
                assert!((overshoot - 0.01).abs() < 1e-9);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_mismatched_plan() {
        let mut plan = plan_for(&[10000.0, 15000.0], 10000.0);
        plan.block_sizes.pop();
        assert!(matches!(simulate(&plan), Err(Error::PlanMismatch(_))));

        let mut plan = plan_for(&[10000.0, 15000.0], 10000.0);
        plan.peer_bandwidths[0] = 0.0;
        assert!(matches!(simulate(&plan), Err(Error::PlanMismatch(_))));
    }

    proptest! {
        #[test]
        fn optimal_plans_finish_exactly_on_time(uploads in prop::collection::vec(10000.0..100000.0f64, 2..=120), v in 1000.0..10000.0f64) {
            let plan = plan_for(&uploads, v);
            let trace = simulate(&plan).unwrap();
            let n = plan.len();
            prop_assert!(relative_error(trace.makespan, 0.2) < 1e-9);

            for e in &trace.events {
                prop_assert!(relative_error(e.end_time - e.start_time, e.size / e.rate) < 1e-9);
                if e.phase == 1 {
                    prop_assert_eq!(e.start_time, 0.0);
                    prop_assert!(relative_error(e.end_time, plan.phase1_time) < 1e-9);
                } else {
                    prop_assert!(e.start_time >= plan.phase1_time * (1.0 - 1e-9));
                }
            }
            for pos in 0..n {
                let mut blocks = trace.blocks_received(pos);
                prop_assert_eq!(blocks[0], pos);
                blocks.sort_unstable();
                prop_assert_eq!(blocks, (0..n).collect::<Vec<_>>());
            }
            prop_assert!(playback_check(&trace, &plan.stream).is_continuous());
        }
    }

    #[test]
    fn one_upload_and_one_download_per_peer_per_step() {
        let plan = plan_for(&[12000.0; 7], 10000.0);
        let trace = simulate(&plan).unwrap();
        for step in 1..7 {
            for p in &plan.peers {
                let ups = trace
                    .events
                    .iter()
                    .filter(|e| e.step == step && e.sender == Endpoint::Peer(p.id.clone()))
                    .count();
                let downs = trace
                    .events
                    .iter()
                    .filter(|e| e.step == step && e.receiver == p.id)
                    .count();
                assert_eq!((ups, downs), (1, 1));
            }
        }
    }
}
