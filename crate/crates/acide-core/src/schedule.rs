//! Phase 2 pairing.
//!
//! Circulant schedule: at step `t` (1-based) the peer at sorted position `i`
//! sends its own block to position `(i + t) mod n`. Every step is a
//! permutation without fixed points, and over `n - 1` steps each ordered pair
//! of distinct peers appears exactly once.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledTransfer {
    /// 1-based step number.
    pub step: usize,
    /// 0-based sorted positions.
    pub sender: usize,
    pub receiver: usize,
}

pub fn build_schedule(n: usize) -> Vec<ScheduledTransfer> {
    (1..n)
        .flat_map(|step| {
            (0..n).map(move |sender| ScheduledTransfer {
                step,
                sender,
                receiver: (sender + step) % n,
            })
        })
        .collect()
}
