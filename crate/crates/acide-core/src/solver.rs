//! Minimum base station bandwidth for a cluster.
//!
//! With peers sorted by upload `u_1 <= ... <= u_n`, the optimal block sizes
//! solve the upper triangular system
//!
//! ```text
//! [ 1   1   ...  1       1   ] [s_1]   [S]
//! [ 0   a_2 ...  1       1   ] [s_2]   [S]
//! [ ...                      ] [...] = [S]
//! [ 0   0   ...  a_{n-1} 1   ] [...]   [S]
//! [ 0   0   ...  0       a_n ] [s_n]   [S]
//! ```
//!
//! where `a_k = (u_1 + ... + u_k) / u_k`. The first row is conservation of the
//! package, `sum(s) = S`. The total bandwidth is then
//!
//! ```text
//! bw = S * sum(u) / (T * sum(u) - (n - 1) * S)
//! ```
//!
//! and each peer gets `bw_i = bw * s_i / S`, which makes every Phase 1
//! transfer take the same time `T1 = T - T2` with `T2 = (n - 1) * S / sum(u)`.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::model::{sort_peers, PeerProfile, StreamParams};
use crate::{Error, Result};

/// `a_2 .. a_n`; empty for a single peer.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCoefficients(Vec<f64>);

impl AlphaCoefficients {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Coefficient of the 1-based row `k`, for `k >= 2`.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(2).and_then(|i| self.0.get(i).copied())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Solved allocation for one cluster.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AllocationPlan {
    /// Peers ascending by upload; every per-peer vector follows this order.
    pub peers: Vec<PeerProfile>,
    pub stream: StreamParams,
    #[cfg_attr(feature = "serde", serde(rename = "block_sizes_bits"))]
    pub block_sizes: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "peer_bandwidths_bps"))]
    pub peer_bandwidths: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "total_bandwidth_bps"))]
    pub total_bandwidth: f64,
    #[cfg_attr(feature = "serde", serde(rename = "phase1_s"))]
    pub phase1_time: f64,
    #[cfg_attr(feature = "serde", serde(rename = "phase2_s"))]
    pub phase2_time: f64,
}

impl AllocationPlan {
    pub fn len(&self) -> usize {
        self.peers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peers.is_empty()
    }

    pub fn upload_sum(&self) -> f64 {
        self.peers.iter().map(|p| p.upload).sum()
    }
}

fn check_uploads(peers: &[PeerProfile]) -> Result<()> {
    if peers.is_empty() {
        return Err(Error::EmptyCluster);
    }
    if let Some(p) = peers
        .iter()
        .find(|p| !(p.upload.is_finite() && p.upload > 0.0))
    {
        return Err(Error::InvalidPeer {
            id: p.id.clone(),
            upload: p.upload,
            download: p.download,
        });
    }
    Ok(())
}

pub fn alpha_coefficients(sorted_peers: &[PeerProfile]) -> Result<AlphaCoefficients> {
    check_uploads(sorted_peers)?;
    let mut prefix = sorted_peers[0].upload;
    let values = sorted_peers[1..]
        .iter()
        .map(|p| {
            prefix += p.upload;
            prefix / p.upload
        })
        .collect();
    Ok(AlphaCoefficients(values))
}

/// Back-substitutes the triangular system for the block sizes, in peer order.
///
/// Runs in linear time by carrying the suffix sum of already solved sizes.
pub fn solve_block_sizes(sorted_peers: &[PeerProfile], params: &StreamParams) -> Result<Vec<f64>> {
    let alpha = alpha_coefficients(sorted_peers)?;
    let n = sorted_peers.len();
    let package = params.package_size;

    let mut sizes = alloc::vec![0.0; n];
    let mut suffix = 0.0;
    for k in (1..n).rev() {
        let s = (package - suffix) / alpha.0[k - 1];
        sizes[k] = s;
        suffix += s;
    }
    sizes[0] = package - suffix;
    Ok(sizes)
}

/// Closed-form minimum total bandwidth, or [`Error::Infeasible`] when the
/// denominator `T * sum(u) - (n - 1) * S` is not positive.
pub fn allocated_bandwidth(sorted_peers: &[PeerProfile], params: &StreamParams) -> Result<f64> {
    check_uploads(sorted_peers)?;
    let n = sorted_peers.len();
    let upload_sum: f64 = sorted_peers.iter().map(|p| p.upload).sum();
    let denom = params.delay_bound * upload_sum - (n - 1) as f64 * params.package_size;
    if denom <= 0.0 {
        return Err(Error::Infeasible { n, upload_sum });
    }
    Ok(params.package_size * upload_sum / denom)
}

/// Sorts the peers and solves the full allocation.
///
/// Only a positive denominator is required here. Callers that also want
/// `bw_i <= u_i` for every peer should check the mean-upload condition with
/// [`crate::validate_cluster`] first.
pub fn min_bandwidth(peers: &[PeerProfile], params: &StreamParams) -> Result<AllocationPlan> {
    let peers = sort_peers(peers.to_vec());
    let block_sizes = solve_block_sizes(&peers, params)?;
    let total_bandwidth = allocated_bandwidth(&peers, params)?;

    let n = peers.len();
    let upload_sum: f64 = peers.iter().map(|p| p.upload).sum();
    let phase2_time = (n - 1) as f64 * params.package_size / upload_sum;
    let phase1_time = params.delay_bound - phase2_time;

    let per_bit = total_bandwidth / params.package_size;
    let peer_bandwidths = block_sizes.iter().map(|s| s * per_bit).collect();

    Ok(AllocationPlan {
        peers,
        stream: *params,
        block_sizes,
        peer_bandwidths,
        total_bandwidth,
        phase1_time,
        phase2_time,
    })
}
