//! Peers, stream parameters and the cluster assumptions the solver relies on.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::tolerance::approx_le;
use crate::{Error, Result};

/// One user's radio capacities, in bits per second.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PeerProfile {
    pub id: String,
    #[cfg_attr(feature = "serde", serde(rename = "upload_bps"))]
    pub upload: f64,
    #[cfg_attr(feature = "serde", serde(rename = "download_bps"))]
    pub download: f64,
}

impl PeerProfile {
    /// Builds a profile with strictly positive, finite bandwidths.
    ///
    /// `upload <= download` is a cluster assumption rather than a type
    /// invariant; [`validate_cluster`] reports peers that break it.
    pub fn new(id: impl Into<String>, upload: f64, download: f64) -> Result<Self> {
        let id = id.into();
        if !(upload.is_finite() && upload > 0.0 && download.is_finite() && download > 0.0) {
            return Err(Error::InvalidPeer {
                id,
                upload,
                download,
            });
        }
        Ok(PeerProfile {
            id,
            upload,
            download,
        })
    }
}

/// Package size `S` (bits) and delay bound `T` (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct StreamParams {
    #[cfg_attr(feature = "serde", serde(rename = "package_bits"))]
    pub package_size: f64,
    #[cfg_attr(feature = "serde", serde(rename = "delay_s"))]
    pub delay_bound: f64,
}

impl StreamParams {
    pub fn new(package_size: f64, delay_bound: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(package_size) && ok(delay_bound)) {
            return Err(Error::InvalidStream {
                package_size,
                delay_bound,
            });
        }
        Ok(StreamParams {
            package_size,
            delay_bound,
        })
    }

    /// Stream parameters for a livestream of `bandwidth` bps: `S = bandwidth * T`.
    pub fn from_livestream(bandwidth: f64, delay_bound: f64) -> Result<Self> {
        Self::new(bandwidth * delay_bound, delay_bound)
    }

    /// `S / T`, the rate needed to serve one consumer. Also the multicast cost.
    pub fn livestream_bandwidth(&self) -> f64 {
        self.package_size / self.delay_bound
    }
}

/// A broken cluster assumption.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyCluster,
    /// A peer uploads faster than it downloads.
    UploadExceedsDownload {
        id: String,
        upload: f64,
        download: f64,
    },
    /// The livestream bandwidth exceeds the summed download capacity.
    LivestreamExceedsDownloadSum {
        livestream: f64,
        download_sum: f64,
    },
    /// Some peer uploads faster than another peer can download.
    UploadExceedsMinDownload {
        max_upload: f64,
        min_download: f64,
    },
    /// The mean upload is below the livestream bandwidth, so the minimum
    /// allocation does not exist.
    MeanUploadBelowLivestream {
        livestream: f64,
        mean_upload: f64,
    },
}

impl Violation {
    /// Short stable code for logs and exit messages.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::EmptyCluster => "empty-cluster",
            Violation::UploadExceedsDownload { .. } => "upload-exceeds-download",
            Violation::LivestreamExceedsDownloadSum { .. } => "livestream-exceeds-download-sum",
            Violation::UploadExceedsMinDownload { .. } => "upload-exceeds-min-download",
            Violation::MeanUploadBelowLivestream { .. } => "mean-upload-below-livestream",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyCluster => write!(f, "cluster has no peers"),
            Violation::UploadExceedsDownload {
                id,
                upload,
                download,
            } => {
                write!(
                    f,
                    "peer {id}: upload {upload} bps exceeds download {download} bps"
                )
            }
            Violation::LivestreamExceedsDownloadSum {
                livestream,
                download_sum,
            } => write!(
                f,
                "livestream bandwidth {livestream} bps exceeds total download {download_sum} bps"
            ),
            Violation::UploadExceedsMinDownload {
                max_upload,
                min_download,
            } => write!(
                f,
                "max upload {max_upload} bps exceeds min download {min_download} bps"
            ),
            Violation::MeanUploadBelowLivestream {
                livestream,
                mean_upload,
            } => write!(
                f,
                "livestream bandwidth {livestream} bps exceeds mean upload {mean_upload} bps"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every cluster assumption and reports all that fail.
pub fn validate_cluster(peers: &[PeerProfile], params: &StreamParams) -> ValidationReport {
    let mut violations = Vec::new();
    if peers.is_empty() {
        violations.push(Violation::EmptyCluster);
        return ValidationReport { violations };
    }

    for p in peers {
        if p.upload > p.download {
            violations.push(Violation::UploadExceedsDownload {
                id: p.id.clone(),
                upload: p.upload,
                download: p.download,
            });
        }
    }

    let livestream = params.livestream_bandwidth();
    let download_sum: f64 = peers.iter().map(|p| p.download).sum();
    // Equality is accepted: a lone peer with d = S/T can still be served.
    if !approx_le(livestream, download_sum) {
        violations.push(Violation::LivestreamExceedsDownloadSum {
            livestream,
            download_sum,
        });
    }

    let max_upload = peers.iter().map(|p| p.upload).fold(f64::MIN, f64::max);
    let min_download = peers.iter().map(|p| p.download).fold(f64::MAX, f64::min);
    if max_upload > min_download {
        violations.push(Violation::UploadExceedsMinDownload {
            max_upload,
            min_download,
        });
    }

    let mean_upload = peers.iter().map(|p| p.upload).sum::<f64>() / peers.len() as f64;
    if !approx_le(livestream, mean_upload) {
        violations.push(Violation::MeanUploadBelowLivestream {
            livestream,
            mean_upload,
        });
    }

    ValidationReport { violations }
}

/// Total order used for every peer list: upload, then download, then id.
pub(crate) fn peer_order(a: &PeerProfile, b: &PeerProfile) -> Ordering {
    a.upload
        .total_cmp(&b.upload)
        .then(a.download.total_cmp(&b.download))
        .then_with(|| a.id.cmp(&b.id))
}

/// Sorts ascending by upload with a deterministic tie-break.
pub fn sort_peers(mut peers: Vec<PeerProfile>) -> Vec<PeerProfile> {
    peers.sort_by(peer_order);
    peers
}
